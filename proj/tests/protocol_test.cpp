// Copyright 2026 The tubargain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "tubargain/error.hpp"
#include "tubargain/geometry.hpp"
#include "tubargain/graphs.hpp"
#include "tubargain/protocol.hpp"
#include "tubargain/stochastic.hpp"

namespace tubargain {
namespace {

using fixtures::Game3;
using fixtures::Vec;

double Gap(const Vector& a, const Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

AllocationState Corners() { return {0, CornerAllocations(3, 10.0)}; }

ValueStream CoinStream(std::uint32_t run) {
  return [stream = SeededStream(
              RobustCoinflipProcess{fixtures::ScenarioBounds(false), 0.5},
              {1, run})](std::uint64_t t) { return stream.Draw(t); };
}

TEST_CASE("mode names") {
  CHECK(ParseMode("robust") == Mode::kRobust);
  CHECK(ParseMode("average") == Mode::kAverage);
  CHECK(ModeName(Mode::kAverage) == "average");
  CHECK_THROWS_AS(ParseMode("mean"), Error);
}

TEST_CASE("mean proposal and disagreement") {
  const auto x = CornerAllocations(3, 10.0);
  CHECK(Gap(MeanProposal(x), Vec({10.0 / 3, 10.0 / 3, 10.0 / 3})) < 1e-14);
  CHECK(Disagreement(x) ==
        doctest::Approx((Vec({10, 0, 0}) - Vec({10.0 / 3, 10.0 / 3, 10.0 / 3})).norm()));
  CHECK(Disagreement({Vec({1, 2}), Vec({1, 2})}) == 0.0);
}

// Replays the worked robust trace. Each call passes the game that the
// printed allocation was projected with.
TEST_CASE("robust stepper reproduces the worked trace") {
  const auto sched = ThreePlayerCycleSchedule();
  const auto v0 = Game3({6.8, 2.7, 0, 0, 0, 0, 10});
  const auto v1 = fixtures::VMaxI();
  const auto v2 = Game3({4.4, 1.1, 0, 0, 0, 0, 10});
  const auto v3 = fixtures::VMaxI();

  auto [s1, r0] = StepRobust(Corners(), v0, sched.weights(0));
  CHECK(s1.t == 1);
  CHECK(Gap(s1.proposals[0], Vec({10, 0, 0})) < 1e-12);
  CHECK(Gap(s1.proposals[1], Vec({0, 5, 5})) < 1e-12);
  CHECK(Gap(s1.proposals[2], Vec({0, 5, 5})) < 1e-12);
  for (const Vector& e : r0.errors) CHECK(e.norm() < 1e-12);

  auto [s2, r1] = StepRobust(s1, v2, sched.weights(1));
  CHECK(Gap(s2.proposals[0], Vec({5, 2.5, 2.5})) < 1e-12);
  CHECK(Gap(s2.proposals[1], Vec({0, 5, 5})) < 1e-12);
  CHECK(Gap(s2.proposals[2], Vec({5, 2.5, 2.5})) < 1e-12);

  auto [s3, r2] = StepRobust(s2, v3, sched.weights(2));
  CHECK(Gap(r2.mixed[0], Vec({2.5, 3.75, 3.75})) < 1e-12);
  CHECK(Gap(s3.proposals[0], Vec({7, 1.5, 1.5})) <= 1e-10);
  CHECK(Gap(s3.proposals[1], Vec({2.5, 3.75, 3.75})) < 1e-12);
  CHECK(Gap(s3.proposals[2], Vec({5, 2.5, 2.5})) < 1e-12);
  CHECK(Gap(r2.errors[0], Vec({4.5, -2.25, -2.25})) < 1e-10);
  CHECK(Gap(r2.mean, MeanProposal(s3.proposals)) < 1e-14);
  (void)v1;
}

TEST_CASE("average stepper reproduces the worked projection") {
  const auto sched = ThreePlayerCycleSchedule();
  const AllocationState s2{2, {Vec({5, 2.5, 2.5}), Vec({0, 5, 5}),
                               Vec({5, 2.5, 2.5})}};
  const auto v_bar3 = Game3({4.7, 1.8, 0, 0, 0, 0, 10});
  auto [s3, rec] = StepAverage(s2, v_bar3, sched.weights(2));
  CHECK(Gap(s3.proposals[0], Vec({4.7, 2.65, 2.65})) < 1e-10);
  CHECK(Gap(s3.proposals[1], Vec({2.5, 3.75, 3.75})) < 1e-12);
  CHECK(rec.game == std::vector<double>(v_bar3.values().begin(),
                                        v_bar3.values().end()));
}

TEST_CASE("agreement inside every bounding set is a fixed point") {
  const auto z = Vec({7, 3, 0});
  const AllocationState s{5, {z, z, z}};
  auto [next, rec] =
      StepRobust(s, fixtures::VMaxI(), ThreePlayerCycleSchedule().weights(5));
  for (int i = 0; i < 3; ++i) {
    CHECK(Gap(next.proposals[i], z) == 0.0);
    CHECK(rec.errors[i].norm() == 0.0);
  }
  CHECK(rec.disagreement == 0.0);
  CHECK(rec.core_distance[0] == 0.0);
}

TEST_CASE("a one-step run matches one stepper call") {
  const auto stream = CoinStream(0);
  const auto trace = Run(Mode::kRobust, stream, ThreePlayerCycleSchedule(),
                         CornerAllocations(3, 10), 1);
  REQUIRE(trace.steps.size() == 1);
  auto [s1, rec] = StepRobust(Corners(), stream(0),
                              ThreePlayerCycleSchedule().weights(0));
  for (int i = 0; i < 3; ++i) {
    CHECK(Gap(trace.steps[0].proposals[i], s1.proposals[i]) == 0.0);
  }
  CHECK(trace.ProposalsAt(1)[1] == s1.proposals[1]);
  CHECK(trace.ProposalsAt(0)[2] == Vec({0, 0, 10}));
}

TEST_CASE("robust runs converge to the singleton core with Lyapunov descent") {
  const Vector z = Vec({7, 3, 0});
  for (std::uint32_t run = 0; run < 10; ++run) {
    CAPTURE(run);
    const auto trace = Run(Mode::kRobust, CoinStream(run),
                           ThreePlayerCycleSchedule(), CornerAllocations(3, 10),
                           100);
    const auto v = LyapunovSeries(trace, z);
    REQUIRE(v.size() == 101);
    double err_total = 0.0;
    for (std::size_t t = 0; t < 100; ++t) {
      double e2 = 0.0;
      for (const Vector& e : trace.steps[t].errors) e2 += e.squaredNorm();
      CHECK(v[t + 1] <= v[t] - e2 + 1e-8);
      err_total += e2;
    }
    CHECK(err_total <= v[0] + 1e-8);
    CHECK(Gap(trace.steps.back().mean, z) <= 1e-2);
    CHECK(trace.steps.back().disagreement <= 1e-2);
    for (const StepRecord& rec : trace.steps) {
      CHECK(std::abs(rec.mean.sum() - 10.0) < 1e-9);
    }
  }
}

TEST_CASE("disagreement vanishes on longer horizons") {
  const auto bounds = fixtures::ScenarioBounds(false);
  for (std::uint32_t run = 0; run < 5; ++run) {
    const auto robust = Run(Mode::kRobust, CoinStream(run),
                            ThreePlayerCycleSchedule(),
                            CornerAllocations(3, 10), 300);
    CHECK(robust.steps.back().disagreement <= 1e-6);
    const SeededStream s(UniformProcess{bounds}, {1, run});
    const auto average = Run(
        Mode::kAverage, [&](std::uint64_t t) { return s.Draw(t); },
        ThreePlayerCycleSchedule(), CornerAllocations(3, 10), 600);
    CHECK(average.steps.back().disagreement <= 1e-6);
    CHECK(average.steps[99].disagreement >= average.steps.back().disagreement);
  }
}

TEST_CASE("Lyapunov series is zero at the target") {
  const Vector z = Vec({7, 3, 0});
  const auto trace = Run(
      Mode::kRobust, [](std::uint64_t) { return fixtures::VMaxI(); },
      ThreePlayerCycleSchedule(), {z, z, z}, 10);
  for (double v : LyapunovSeries(trace, z)) CHECK(v == 0.0);
  REQUIRE(trace.converged_at);
  CHECK(*trace.converged_at == 1);
}

TEST_CASE("average runs use the running mean game") {
  const auto bounds = fixtures::ScenarioBounds(false);
  const SeededStream stream(UniformProcess{bounds}, {1, 0});
  auto values = [&](std::uint64_t t) { return stream.Draw(t); };
  const auto trace = Run(Mode::kAverage, values, ThreePlayerCycleSchedule(),
                         CornerAllocations(3, 10), 100);
  // Record t carries v̄(t), the mean of v(0..t).
  for (std::size_t t : {0u, 1u, 17u, 99u}) {
    std::vector<double> direct(7, 0.0);
    for (std::size_t k = 0; k <= t; ++k) {
      const auto v = stream.Draw(k);
      for (int c = 0; c < 7; ++c) direct[c] += v.values()[c];
    }
    for (int c = 0; c < 7; ++c) {
      CHECK(trace.steps[t].game[c] ==
            doctest::Approx(direct[c] / (t + 1)).epsilon(1e-12));
    }
  }
  const auto v_mean = fixtures::VMeanI();
  const auto& last = trace.steps.back().game;
  for (int c = 0; c < 7; ++c) {
    CHECK(std::abs(last[c] - v_mean.values()[c]) <= 1.0);
  }
  // The limit tracks the core of the game it is projected with.
  const CharacteristicFunction v_bar(3, last);
  CHECK(DistanceTo(trace.steps.back().mean, CoreConstraints(v_bar)) < 0.1);
}

TEST_CASE("grand value drift is rejected") {
  auto drifting = [](std::uint64_t t) {
    return Game3({0, 0, 0, 0, 0, 0, t < 3 ? 10.0 : 10.5});
  };
  for (Mode m : {Mode::kRobust, Mode::kAverage}) {
    try {
      Run(m, drifting, ThreePlayerCycleSchedule(), CornerAllocations(3, 10), 10);
      FAIL("expected drift error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kAssumptionViolation);
    }
  }
}

TEST_CASE("run argument checks") {
  auto v = [](std::uint64_t) { return fixtures::VMaxI(); };
  CHECK_THROWS_AS(Run(Mode::kRobust, v, ThreePlayerCycleSchedule(),
                      CornerAllocations(2, 10), 5),
                  Error);
  CHECK_THROWS_AS(StepRobust(Corners(), CharacteristicFunction(2, {0, 0, 1}),
                             ThreePlayerCycleSchedule().weights(0)),
                  Error);
}

}  // namespace
}  // namespace tubargain
