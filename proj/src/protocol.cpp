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

#include "tubargain/protocol.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "tubargain/error.hpp"
#include "tubargain/geometry.hpp"

namespace tubargain {
namespace {

constexpr double kGrandDriftTol = 1e-9;
constexpr double kConvergedTol = 1e-6;
constexpr std::size_t kConvergedStreak = 5;

std::string DescribeGame(const CharacteristicFunction& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < v.num_coalitions(); ++k) {
    if (k) os << ' ';
    os << v.values()[k];
  }
  os << ']';
  return os.str();
}

std::pair<AllocationState, StepRecord> Step(const AllocationState& state,
                                            const CharacteristicFunction& v,
                                            const Matrix& a,
                                            const RunOptions& options) {
  const int n = v.num_players();
  if (static_cast<int>(state.proposals.size()) != n || a.rows() != n ||
      a.cols() != n) {
    Fail(ErrorCode::kInvalidArgument,
         "state, game and weight matrix disagree on the player count");
  }
  StepRecord rec;
  rec.t = state.t;
  rec.game.assign(v.values().begin(), v.values().end());
  rec.mixed.resize(n);
  rec.proposals.resize(n);
  rec.errors.resize(n);
  for (int i = 0; i < n; ++i) {
    Vector w = Vector::Zero(n);
    for (int j = 0; j < n; ++j) w += a(i, j) * state.proposals[j];
    rec.mixed[i] = w;
    try {
      rec.proposals[i] = ProjectPolyhedron(w, BoundingSet(i, v)).point;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleSet) throw;
      Fail(ErrorCode::kInfeasibleSet,
           "bounding set of player " + std::to_string(i + 1) +
               " is empty at t=" + std::to_string(state.t) +
               " for v=" + DescribeGame(v));
    }
    rec.errors[i] = rec.proposals[i] - rec.mixed[i];
  }
  rec.mean = MeanProposal(rec.proposals);
  rec.disagreement = Disagreement(rec.proposals);
  rec.core_distance.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (options.core_distances) {
    const PolyhedronSpec core = CoreConstraints(v);
    try {
      for (int i = 0; i < n; ++i) {
        rec.core_distance[i] = DistanceTo(rec.proposals[i], core);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleSet) throw;
    }
  }
  AllocationState next{state.t + 1, rec.proposals};
  return {std::move(next), std::move(rec)};
}

}  // namespace

std::string_view ModeName(Mode mode) {
  return mode == Mode::kRobust ? "robust" : "average";
}

Mode ParseMode(std::string_view name) {
  if (name == "robust") return Mode::kRobust;
  if (name == "average") return Mode::kAverage;
  Fail(ErrorCode::kConfig,
       "unknown mode '" + std::string(name) + "' (expected robust|average)");
}

const std::vector<Vector>& RunTrace::ProposalsAt(std::size_t t) const {
  if (t == 0) return initial.proposals;
  if (t > steps.size()) {
    Fail(ErrorCode::kInvalidArgument, "time index past the end of the trace");
  }
  return steps[t - 1].proposals;
}

Vector MeanProposal(const std::vector<Vector>& proposals) {
  Vector y = Vector::Zero(proposals.front().size());
  for (const Vector& x : proposals) y += x;
  return y / static_cast<double>(proposals.size());
}

double Disagreement(const std::vector<Vector>& proposals) {
  const Vector y = MeanProposal(proposals);
  double d = 0.0;
  for (const Vector& x : proposals) d = std::max(d, (x - y).norm());
  return d;
}

std::vector<Vector> CornerAllocations(int num_players, double total) {
  std::vector<Vector> out;
  for (int i = 0; i < num_players; ++i) {
    Vector x = Vector::Zero(num_players);
    x[i] = total;
    out.push_back(std::move(x));
  }
  return out;
}

std::pair<AllocationState, StepRecord> StepRobust(
    const AllocationState& state, const CharacteristicFunction& v_t,
    const Matrix& a_t, const RunOptions& options) {
  return Step(state, v_t, a_t, options);
}

std::pair<AllocationState, StepRecord> StepAverage(
    const AllocationState& state, const CharacteristicFunction& v_bar_t,
    const Matrix& a_t, const RunOptions& options) {
  return Step(state, v_bar_t, a_t, options);
}

RunTrace Run(Mode mode, const ValueStream& values,
             const GraphSchedule& schedule, std::vector<Vector> initial,
             std::size_t steps, const RunOptions& options) {
  if (steps < 1) Fail(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  const int n = schedule.num_players();
  if (static_cast<int>(initial.size()) != n) {
    Fail(ErrorCode::kInvalidArgument,
         "need one initial proposal per player");
  }
  for (const Vector& x : initial) {
    if (x.size() != n) {
      Fail(ErrorCode::kInvalidArgument, "initial proposal has wrong dimension");
    }
  }

  RunTrace trace;
  trace.mode = mode;
  trace.initial = AllocationState{0, std::move(initial)};
  trace.steps.reserve(steps);

  AllocationState state = trace.initial;
  std::optional<CharacteristicFunction> average;
  double grand = 0.0;
  std::size_t streak = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    const CharacteristicFunction v = values(t);
    if (v.num_players() != n) {
      Fail(ErrorCode::kInvalidArgument,
           "value stream and schedule disagree on the player count");
    }
    if (t == 0) {
      grand = v.grand_value();
    } else if (std::abs(v.grand_value() - grand) > kGrandDriftTol) {
      Fail(ErrorCode::kAssumptionViolation,
           "grand-coalition value drifted from " + std::to_string(grand) +
               " to " + std::to_string(v.grand_value()) +
               " at t=" + std::to_string(t));
    }

    if (mode == Mode::kAverage) {
      average = t == 0 ? v : RunningAverage(*average, t, v);
    }
    const Matrix& a = schedule.weights(t);
    auto out = mode == Mode::kRobust
                   ? StepRobust(state, v, a, options)
                   : StepAverage(state, *average, a, options);
    state = std::move(out.first);

    double err_sum = 0.0;
    for (const Vector& e : out.second.errors) err_sum += e.norm();
    if (out.second.disagreement <= kConvergedTol && err_sum <= kConvergedTol) {
      if (++streak == kConvergedStreak && !trace.converged_at) {
        trace.converged_at = t + 2 - kConvergedStreak;
      }
    } else {
      streak = 0;
    }
    trace.steps.push_back(std::move(out.second));
  }
  return trace;
}

std::vector<double> LyapunovSeries(const RunTrace& trace, const Vector& z) {
  std::vector<double> out;
  out.reserve(trace.steps.size() + 1);
  for (std::size_t t = 0; t <= trace.steps.size(); ++t) {
    double v = 0.0;
    for (const Vector& x : trace.ProposalsAt(t)) v += (x - z).squaredNorm();
    out.push_back(v);
  }
  return out;
}

}  // namespace tubargain
