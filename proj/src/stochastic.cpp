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

#include "tubargain/stochastic.hpp"

#include <algorithm>
#include <cmath>

#include "tubargain/error.hpp"
#include "tubargain/philox.hpp"

namespace tubargain {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Key reserved for estimating supply-chain means; never used by a run.
constexpr StreamKey kEstimationKey{0x6d65616e5f657374ull, 0xFFFFFFFFu};

void ValidateSupplyChain(const SupplyChainProcess& s) {
  if (!(s.cost > 0.0) || !std::isfinite(s.cost)) {
    Fail(ErrorCode::kConfig, "supply chain: cost K must be positive");
  }
  const std::size_t n = s.demand_min.size();
  if (n < 1 || n > static_cast<std::size_t>(kMaxPlayers) ||
      s.demand_max.size() != n) {
    Fail(ErrorCode::kConfig,
         "supply chain: demand bounds must list one entry per retailer");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(s.demand_min[i]) || !std::isfinite(s.demand_max[i]) ||
        s.demand_min[i] > s.demand_max[i]) {
      Fail(ErrorCode::kConfig, "supply chain: demand interval for retailer " +
                                   std::to_string(i + 1) +
                                   " is not well ordered");
    }
  }
}

}  // namespace

double KeyedUniform01(StreamKey key, std::uint64_t t, std::uint32_t slot) {
  const Philox4x32::Counter ctr{key.run, static_cast<std::uint32_t>(t),
                                static_cast<std::uint32_t>(t >> 32), slot};
  const Philox4x32::Key k{static_cast<std::uint32_t>(key.master_seed),
                          static_cast<std::uint32_t>(key.master_seed >> 32)};
  const auto block = Philox4x32::Generate(ctr, k);
  const std::uint64_t bits =
      ((std::uint64_t{block[0]} << 32) | block[1]) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

void ValidateProcess(const ValueProcessSpec& spec) {
  std::visit(Overloaded{
                 [](const UniformProcess&) {},
                 [](const RobustCoinflipProcess& p) {
                   if (!(p.robust_probability > 0.0 &&
                         p.robust_probability <= 1.0)) {
                     Fail(ErrorCode::kConfig,
                          "robust-coinflip: probability of the robust "
                          "realization must lie in (0, 1]");
                   }
                 },
                 [](const SupplyChainProcess& p) { ValidateSupplyChain(p); },
                 [](const ConstantProcess&) {},
             },
             spec);
}

int NumPlayers(const ValueProcessSpec& spec) {
  return std::visit(
      Overloaded{
          [](const UniformProcess& p) { return p.bounds.num_players(); },
          [](const RobustCoinflipProcess& p) { return p.bounds.num_players(); },
          [](const SupplyChainProcess& p) {
            return static_cast<int>(p.demand_min.size());
          },
          [](const ConstantProcess& p) { return p.value.num_players(); },
      },
      spec);
}

CharacteristicFunction DrawUniform(const ValueBounds& bounds, StreamKey key,
                                   std::uint64_t t) {
  const auto lo = bounds.lo();
  const auto hi = bounds.hi();
  std::vector<double> values(lo.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (lo[k] == hi[k]) {
      values[k] = lo[k];
    } else {
      const double u =
          KeyedUniform01(key, t, static_cast<std::uint32_t>(k + 1));
      values[k] = lo[k] + (hi[k] - lo[k]) * u;
    }
  }
  return CharacteristicFunction(bounds.num_players(), std::move(values));
}

bool CoinSelectsRobust(double robust_probability, StreamKey key,
                       std::uint64_t t) {
  return KeyedUniform01(key, t, kCoinSlot) < robust_probability;
}

CharacteristicFunction DrawRobustCoinflip(const ValueBounds& bounds,
                                          double robust_probability,
                                          StreamKey key, std::uint64_t t) {
  if (!(robust_probability > 0.0 && robust_probability <= 1.0)) {
    Fail(ErrorCode::kConfig,
         "robust-coinflip: probability of the robust realization must lie "
         "in (0, 1]");
  }
  if (CoinSelectsRobust(robust_probability, key, t)) {
    return RobustCharacteristic(bounds);
  }
  return DrawUniform(bounds, key, t);
}

CharacteristicFunction SupplyChainValues(double cost,
                                         const std::vector<double>& demand) {
  const int n = static_cast<int>(demand.size());
  std::vector<double> values(NumCoalitions(n));
  for (std::uint32_t m = 1; m <= values.size(); ++m) {
    double joint = 0.0;
    double separate = 0.0;
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1u) {
        joint += demand[i];
        separate += std::min(cost, demand[i]);
      }
    }
    values[m - 1] = separate - std::min(cost, joint);
  }
  return CharacteristicFunction(n, std::move(values));
}

CharacteristicFunction DrawSupplyChain(const SupplyChainProcess& spec,
                                       StreamKey key, std::uint64_t t) {
  ValidateSupplyChain(spec);
  std::vector<double> demand(spec.demand_min.size());
  for (std::size_t i = 0; i < demand.size(); ++i) {
    const double lo = spec.demand_min[i];
    const double hi = spec.demand_max[i];
    demand[i] =
        lo == hi ? lo
                 : lo + (hi - lo) *
                            KeyedUniform01(key, t,
                                           kDemandSlotBase +
                                               static_cast<std::uint32_t>(i));
  }
  return SupplyChainValues(spec.cost, demand);
}

CharacteristicFunction SupplyChainValueBound(const SupplyChainProcess& spec) {
  ValidateSupplyChain(spec);
  const int n = static_cast<int>(spec.demand_min.size());
  std::vector<double> values(NumCoalitions(n));
  for (std::uint32_t m = 1; m <= values.size(); ++m) {
    double max_separate = 0.0;
    double min_joint = 0.0;
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1u) {
        max_separate += std::min(spec.cost, spec.demand_max[i]);
        min_joint += spec.demand_min[i];
      }
    }
    values[m - 1] = max_separate - std::min(spec.cost, min_joint);
  }
  return CharacteristicFunction(n, std::move(values));
}

std::optional<CharacteristicFunction> RobustEnvelope(
    const ValueProcessSpec& spec) {
  return std::visit(
      Overloaded{
          [](const UniformProcess& p)
              -> std::optional<CharacteristicFunction> {
            return RobustCharacteristic(p.bounds);
          },
          [](const RobustCoinflipProcess& p)
              -> std::optional<CharacteristicFunction> {
            return RobustCharacteristic(p.bounds);
          },
          [](const SupplyChainProcess&)
              -> std::optional<CharacteristicFunction> {
            return std::nullopt;
          },
          [](const ConstantProcess& p)
              -> std::optional<CharacteristicFunction> { return p.value; },
      },
      spec);
}

CharacteristicFunction MeanCharacteristic(const ValueProcessSpec& spec,
                                          std::size_t samples) {
  return std::visit(
      Overloaded{
          [](const UniformProcess& p) { return p.bounds.Midpoints(); },
          [](const RobustCoinflipProcess& p) {
            const auto mid = p.bounds.Midpoints();
            std::vector<double> out(mid.num_coalitions());
            for (std::size_t k = 0; k < out.size(); ++k) {
              out[k] = p.robust_probability * p.bounds.hi()[k] +
                       (1.0 - p.robust_probability) * mid.values()[k];
            }
            return CharacteristicFunction(p.bounds.num_players(),
                                          std::move(out));
          },
          [samples](const SupplyChainProcess& p) {
            if (samples == 0) {
              Fail(ErrorCode::kInvalidArgument, "need at least one sample");
            }
            CharacteristicFunction mean = DrawSupplyChain(p, kEstimationKey, 0);
            for (std::size_t t = 1; t < samples; ++t) {
              mean = RunningAverage(mean, t,
                                    DrawSupplyChain(p, kEstimationKey, t));
            }
            return mean;
          },
          [](const ConstantProcess& p) { return p.value; },
      },
      spec);
}

SeededStream::SeededStream(ValueProcessSpec spec, StreamKey key)
    : spec_(std::move(spec)), key_(key) {
  ValidateProcess(spec_);
}

CharacteristicFunction SeededStream::Draw(std::uint64_t t) const {
  return std::visit(
      Overloaded{
          [&](const UniformProcess& p) { return DrawUniform(p.bounds, key_, t); },
          [&](const RobustCoinflipProcess& p) {
            return DrawRobustCoinflip(p.bounds, p.robust_probability, key_, t);
          },
          [&](const SupplyChainProcess& p) {
            return DrawSupplyChain(p, key_, t);
          },
          [](const ConstantProcess& p) { return p.value; },
      },
      spec_);
}

Matrix IncidenceMatrix(int num_players) {
  const std::size_t m = NumCoalitions(num_players);
  Matrix b(static_cast<Eigen::Index>(m), num_players);
  for (std::uint32_t mask = 1; mask <= m; ++mask) {
    b.row(mask - 1) = CoalitionId(mask, num_players).Incidence().transpose();
  }
  return b;
}

}  // namespace tubargain
