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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "tubargain/game.hpp"

namespace tubargain {

// Identity of one Monte Carlo run's random stream.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint32_t run = 0;
};

// Counter slots beyond the coalition masks (which occupy 1 .. 2^n - 1).
inline constexpr std::uint32_t kCoinSlot = 0xFFFFFFFFu;
inline constexpr std::uint32_t kDemandSlotBase = 0x80000000u;

// Uniform double in [0, 1) keyed by (master seed, run, t, slot); 53 bits.
double KeyedUniform01(StreamKey key, std::uint64_t t, std::uint32_t slot);

// Independent uniform draw per coalition and step.
struct UniformProcess {
  ValueBounds bounds;
};

// Each step a coin selects v^max with probability `robust_probability`,
// otherwise a uniform draw from `bounds`.
struct RobustCoinflipProcess {
  ValueBounds bounds;
  double robust_probability = 0.5;
};

// Retailers sharing a warehouse's reorder cost K. Demands d_i(t) are drawn
// uniformly from [demand_min_i, demand_max_i].
struct SupplyChainProcess {
  double cost = 1.0;
  std::vector<double> demand_min;
  std::vector<double> demand_max;
};

struct ConstantProcess {
  CharacteristicFunction value;
};

using ValueProcessSpec = std::variant<UniformProcess, RobustCoinflipProcess,
                                      SupplyChainProcess, ConstantProcess>;

// Throws ErrorCode::kConfig on an invalid parameterization.
void ValidateProcess(const ValueProcessSpec& spec);
int NumPlayers(const ValueProcessSpec& spec);

CharacteristicFunction DrawUniform(const ValueBounds& bounds, StreamKey key,
                                   std::uint64_t t);

bool CoinSelectsRobust(double robust_probability, StreamKey key,
                       std::uint64_t t);

CharacteristicFunction DrawRobustCoinflip(const ValueBounds& bounds,
                                          double robust_probability,
                                          StreamKey key, std::uint64_t t);

// c_S = min{K, sum_{i in S} d_i}, v_S = sum_{i in S} c_{i} - c_S.
CharacteristicFunction SupplyChainValues(double cost,
                                         const std::vector<double>& demand);

CharacteristicFunction DrawSupplyChain(const SupplyChainProcess& spec,
                                       StreamKey key, std::uint64_t t);

// sum_{i in S} min{K, d_i^max} - min{K, sum_{i in S} d_i^min}, an upper
// bound on every realized v_S.
CharacteristicFunction SupplyChainValueBound(const SupplyChainProcess& spec);

// Per-coalition upper envelope v^max when the process has a fixed grand
// value; nullopt for the supply chain, whose grand value varies.
std::optional<CharacteristicFunction> RobustEnvelope(
    const ValueProcessSpec& spec);

// Expected characteristic function v^mean. Closed form except for the
// supply chain, which is estimated from `samples` draws on a reserved key.
CharacteristicFunction MeanCharacteristic(const ValueProcessSpec& spec,
                                          std::size_t samples = 200000);

// A run's value stream: draw(t) depends only on (spec, key, t).
class SeededStream {
 public:
  SeededStream(ValueProcessSpec spec, StreamKey key);

  CharacteristicFunction Draw(std::uint64_t t) const;
  StreamKey key() const { return key_; }
  const ValueProcessSpec& spec() const { return spec_; }

 private:
  ValueProcessSpec spec_;
  StreamKey key_;
};

// Rows e_S' in increasing-mask order (m x n).
Matrix IncidenceMatrix(int num_players);

}  // namespace tubargain
