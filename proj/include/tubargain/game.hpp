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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tubargain {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Games with more players are rejected everywhere; the exact geometry
// routines enumerate constraint subsets and do not scale past this.
inline constexpr int kMaxPlayers = 6;

// Absolute tolerance for constraint satisfaction.
inline constexpr double kFeasibilityTol = 1e-9;

// A nonempty coalition S of the players {0, ..., n-1}, stored as a bitmask
// with bit i set iff player i belongs to S.
class CoalitionId {
 public:
  // Throws ErrorCode::kInvalidCoalition unless 1 <= mask <= 2^n - 1.
  CoalitionId(std::uint32_t mask, int num_players);

  static CoalitionId Grand(int num_players);
  static CoalitionId Singleton(int player, int num_players);

  std::uint32_t mask() const { return mask_; }
  int num_players() const { return num_players_; }
  int size() const;
  bool contains(int player) const { return (mask_ >> player) & 1u; }
  bool is_grand() const;

  // Position in canonical (increasing-mask) storage.
  std::size_t index() const { return mask_ - 1; }

  // The 0/1 incidence vector e_S.
  Vector Incidence() const;

  // 1-based member list, e.g. "{1,3}".
  std::string ToString() const;

  friend auto operator<=>(const CoalitionId&, const CoalitionId&) = default;

 private:
  std::uint32_t mask_;
  int num_players_;
};

// 0-based player indices of the coalition, ascending.
std::vector<int> CoalitionMembers(CoalitionId id);

std::size_t NumCoalitions(int num_players);

// Masks ordered by coalition size, then lexicographically by members:
// {1},{2},{3},{1,2},{1,3},{2,3},{1,2,3} for three players.
std::vector<std::uint32_t> CardinalityOrderMasks(int num_players);

// Values v_S for every nonempty coalition, in increasing-mask order.
class CharacteristicFunction {
 public:
  CharacteristicFunction(int num_players, std::vector<double> values);

  // Accepts values listed in CardinalityOrderMasks order.
  static CharacteristicFunction FromCardinalityOrder(
      int num_players, std::span<const double> values);

  int num_players() const { return num_players_; }
  std::size_t num_coalitions() const { return values_.size(); }

  double value(CoalitionId id) const { return values_[id.index()]; }
  double grand_value() const { return values_.back(); }
  std::span<const double> values() const { return values_; }
  std::vector<double> ToCardinalityOrder() const;

  friend bool operator==(const CharacteristicFunction&,
                         const CharacteristicFunction&) = default;

 private:
  int num_players_;
  std::vector<double> values_;
};

// e_S' x >= rhs for the tagged coalition S.
struct HalfSpace {
  CoalitionId coalition;
  double rhs;
};

// {x : sum(x) = total, e_S' x >= rhs_S for each listed S}. Every normal is
// an incidence vector, so the constraints are stored by coalition tag.
struct PolyhedronSpec {
  int num_players = 0;
  double total = 0.0;
  std::vector<HalfSpace> inequalities;

  bool Contains(const Vector& x, double tol = kFeasibilityTol) const;
};

// Per-coalition interval [lo_S, hi_S]; the grand coalition is pinned.
class ValueBounds {
 public:
  ValueBounds(int num_players, std::vector<double> lo, std::vector<double> hi);

  // Intervals given in CardinalityOrderMasks order.
  static ValueBounds FromCardinalityOrder(int num_players,
                                          std::span<const double> lo,
                                          std::span<const double> hi);

  int num_players() const { return num_players_; }
  std::span<const double> lo() const { return lo_; }
  std::span<const double> hi() const { return hi_; }
  double lo(CoalitionId id) const { return lo_[id.index()]; }
  double hi(CoalitionId id) const { return hi_[id.index()]; }
  bool IsDegenerate() const { return lo_ == hi_; }

  CharacteristicFunction Midpoints() const;

 private:
  int num_players_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

// X_i(v): the grand-coalition equality plus e_S'x >= v_S for every proper
// coalition S containing `player` (0-based).
PolyhedronSpec BoundingSet(int player, const CharacteristicFunction& v);

// C(v): the grand-coalition equality plus all proper coalitions.
PolyhedronSpec CoreConstraints(const CharacteristicFunction& v);

// v^max: the upper end of every interval.
CharacteristicFunction RobustCharacteristic(const ValueBounds& bounds);

// Cumulative mean update: given prev = mean of v(0..t-1), returns the mean
// of v(0..t). Requires t >= 1.
CharacteristicFunction RunningAverage(const CharacteristicFunction& prev,
                                      std::size_t t,
                                      const CharacteristicFunction& v_t);

bool IsInCore(const Vector& x, const CharacteristicFunction& v,
              double tol = kFeasibilityTol);

// Returns a core allocation if C(v) is nonempty, std::nullopt otherwise.
std::optional<Vector> CoreIsNonempty(const CharacteristicFunction& v);

}  // namespace tubargain
