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

#include "tubargain/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "tubargain/error.hpp"
#include "tubargain/geometry.hpp"

namespace tubargain {
namespace {

void CheckPlayerCount(int n) {
  if (n < 1 || n > kMaxPlayers) {
    Fail(ErrorCode::kInvalidArgument,
         "player count must be in [1, " + std::to_string(kMaxPlayers) +
             "], got " + std::to_string(n));
  }
}

std::uint32_t GrandMask(int n) { return (1u << n) - 1u; }

void CheckValueCount(int n, std::size_t count, const char* what) {
  if (count != NumCoalitions(n)) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(what) + ": expected " + std::to_string(NumCoalitions(n)) +
             " values for " + std::to_string(n) + " players, got " +
             std::to_string(count));
  }
}

std::vector<double> ReorderFromCardinality(int n,
                                           std::span<const double> values) {
  CheckValueCount(n, values.size(), "cardinality-ordered values");
  std::vector<double> by_mask(values.size());
  const auto order = CardinalityOrderMasks(n);
  for (std::size_t k = 0; k < order.size(); ++k) {
    by_mask[order[k] - 1] = values[k];
  }
  return by_mask;
}

}  // namespace

CoalitionId::CoalitionId(std::uint32_t mask, int num_players)
    : mask_(mask), num_players_(num_players) {
  CheckPlayerCount(num_players);
  if (mask == 0 || mask > GrandMask(num_players)) {
    Fail(ErrorCode::kInvalidCoalition,
         "coalition mask " + std::to_string(mask) + " out of range for " +
             std::to_string(num_players) + " players");
  }
}

CoalitionId CoalitionId::Grand(int num_players) {
  CheckPlayerCount(num_players);
  return CoalitionId(GrandMask(num_players), num_players);
}

CoalitionId CoalitionId::Singleton(int player, int num_players) {
  if (player < 0 || player >= num_players) {
    Fail(ErrorCode::kInvalidArgument,
         "player index " + std::to_string(player) + " out of range");
  }
  return CoalitionId(1u << player, num_players);
}

int CoalitionId::size() const { return std::popcount(mask_); }

bool CoalitionId::is_grand() const { return mask_ == GrandMask(num_players_); }

Vector CoalitionId::Incidence() const {
  Vector e = Vector::Zero(num_players_);
  for (int i = 0; i < num_players_; ++i) {
    if (contains(i)) e[i] = 1.0;
  }
  return e;
}

std::string CoalitionId::ToString() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i : CoalitionMembers(*this)) {
    if (!first) os << ',';
    os << (i + 1);
    first = false;
  }
  os << '}';
  return os.str();
}

std::vector<int> CoalitionMembers(CoalitionId id) {
  std::vector<int> members;
  for (int i = 0; i < id.num_players(); ++i) {
    if (id.contains(i)) members.push_back(i);
  }
  return members;
}

std::size_t NumCoalitions(int num_players) {
  CheckPlayerCount(num_players);
  return GrandMask(num_players);
}

std::vector<std::uint32_t> CardinalityOrderMasks(int num_players) {
  std::vector<std::uint32_t> masks(NumCoalitions(num_players));
  for (std::uint32_t m = 1; m <= masks.size(); ++m) masks[m - 1] = m;
  std::stable_sort(masks.begin(), masks.end(),
                   [num_players](std::uint32_t a, std::uint32_t b) {
                     const int pa = std::popcount(a), pb = std::popcount(b);
                     if (pa != pb) return pa < pb;
                     return CoalitionMembers(CoalitionId(a, num_players)) <
                            CoalitionMembers(CoalitionId(b, num_players));
                   });
  return masks;
}

CharacteristicFunction::CharacteristicFunction(int num_players,
                                               std::vector<double> values)
    : num_players_(num_players), values_(std::move(values)) {
  CheckPlayerCount(num_players);
  CheckValueCount(num_players, values_.size(), "characteristic function");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      Fail(ErrorCode::kInvalidArgument,
           "characteristic function value for " +
               CoalitionId(static_cast<std::uint32_t>(k + 1), num_players)
                   .ToString() +
               " is not finite");
    }
  }
}

CharacteristicFunction CharacteristicFunction::FromCardinalityOrder(
    int num_players, std::span<const double> values) {
  CheckPlayerCount(num_players);
  return CharacteristicFunction(num_players,
                                ReorderFromCardinality(num_players, values));
}

std::vector<double> CharacteristicFunction::ToCardinalityOrder() const {
  std::vector<double> out;
  out.reserve(values_.size());
  for (std::uint32_t m : CardinalityOrderMasks(num_players_)) {
    out.push_back(values_[m - 1]);
  }
  return out;
}

bool PolyhedronSpec::Contains(const Vector& x, double tol) const {
  if (x.size() != num_players) return false;
  if (std::abs(x.sum() - total) > tol) return false;
  for (const HalfSpace& h : inequalities) {
    double lhs = 0.0;
    for (int i = 0; i < num_players; ++i) {
      if (h.coalition.contains(i)) lhs += x[i];
    }
    if (lhs < h.rhs - tol) return false;
  }
  return true;
}

ValueBounds::ValueBounds(int num_players, std::vector<double> lo,
                         std::vector<double> hi)
    : num_players_(num_players), lo_(std::move(lo)), hi_(std::move(hi)) {
  CheckPlayerCount(num_players);
  CheckValueCount(num_players, lo_.size(), "value bounds (lo)");
  CheckValueCount(num_players, hi_.size(), "value bounds (hi)");
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    const CoalitionId id(static_cast<std::uint32_t>(k + 1), num_players);
    if (!std::isfinite(lo_[k]) || !std::isfinite(hi_[k]) || lo_[k] > hi_[k]) {
      Fail(ErrorCode::kInvalidArgument,
           "value interval for " + id.ToString() + " is not well ordered");
    }
  }
  if (lo_.back() != hi_.back()) {
    Fail(ErrorCode::kInvalidArgument,
         "grand coalition value must be fixed (lo == hi)");
  }
}

ValueBounds ValueBounds::FromCardinalityOrder(int num_players,
                                              std::span<const double> lo,
                                              std::span<const double> hi) {
  CheckPlayerCount(num_players);
  return ValueBounds(num_players, ReorderFromCardinality(num_players, lo),
                     ReorderFromCardinality(num_players, hi));
}

CharacteristicFunction ValueBounds::Midpoints() const {
  std::vector<double> mid(lo_.size());
  for (std::size_t k = 0; k < mid.size(); ++k) {
    mid[k] = 0.5 * (lo_[k] + hi_[k]);
  }
  return CharacteristicFunction(num_players_, std::move(mid));
}

PolyhedronSpec BoundingSet(int player, const CharacteristicFunction& v) {
  const int n = v.num_players();
  if (player < 0 || player >= n) {
    Fail(ErrorCode::kInvalidArgument,
         "player index " + std::to_string(player) + " out of range");
  }
  PolyhedronSpec p{n, v.grand_value(), {}};
  for (std::uint32_t m = 1; m < GrandMask(n); ++m) {
    const CoalitionId id(m, n);
    if (id.contains(player)) p.inequalities.push_back({id, v.value(id)});
  }
  return p;
}

PolyhedronSpec CoreConstraints(const CharacteristicFunction& v) {
  const int n = v.num_players();
  PolyhedronSpec p{n, v.grand_value(), {}};
  for (std::uint32_t m = 1; m < GrandMask(n); ++m) {
    const CoalitionId id(m, n);
    p.inequalities.push_back({id, v.value(id)});
  }
  return p;
}

CharacteristicFunction RobustCharacteristic(const ValueBounds& bounds) {
  return CharacteristicFunction(
      bounds.num_players(),
      std::vector<double>(bounds.hi().begin(), bounds.hi().end()));
}

CharacteristicFunction RunningAverage(const CharacteristicFunction& prev,
                                      std::size_t t,
                                      const CharacteristicFunction& v_t) {
  if (t < 1) {
    Fail(ErrorCode::kInvalidArgument,
         "running average update needs t >= 1 (the mean at t = 0 is v(0))");
  }
  if (prev.num_players() != v_t.num_players()) {
    Fail(ErrorCode::kInvalidArgument, "player count mismatch");
  }
  const double weight = static_cast<double>(t);
  std::vector<double> out(prev.num_coalitions());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = (weight * prev.values()[k] + v_t.values()[k]) / (weight + 1.0);
  }
  return CharacteristicFunction(prev.num_players(), std::move(out));
}

bool IsInCore(const Vector& x, const CharacteristicFunction& v, double tol) {
  if (tol < 0.0) Fail(ErrorCode::kInvalidArgument, "tolerance must be >= 0");
  return CoreConstraints(v).Contains(x, tol);
}

std::optional<Vector> CoreIsNonempty(const CharacteristicFunction& v) {
  // The core is bounded (x_i >= v_{i} and a fixed total), so it is nonempty
  // iff it has a vertex.
  return FindVertex(CoreConstraints(v));
}

}  // namespace tubargain
