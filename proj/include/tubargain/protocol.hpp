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
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "tubargain/game.hpp"
#include "tubargain/graphs.hpp"

namespace tubargain {

enum class Mode { kRobust, kAverage };

std::string_view ModeName(Mode mode);
// Accepts "robust" or "average"; throws ErrorCode::kConfig otherwise.
Mode ParseMode(std::string_view name);

// proposals[i][j] is the amount player i proposes to give player j.
struct AllocationState {
  std::size_t t = 0;
  std::vector<Vector> proposals;
};

// One synchronous round t -> t+1.
struct StepRecord {
  std::size_t t = 0;
  std::vector<Vector> proposals;  // x^i(t+1)
  std::vector<Vector> mixed;      // w^i(t) = sum_j a_ij(t) x^j(t)
  std::vector<Vector> errors;     // e^i(t) = x^i(t+1) - w^i(t)
  Vector mean;                    // y(t+1)
  double disagreement = 0.0;      // D(t+1) = max_i ||x^i(t+1) - y(t+1)||
  // dist(x^i(t+1), C(game)); NaN if that core is empty or not computed.
  std::vector<double> core_distance;
  std::vector<double> game;       // characteristic function projected onto
};

struct RunTrace {
  Mode mode = Mode::kRobust;
  AllocationState initial;
  std::vector<StepRecord> steps;
  // First t of the earliest streak of 5 steps with D(t) <= 1e-6 and
  // sum_i ||e^i(t-1)|| <= 1e-6.
  std::optional<std::size_t> converged_at;

  // Proposals at time t, 0 <= t <= steps.size().
  const std::vector<Vector>& ProposalsAt(std::size_t t) const;
};

struct RunOptions {
  bool core_distances = true;
};

Vector MeanProposal(const std::vector<Vector>& proposals);
double Disagreement(const std::vector<Vector>& proposals);

// x^i(0) = total * e_i.
std::vector<Vector> CornerAllocations(int num_players, double total);

// w = A x, x^i(t+1) = P_{X_i(v_t)}[w^i].
std::pair<AllocationState, StepRecord> StepRobust(
    const AllocationState& state, const CharacteristicFunction& v_t,
    const Matrix& a_t, const RunOptions& options = {});

// Same recursion with the running-average game v̄(t).
std::pair<AllocationState, StepRecord> StepAverage(
    const AllocationState& state, const CharacteristicFunction& v_bar_t,
    const Matrix& a_t, const RunOptions& options = {});

// v(t) for t = 0, 1, ...
using ValueStream = std::function<CharacteristicFunction(std::uint64_t)>;

// Runs `steps` rounds. Round t uses A(t) and v(t) (robust) or
// v̄(t) = mean of v(0..t) (average). The grand-coalition value must stay
// within 1e-9 of v_N(0); drift raises ErrorCode::kAssumptionViolation.
RunTrace Run(Mode mode, const ValueStream& values,
             const GraphSchedule& schedule, std::vector<Vector> initial,
             std::size_t steps, const RunOptions& options = {});

// V(t) = sum_i ||x^i(t) - z||^2 for t = 0 .. T.
std::vector<double> LyapunovSeries(const RunTrace& trace, const Vector& z);

}  // namespace tubargain
