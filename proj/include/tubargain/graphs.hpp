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
#include <optional>
#include <utility>
#include <vector>

#include "tubargain/game.hpp"

namespace tubargain {

// Directed link (i, j): player i observes player j's proposal. 0-based.
using Edge = std::pair<int, int>;

struct GraphFrame {
  std::vector<Edge> edges;
  Matrix weights;
};

// Periodic neighbor-graph schedule: A(t) = frames[t mod period].
// Construction enforces self-loops on every player and a_ij = 0 off the
// edge set; the weight assumptions are checked by ValidateWeights.
class GraphSchedule {
 public:
  explicit GraphSchedule(std::vector<GraphFrame> frames);

  // Edge sets are taken from the support of each matrix (plus self-loops).
  static GraphSchedule FromWeights(const std::vector<Matrix>& weights);

  int num_players() const { return num_players_; }
  std::size_t period() const { return frames_.size(); }
  const GraphFrame& frame(std::size_t t) const {
    return frames_[t % frames_.size()];
  }
  const Matrix& weights(std::size_t t) const { return frame(t).weights; }
  const std::vector<GraphFrame>& frames() const { return frames_; }

 private:
  int num_players_;
  std::vector<GraphFrame> frames_;
};

// The three-player cycle used in the reference scenarios: players 2-3 talk
// at t = 0, 3-1 at t = 1, 1-2 at t = 2, each pair averaging with weight 1/2.
GraphSchedule ThreePlayerCycleSchedule();

// Checks double stochasticity (1e-12) and a positive diagonal on every
// frame; returns the smallest positive entry over all frames.
// Throws ErrorCode::kAssumptionViolation naming the offending frame.
double ValidateWeights(const GraphSchedule& schedule);

// True iff the union graph over every block [tQ, (t+1)Q - 1] is strongly
// connected. Blocks repeat after lcm(period, Q) steps.
bool ValidateConnectivity(const GraphSchedule& schedule, int window);

// Smallest Q <= max_window passing ValidateConnectivity.
std::optional<int> MinimalConnectivityWindow(const GraphSchedule& schedule,
                                             int max_window);

// A(t) A(t-1) ... A(s).
Matrix PhiProduct(const GraphSchedule& schedule, std::size_t t, std::size_t s);

// (1 - alpha / (4 n^2)) ^ (ceil((t - s + 1) / Q) - 2)
double ConsensusRateBound(int num_players, double alpha, int window,
                          std::size_t t, std::size_t s);

struct RateBoundReport {
  double worst_slack = 0.0;       // min over (t, s) of bound - deviation
  double max_deviation = 0.0;     // max_ij |Phi(t,s)_ij - 1/n| at the worst pair
  std::size_t worst_t = 0;
  std::size_t worst_s = 0;
  std::size_t pairs_checked = 0;
};

// Checks max_ij |[Phi(t,s)]_ij - 1/n| against ConsensusRateBound for all
// 0 <= s <= t <= horizon. Throws ErrorCode::kAssumptionViolation on a
// violated pair.
RateBoundReport RateBoundCheck(const GraphSchedule& schedule, double alpha,
                               int window, std::size_t horizon);

}  // namespace tubargain
