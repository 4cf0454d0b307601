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

#include "tubargain/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tubargain/error.hpp"

namespace tubargain {
namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kProductTol = 1e-10;

bool HasEdge(const GraphFrame& frame, int i, int j) {
  return std::find(frame.edges.begin(), frame.edges.end(), Edge{i, j}) !=
         frame.edges.end();
}

// Forward and backward reachability from player 0.
bool StronglyConnected(int n, const std::vector<std::vector<bool>>& adj) {
  auto reach_all = [&](bool reverse) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        const bool link = reverse ? adj[v][u] : adj[u][v];
        if (link && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reach_all(false) && reach_all(true);
}

}  // namespace

GraphSchedule::GraphSchedule(std::vector<GraphFrame> frames)
    : num_players_(0), frames_(std::move(frames)) {
  if (frames_.empty()) {
    Fail(ErrorCode::kInvalidArgument, "graph schedule needs at least one frame");
  }
  num_players_ = static_cast<int>(frames_.front().weights.rows());
  if (num_players_ < 1 || num_players_ > kMaxPlayers) {
    Fail(ErrorCode::kInvalidArgument, "unsupported player count in schedule");
  }
  for (std::size_t f = 0; f < frames_.size(); ++f) {
    GraphFrame& frame = frames_[f];
    const std::string where = "frame " + std::to_string(f);
    if (frame.weights.rows() != num_players_ ||
        frame.weights.cols() != num_players_) {
      Fail(ErrorCode::kInvalidArgument, where + ": weight matrix is not " +
                                            std::to_string(num_players_) +
                                            "x" + std::to_string(num_players_));
    }
    for (const auto& [i, j] : frame.edges) {
      if (i < 0 || j < 0 || i >= num_players_ || j >= num_players_) {
        Fail(ErrorCode::kInvalidArgument, where + ": edge endpoint out of range");
      }
    }
    for (int i = 0; i < num_players_; ++i) {
      if (!HasEdge(frame, i, i)) frame.edges.emplace_back(i, i);
    }
    std::sort(frame.edges.begin(), frame.edges.end());
    frame.edges.erase(std::unique(frame.edges.begin(), frame.edges.end()),
                      frame.edges.end());
    for (int i = 0; i < num_players_; ++i) {
      for (int j = 0; j < num_players_; ++j) {
        if (frame.weights(i, j) != 0.0 && !HasEdge(frame, i, j)) {
          Fail(ErrorCode::kAssumptionViolation,
               where + ": nonzero weight a_" + std::to_string(i + 1) +
                   std::to_string(j + 1) + " without a link");
        }
      }
    }
  }
}

GraphSchedule GraphSchedule::FromWeights(const std::vector<Matrix>& weights) {
  std::vector<GraphFrame> frames;
  for (const Matrix& a : weights) {
    GraphFrame frame{{}, a};
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < a.cols(); ++j) {
        if (a(i, j) != 0.0) frame.edges.emplace_back(i, j);
      }
    }
    frames.push_back(std::move(frame));
  }
  return GraphSchedule(std::move(frames));
}

GraphSchedule ThreePlayerCycleSchedule() {
  Matrix a0(3, 3), a1(3, 3), a2(3, 3);
  a0 << 1, 0, 0, 0, 0.5, 0.5, 0, 0.5, 0.5;
  a1 << 0.5, 0, 0.5, 0, 1, 0, 0.5, 0, 0.5;
  a2 << 0.5, 0.5, 0, 0.5, 0.5, 0, 0, 0, 1;
  return GraphSchedule::FromWeights({a0, a1, a2});
}

double ValidateWeights(const GraphSchedule& schedule) {
  const int n = schedule.num_players();
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < schedule.period(); ++f) {
    const Matrix& a = schedule.frames()[f].weights;
    const std::string where = "frame " + std::to_string(f);
    if (a.minCoeff() < 0.0) {
      Fail(ErrorCode::kAssumptionViolation, where + ": negative weight");
    }
    for (int i = 0; i < n; ++i) {
      if (std::abs(a.row(i).sum() - 1.0) > kStochasticTol) {
        Fail(ErrorCode::kAssumptionViolation,
             where + ": row " + std::to_string(i + 1) + " sums to " +
                 std::to_string(a.row(i).sum()));
      }
      if (std::abs(a.col(i).sum() - 1.0) > kStochasticTol) {
        Fail(ErrorCode::kAssumptionViolation,
             where + ": column " + std::to_string(i + 1) + " sums to " +
                 std::to_string(a.col(i).sum()));
      }
      if (!(a(i, i) > 0.0)) {
        Fail(ErrorCode::kAssumptionViolation,
             where + ": zero diagonal entry for player " +
                 std::to_string(i + 1));
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (a(i, j) > 0.0) alpha = std::min(alpha, a(i, j));
      }
    }
  }
  return alpha;
}

bool ValidateConnectivity(const GraphSchedule& schedule, int window) {
  if (window < 1) {
    Fail(ErrorCode::kInvalidArgument, "connectivity window must be >= 1");
  }
  const int n = schedule.num_players();
  const std::size_t q = static_cast<std::size_t>(window);
  const std::size_t blocks = std::lcm(schedule.period(), q) / q;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t tau = b * q; tau < (b + 1) * q; ++tau) {
      for (const auto& [i, j] : schedule.frame(tau).edges) adj[i][j] = true;
    }
    if (!StronglyConnected(n, adj)) return false;
  }
  return true;
}

std::optional<int> MinimalConnectivityWindow(const GraphSchedule& schedule,
                                             int max_window) {
  for (int q = 1; q <= max_window; ++q) {
    if (ValidateConnectivity(schedule, q)) return q;
  }
  return std::nullopt;
}

Matrix PhiProduct(const GraphSchedule& schedule, std::size_t t,
                  std::size_t s) {
  if (t < s) {
    Fail(ErrorCode::kInvalidArgument,
         "Phi(t, s) requires t >= s, got t=" + std::to_string(t) +
             " s=" + std::to_string(s));
  }
  Matrix phi = schedule.weights(s);
  for (std::size_t tau = s + 1; tau <= t; ++tau) {
    phi = schedule.weights(tau) * phi;
  }
  const Eigen::Index n = phi.rows();
  const double row_err =
      (phi.rowwise().sum() - Vector::Ones(n)).lpNorm<Eigen::Infinity>();
  const double col_err = (phi.colwise().sum().transpose() - Vector::Ones(n))
                             .lpNorm<Eigen::Infinity>();
  if (row_err > kProductTol || col_err > kProductTol) {
    Fail(ErrorCode::kAssumptionViolation,
         "Phi(t, s) lost double stochasticity; check the weight matrices");
  }
  return phi;
}

double ConsensusRateBound(int num_players, double alpha, int window,
                          std::size_t t, std::size_t s) {
  const double base = 1.0 - alpha / (4.0 * num_players * num_players);
  const auto span = static_cast<long long>(t - s + 1);
  const long long q = window;
  const long long blocks = (span + q - 1) / q;
  return std::pow(base, static_cast<double>(blocks - 2));
}

RateBoundReport RateBoundCheck(const GraphSchedule& schedule, double alpha,
                               int window, std::size_t horizon) {
  const int n = schedule.num_players();
  RateBoundReport report;
  report.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s <= horizon; ++s) {
    Matrix phi = schedule.weights(s);
    for (std::size_t t = s; t <= horizon; ++t) {
      if (t > s) phi = schedule.weights(t) * phi;
      const double dev =
          (phi.array() - 1.0 / n).abs().maxCoeff();
      const double slack =
          ConsensusRateBound(n, alpha, window, t, s) - dev;
      ++report.pairs_checked;
      if (slack < report.worst_slack) {
        report.worst_slack = slack;
        report.max_deviation = dev;
        report.worst_t = t;
        report.worst_s = s;
      }
    }
  }
  if (report.worst_slack < 0.0) {
    std::ostringstream os;
    os << "consensus rate bound violated at t=" << report.worst_t
       << " s=" << report.worst_s << " (deviation " << report.max_deviation
       << ", slack " << report.worst_slack << ")";
    Fail(ErrorCode::kAssumptionViolation, os.str());
  }
  return report;
}

}  // namespace tubargain
