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

#include "tubargain/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "tubargain/error.hpp"

namespace tubargain {
namespace {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0,
                                  kMaxPlayers, kMaxPlayers>;
using SmallVector =
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPlayers, 1>;

constexpr double kMultiplierTol = 1e-10;
constexpr double kDualStopResidual = 1e-10;
constexpr int kMaxDualSweeps = 100000;
constexpr double kDedupTol = 1e-9;

double Lhs(const HalfSpace& h, const Vector& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if (h.coalition.contains(i)) s += x[i];
  }
  return s;
}

void CheckDimension(const Vector& x, const PolyhedronSpec& p) {
  if (x.size() != p.num_players) {
    Fail(ErrorCode::kInvalidArgument,
         "point has dimension " + std::to_string(x.size()) +
             ", polyhedron lives in dimension " +
             std::to_string(p.num_players));
  }
}

struct FaceSolution {
  Vector point;
  double nu = 0.0;
  Vector lambda;  // one entry per index in the face
};

// Projects x onto the affine set where the equality and the listed
// inequalities hold with equality. nullopt if the normals are dependent.
std::optional<FaceSolution> SolveFace(const Vector& x, const PolyhedronSpec& p,
                                      const std::vector<int>& face) {
  const int n = p.num_players;
  const int k = static_cast<int>(face.size()) + 1;
  SmallMatrix normals(n, k);
  SmallVector rhs(k);
  normals.col(0).setOnes();
  rhs[0] = p.total;
  for (int c = 1; c < k; ++c) {
    const HalfSpace& h = p.inequalities[face[c - 1]];
    for (int i = 0; i < n; ++i) normals(i, c) = h.coalition.contains(i) ? 1 : 0;
    rhs[c] = h.rhs;
  }
  const SmallMatrix gram = normals.transpose() * normals;
  Eigen::FullPivLU<SmallMatrix> lu(gram);
  if (lu.rank() < k) return std::nullopt;
  const SmallVector mu = lu.solve(rhs - normals.transpose() * x);
  FaceSolution out;
  out.point = x + normals * mu;
  out.nu = mu[0];
  out.lambda = mu.tail(k - 1);
  return out;
}

Vector ExpandMultipliers(const PolyhedronSpec& p, const std::vector<int>& face,
                         const Vector& lambda) {
  Vector full = Vector::Zero(static_cast<Eigen::Index>(p.inequalities.size()));
  for (std::size_t c = 0; c < face.size(); ++c) full[face[c]] = lambda[c];
  return full;
}

ProjectionResult MakeResult(const Vector& x, const PolyhedronSpec& p,
                            const std::vector<int>& face,
                            const FaceSolution& sol) {
  ProjectionResult r;
  r.point = sol.point;
  for (int idx : face) r.active_set.push_back(p.inequalities[idx].coalition);
  r.kkt_residual =
      KktResidual(x, p, sol.point, ExpandMultipliers(p, face, sol.lambda),
                  sol.nu);
  return r;
}

bool IsValidKkt(const PolyhedronSpec& p, const FaceSolution& sol) {
  return (sol.lambda.size() == 0 ||
          sol.lambda.minCoeff() >= -kMultiplierTol) &&
         p.Contains(sol.point, kFeasibilityTol);
}

// Every face of at most n-1 independent inequalities, in increasing order
// of the subset bitmask over the inequality list.
ProjectionResult ProjectByEnumeration(const Vector& x,
                                      const PolyhedronSpec& p) {
  const int m = static_cast<int>(p.inequalities.size());
  const int max_face = p.num_players - 1;
  std::optional<ProjectionResult> best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> face;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    if (std::popcount(mask) > max_face) continue;
    face.clear();
    for (int j = 0; j < m; ++j) {
      if ((mask >> j) & 1u) face.push_back(j);
    }
    auto sol = SolveFace(x, p, face);
    if (!sol || !IsValidKkt(p, *sol)) continue;
    const double d = (sol->point - x).norm();
    // Strict improvement only, so the lowest mask wins ties.
    if (d < best_dist - 1e-12) {
      best_dist = d;
      best = MakeResult(x, p, face, *sol);
    }
  }
  if (!best) {
    Fail(ErrorCode::kInfeasibleSet, "projection onto an empty polyhedron");
  }
  return *best;
}

// Picks a subset of `candidates` whose normals stay independent together
// with the all-ones normal (greedy, in the given order).
std::vector<int> IndependentSubset(const PolyhedronSpec& p,
                                   const std::vector<int>& candidates) {
  const int n = p.num_players;
  std::vector<int> chosen;
  SmallMatrix basis(n, 1);
  basis.col(0).setOnes();
  for (int idx : candidates) {
    if (static_cast<int>(chosen.size()) + 1 >= n) break;
    SmallMatrix trial(n, basis.cols() + 1);
    trial.leftCols(basis.cols()) = basis;
    trial.col(basis.cols()) = p.inequalities[idx].coalition.Incidence();
    Eigen::FullPivLU<SmallMatrix> lu(trial);
    if (lu.rank() == trial.cols()) {
      basis = trial;
      chosen.push_back(idx);
    }
  }
  return chosen;
}

// Hildreth-style dual coordinate ascent inside the hyperplane sum(y) = total.
ProjectionResult ProjectByDualAscent(const Vector& x, const PolyhedronSpec& p) {
  const int n = p.num_players;
  const int m = static_cast<int>(p.inequalities.size());
  const Vector ones = Vector::Ones(n);

  // Directions of the inequality normals within the hyperplane.
  std::vector<Vector> dirs(m);
  std::vector<double> dir_norm2(m);
  for (int j = 0; j < m; ++j) {
    const double s = p.inequalities[j].coalition.size();
    dirs[j] = p.inequalities[j].coalition.Incidence() - (s / n) * ones;
    dir_norm2[j] = s * (n - s) / n;
  }

  const Vector base = ProjectAffine(x, ones, p.total);
  Vector y = base;
  Vector lambda = Vector::Zero(m);
  bool converged = false;
  for (int sweep = 0; sweep < kMaxDualSweeps; ++sweep) {
    for (int j = 0; j < m; ++j) {
      const double viol = p.inequalities[j].rhs - Lhs(p.inequalities[j], y);
      const double delta = std::max(-lambda[j], viol / dir_norm2[j]);
      if (delta != 0.0) {
        lambda[j] += delta;
        y += delta * dirs[j];
      }
    }
    double worst = 0.0;
    for (int j = 0; j < m; ++j) {
      const double slack = Lhs(p.inequalities[j], y) - p.inequalities[j].rhs;
      worst = std::max({worst, -slack, std::abs(lambda[j] * slack)});
    }
    if (worst <= kDualStopResidual) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    if (!FindVertex(p)) {
      Fail(ErrorCode::kInfeasibleSet, "projection onto an empty polyhedron");
    }
    Fail(ErrorCode::kNumeric,
         "dual coordinate ascent did not reach the KKT tolerance");
  }

  // Re-solve on the identified active set to remove the ascent's residual.
  std::vector<int> active;
  for (int j = 0; j < m; ++j) {
    if (lambda[j] > 0.0) active.push_back(j);
  }
  std::sort(active.begin(), active.end(),
            [&](int a, int b) { return lambda[a] > lambda[b]; });
  std::vector<int> face = IndependentSubset(p, active);
  std::sort(face.begin(), face.end());
  if (auto sol = SolveFace(x, p, face); sol && IsValidKkt(p, *sol)) {
    return MakeResult(x, p, face, *sol);
  }

  ProjectionResult r;
  r.point = y;
  for (int j = 0; j < m; ++j) {
    if (lambda[j] > 0.0) r.active_set.push_back(p.inequalities[j].coalition);
  }
  // y - x = sum lambda_j dirs_j + (base - x); fold the ones-components into nu.
  double nu = (base - x).sum() / n;
  for (int j = 0; j < m; ++j) {
    nu -= lambda[j] * p.inequalities[j].coalition.size() / n;
  }
  r.kkt_residual = KktResidual(x, p, y, lambda, nu);
  return r;
}

template <typename Visitor>
void ForEachVertex(const PolyhedronSpec& p, Visitor&& visit) {
  const int n = p.num_players;
  const int m = static_cast<int>(p.inequalities.size());
  const int k = n - 1;
  if (k > m) return;
  std::vector<int> face(k);
  std::iota(face.begin(), face.end(), 0);
  SmallMatrix system(n, n);
  SmallVector rhs(n);
  while (true) {
    system.row(0).setOnes();
    rhs[0] = p.total;
    for (int r = 0; r < k; ++r) {
      const HalfSpace& h = p.inequalities[face[r]];
      for (int i = 0; i < n; ++i) {
        system(r + 1, i) = h.coalition.contains(i) ? 1.0 : 0.0;
      }
      rhs[r + 1] = h.rhs;
    }
    Eigen::FullPivLU<SmallMatrix> lu(system);
    if (lu.isInvertible()) {
      const Vector v = lu.solve(rhs);
      if (p.Contains(v, kFeasibilityTol) && !visit(v)) return;
    }
    // Next k-combination of [0, m).
    int pos = k - 1;
    while (pos >= 0 && face[pos] == m - k + pos) --pos;
    if (pos < 0) return;
    ++face[pos];
    for (int r = pos + 1; r < k; ++r) face[r] = face[r - 1] + 1;
  }
}

}  // namespace

Vector ProjectAffine(const Vector& x, const Vector& normal, double rhs) {
  if (x.size() != normal.size()) {
    Fail(ErrorCode::kInvalidArgument, "dimension mismatch");
  }
  const double norm2 = normal.squaredNorm();
  if (norm2 == 0.0) {
    Fail(ErrorCode::kInvalidArgument, "hyperplane normal must be nonzero");
  }
  return x - ((normal.dot(x) - rhs) / norm2) * normal;
}

double KktResidual(const Vector& x, const PolyhedronSpec& p, const Vector& y,
                   const Vector& lambda, double nu) {
  Vector stationarity = y - x - nu * Vector::Ones(p.num_players);
  double worst = std::abs(y.sum() - p.total);
  for (std::size_t j = 0; j < p.inequalities.size(); ++j) {
    const HalfSpace& h = p.inequalities[j];
    const double lam = lambda[static_cast<Eigen::Index>(j)];
    stationarity -= lam * h.coalition.Incidence();
    const double slack = Lhs(h, y) - h.rhs;
    worst = std::max({worst, -slack, -lam, std::abs(lam * slack)});
  }
  return std::max(worst, stationarity.lpNorm<Eigen::Infinity>());
}

ProjectionResult ProjectPolyhedron(const Vector& x, const PolyhedronSpec& p) {
  CheckDimension(x, p);
  if (p.num_players <= 4) return ProjectByEnumeration(x, p);
  return ProjectByDualAscent(x, p);
}

double DistanceTo(const Vector& x, const PolyhedronSpec& p) {
  return (x - ProjectPolyhedron(x, p).point).norm();
}

std::vector<Vector> EnumerateVertices(const PolyhedronSpec& p) {
  std::vector<Vector> out;
  ForEachVertex(p, [&](const Vector& v) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Vector& u) {
      return (u - v).lpNorm<Eigen::Infinity>() <= kDedupTol;
    });
    if (!seen) out.push_back(v);
    return true;
  });
  return out;
}

std::optional<Vector> FindVertex(const PolyhedronSpec& p) {
  std::optional<Vector> found;
  ForEachVertex(p, [&](const Vector& v) {
    found = v;
    return false;
  });
  return found;
}

double CoreToBoundingDistanceRatio(const Vector& x,
                                   const CharacteristicFunction& v) {
  const PolyhedronSpec core = CoreConstraints(v);
  if (core.Contains(x, 1e-12)) return 0.0;
  const double core_dist = DistanceTo(x, core);
  double denom = 0.0;
  for (int i = 0; i < v.num_players(); ++i) {
    const double d = DistanceTo(x, BoundingSet(i, v));
    denom += d * d;
  }
  if (denom == 0.0) return 0.0;
  return core_dist * core_dist / denom;
}

}  // namespace tubargain
