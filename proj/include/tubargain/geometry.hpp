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

#include <optional>
#include <vector>

#include "tubargain/game.hpp"

namespace tubargain {

struct ProjectionResult {
  Vector point;
  // Coalitions whose constraints were held tight in the KKT system that
  // certified `point`.
  std::vector<CoalitionId> active_set;
  double kkt_residual = 0.0;
};

// Projection onto the hyperplane {y : normal' y = rhs}.
Vector ProjectAffine(const Vector& x, const Vector& normal, double rhs);

// Euclidean projection onto P. Exact active-set enumeration for up to four
// players; dual coordinate ascent followed by an active-set solve for five
// and six. Throws ErrorCode::kInfeasibleSet when P is empty.
ProjectionResult ProjectPolyhedron(const Vector& x, const PolyhedronSpec& p);

double DistanceTo(const Vector& x, const PolyhedronSpec& p);

// Worst violation of the KKT conditions of min ||y - x||^2 over P, given a
// candidate y with inequality multipliers `lambda` (one per inequality of P)
// and equality multiplier `nu`.
double KktResidual(const Vector& x, const PolyhedronSpec& p, const Vector& y,
                   const Vector& lambda, double nu);

// Basic feasible points of P: n-1 inequalities with normals independent of
// each other and of the all-ones normal, solved with equality, kept when
// feasible. Duplicates within 1e-9 are merged; enumeration order is kept.
std::vector<Vector> EnumerateVertices(const PolyhedronSpec& p);

// First vertex found by the same enumeration, or nullopt if there is none.
std::optional<Vector> FindVertex(const PolyhedronSpec& p);

// dist^2(x, C(v)) / sum_i dist^2(x, X_i(v)); 0 when x lies in the core.
// Throws ErrorCode::kInfeasibleSet if the core is empty.
double CoreToBoundingDistanceRatio(const Vector& x,
                                   const CharacteristicFunction& v);

}  // namespace tubargain
