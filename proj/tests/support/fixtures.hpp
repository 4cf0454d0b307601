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

#include <vector>

#include "tubargain/game.hpp"

namespace tubargain::fixtures {

inline Vector Vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline CharacteristicFunction Game3(std::initializer_list<double> by_card) {
  const std::vector<double> v(by_card);
  return CharacteristicFunction::FromCardinalityOrder(3, v);
}

inline ValueBounds ScenarioBounds(bool second) {
  const std::vector<double> lo{4, 0, 0, 0, 0, 0, 10};
  const std::vector<double> hi = second
                                     ? std::vector<double>{9, 5, 0, 0, 0, 0, 10}
                                     : std::vector<double>{7, 3, 0, 0, 0, 0, 10};
  return ValueBounds::FromCardinalityOrder(3, lo, hi);
}

inline CharacteristicFunction VMaxI() { return Game3({7, 3, 0, 0, 0, 0, 10}); }
inline CharacteristicFunction VMeanI() {
  return Game3({5.5, 1.5, 0, 0, 0, 0, 10});
}

}  // namespace tubargain::fixtures
