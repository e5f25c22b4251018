// Copyright 2026 The mdelab Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MDELAB_TESTS_TEST_UTIL_H_
#define MDELAB_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "mdelab/measures.h"

namespace mdelab::testing {

inline Point RandomPoint(std::mt19937& rng, int dim, double lo = -2.0,
                         double hi = 2.0) {
  std::uniform_real_distribution<double> coord(lo, hi);
  Point p(dim);
  for (double& c : p) c = coord(rng);
  return p;
}

inline DiscreteMeasure RandomMeasure(std::mt19937& rng, int dim, int atoms,
                                     double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::vector<Atom> raw;
  double total = 0.0;
  for (int i = 0; i < atoms; ++i) {
    raw.push_back({RandomPoint(rng, dim, lo, hi), weight(rng)});
    total += raw.back().weight;
  }
  for (Atom& a : raw) a.weight /= total;
  return DiscreteMeasure::Create(std::move(raw));
}

inline DiscreteMeasure UniformMeasure(const std::vector<Point>& points) {
  std::vector<Atom> raw;
  for (const Point& p : points) raw.push_back({p, 1.0 / points.size()});
  return DiscreteMeasure::Create(std::move(raw));
}

// Brute-force oracle for equal-weight transport: by Birkhoff's theorem the
// optimum over doubly stochastic plans is attained at a permutation.
inline double PermutationMatchingCost(const std::vector<Point>& xs,
                                      const std::vector<Point>& ys) {
  std::vector<size_t> perm(xs.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) cost += Distance(xs[i], ys[perm[i]]);
    best = std::min(best, cost / xs.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace mdelab::testing

#endif  // MDELAB_TESTS_TEST_UTIL_H_
