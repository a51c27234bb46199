// Copyright 2026 The vispk Authors.
//
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

// Exact one-dimensional natural-breaks clustering (Fisher-Jenks).
//
// Sorted values are cut into k contiguous, non-empty classes so that the
// total within-class sum of squared deviations is minimal. The dynamic
// program runs over suffixes: best[m][i] is the optimal cost of splitting
// sorted[i..n) into m classes. Reading it forward from i = 0 and taking the
// shortest first class that attains the optimum yields the lexicographically
// earliest break positions among all optimal partitions.
//
// Cost: O(k n^2) time, O(k n) memory.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "vispk/error.hpp"

namespace vispk {

struct JenksResult {
  // Cluster index per input value, in input order. 0 holds the smallest values.
  std::vector<int> assignment;
  // Minimal total within-class sum of squared deviations.
  double cost = 0.0;
  // Start offset of each class in the sorted order; starts[0] == 0.
  std::vector<std::size_t> class_starts;
};

inline JenksResult jenks_breaks(const std::vector<double>& values, int k) {
  const std::size_t n = values.size();
  check(n > 0, "jenks_breaks needs at least one value");
  check(k >= 1, "cluster count must be >= 1");
  check(static_cast<std::size_t>(k) <= n, "cluster count " + std::to_string(k) +
                                              " exceeds number of values " + std::to_string(n));
  for (double v : values) check(std::isfinite(v), "jenks_breaks on a non-finite value");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  // Centre before accumulating; the objective is shift-invariant and this
  // keeps the prefix-sum cancellation small.
  long double mean = 0.0L;
  for (double v : values) mean += v;
  mean /= static_cast<long double>(n);

  std::vector<long double> s1(n + 1, 0.0L), s2(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    const long double x = static_cast<long double>(values[order[i]]) - mean;
    s1[i + 1] = s1[i] + x;
    s2[i + 1] = s2[i] + x * x;
  }
  // Sum of squared deviations of sorted[i..j], inclusive.
  auto ssd = [&](std::size_t i, std::size_t j) {
    const long double cnt = static_cast<long double>(j - i + 1);
    const long double a = s1[j + 1] - s1[i];
    const long double c = (s2[j + 1] - s2[i]) - a * a / cnt;
    return c < 0.0L ? 0.0L : c;
  };
  // Costs closer than this are treated as ties.
  const long double tol = 1e-13L * (s2[n] + 1e-300L);

  const std::size_t kk = static_cast<std::size_t>(k);
  const long double inf = std::numeric_limits<long double>::infinity();
  // best[m][i], m in 1..k
  std::vector<std::vector<long double>> best(kk + 1, std::vector<long double>(n + 1, inf));
  for (std::size_t i = 0; i < n; ++i) best[1][i] = ssd(i, n - 1);
  for (std::size_t m = 2; m <= kk; ++m) {
    for (std::size_t i = 0; i + m <= n; ++i) {
      long double b = inf;
      for (std::size_t j = i; j + m <= n; ++j) b = std::min(b, ssd(i, j) + best[m - 1][j + 1]);
      best[m][i] = b;
    }
  }

  JenksResult result;
  result.cost = static_cast<double>(best[kk][0]);
  result.assignment.assign(n, 0);
  std::size_t start = 0;
  for (std::size_t m = kk; m >= 1; --m) {
    result.class_starts.push_back(start);
    std::size_t end = n - 1;
    if (m > 1) {
      for (std::size_t j = start; j + m <= n; ++j) {
        if (ssd(start, j) + best[m - 1][j + 1] <= best[m][start] + tol) {
          end = j;
          break;
        }
      }
    }
    const int cls = static_cast<int>(kk - m);
    for (std::size_t p = start; p <= end; ++p) result.assignment[order[p]] = cls;
    start = end + 1;
  }
  return result;
}

}  // namespace vispk
