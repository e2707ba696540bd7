/* Copyright 2026 The Sparsegen Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SPARSEGEN_SIMPLEX_HPP_
#define SPARSEGEN_SIMPLEX_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sparsegen/types.hpp"

namespace sparsegen {

namespace detail {

// Finishes a threshold search once the support set is known.  tau is
// recomputed from the support entries summed in ascending index order so
// that every search strategy lands on bit-identical results.
template <typename Scalar>
ThresholdResult<Scalar> finish_threshold(const VectorX<Scalar>& v,
                                         std::vector<Index> support,
                                         Scalar target_mass) {
  std::sort(support.begin(), support.end());
  Scalar sum = Scalar(0);
  for (Index i : support) sum += v[i];
  const auto k = static_cast<Scalar>(support.size());

  ThresholdResult<Scalar> r;
  r.tau = (sum - target_mass) / k;
  r.support_size = static_cast<Index>(support.size());
  r.support = std::move(support);

  Scalar margin = std::numeric_limits<Scalar>::infinity();
  std::size_t pos = 0;
  for (Index i = 0; i < v.size(); ++i) {
    const bool in_support =
        pos < r.support.size() && r.support[pos] == i;
    if (in_support) ++pos;
    margin = std::min(margin, in_support ? v[i] - r.tau : r.tau - v[i]);
  }
  r.boundary_margin = margin;
  return r;
}

// Sort-based support search: with scores sorted descending, the support is
// the longest prefix whose smallest member still clears the running cut,
//   target_mass > sum_{j<=k} v_(j) - k * v_(k).
// Equal scores leave the comparison margin unchanged, so a tie group enters
// or leaves as a whole and the prefix never splits one.
template <typename Scalar>
ThresholdResult<Scalar> threshold_sorted(const VectorX<Scalar>& v,
                                         Scalar target_mass) {
  const Index n = v.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return v[a] > v[b]; });

  Scalar cumsum = Scalar(0);
  Index best_k = 0;
  for (Index k = 1; k <= n; ++k) {
    const Scalar vk = v[order[static_cast<std::size_t>(k - 1)]];
    cumsum += vk;
    if (target_mass > cumsum - static_cast<Scalar>(k) * vk) best_k = k;
  }

  std::vector<Index> support(order.begin(), order.begin() + best_k);
  return finish_threshold(v, std::move(support), target_mass);
}

// Randomized-pivot support search with expected linear cost.  Candidates at
// or above a random pivot score are admitted wholesale whenever the mass
// they would absorb at the pivot's level stays below the target; otherwise
// the pivot is discarded and the remaining high block is retried.
template <typename Scalar>
ThresholdResult<Scalar> threshold_pivot(const VectorX<Scalar>& v,
                                        Scalar target_mass,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Index> candidates(static_cast<std::size_t>(v.size()));
  std::iota(candidates.begin(), candidates.end(), Index(0));

  std::vector<Index> support;
  std::vector<Index> high, low;
  Scalar admitted_sum = Scalar(0);
  Scalar admitted_count = Scalar(0);

  while (!candidates.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::size_t at = pick(rng);
    const Index pivot = candidates[at];
    const Scalar pv = v[pivot];

    high.clear();
    low.clear();
    Scalar block_sum = Scalar(0);
    for (Index i : candidates) {
      if (v[i] >= pv) {
        high.push_back(i);
        block_sum += v[i];
      } else {
        low.push_back(i);
      }
    }
    const auto block_count = static_cast<Scalar>(high.size());

    if ((admitted_sum + block_sum) -
            (admitted_count + block_count) * pv <
        target_mass) {
      admitted_sum += block_sum;
      admitted_count += block_count;
      support.insert(support.end(), high.begin(), high.end());
      candidates.swap(low);
    } else {
      high.erase(std::find(high.begin(), high.end(), pivot));
      candidates.swap(high);
    }
  }
  return finish_threshold(v, std::move(support), target_mass);
}

// Turns a threshold result into probabilities.  Entries are computed
// relative to the support mean, (v_i - mean_S)/mass + 1/|S|, which keeps the
// small mass/|S| term from being absorbed when scores are large.
template <typename Scalar>
ProbabilityVector<Scalar> probability_from_threshold(
    const VectorX<Scalar>& v, const ThresholdResult<Scalar>& t,
    Scalar target_mass) {
  const Scalar k = static_cast<Scalar>(t.support_size);
  Scalar sum = Scalar(0);
  for (Index i : t.support) sum += v[i];
  const Scalar mean = sum / k;
  VectorX<Scalar> p = VectorX<Scalar>::Zero(v.size());
  for (Index i : t.support) {
    p[i] = std::max((v[i] - mean) / target_mass + Scalar(1) / k, Scalar(0));
  }
  return make_probability(std::move(p));
}

}  // namespace detail

/// Finds the cut tau with sum_i max(g_i - tau, 0) = 1 - lambda and the
/// indices above it.  Requires lambda < 1; the crossing exists and is unique
/// for any finite scores because the left side decreases from +inf to 0.
template <typename Scalar>
ThresholdResult<Scalar> threshold_and_support(const VectorX<Scalar>& g,
                                              Scalar lambda) {
  detail::check_scores(g, "threshold_and_support");
  if (!(lambda < Scalar(1))) {
    throw std::invalid_argument("threshold_and_support: requires lambda < 1");
  }
  return detail::threshold_sorted(g, Scalar(1) - lambda);
}

/// Euclidean projection of v onto the probability simplex,
///   argmin_p ||p - v||^2  s.t.  p >= 0, sum_i p_i = 1,
/// via descending sort; O(K log K).
template <typename Scalar>
ProbabilityVector<Scalar> project_to_simplex(const VectorX<Scalar>& v) {
  detail::check_scores(v, "project_to_simplex");
  const auto t = detail::threshold_sorted(v, Scalar(1));
  return detail::probability_from_threshold(v, t, Scalar(1));
}

/// Same projection computed with a seeded randomized pivot search; expected
/// O(K).  For a given support set the arithmetic matches the sort-based
/// route bit for bit, and the seed only affects running time, never values.
template <typename Scalar>
ProbabilityVector<Scalar> project_to_simplex_pivot(const VectorX<Scalar>& v,
                                                   std::uint64_t seed) {
  detail::check_scores(v, "project_to_simplex_pivot");
  const auto t = detail::threshold_pivot(v, Scalar(1), seed);
  return detail::probability_from_threshold(v, t, Scalar(1));
}

}  // namespace sparsegen

#endif  // SPARSEGEN_SIMPLEX_HPP_
