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
#ifndef SPARSEGEN_TYPES_HPP_
#define SPARSEGEN_TYPES_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsegen {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A point on the probability simplex together with its strict support.
template <typename Scalar>
struct ProbabilityVector {
  VectorX<Scalar> probs;
  std::vector<Index> support;  ///< indices i with probs[i] > 0, ascending
};

/// Builds a ProbabilityVector, deriving the support from the strictly
/// positive entries of `probs`.
template <typename Scalar>
ProbabilityVector<Scalar> make_probability(VectorX<Scalar> probs) {
  ProbabilityVector<Scalar> out;
  out.support.reserve(static_cast<std::size_t>(probs.size()));
  for (Index i = 0; i < probs.size(); ++i) {
    if (probs[i] > Scalar(0)) out.support.push_back(i);
  }
  out.probs = std::move(probs);
  return out;
}

/// Result of the simplex threshold search: the cut value tau, the indices
/// that stay above it, and the distance of the nearest score to the cut.
template <typename Scalar>
struct ThresholdResult {
  Scalar tau = Scalar(0);
  std::vector<Index> support;  ///< ascending indices with g[i] > tau
  Index support_size = 0;
  /// Signed distance of the score closest to tau (support side measured as
  /// g[i] - tau, complement side as tau - g[i]).  Values near zero mean the
  /// input sits on a support-change boundary where the map is not smooth.
  Scalar boundary_margin = Scalar(0);

  bool at_boundary(Scalar tol = Scalar(1e-12)) const {
    return boundary_margin <= tol;
  }
};

namespace detail {

template <typename Scalar>
void check_scores(const VectorX<Scalar>& z, const char* who) {
  if (z.size() == 0) {
    throw std::invalid_argument(std::string(who) +
                                ": score vector must be non-empty");
  }
  if (!z.allFinite()) {
    throw std::domain_error(std::string(who) + ": scores must be finite");
  }
}

}  // namespace detail

}  // namespace sparsegen

#endif  // SPARSEGEN_TYPES_HPP_
