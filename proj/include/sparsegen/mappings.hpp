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
#ifndef SPARSEGEN_MAPPINGS_HPP_
#define SPARSEGEN_MAPPINGS_HPP_

#include <cmath>
#include <optional>
#include <stdexcept>

#include "sparsegen/simplex.hpp"
#include "sparsegen/types.hpp"

namespace sparsegen {

// ---------------------------------------------------------------------------
// Componentwise score transforms g(z).

enum class TransformKind { identity, exponential, square, logarithm };

/// A componentwise transform together with the regularization strength
/// lambda < 1 that controls how much probability mass survives the cut.
template <typename Scalar>
struct Transform {
  TransformKind kind = TransformKind::identity;
  Scalar lambda = Scalar(0);

  /// Equivalent temperature-like factor: gamma = 1 / (1 - lambda).
  Scalar gamma() const { return Scalar(1) / (Scalar(1) - lambda); }
};

template <typename Scalar>
void validate_transform(const Transform<Scalar>& t) {
  if (!(t.lambda < Scalar(1))) {
    throw std::invalid_argument("transform: requires lambda < 1");
  }
  switch (t.kind) {
    case TransformKind::identity:
    case TransformKind::exponential:
    case TransformKind::square:
    case TransformKind::logarithm:
      return;
  }
  throw std::invalid_argument("transform: unknown kind");
}

template <typename Scalar>
VectorX<Scalar> apply_transform(const VectorX<Scalar>& z, TransformKind kind) {
  switch (kind) {
    case TransformKind::identity:
      return z;
    case TransformKind::exponential:
      return z.array().exp();
    case TransformKind::square:
      return z.array().square();
    case TransformKind::logarithm:
      if ((z.array() <= Scalar(0)).any()) {
        throw std::domain_error(
            "apply_transform: logarithm requires strictly positive scores");
      }
      return z.array().log();
  }
  throw std::invalid_argument("apply_transform: unknown kind");
}

// ---------------------------------------------------------------------------
// Dense probability mappings.

/// softmax(z)_i = exp(z_i / T) / sum_j exp(z_j / T), computed with the
/// maximum subtracted before exponentiation.  Always full support.
template <typename Scalar>
ProbabilityVector<Scalar> softmax(const VectorX<Scalar>& z,
                                  Scalar temperature = Scalar(1)) {
  detail::check_scores(z, "softmax");
  if (!(temperature > Scalar(0))) {
    throw std::invalid_argument("softmax: requires temperature > 0");
  }
  const Scalar zmax = z.maxCoeff();
  VectorX<Scalar> p = ((z.array() - zmax) / temperature).exp();
  p /= p.sum();
  return make_probability(std::move(p));
}

/// spherical_softmax(z)_i = z_i^2 / sum_j z_j^2; undefined at the origin.
template <typename Scalar>
ProbabilityVector<Scalar> spherical_softmax(const VectorX<Scalar>& z) {
  detail::check_scores(z, "spherical_softmax");
  const Scalar denom = z.squaredNorm();
  if (denom == Scalar(0)) {
    throw std::domain_error(
        "spherical_softmax: requires a nonzero score vector");
  }
  return make_probability(VectorX<Scalar>(z.array().square() / denom));
}

/// sum_normalization(z)_i = z_i / sum_j z_j for nonnegative scores with a
/// positive total.
template <typename Scalar>
ProbabilityVector<Scalar> sum_normalization(const VectorX<Scalar>& z) {
  detail::check_scores(z, "sum_normalization");
  if ((z.array() < Scalar(0)).any()) {
    throw std::domain_error(
        "sum_normalization: requires nonnegative scores");
  }
  const Scalar denom = z.sum();
  if (!(denom > Scalar(0))) {
    throw std::domain_error("sum_normalization: requires a positive sum");
  }
  return make_probability(VectorX<Scalar>(z / denom));
}

/// Uniform distribution over the maximal entries of z.
template <typename Scalar>
ProbabilityVector<Scalar> hardmax(const VectorX<Scalar>& z) {
  detail::check_scores(z, "hardmax");
  const Scalar zmax = z.maxCoeff();
  Index ties = 0;
  for (Index i = 0; i < z.size(); ++i) ties += (z[i] == zmax) ? 1 : 0;
  VectorX<Scalar> p = VectorX<Scalar>::Zero(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    if (z[i] == zmax) p[i] = Scalar(1) / static_cast<Scalar>(ties);
  }
  return make_probability(std::move(p));
}

// ---------------------------------------------------------------------------
// Sparse probability mappings.

/// Euclidean projection of z onto the simplex.  Identity on the simplex,
/// translation invariant, and sparse: entries below the cut are exactly 0.
template <typename Scalar>
ProbabilityVector<Scalar> sparsemax(const VectorX<Scalar>& z) {
  return project_to_simplex(z);
}

/// The general controllable-sparsity mapping
///   rho(z)_i = max((g(z)_i - tau) / (1 - lambda), 0),
/// the minimizer of ||p - g(z)||^2 - lambda ||p||^2 over the simplex.
/// Equals sparsemax(g(z) / (1 - lambda)); larger lambda means a sparser
/// result.
template <typename Scalar>
ProbabilityVector<Scalar> sparsegen(const VectorX<Scalar>& z,
                                    const Transform<Scalar>& transform) {
  detail::check_scores(z, "sparsegen");
  validate_transform(transform);
  const VectorX<Scalar> g = apply_transform(z, transform.kind);
  const Scalar mass = Scalar(1) - transform.lambda;
  const auto t = detail::threshold_sorted(g, mass);
  return detail::probability_from_threshold(g, t, mass);
}

/// sparsegen with the identity transform.
template <typename Scalar>
ProbabilityVector<Scalar> sparsegen_lin(const VectorX<Scalar>& z,
                                        Scalar lambda) {
  return sparsegen(z, Transform<Scalar>{TransformKind::identity, lambda});
}

/// Anchor-point parameters shared by the cone and hourglass mappings; q is
/// the magnitude of the anchor (-q, ..., -q).
template <typename Scalar>
struct HourglassParams {
  Scalar q = Scalar(1);
};

/// Scales z toward the anchor so that the scaled scores sum to 1, then
/// projects: sparsemax(alpha * z) with alpha = (1 + K q) / (sum z + K q).
/// Undefined on the closed halfspace sum z <= -K q.
template <typename Scalar>
ProbabilityVector<Scalar> sparsecone(const VectorX<Scalar>& z,
                                     HourglassParams<Scalar> params) {
  detail::check_scores(z, "sparsecone");
  if (!(params.q >= Scalar(0))) {
    throw std::invalid_argument("sparsecone: requires q >= 0");
  }
  const Scalar kq = static_cast<Scalar>(z.size()) * params.q;
  const Scalar total = z.sum();
  if (!(total > -kq)) {
    throw std::domain_error(
        "sparsecone: requires sum of scores > -K*q");
  }
  const Scalar alpha = (Scalar(1) + kq) / (total + kq);
  return sparsemax(VectorX<Scalar>(alpha * z));
}

/// Reflection of z through the hyperplane sum z = 0 that preserves all
/// pairwise differences: m_i = z_i - 2 (sum z) / K.
template <typename Scalar>
VectorX<Scalar> mirror_point(const VectorX<Scalar>& z) {
  detail::check_scores(z, "mirror_point");
  const Scalar shift = Scalar(2) * z.sum() / static_cast<Scalar>(z.size());
  return VectorX<Scalar>(z.array() - shift);
}

/// Two-sided extension of sparsecone that treats the halfspaces
/// symmetrically: sparsemax(alpha * z) with
/// alpha = (1 + K q) / (|sum z| + K q).  Lipschitz with constant
/// 1 + 1/(K q); q -> infinity recovers sparsemax, q = 0 is scale invariant.
template <typename Scalar>
ProbabilityVector<Scalar> sparsehourglass(const VectorX<Scalar>& z,
                                          HourglassParams<Scalar> params) {
  detail::check_scores(z, "sparsehourglass");
  if (!(params.q >= Scalar(0))) {
    throw std::invalid_argument("sparsehourglass: requires q >= 0");
  }
  const Scalar kq = static_cast<Scalar>(z.size()) * params.q;
  const Scalar total = std::abs(z.sum());
  if (total + kq == Scalar(0)) {
    throw std::domain_error(
        "sparsehourglass: requires q > 0 or sum of scores != 0");
  }
  const Scalar alpha = (Scalar(1) + kq) / (total + kq);
  return sparsemax(VectorX<Scalar>(alpha * z));
}

/// Sum normalization extended to every score vector with a nonzero sum:
/// sparsehourglass with q = 0.  Agrees with sum_normalization on the
/// positive orthant and is invariant to positive rescaling.
template <typename Scalar>
ProbabilityVector<Scalar> sum_normalization_pp(const VectorX<Scalar>& z) {
  return sparsehourglass(z, HourglassParams<Scalar>{Scalar(0)});
}

// ---------------------------------------------------------------------------
// Tagged dispatch.

enum class MappingKind {
  softmax,
  spherical_softmax,
  sum_normalization,
  hardmax,
  sparsemax,
  sparsegen,
  sparsegen_lin,
  sparsecone,
  sparsehourglass,
  sum_normalization_pp,
};

/// A mapping selector plus the parameters the selected mapping needs.
/// Parameters must be present exactly when the mapping uses them
/// (temperature is optional for softmax and defaults to 1).
template <typename Scalar>
struct MappingSpec {
  MappingKind kind = MappingKind::sparsemax;
  std::optional<Transform<Scalar>> transform;  ///< sparsegen
  std::optional<Scalar> lambda;                ///< sparsegen_lin
  std::optional<Scalar> q;                     ///< sparsecone, sparsehourglass
  std::optional<Scalar> temperature;           ///< softmax
};

template <typename Scalar>
void validate(const MappingSpec<Scalar>& spec) {
  const bool wants_transform = spec.kind == MappingKind::sparsegen;
  const bool wants_lambda = spec.kind == MappingKind::sparsegen_lin;
  const bool wants_q = spec.kind == MappingKind::sparsecone ||
                       spec.kind == MappingKind::sparsehourglass;
  const bool wants_temperature = spec.kind == MappingKind::softmax;
  if (spec.transform.has_value() != wants_transform) {
    throw std::invalid_argument(
        "MappingSpec: transform must be given for sparsegen and only there");
  }
  if (spec.lambda.has_value() != wants_lambda) {
    throw std::invalid_argument(
        "MappingSpec: lambda must be given for sparsegen_lin and only there");
  }
  if (spec.q.has_value() != wants_q) {
    throw std::invalid_argument(
        "MappingSpec: q must be given for sparsecone/sparsehourglass and "
        "only there");
  }
  if (spec.temperature.has_value() && !wants_temperature) {
    throw std::invalid_argument(
        "MappingSpec: temperature applies to softmax only");
  }
}

template <typename Scalar>
ProbabilityVector<Scalar> apply(const MappingSpec<Scalar>& spec,
                                const VectorX<Scalar>& z) {
  validate(spec);
  switch (spec.kind) {
    case MappingKind::softmax:
      return softmax(z, spec.temperature.value_or(Scalar(1)));
    case MappingKind::spherical_softmax:
      return spherical_softmax(z);
    case MappingKind::sum_normalization:
      return sum_normalization(z);
    case MappingKind::hardmax:
      return hardmax(z);
    case MappingKind::sparsemax:
      return sparsemax(z);
    case MappingKind::sparsegen:
      return sparsegen(z, *spec.transform);
    case MappingKind::sparsegen_lin:
      return sparsegen_lin(z, *spec.lambda);
    case MappingKind::sparsecone:
      return sparsecone(z, HourglassParams<Scalar>{*spec.q});
    case MappingKind::sparsehourglass:
      return sparsehourglass(z, HourglassParams<Scalar>{*spec.q});
    case MappingKind::sum_normalization_pp:
      return sum_normalization_pp(z);
  }
  throw std::invalid_argument("apply: unknown mapping kind");
}

}  // namespace sparsegen

#endif  // SPARSEGEN_MAPPINGS_HPP_
