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
#ifndef SPARSEGEN_JACOBIAN_HPP_
#define SPARSEGEN_JACOBIAN_HPP_

#include <cmath>
#include <stdexcept>

#include "sparsegen/mappings.hpp"
#include "sparsegen/simplex.hpp"
#include "sparsegen/types.hpp"

namespace sparsegen {

namespace detail {

// Indicator of the projection support for the scaled scores y, i.e. of
// sparsemax(y).  At support-change points the support computed by the
// threshold search picks the subgradient.
template <typename Scalar>
VectorX<Scalar> support_indicator(const VectorX<Scalar>& y) {
  const auto t = threshold_sorted(y, Scalar(1));
  VectorX<Scalar> s = VectorX<Scalar>::Zero(y.size());
  for (Index i : t.support) s[i] = Scalar(1);
  return s;
}

// J_sparsemax(y) * w = s .* w - (sum_{i in S} w_i / |S|) * s, without
// materializing the matrix.
template <typename Scalar>
VectorX<Scalar> sparsemax_jvp_core(const VectorX<Scalar>& s,
                                   const VectorX<Scalar>& w) {
  const Scalar count = s.sum();
  const Scalar mean_on_support = s.dot(w) / count;
  return VectorX<Scalar>(s.array() * (w.array() - mean_on_support));
}

template <typename Scalar>
MatrixX<Scalar> sparsemax_jacobian_core(const VectorX<Scalar>& s) {
  MatrixX<Scalar> j = MatrixX<Scalar>(s.asDiagonal());
  j.noalias() -= (s * s.transpose()) / s.sum();
  return j;
}

// Derivative of the componentwise transform, as a diagonal.
template <typename Scalar>
VectorX<Scalar> transform_gradient(const VectorX<Scalar>& z,
                                   TransformKind kind) {
  switch (kind) {
    case TransformKind::identity:
      return VectorX<Scalar>::Ones(z.size());
    case TransformKind::exponential:
      return z.array().exp();
    case TransformKind::square:
      return Scalar(2) * z;
    case TransformKind::logarithm:
      if ((z.array() <= Scalar(0)).any()) {
        throw std::domain_error(
            "transform_gradient: logarithm requires strictly positive "
            "scores");
      }
      return z.array().inverse();
  }
  throw std::invalid_argument("transform_gradient: unknown kind");
}

// Scaling factor and its rank-one correction for the cone/hourglass family:
// the input to the projection is alpha(z) * z with
//   alpha(z) = (1 + K q) / (den + K q),
// den = sum z (cone) or |sum z| (hourglass), so
//   d(alpha z)/dz = alpha I - (alpha * dden / (den + K q)) * z * 1^T,
// where dden = 1 for the cone and sgn(sum z) (with sgn(0) := +1) for the
// hourglass.
template <typename Scalar>
MatrixX<Scalar> anchored_scaling_jacobian(const VectorX<Scalar>& z, Scalar q,
                                          bool two_sided) {
  const Scalar kq = static_cast<Scalar>(z.size()) * q;
  const Scalar total = z.sum();
  const Scalar den = two_sided ? std::abs(total) : total;
  const Scalar dden =
      two_sided ? (total < Scalar(0) ? Scalar(-1) : Scalar(1)) : Scalar(1);
  const Scalar alpha = (Scalar(1) + kq) / (den + kq);
  MatrixX<Scalar> j =
      MatrixX<Scalar>::Identity(z.size(), z.size()) * alpha;
  j.noalias() -= (alpha * dden / (den + kq)) * z *
                 VectorX<Scalar>::Ones(z.size()).transpose();
  return j;
}

}  // namespace detail

/// Jacobian of sparsemax at z: Diag(s) - s s^T / |S| with s the support
/// indicator.  Symmetric, positive semidefinite, columns sum to zero.
template <typename Scalar>
MatrixX<Scalar> jacobian_sparsemax(const VectorX<Scalar>& z) {
  detail::check_scores(z, "jacobian_sparsemax");
  return detail::sparsemax_jacobian_core(detail::support_indicator(z));
}

/// Jacobian of sparsegen at z: chain rule through the scaled projection,
///   J = J_sparsemax(g(z)/(1-lambda)) * Diag(g'(z)) / (1-lambda).
template <typename Scalar>
MatrixX<Scalar> jacobian_sparsegen(const VectorX<Scalar>& z,
                                   const Transform<Scalar>& transform) {
  detail::check_scores(z, "jacobian_sparsegen");
  validate_transform(transform);
  const Scalar gamma = transform.gamma();
  const VectorX<Scalar> y(apply_transform(z, transform.kind) * gamma);
  const VectorX<Scalar> g1 = detail::transform_gradient(z, transform.kind);
  MatrixX<Scalar> j =
      detail::sparsemax_jacobian_core(detail::support_indicator(y));
  j *= gamma;
  j *= g1.asDiagonal();
  return j;
}

/// Jacobian of softmax at z: (Diag(p) - p p^T) / T.
template <typename Scalar>
MatrixX<Scalar> jacobian_softmax(const VectorX<Scalar>& z,
                                 Scalar temperature = Scalar(1)) {
  const VectorX<Scalar> p = softmax(z, temperature).probs;
  MatrixX<Scalar> j = MatrixX<Scalar>(p.asDiagonal());
  j.noalias() -= p * p.transpose();
  return j / temperature;
}

/// Jacobian of sparsecone at z (defined for sum z > -K q).
template <typename Scalar>
MatrixX<Scalar> jacobian_sparsecone(const VectorX<Scalar>& z,
                                    HourglassParams<Scalar> params) {
  detail::check_scores(z, "jacobian_sparsecone");
  if (!(params.q >= Scalar(0))) {
    throw std::invalid_argument("jacobian_sparsecone: requires q >= 0");
  }
  const Scalar kq = static_cast<Scalar>(z.size()) * params.q;
  if (!(z.sum() > -kq)) {
    throw std::domain_error(
        "jacobian_sparsecone: requires sum of scores > -K*q");
  }
  const MatrixX<Scalar> jg =
      detail::anchored_scaling_jacobian(z, params.q, /*two_sided=*/false);
  const Scalar alpha = (Scalar(1) + kq) / (z.sum() + kq);
  const VectorX<Scalar> s = detail::support_indicator(VectorX<Scalar>(alpha * z));
  return detail::sparsemax_jacobian_core(s) * jg;
}

/// Jacobian of sparsehourglass at z.  On the sum z = 0 ridge, where |sum z|
/// has a kink, the one-sided derivative with sgn(0) := +1 is returned.
template <typename Scalar>
MatrixX<Scalar> jacobian_sparsehourglass(const VectorX<Scalar>& z,
                                         HourglassParams<Scalar> params) {
  detail::check_scores(z, "jacobian_sparsehourglass");
  if (!(params.q >= Scalar(0))) {
    throw std::invalid_argument(
        "jacobian_sparsehourglass: requires q >= 0");
  }
  const Scalar kq = static_cast<Scalar>(z.size()) * params.q;
  const Scalar total = std::abs(z.sum());
  if (total + kq == Scalar(0)) {
    throw std::domain_error(
        "jacobian_sparsehourglass: requires q > 0 or sum of scores != 0");
  }
  const MatrixX<Scalar> jg =
      detail::anchored_scaling_jacobian(z, params.q, /*two_sided=*/true);
  const Scalar alpha = (Scalar(1) + kq) / (total + kq);
  const VectorX<Scalar> s = detail::support_indicator(VectorX<Scalar>(alpha * z));
  return detail::sparsemax_jacobian_core(s) * jg;
}

/// Analytic Jacobian of the mapping selected by `spec`, where one exists.
template <typename Scalar>
MatrixX<Scalar> analytic_jacobian(const MappingSpec<Scalar>& spec,
                                  const VectorX<Scalar>& z) {
  validate(spec);
  switch (spec.kind) {
    case MappingKind::softmax:
      return jacobian_softmax(z, spec.temperature.value_or(Scalar(1)));
    case MappingKind::sparsemax:
      return jacobian_sparsemax(z);
    case MappingKind::sparsegen:
      return jacobian_sparsegen(z, *spec.transform);
    case MappingKind::sparsegen_lin:
      return jacobian_sparsegen(
          z, Transform<Scalar>{TransformKind::identity, *spec.lambda});
    case MappingKind::sparsecone:
      return jacobian_sparsecone(z, HourglassParams<Scalar>{*spec.q});
    case MappingKind::sparsehourglass:
      return jacobian_sparsehourglass(z, HourglassParams<Scalar>{*spec.q});
    case MappingKind::sum_normalization_pp:
      return jacobian_sparsehourglass(z, HourglassParams<Scalar>{Scalar(0)});
    default:
      throw std::invalid_argument(
          "analytic_jacobian: mapping has no analytic Jacobian here");
  }
}

/// Jacobian-vector product J(z) * direction without materializing J.
template <typename Scalar>
VectorX<Scalar> jvp(const MappingSpec<Scalar>& spec, const VectorX<Scalar>& z,
                    const VectorX<Scalar>& direction) {
  validate(spec);
  detail::check_scores(z, "jvp");
  if (direction.size() != z.size()) {
    throw std::invalid_argument("jvp: direction length must match scores");
  }
  switch (spec.kind) {
    case MappingKind::softmax: {
      const Scalar t = spec.temperature.value_or(Scalar(1));
      const VectorX<Scalar> p = softmax(z, t).probs;
      return VectorX<Scalar>(
          (p.array() * (direction.array() - p.dot(direction))) / t);
    }
    case MappingKind::sparsemax:
      return detail::sparsemax_jvp_core(detail::support_indicator(z),
                                        direction);
    case MappingKind::sparsegen:
    case MappingKind::sparsegen_lin: {
      const Transform<Scalar> tr =
          spec.kind == MappingKind::sparsegen
              ? *spec.transform
              : Transform<Scalar>{TransformKind::identity, *spec.lambda};
      validate_transform(tr);
      const Scalar gamma = tr.gamma();
      const VectorX<Scalar> y(apply_transform(z, tr.kind) * gamma);
      const VectorX<Scalar> g1 = detail::transform_gradient(z, tr.kind);
      const VectorX<Scalar> w(g1.array() * direction.array() * gamma);
      return detail::sparsemax_jvp_core(detail::support_indicator(y), w);
    }
    case MappingKind::sparsecone:
    case MappingKind::sparsehourglass:
    case MappingKind::sum_normalization_pp: {
      const bool two_sided = spec.kind != MappingKind::sparsecone;
      const Scalar q = spec.kind == MappingKind::sum_normalization_pp
                           ? Scalar(0)
                           : *spec.q;
      const Scalar kq = static_cast<Scalar>(z.size()) * q;
      const Scalar total = z.sum();
      const Scalar den = two_sided ? std::abs(total) : total;
      if (!two_sided && !(total > -kq)) {
        throw std::domain_error("jvp: requires sum of scores > -K*q");
      }
      if (den + kq == Scalar(0)) {
        throw std::domain_error(
            "jvp: requires q > 0 or sum of scores != 0");
      }
      const Scalar dden =
          two_sided ? (total < Scalar(0) ? Scalar(-1) : Scalar(1)) : Scalar(1);
      const Scalar alpha = (Scalar(1) + kq) / (den + kq);
      const VectorX<Scalar> w(
          alpha * direction.array() -
          (alpha * dden / (den + kq)) * direction.sum() * z.array());
      return detail::sparsemax_jvp_core(
          detail::support_indicator(VectorX<Scalar>(alpha * z)), w);
    }
    default:
      throw std::invalid_argument("jvp: mapping has no Jacobian here");
  }
}

/// Central-difference Jacobian of any mapping spec, column by column:
/// J[:, j] ~= (rho(z + h e_j) - rho(z - h e_j)) / (2h).
template <typename Scalar>
MatrixX<Scalar> finite_diff_jacobian(const MappingSpec<Scalar>& spec,
                                     const VectorX<Scalar>& z,
                                     Scalar h = Scalar(1e-6)) {
  validate(spec);
  detail::check_scores(z, "finite_diff_jacobian");
  if (!(h > Scalar(0))) {
    throw std::invalid_argument("finite_diff_jacobian: requires h > 0");
  }
  const Index n = z.size();
  MatrixX<Scalar> j(n, n);
  VectorX<Scalar> probe = z;
  for (Index col = 0; col < n; ++col) {
    probe[col] = z[col] + h;
    const VectorX<Scalar> up = apply(spec, probe).probs;
    probe[col] = z[col] - h;
    const VectorX<Scalar> down = apply(spec, probe).probs;
    probe[col] = z[col];
    j.col(col) = (up - down) / (Scalar(2) * h);
  }
  return j;
}

}  // namespace sparsegen

#endif  // SPARSEGEN_JACOBIAN_HPP_
