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
#ifndef SPARSEGEN_LOSSES_HPP_
#define SPARSEGEN_LOSSES_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sparsegen/mappings.hpp"
#include "sparsegen/simplex.hpp"
#include "sparsegen/types.hpp"

namespace sparsegen {

/// Target distribution over labels: nonnegative, sums to one, with the
/// indices carrying mass listed ascending.
template <typename Scalar>
struct LabelDistribution {
  VectorX<Scalar> eta;
  std::vector<Index> on_set;
};

/// Uniform distribution over the set labels of a 0/1 indicator vector.
template <typename Scalar = double>
LabelDistribution<Scalar> label_distribution_from_binary(
    const Eigen::VectorXi& y) {
  LabelDistribution<Scalar> out;
  out.eta = VectorX<Scalar>::Zero(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) {
      throw std::invalid_argument(
          "label_distribution_from_binary: labels must be 0 or 1");
    }
    if (y[i] == 1) out.on_set.push_back(i);
  }
  if (out.on_set.empty()) {
    throw std::invalid_argument(
        "label_distribution_from_binary: needs at least one set label");
  }
  const Scalar mass = Scalar(1) / static_cast<Scalar>(out.on_set.size());
  for (Index i : out.on_set) out.eta[i] = mass;
  return out;
}

/// Wraps an arbitrary distribution as a label target.
template <typename Scalar>
LabelDistribution<Scalar> label_distribution(VectorX<Scalar> eta) {
  if (eta.size() == 0) {
    throw std::invalid_argument("label_distribution: eta must be non-empty");
  }
  if ((eta.array() < Scalar(0)).any()) {
    throw std::invalid_argument("label_distribution: eta must be nonnegative");
  }
  if (std::abs(eta.sum() - Scalar(1)) > Scalar(1e-9)) {
    throw std::invalid_argument("label_distribution: eta must sum to 1");
  }
  LabelDistribution<Scalar> out;
  for (Index i = 0; i < eta.size(); ++i) {
    if (eta[i] > Scalar(0)) out.on_set.push_back(i);
  }
  out.eta = std::move(eta);
  return out;
}

namespace detail {

template <typename Scalar>
void check_loss_args(const VectorX<Scalar>& z,
                     const LabelDistribution<Scalar>& labels,
                     const char* who) {
  check_scores(z, who);
  if (labels.eta.size() != z.size()) {
    throw std::invalid_argument(std::string(who) +
                                ": eta length must match scores");
  }
  if (labels.on_set.empty()) {
    throw std::invalid_argument(std::string(who) +
                                ": eta must put mass somewhere");
  }
}

// Indices with eta == 0, complementing on_set.
template <typename Scalar>
std::vector<Index> off_set(const LabelDistribution<Scalar>& labels) {
  std::vector<Index> off;
  std::size_t pos = 0;
  for (Index i = 0; i < labels.eta.size(); ++i) {
    if (pos < labels.on_set.size() && labels.on_set[pos] == i) {
      ++pos;
    } else {
      off.push_back(i);
    }
  }
  return off;
}

template <typename Scalar>
Scalar sign0(Scalar x) {  // subgradient choice for |.| at 0
  return x > Scalar(0) ? Scalar(1) : (x < Scalar(0) ? Scalar(-1) : Scalar(0));
}

}  // namespace detail

/// Convex hinge companion of sparsegen with the identity transform:
/// ties set labels together and pushes each set label eta_i*(1-lambda)
/// above every unset one,
///   L = 1/(1-lambda) sum_{i!=j set} |z_i - z_j|
///     + sum_{i set, j unset} max(eta_i - (z_i - z_j)/(1-lambda), 0).
template <typename Scalar>
Scalar loss_sparsegen_lin_hinge(const VectorX<Scalar>& z,
                                const LabelDistribution<Scalar>& labels,
                                Scalar lambda) {
  detail::check_loss_args(z, labels, "loss_sparsegen_lin_hinge");
  if (!(lambda < Scalar(1))) {
    throw std::invalid_argument(
        "loss_sparsegen_lin_hinge: requires lambda < 1");
  }
  const Scalar gamma = Scalar(1) / (Scalar(1) - lambda);
  const auto off = detail::off_set(labels);
  Scalar loss = Scalar(0);
  for (Index i : labels.on_set) {
    for (Index j : labels.on_set) {
      if (i != j) loss += gamma * std::abs(z[i] - z[j]);
    }
    for (Index j : off) {
      loss += std::max(labels.eta[i] - (z[i] - z[j]) * gamma, Scalar(0));
    }
  }
  return loss;
}

/// The lambda = 0 member of the family above.
template <typename Scalar>
Scalar loss_sparsemax_hinge(const VectorX<Scalar>& z,
                            const LabelDistribution<Scalar>& labels) {
  return loss_sparsegen_lin_hinge(z, labels, Scalar(0));
}

/// Hinge companion of sparsehourglass: margins are measured against the
/// local scale alpha(z) = (1 + Kq)/(|sum z| + Kq),
///   L = sum_{i!=j set} |z_i - z_j|
///     + sum_{i set, j unset} max(eta_i/alpha(z) - (z_i - z_j), 0).
template <typename Scalar>
Scalar loss_sparsehg_hinge(const VectorX<Scalar>& z,
                           const LabelDistribution<Scalar>& labels, Scalar q) {
  detail::check_loss_args(z, labels, "loss_sparsehg_hinge");
  if (!(q > Scalar(0))) {
    throw std::invalid_argument("loss_sparsehg_hinge: requires q > 0");
  }
  const Scalar kq = static_cast<Scalar>(z.size()) * q;
  const Scalar inv_alpha = (std::abs(z.sum()) + kq) / (Scalar(1) + kq);
  const auto off = detail::off_set(labels);
  Scalar loss = Scalar(0);
  for (Index i : labels.on_set) {
    for (Index j : labels.on_set) {
      if (i != j) loss += std::abs(z[i] - z[j]);
    }
    for (Index j : off) {
      loss += std::max(labels.eta[i] * inv_alpha - (z[i] - z[j]), Scalar(0));
    }
  }
  return loss;
}

/// Smooth companion of sparsemax,
///   L = -eta^T z + 1/2 sum_{j in S(z)} (z_j^2 - tau(z)^2) + 1/2 ||eta||^2,
/// with tau and S from the unit-mass threshold search.  Zero exactly when
/// sparsemax(z) reproduces eta.
template <typename Scalar>
Scalar loss_sparsemax_huber(const VectorX<Scalar>& z,
                            const LabelDistribution<Scalar>& labels) {
  detail::check_loss_args(z, labels, "loss_sparsemax_huber");
  const auto t = threshold_and_support(z, Scalar(0));
  Scalar quad = Scalar(0);
  for (Index j : t.support) quad += z[j] * z[j] - t.tau * t.tau;
  // Nonnegative analytically; the clamp only absorbs rounding near zero.
  return std::max(-labels.eta.dot(z) + quad / Scalar(2) +
                      labels.eta.squaredNorm() / Scalar(2),
                  Scalar(0));
}

/// KL divergence from eta to softmax(z), computed with shifted logits.
template <typename Scalar>
Scalar loss_softmax_log(const VectorX<Scalar>& z,
                        const LabelDistribution<Scalar>& labels) {
  detail::check_loss_args(z, labels, "loss_softmax_log");
  const Scalar zmax = z.maxCoeff();
  const Scalar logsum = std::log((z.array() - zmax).exp().sum());
  Scalar loss = Scalar(0);
  for (Index i : labels.on_set) {
    const Scalar log_p = (z[i] - zmax) - logsum;
    loss += labels.eta[i] * (std::log(labels.eta[i]) - log_p);
  }
  // KL divergence is nonnegative; clamp away rounding residue.
  return std::max(loss, Scalar(0));
}

// ---------------------------------------------------------------------------
// Tagged dispatch.

enum class LossKind {
  sparsegen_lin_hinge,
  sparsehg_hinge,
  sparsemax_hinge,
  sparsemax_huber,
  softmax_log,
};

/// Loss selector; lambda feeds sparsegen_lin_hinge, q feeds sparsehg_hinge,
/// the rest take no parameters.
template <typename Scalar>
struct LossSpec {
  LossKind kind = LossKind::sparsemax_hinge;
  Scalar lambda = Scalar(0);
  Scalar q = Scalar(1);
};

template <typename Scalar>
void validate(const LossSpec<Scalar>& spec) {
  switch (spec.kind) {
    case LossKind::sparsegen_lin_hinge:
      if (!(spec.lambda < Scalar(1))) {
        throw std::invalid_argument("LossSpec: requires lambda < 1");
      }
      return;
    case LossKind::sparsehg_hinge:
      if (!(spec.q > Scalar(0))) {
        throw std::invalid_argument("LossSpec: requires q > 0");
      }
      return;
    case LossKind::sparsemax_hinge:
    case LossKind::sparsemax_huber:
    case LossKind::softmax_log:
      return;
  }
  throw std::invalid_argument("LossSpec: unknown kind");
}

template <typename Scalar>
Scalar loss(const LossSpec<Scalar>& spec, const VectorX<Scalar>& z,
            const LabelDistribution<Scalar>& labels) {
  validate(spec);
  switch (spec.kind) {
    case LossKind::sparsegen_lin_hinge:
      return loss_sparsegen_lin_hinge(z, labels, spec.lambda);
    case LossKind::sparsehg_hinge:
      return loss_sparsehg_hinge(z, labels, spec.q);
    case LossKind::sparsemax_hinge:
      return loss_sparsemax_hinge(z, labels);
    case LossKind::sparsemax_huber:
      return loss_sparsemax_huber(z, labels);
    case LossKind::softmax_log:
      return loss_softmax_log(z, labels);
  }
  throw std::invalid_argument("loss: unknown kind");
}

/// A subgradient of the selected loss at z.  Kinks take sign(0) = 0 for the
/// absolute-value terms and drop inactive hinges, which always lands inside
/// the subdifferential.
template <typename Scalar>
VectorX<Scalar> subgradient(const LossSpec<Scalar>& spec,
                            const VectorX<Scalar>& z,
                            const LabelDistribution<Scalar>& labels) {
  validate(spec);
  detail::check_loss_args(z, labels, "subgradient");
  VectorX<Scalar> g = VectorX<Scalar>::Zero(z.size());
  switch (spec.kind) {
    case LossKind::softmax_log:
      return VectorX<Scalar>(softmax(z).probs - labels.eta);
    case LossKind::sparsemax_huber:
      return VectorX<Scalar>(sparsemax(z).probs - labels.eta);
    case LossKind::sparsemax_hinge:
    case LossKind::sparsegen_lin_hinge: {
      const Scalar lambda =
          spec.kind == LossKind::sparsemax_hinge ? Scalar(0) : spec.lambda;
      if (!(lambda < Scalar(1))) {
        throw std::invalid_argument("subgradient: requires lambda < 1");
      }
      const Scalar gamma = Scalar(1) / (Scalar(1) - lambda);
      const auto off = detail::off_set(labels);
      for (Index i : labels.on_set) {
        for (Index j : labels.on_set) {
          if (i == j) continue;
          const Scalar s = detail::sign0(z[i] - z[j]) * gamma;
          g[i] += s;
          g[j] -= s;
        }
        for (Index j : off) {
          if (labels.eta[i] - (z[i] - z[j]) * gamma > Scalar(0)) {
            g[i] -= gamma;
            g[j] += gamma;
          }
        }
      }
      return g;
    }
    case LossKind::sparsehg_hinge: {
      if (!(spec.q > Scalar(0))) {
        throw std::invalid_argument("subgradient: requires q > 0");
      }
      const Scalar kq = static_cast<Scalar>(z.size()) * spec.q;
      const Scalar total = z.sum();
      const Scalar inv_alpha = (std::abs(total) + kq) / (Scalar(1) + kq);
      // d(1/alpha)/dz_l = sgn(sum z)/(1 + Kq) for every l.
      const Scalar dinv_alpha = detail::sign0(total) / (Scalar(1) + kq);
      const auto off = detail::off_set(labels);
      for (Index i : labels.on_set) {
        for (Index j : labels.on_set) {
          if (i == j) continue;
          const Scalar s = detail::sign0(z[i] - z[j]);
          g[i] += s;
          g[j] -= s;
        }
        for (Index j : off) {
          if (labels.eta[i] * inv_alpha - (z[i] - z[j]) > Scalar(0)) {
            g[i] -= Scalar(1);
            g[j] += Scalar(1);
            g.array() += labels.eta[i] * dinv_alpha;
          }
        }
      }
      return g;
    }
  }
  throw std::invalid_argument("subgradient: unknown kind");
}

}  // namespace sparsegen

#endif  // SPARSEGEN_LOSSES_HPP_
