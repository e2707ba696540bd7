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
// Release gate: nine end-to-end checks, one PASS/FAIL line each, nonzero
// exit if any fails.  Tolerances, sample counts, and time budgets are fixed
// here on purpose -- do not weaken them to make a run green.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sparsegen/jacobian.hpp"
#include "sparsegen/losses.hpp"
#include "sparsegen/mappings.hpp"
#include "sparsegen/multilabel.hpp"
#include "sparsegen/simplex.hpp"

namespace sg = sparsegen;
using Vec = Eigen::VectorXd;
using Spec = sg::MappingSpec<double>;
using sg::Index;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

double max_abs_diff(const Vec& a, const Vec& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

std::string describe(double worst, double budget_s, double elapsed_s) {
  std::ostringstream out;
  out << "max deviation " << worst << ", " << elapsed_s << " s (budget "
      << budget_s << " s)";
  return out.str();
}

// --- 1. sparsegen-lin equals the exhaustive KKT minimizer ------------------

Outcome criterion_oracle() {
  const auto start = std::chrono::steady_clock::now();
  oracles::Rng rng(1001);
  const double lambdas[] = {-2.0, 0.0, 0.5, 0.9};
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index k = rng.integer(2, 6);
    const Vec z = rng.normal_vector(k, 2.0);
    for (double lambda : lambdas) {
      const Vec direct = sg::sparsegen_lin(z, lambda).probs;
      const Vec reference = oracles::exhaustive_simplex_argmin(z, lambda);
      worst = std::max(worst, max_abs_diff(direct, reference));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-8 && elapsed < 30.0, describe(worst, 30.0, elapsed)};
}

// --- 2. closed form equals projection of transformed scores ----------------

Outcome criterion_eq2() {
  oracles::Rng rng(1002);
  const double lambdas[] = {-2.0, 0.0, 0.5, 0.9};
  const sg::TransformKind kinds[] = {
      sg::TransformKind::identity, sg::TransformKind::exponential,
      sg::TransformKind::square, sg::TransformKind::logarithm};
  double worst = 0.0;
  for (sg::TransformKind kind : kinds) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Index k = rng.integer(2, 8);
      Vec z(k);
      for (Index i = 0; i < k; ++i) {
        z[i] = kind == sg::TransformKind::logarithm ? rng.uniform(0.1, 3.0)
                                                    : rng.normal(0.0, 2.0);
      }
      const double lambda = lambdas[trial % 4];
      const sg::Transform<double> transform{kind, lambda};
      const Vec direct = sg::sparsegen(z, transform).probs;
      const Vec routed =
          sg::sparsemax(Vec(sg::apply_transform(z, kind) / (1.0 - lambda)))
              .probs;
      worst = std::max(worst, max_abs_diff(direct, routed));
    }
  }
  std::ostringstream detail;
  detail << "max deviation " << worst << " over 4 transforms x 1000 inputs";
  return {worst <= 1e-12, detail.str()};
}

// --- 3. frozen point checks -------------------------------------------------

Outcome criterion_points() {
  Vec z1(2), z2(2), z3(2), want01(2), want_quarter(2);
  z1 << 0, 1;
  z2 << 100, 101;
  z3 << 1, 1.25;
  want01 << 0, 1;
  want_quarter << 0.25, 0.75;
  const double worst = std::max(
      {max_abs_diff(sg::sparsemax(z1).probs, want01),
       max_abs_diff(sg::sparsemax(z2).probs, want01),
       max_abs_diff(sg::sparsegen_lin(z3, 0.5).probs, want_quarter)});
  std::ostringstream detail;
  detail << "max deviation " << worst << " across the three fixed points";
  return {worst <= 1e-12, detail.str()};
}

// --- 4. reductions to the classical mappings --------------------------------

Outcome criterion_reductions() {
  oracles::Rng rng(1004);
  double worst_soft = 0.0, worst_sph = 0.0, worst_hg = 0.0, worst_scale = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index k = rng.integer(2, 8);

    const Vec z = rng.normal_vector(k, 1.5);
    const double lambda_exp = 1.0 - z.array().exp().sum();
    worst_soft = std::max(
        worst_soft,
        max_abs_diff(
            sg::sparsegen(z, {sg::TransformKind::exponential, lambda_exp})
                .probs,
            sg::softmax(z).probs));

    Vec znz = rng.normal_vector(k, 1.5);
    while (znz.norm() < 0.3) znz = rng.normal_vector(k, 1.5);
    const double lambda_sq = 1.0 - znz.squaredNorm();
    worst_sph = std::max(
        worst_sph,
        max_abs_diff(
            sg::sparsegen(znz, {sg::TransformKind::square, lambda_sq}).probs,
            sg::spherical_softmax(znz).probs));

    worst_hg = std::max(
        worst_hg, max_abs_diff(sg::sparsehourglass(z, {1e9}).probs,
                               sg::sparsemax(z).probs));

    Vec zs = rng.normal_vector(k, 1.5);
    while (std::abs(zs.sum()) < 0.01) zs = rng.normal_vector(k, 1.5);
    const Vec base = sg::sparsehourglass(zs, {0.0}).probs;
    for (double c : {0.5, 2.0, 10.0}) {
      worst_scale = std::max(
          worst_scale,
          max_abs_diff(sg::sparsehourglass(Vec(c * zs), {0.0}).probs, base));
    }
  }
  std::ostringstream detail;
  detail << "exp->softmax " << worst_soft << " (1e-9), sq->spherical "
         << worst_sph << " (1e-9), q=1e9->sparsemax " << worst_hg
         << " (1e-5), q=0 scale " << worst_scale << " (1e-9)";
  return {worst_soft <= 1e-9 && worst_sph <= 1e-9 && worst_hg <= 1e-5 &&
              worst_scale <= 1e-9,
          detail.str()};
}

// --- 5. analytic Jacobians vs central finite differences --------------------

bool interior_point(const Spec& spec, const Vec& z) {
  Vec projected;
  switch (spec.kind) {
    case sg::MappingKind::softmax:
      return true;
    case sg::MappingKind::sparsemax:
      projected = z;
      break;
    case sg::MappingKind::sparsegen_lin:
      projected = z / (1.0 - *spec.lambda);
      break;
    case sg::MappingKind::sparsegen:
      projected = sg::apply_transform(z, spec.transform->kind) /
                  (1.0 - spec.transform->lambda);
      break;
    case sg::MappingKind::sparsecone: {
      const double kq = static_cast<double>(z.size()) * *spec.q;
      if (z.sum() + kq <= 1e-3) return false;
      projected = z * (1.0 + kq) / (z.sum() + kq);
      break;
    }
    case sg::MappingKind::sparsehourglass:
    case sg::MappingKind::sum_normalization_pp: {
      const double q = spec.kind == sg::MappingKind::sum_normalization_pp
                           ? 0.0
                           : *spec.q;
      const double kq = static_cast<double>(z.size()) * q;
      if (std::abs(z.sum()) <= 1e-3) return false;
      projected = z * (1.0 + kq) / (std::abs(z.sum()) + kq);
      break;
    }
    default:
      return false;
  }
  return sg::threshold_and_support(projected, 0.0).boundary_margin > 1e-2;
}

Outcome criterion_jacobians() {
  std::vector<Spec> specs;
  specs.push_back({sg::MappingKind::softmax});
  specs.push_back({sg::MappingKind::sparsemax});
  Spec lin{sg::MappingKind::sparsegen_lin};
  lin.lambda = 0.5;
  specs.push_back(lin);
  lin.lambda = -1.0;
  specs.push_back(lin);
  for (auto kind :
       {sg::TransformKind::identity, sg::TransformKind::exponential,
        sg::TransformKind::square, sg::TransformKind::logarithm}) {
    Spec spec{sg::MappingKind::sparsegen};
    spec.transform = sg::Transform<double>{kind, 0.25};
    specs.push_back(spec);
  }
  Spec cone{sg::MappingKind::sparsecone};
  cone.q = 1.0;
  specs.push_back(cone);
  Spec hourglass{sg::MappingKind::sparsehourglass};
  hourglass.q = 1.0;
  specs.push_back(hourglass);
  specs.push_back({sg::MappingKind::sum_normalization_pp});

  oracles::Rng rng(1005);
  double worst_dev = 0.0, worst_colsum = 0.0;
  for (const Spec& spec : specs) {
    const bool positive =
        spec.transform.has_value() &&
        spec.transform->kind == sg::TransformKind::logarithm;
    long accepted = 0;
    for (long attempt = 0; attempt < 100000 && accepted < 1000; ++attempt) {
      Vec z(rng.integer(2, 8));
      for (Index i = 0; i < z.size(); ++i) {
        z[i] = positive ? rng.uniform(0.1, 3.0) : rng.normal(0.0, 1.5);
      }
      if (!interior_point(spec, z)) continue;
      ++accepted;
      const auto analytic = sg::analytic_jacobian(spec, z);
      const auto numeric = sg::finite_diff_jacobian(spec, z);
      worst_dev = std::max(
          worst_dev, (analytic - numeric).cwiseAbs().maxCoeff());
      worst_colsum = std::max(
          worst_colsum, analytic.colwise().sum().cwiseAbs().maxCoeff());
    }
    if (accepted < 1000) {
      return {false, "could not sample 1000 interior points per mapping"};
    }
  }
  std::ostringstream detail;
  detail << "11 mappings x 1000 points: max |J_a - J_fd| " << worst_dev
         << " (1e-4), max |colsum| " << worst_colsum << " (1e-9)";
  return {worst_dev <= 1e-4 && worst_colsum <= 1e-9, detail.str()};
}

// --- 6. Lipschitz bounds -----------------------------------------------------

Outcome criterion_lipschitz() {
  oracles::Rng rng(1006);
  const double qs[] = {0.1, 1.0, 10.0};
  const double lambdas[] = {-2.0, 0.0, 0.5, 0.9};
  long violations = 0;
  double tightest = 1e300;
  for (int trial = 0; trial < 10000; ++trial) {
    const Index k = rng.integer(2, 8);
    const Vec z1 = rng.normal_vector(k, 2.0);
    const Vec z2 = rng.normal_vector(k, 2.0);
    const double dist = (z1 - z2).norm();

    const double q = qs[trial % 3];
    const double hg_bound =
        (1.0 + 1.0 / (static_cast<double>(k) * q)) * dist;
    const double hg_dist = (sg::sparsehourglass(z1, {q}).probs -
                            sg::sparsehourglass(z2, {q}).probs)
                               .norm();
    if (hg_dist > hg_bound + 1e-12 * (1.0 + hg_bound)) ++violations;
    tightest = std::min(tightest, hg_bound - hg_dist);

    const double lambda = lambdas[trial % 4];
    const double lin_bound = dist / (1.0 - lambda);
    const double lin_dist = (sg::sparsegen_lin(z1, lambda).probs -
                             sg::sparsegen_lin(z2, lambda).probs)
                                .norm();
    if (lin_dist > lin_bound + 1e-12 * (1.0 + lin_bound)) ++violations;
    tightest = std::min(tightest, lin_bound - lin_dist);
  }
  std::ostringstream detail;
  detail << violations << " violations over 10k pairs per family, smallest "
         << "slack " << tightest;
  return {violations == 0, detail.str()};
}

// --- 7. loss property suite --------------------------------------------------

Outcome criterion_losses() {
  const auto start = std::chrono::steady_clock::now();
  oracles::Rng rng(1007);
  using LSpec = sg::LossSpec<double>;
  using sg::LossKind;

  auto random_label = [&rng](Index k) {
    std::vector<Index> idx(k);
    std::iota(idx.begin(), idx.end(), Index(0));
    std::shuffle(idx.begin(), idx.end(), rng.engine);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(k);
    const Index n_on = rng.integer(1, k);
    for (Index i = 0; i < n_on; ++i) y[idx[i]] = 1;
    return sg::label_distribution_from_binary<double>(y);
  };
  const std::vector<LSpec> specs = {
      LSpec{LossKind::sparsegen_lin_hinge, 0.5, 1.0},
      LSpec{LossKind::sparsehg_hinge, 0.0, 1.0},
      LSpec{LossKind::sparsemax_hinge},
      LSpec{LossKind::sparsemax_huber},
      LSpec{LossKind::softmax_log},
  };

  long nonneg_bad = 0, convex_bad = 0, zero_bad = 0, subgrad_bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Index k = rng.integer(2, 8);
    const auto lab = random_label(k);
    const Vec z1 = rng.normal_vector(k, 2.5);
    const Vec z2 = rng.normal_vector(k, 2.5);
    const Vec mid = 0.5 * (z1 + z2);
    for (const LSpec& spec : specs) {
      const double l1 = sg::loss(spec, z1, lab);
      const double l2 = sg::loss(spec, z2, lab);
      if (l1 < 0.0 || l2 < 0.0) ++nonneg_bad;
      if (sg::loss(spec, mid, lab) > 0.5 * (l1 + l2) + 1e-9) ++convex_bad;
      const Vec g = sg::subgradient(spec, z1, lab);
      if (l2 < l1 + g.dot(z2 - z1) - 1e-9) ++subgrad_bad;
    }
  }

  // Zero-loss characterization: constructed zero-loss points must map back
  // to eta under the paired activation.
  long zero_trials = 0;
  for (int trial = 0; zero_trials < 10000 && trial < 40000; ++trial) {
    const Index k = rng.integer(2, 8);
    const auto lab = random_label(k);
    const double n_on = static_cast<double>(lab.on_set.size());
    const double c = rng.uniform(-3.0, 3.0);
    switch (trial % 4) {
      case 0: {  // linear hinge
        const double lambda = rng.uniform(-2.0, 0.9);
        Vec z(k);
        for (Index i = 0; i < k; ++i) {
          z[i] = lab.eta[i] > 0.0
                     ? c
                     : c - (1.0 - lambda) / n_on - rng.uniform(0.0, 2.0);
        }
        if (sg::loss_sparsegen_lin_hinge(z, lab, lambda) != 0.0) break;
        ++zero_trials;
        if (max_abs_diff(sg::sparsegen_lin(z, lambda).probs, lab.eta) > 1e-9)
          ++zero_bad;
        break;
      }
      case 1: {  // hourglass hinge via fixed point
        const double q = std::abs(rng.normal(0.0, 2.0)) + 0.05;
        const double kq = static_cast<double>(k) * q;
        Vec delta(k), z(k);
        for (Index i = 0; i < k; ++i) {
          delta[i] = rng.uniform(0.05, 2.0);
          z[i] = lab.eta[i] > 0.0 ? c : c - 1.0 / n_on - delta[i];
        }
        for (int it = 0; it < 200; ++it) {
          const double inv_alpha = (std::abs(z.sum()) + kq) / (1.0 + kq);
          for (Index i = 0; i < k; ++i) {
            if (lab.eta[i] == 0.0) z[i] = c - inv_alpha / n_on - delta[i];
          }
        }
        if (sg::loss_sparsehg_hinge(z, lab, q) != 0.0) break;
        ++zero_trials;
        if (max_abs_diff(sg::sparsehourglass(z, {q}).probs, lab.eta) > 1e-9)
          ++zero_bad;
        break;
      }
      case 2: {  // huber, singleton target strictly maximal
        Vec z = rng.normal_vector(k, 2.0);
        const Index on = rng.integer(0, k - 1);
        double rest = -1e300;
        for (Index i = 0; i < k; ++i) {
          if (i != on) rest = std::max(rest, z[i]);
        }
        z[on] = rest + 1.0 + rng.uniform(0.0, 3.0);
        Eigen::VectorXi y = Eigen::VectorXi::Zero(k);
        y[on] = 1;
        const auto single = sg::label_distribution_from_binary<double>(y);
        if (std::abs(sg::loss_sparsemax_huber(z, single)) > 1e-12) break;
        ++zero_trials;
        if (max_abs_diff(sg::sparsemax(z).probs, single.eta) > 1e-9)
          ++zero_bad;
        break;
      }
      default: {  // log loss at matching logits
        Vec eta = rng.positive_vector(k, 0.1, 2.0);
        eta /= eta.sum();
        const auto full = sg::label_distribution(eta);
        const Vec z = eta.array().log() + c;
        if (std::abs(sg::loss_softmax_log(z, full)) > 1e-12) break;
        ++zero_trials;
        if (max_abs_diff(sg::softmax(z).probs, eta) > 1e-9) ++zero_bad;
        break;
      }
    }
  }

  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "10k trials x 5 losses: nonneg/convexity/subgradient failures "
         << nonneg_bad << "/" << convex_bad << "/" << subgrad_bad << "; "
         << zero_trials << " zero-loss constructions, " << zero_bad
         << " reproduction failures; " << elapsed << " s (budget 60 s)";
  return {nonneg_bad == 0 && convex_bad == 0 && subgrad_bad == 0 &&
              zero_trials >= 10000 && zero_bad == 0 && elapsed < 60.0,
          detail.str()};
}

// --- 8. desk-scale multilabel experiment ------------------------------------

Outcome criterion_experiment() {
  const auto start = std::chrono::steady_clock::now();
  sg::ExperimentConfig<double> config;
  config.base.num_instances = 2000;
  config.base.seed = 7;
  config.train_base.epochs = 200;
  config.train_base.seed = 7;
  config.sweep = {2.0, 5.0, 9.0};

  const auto rows =
      sg::run_experiment(sg::SweepSetting::mean_labels, config);
  const double elapsed = seconds_since(start);

  double min_f1 = 1.0;
  bool support_ordered = true;
  for (double value : config.sweep) {
    double hinge_support = 0.0, huber_support = 0.0;
    for (const auto& row : rows) {
      if (row.sweep_value != value) continue;
      min_f1 = std::min(min_f1, row.report.micro_f1);
      if (row.arm == sg::LossKind::sparsegen_lin_hinge ||
          row.arm == sg::LossKind::sparsehg_hinge) {
        hinge_support =
            std::max(hinge_support, row.report.mean_support_size);
      }
      if (row.arm == sg::LossKind::sparsemax_huber) {
        huber_support = row.report.mean_support_size;
      }
    }
    if (hinge_support > huber_support) support_ordered = false;
  }
  std::ostringstream detail;
  detail << "M=2000, mu in {2,5,9}: min micro-F1 " << min_f1
         << " (>= 0.5), hinge support <= huber support "
         << (support_ordered ? "holds" : "VIOLATED") << ", " << elapsed
         << " s (budget 600 s)";
  return {rows.size() == 12 && min_f1 >= 0.5 && support_ordered &&
              elapsed < 600.0,
          detail.str()};
}

// --- 9. projection benchmark -------------------------------------------------

Outcome criterion_bench() {
  const auto start = std::chrono::steady_clock::now();
  oracles::Rng rng(1009);
  double worst = 0.0;
  bool supports_match = true;
  for (Index k : {10, 100, 1000, 10000, 100000}) {
    for (int rep = 0; rep < 5; ++rep) {
      const Vec z = rng.normal_vector(k, 2.0);
      const auto by_sort = sg::project_to_simplex(z);
      const auto by_pivot = sg::project_to_simplex_pivot(z, 1009 + rep);
      worst = std::max(worst, max_abs_diff(by_sort.probs, by_pivot.probs));
      supports_match =
          supports_match && by_sort.support == by_pivot.support;
    }
  }

  const std::string command = std::string(CLI_PATH) +
                              " bench --sizes 10,100,1000,10000,100000 "
                              "--reps 5 > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  const bool command_ok =
      WIFEXITED(status) && WEXITSTATUS(status) == 0;

  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "sort vs pivot up to K=1e5: max deviation " << worst
         << " (1e-12), supports " << (supports_match ? "match" : "DIFFER")
         << ", bench command " << (command_ok ? "ok" : "FAILED") << ", "
         << elapsed << " s (budget 60 s)";
  return {worst <= 1e-12 && supports_match && command_ok && elapsed < 60.0,
          detail.str()};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*run)();
  };
  const Entry entries[] = {
      {"oracle equivalence", criterion_oracle},
      {"transformed-projection identity", criterion_eq2},
      {"fixed point checks", criterion_points},
      {"classical reductions", criterion_reductions},
      {"jacobian finite-difference suite", criterion_jacobians},
      {"lipschitz bounds", criterion_lipschitz},
      {"loss property suite", criterion_losses},
      {"desk-scale multilabel experiment", criterion_experiment},
      {"projection benchmark", criterion_bench},
  };
  int failures = 0;
  for (std::size_t i = 0; i < std::size(entries); ++i) {
    const Outcome outcome = entries[i].run();
    if (!outcome.pass) ++failures;
    std::cout << "criterion " << (i + 1) << " ("
              << entries[i].name << "): "
              << (outcome.pass ? "PASS" : "FAIL") << " -- "
              << outcome.detail << "\n";
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 9 criteria passed\n";
  return 0;
}
