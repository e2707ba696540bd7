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
// Synthetic multilabel bag-of-words corpus, a linear model trained by
// minibatch subgradient descent on any of the losses, and the evaluation
// metrics (micro-F1, Jensen-Shannon divergence, sparsity statistics).

#ifndef SPARSEGEN_MULTILABEL_HPP_
#define SPARSEGEN_MULTILABEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsegen/losses.hpp"
#include "sparsegen/mappings.hpp"

namespace sparsegen {

// ---------------------------------------------------------------------------
// Dataset generation.

/// How the number of on-labels per instance is drawn.  All draws are clamped
/// to [1, num_labels].
enum class LabelCountLaw {
  uniform_around_mean,  ///< uniform over {mu-1, mu, mu+1}
  uniform_range,        ///< uniform over {5-range, ..., 5+range}
  poisson,              ///< Poisson with the configured mean
};

struct SynthConfig {
  Index num_instances = 5000;
  Index vocab_size = 10;
  Index num_labels = 10;
  LabelCountLaw law = LabelCountLaw::uniform_around_mean;
  int mu = 5;                  // uniform_around_mean only
  int range = 2;               // uniform_range only
  double poisson_mean = 5.0;   // poisson only
  Index doc_length = 2000;
  double train_fraction = 0.5;
  double val_fraction = 0.2;
  double test_fraction = 0.3;
  std::uint64_t seed = 0;
};

inline void validate(const SynthConfig& config) {
  if (config.num_instances < 1 || config.vocab_size < 1 ||
      config.num_labels < 1 || config.doc_length < 1) {
    throw std::invalid_argument(
        "SynthConfig: counts and document length must be positive");
  }
  const double total = config.train_fraction + config.val_fraction +
                       config.test_fraction;
  if (config.train_fraction < 0 || config.val_fraction < 0 ||
      config.test_fraction < 0 || std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "SynthConfig: split fractions must be nonnegative and sum to 1");
  }
  switch (config.law) {
    case LabelCountLaw::uniform_around_mean:
      if (config.mu < 2 || config.mu > 9) {
        throw std::invalid_argument("SynthConfig: mu must lie in 2..9");
      }
      break;
    case LabelCountLaw::uniform_range:
      if (config.range < 0 || config.range > 4) {
        throw std::invalid_argument("SynthConfig: range must lie in 0..4");
      }
      break;
    case LabelCountLaw::poisson:
      if (!(config.poisson_mean > 0)) {
        throw std::invalid_argument(
            "SynthConfig: poisson mean must be positive");
      }
      break;
  }
}

template <typename Scalar>
struct LabeledInstance {
  VectorX<Scalar> x;               // word counts normalized by doc length
  Eigen::VectorXi y;               // binary label indicators
  LabelDistribution<Scalar> eta;   // y normalized to sum 1
};

template <typename Scalar>
struct Dataset {
  SynthConfig config;
  std::vector<LabeledInstance<Scalar>> train;
  std::vector<LabeledInstance<Scalar>> val;
  std::vector<LabeledInstance<Scalar>> test;
};

namespace detail {

inline Index draw_label_count(const SynthConfig& config,
                              std::mt19937_64& rng) {
  long n = 0;
  switch (config.law) {
    case LabelCountLaw::uniform_around_mean: {
      std::uniform_int_distribution<int> d(config.mu - 1, config.mu + 1);
      n = d(rng);
      break;
    }
    case LabelCountLaw::uniform_range: {
      std::uniform_int_distribution<int> d(5 - config.range,
                                           5 + config.range);
      n = d(rng);
      break;
    }
    case LabelCountLaw::poisson: {
      std::poisson_distribution<long> d(config.poisson_mean);
      n = d(rng);
      break;
    }
  }
  return std::clamp<long>(n, 1, config.num_labels);
}

/// One draw from a symmetric Dirichlet via normalized gamma variates.
template <typename Scalar>
VectorX<Scalar> dirichlet_row(Index size, double alpha,
                              std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  VectorX<Scalar> row(size);
  Scalar sum = Scalar(0);
  do {
    for (Index i = 0; i < size; ++i) {
      row[i] = static_cast<Scalar>(gamma(rng));
      sum += row[i];
    }
  } while (!(sum > Scalar(0)));  // guard against total underflow
  return row / sum;
}

}  // namespace detail

/// Draws the corpus: one word distribution per label (symmetric
/// Dirichlet(0.5) over the vocabulary), then per instance a label count by
/// the configured law, that many labels without replacement, and doc_length
/// words from the uniform mixture of the chosen labels' distributions.
/// Splits are carved off in generation order.
template <typename Scalar = double>
Dataset<Scalar> generate_synthetic(const SynthConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.seed);

  MatrixX<Scalar> word_dists(config.num_labels, config.vocab_size);
  for (Index k = 0; k < config.num_labels; ++k) {
    word_dists.row(k) =
        detail::dirichlet_row<Scalar>(config.vocab_size, 0.5, rng)
            .transpose();
  }

  std::vector<Index> label_pool(config.num_labels);
  std::iota(label_pool.begin(), label_pool.end(), Index(0));

  std::vector<LabeledInstance<Scalar>> instances;
  instances.reserve(config.num_instances);
  for (Index m = 0; m < config.num_instances; ++m) {
    const Index n_on = detail::draw_label_count(config, rng);
    std::shuffle(label_pool.begin(), label_pool.end(), rng);

    Eigen::VectorXi y = Eigen::VectorXi::Zero(config.num_labels);
    VectorX<Scalar> mixture = VectorX<Scalar>::Zero(config.vocab_size);
    for (Index i = 0; i < n_on; ++i) {
      y[label_pool[i]] = 1;
      mixture += word_dists.row(label_pool[i]).transpose();
    }
    mixture /= static_cast<Scalar>(n_on);

    std::discrete_distribution<int> word(mixture.data(),
                                         mixture.data() + mixture.size());
    VectorX<Scalar> counts = VectorX<Scalar>::Zero(config.vocab_size);
    for (Index w = 0; w < config.doc_length; ++w) counts[word(rng)] += 1;

    LabeledInstance<Scalar> inst;
    inst.x = counts / static_cast<Scalar>(config.doc_length);
    inst.y = y;
    inst.eta = label_distribution_from_binary<Scalar>(y);
    instances.push_back(std::move(inst));
  }

  const Index n_train =
      static_cast<Index>(config.num_instances * config.train_fraction);
  const Index n_val =
      static_cast<Index>(config.num_instances * config.val_fraction);
  Dataset<Scalar> data;
  data.config = config;
  data.train.assign(instances.begin(), instances.begin() + n_train);
  data.val.assign(instances.begin() + n_train,
                  instances.begin() + n_train + n_val);
  data.test.assign(instances.begin() + n_train + n_val, instances.end());
  return data;
}

// ---------------------------------------------------------------------------
// Linear model and training.

template <typename Scalar>
struct LinearModel {
  MatrixX<Scalar> W;  // num_labels x feature_dim
  VectorX<Scalar> b;

  VectorX<Scalar> scores(const VectorX<Scalar>& x) const {
    if (x.size() != W.cols()) {
      throw std::invalid_argument("LinearModel: feature size mismatch");
    }
    return W * x + b;
  }
};

template <typename Scalar>
LinearModel<Scalar> zero_model(Index num_labels, Index feature_dim) {
  return {MatrixX<Scalar>::Zero(num_labels, feature_dim),
          VectorX<Scalar>::Zero(num_labels)};
}

template <typename Scalar>
struct TrainConfig {
  LossSpec<Scalar> loss;
  Index epochs = 50;
  Index batch_size = 32;
  Scalar learning_rate = Scalar(0.1);
  std::uint64_t seed = 0;
  Scalar p0 = Scalar(0.3);  // decision threshold, softmax arm only
};

template <typename Scalar>
void validate(const TrainConfig<Scalar>& config) {
  validate(config.loss);
  if (config.epochs < 0) {
    throw std::invalid_argument("TrainConfig: epochs must be nonnegative");
  }
  if (config.batch_size < 1) {
    throw std::invalid_argument("TrainConfig: batch size must be positive");
  }
  if (!(config.learning_rate > Scalar(0))) {
    throw std::invalid_argument(
        "TrainConfig: learning rate must be positive");
  }
  if (config.loss.kind == LossKind::softmax_log &&
      !(config.p0 > Scalar(0) && config.p0 < Scalar(1))) {
    throw std::invalid_argument("TrainConfig: p0 must lie in (0,1)");
  }
}

// ---------------------------------------------------------------------------
// Prediction: each loss is paired with the activation whose zero-loss set it
// penalizes; the on-set is the activation's support, except the softmax arm
// which thresholds at p0.

template <typename Scalar>
struct Prediction {
  ProbabilityVector<Scalar> rho;
  std::vector<Index> on_set;
};

template <typename Scalar>
ProbabilityVector<Scalar> arm_activation(const LossSpec<Scalar>& spec,
                                         const VectorX<Scalar>& z) {
  switch (spec.kind) {
    case LossKind::sparsegen_lin_hinge:
      return sparsegen_lin(z, spec.lambda);
    case LossKind::sparsemax_hinge:
      return sparsegen_lin(z, Scalar(0));
    case LossKind::sparsehg_hinge:
      return sparsehourglass(z, HourglassParams<Scalar>{spec.q});
    case LossKind::sparsemax_huber:
      return sparsemax(z);
    case LossKind::softmax_log:
      return softmax(z);
  }
  throw std::invalid_argument("arm_activation: unknown loss kind");
}

template <typename Scalar>
Prediction<Scalar> predict(const LinearModel<Scalar>& model,
                           const VectorX<Scalar>& x,
                           const TrainConfig<Scalar>& config) {
  Prediction<Scalar> out;
  out.rho = arm_activation(config.loss, model.scores(x));
  if (config.loss.kind == LossKind::softmax_log) {
    for (Index i = 0; i < out.rho.probs.size(); ++i) {
      if (out.rho.probs[i] > config.p0) out.on_set.push_back(i);
    }
  } else {
    out.on_set = out.rho.support;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics.

/// Micro-averaged F1: 2TP / (2TP + FP + FN) pooled over every
/// (instance, label) pair; 0 when the denominator vanishes.
inline double micro_f1(const std::vector<std::vector<Index>>& predictions,
                       const std::vector<std::vector<Index>>& truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("micro_f1: prediction/truth length mismatch");
  }
  long tp = 0, fp = 0, fn = 0;
  std::vector<Index> pred_sorted, truth_sorted, common;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    pred_sorted = predictions[i];
    truth_sorted = truths[i];
    std::sort(pred_sorted.begin(), pred_sorted.end());
    std::sort(truth_sorted.begin(), truth_sorted.end());
    common.clear();
    std::set_intersection(pred_sorted.begin(), pred_sorted.end(),
                          truth_sorted.begin(), truth_sorted.end(),
                          std::back_inserter(common));
    tp += static_cast<long>(common.size());
    fp += static_cast<long>(pred_sorted.size() - common.size());
    fn += static_cast<long>(truth_sorted.size() - common.size());
  }
  const long denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

/// Jensen-Shannon divergence in natural log, with 0 ln 0 := 0.  Bounded by
/// ln 2; symmetric in its arguments.
template <typename Scalar>
Scalar jsd(const VectorX<Scalar>& p, const VectorX<Scalar>& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("jsd: length mismatch");
  }
  auto half_kl = [](const VectorX<Scalar>& a, const VectorX<Scalar>& m) {
    Scalar total = Scalar(0);
    for (Index i = 0; i < a.size(); ++i) {
      if (a[i] > Scalar(0)) total += a[i] * std::log(a[i] / m[i]);
    }
    return total / Scalar(2);
  };
  const VectorX<Scalar> mid = (p + q) / Scalar(2);
  return std::max(half_kl(p, mid) + half_kl(q, mid), Scalar(0));
}

template <typename Scalar>
struct EvalReport {
  Scalar micro_f1 = Scalar(0);
  Scalar mean_jsd = Scalar(0);
  Scalar mean_support_size = Scalar(0);
  std::vector<long> support_histogram;  // index = support size, 0 unused
};

/// Mean support size and a per-size histogram of the predicted
/// distributions.
template <typename Scalar>
EvalReport<Scalar> sparsity_stats(
    const std::vector<ProbabilityVector<Scalar>>& outputs) {
  if (outputs.empty()) {
    throw std::invalid_argument("sparsity_stats: empty output list");
  }
  EvalReport<Scalar> report;
  Index max_size = 0;
  for (const auto& out : outputs) {
    max_size = std::max<Index>(max_size, out.probs.size());
  }
  report.support_histogram.assign(static_cast<std::size_t>(max_size) + 1, 0);
  double total = 0;
  for (const auto& out : outputs) {
    const auto size = out.support.size();
    total += static_cast<double>(size);
    report.support_histogram[size] += 1;
  }
  report.mean_support_size =
      static_cast<Scalar>(total / static_cast<double>(outputs.size()));
  return report;
}

template <typename Scalar>
EvalReport<Scalar> evaluate(const LinearModel<Scalar>& model,
                            const std::vector<LabeledInstance<Scalar>>& data,
                            const TrainConfig<Scalar>& config) {
  if (data.empty()) {
    throw std::invalid_argument("evaluate: empty split");
  }
  std::vector<std::vector<Index>> preds, truths;
  std::vector<ProbabilityVector<Scalar>> outputs;
  Scalar jsd_total = Scalar(0);
  for (const auto& inst : data) {
    Prediction<Scalar> p = predict(model, inst.x, config);
    jsd_total += jsd(inst.eta.eta, p.rho.probs);
    preds.push_back(std::move(p.on_set));
    truths.push_back(inst.eta.on_set);
    outputs.push_back(std::move(p.rho));
  }
  EvalReport<Scalar> report = sparsity_stats(outputs);
  report.micro_f1 = static_cast<Scalar>(micro_f1(preds, truths));
  report.mean_jsd = jsd_total / static_cast<Scalar>(data.size());
  return report;
}

// ---------------------------------------------------------------------------
// Training.

template <typename Scalar>
struct TrainResult {
  LinearModel<Scalar> model;       // parameters at the best validation epoch
  Index best_epoch = 0;            // 1-based; 0 when no epoch ran
  Scalar best_val_f1 = Scalar(0);
  std::vector<Scalar> epoch_mean_loss;  // full-train mean loss after each epoch
};

namespace detail {

template <typename Scalar>
Scalar mean_loss(const LossSpec<Scalar>& spec,
                 const LinearModel<Scalar>& model,
                 const std::vector<LabeledInstance<Scalar>>& data) {
  Scalar total = Scalar(0);
  for (const auto& inst : data) {
    total += loss(spec, model.scores(inst.x), inst.eta);
  }
  return total / static_cast<Scalar>(data.size());
}

template <typename Scalar>
Scalar validation_f1(const LinearModel<Scalar>& model,
                     const std::vector<LabeledInstance<Scalar>>& val,
                     const TrainConfig<Scalar>& config) {
  std::vector<std::vector<Index>> preds, truths;
  for (const auto& inst : val) {
    preds.push_back(predict(model, inst.x, config).on_set);
    truths.push_back(inst.eta.on_set);
  }
  return static_cast<Scalar>(micro_f1(preds, truths));
}

}  // namespace detail

/// Minibatch subgradient descent from zero initialization, stepping by the
/// batch-mean subgradient.  Returns the parameters of the epoch with the
/// best validation micro-F1 (the final epoch when the validation split is
/// empty).  Throws std::domain_error naming the offending epoch if the
/// parameters or the training loss stop being finite.
template <typename Scalar>
TrainResult<Scalar> train(const Dataset<Scalar>& data,
                          const TrainConfig<Scalar>& config) {
  validate(config);
  if (data.train.empty()) {
    throw std::invalid_argument("train: empty training split");
  }
  const Index feature_dim = data.train.front().x.size();
  const Index num_labels = data.train.front().eta.eta.size();

  TrainResult<Scalar> result;
  result.model = zero_model<Scalar>(num_labels, feature_dim);
  if (config.epochs == 0) return result;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t(0));

  LinearModel<Scalar> current = result.model;
  MatrixX<Scalar> grad_W(num_labels, feature_dim);
  VectorX<Scalar> grad_b(num_labels);
  Scalar best_f1 = Scalar(-1);

  for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
    if (!current.W.allFinite() || !current.b.allFinite()) {
      throw std::domain_error("train: parameters diverged (non-finite) at epoch " +
                              std::to_string(epoch));
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      grad_W.setZero();
      grad_b.setZero();
      for (std::size_t i = start; i < stop; ++i) {
        const auto& inst = data.train[order[i]];
        const VectorX<Scalar> g =
            subgradient(config.loss, current.scores(inst.x), inst.eta);
        grad_W.noalias() += g * inst.x.transpose();
        grad_b += g;
      }
      const Scalar scale =
          config.learning_rate / static_cast<Scalar>(stop - start);
      current.W.noalias() -= scale * grad_W;
      current.b -= scale * grad_b;
    }

    const Scalar epoch_loss =
        detail::mean_loss(config.loss, current, data.train);
    if (!std::isfinite(epoch_loss)) {
      throw std::domain_error("train: loss diverged (non-finite) at epoch " +
                              std::to_string(epoch));
    }
    result.epoch_mean_loss.push_back(epoch_loss);

    if (data.val.empty()) {
      result.model = current;
      result.best_epoch = epoch;
    } else {
      const Scalar f1 = detail::validation_f1(current, data.val, config);
      if (f1 > best_f1) {
        best_f1 = f1;
        result.model = current;
        result.best_epoch = epoch;
        result.best_val_f1 = f1;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Experiment driver: the three sweep settings, with per-arm validation
// tuning of lambda / q / p0.

enum class SweepSetting {
  mean_labels,  // law uniform_around_mean, sweep value = mu
  label_range,  // law uniform_range, sweep value = range
  doc_length,   // law poisson(5), sweep value = doc length
};

template <typename Scalar>
struct ExperimentConfig {
  SynthConfig base;
  TrainConfig<Scalar> train_base;  // loss kind is overridden per arm
  std::vector<LossKind> arms = {
      LossKind::sparsegen_lin_hinge, LossKind::sparsehg_hinge,
      LossKind::sparsemax_huber, LossKind::softmax_log};
  std::vector<double> sweep;
  std::vector<Scalar> lambda_grid = {Scalar(0), Scalar(0.25), Scalar(0.5),
                                     Scalar(0.75)};
  std::vector<Scalar> q_grid = {Scalar(0.01), Scalar(0.1), Scalar(1),
                                Scalar(10), Scalar(100)};
  std::vector<Scalar> p0_grid = {Scalar(0.05), Scalar(0.10), Scalar(0.15),
                                 Scalar(0.20), Scalar(0.25), Scalar(0.30),
                                 Scalar(0.35), Scalar(0.40), Scalar(0.45),
                                 Scalar(0.50)};
};

template <typename Scalar>
struct ExperimentRow {
  SweepSetting setting;
  LossKind arm;
  double sweep_value = 0;
  TrainConfig<Scalar> tuned;  // the grid point that won on validation
  EvalReport<Scalar> report;  // test-split evaluation of the tuned model
};

namespace detail {

template <typename Scalar>
std::vector<TrainConfig<Scalar>> grid_for_arm(
    const ExperimentConfig<Scalar>& config, LossKind arm) {
  TrainConfig<Scalar> base = config.train_base;
  base.loss = LossSpec<Scalar>{arm};
  std::vector<TrainConfig<Scalar>> grid;
  switch (arm) {
    case LossKind::sparsegen_lin_hinge:
      for (Scalar lambda : config.lambda_grid) {
        base.loss.lambda = lambda;
        grid.push_back(base);
      }
      break;
    case LossKind::sparsehg_hinge:
      for (Scalar q : config.q_grid) {
        base.loss.q = q;
        grid.push_back(base);
      }
      break;
    case LossKind::softmax_log:
      for (Scalar p0 : config.p0_grid) {
        base.p0 = p0;
        grid.push_back(base);
      }
      break;
    case LossKind::sparsemax_hinge:
    case LossKind::sparsemax_huber:
      grid.push_back(base);
      break;
  }
  return grid;
}

}  // namespace detail

inline SynthConfig sweep_point_config(const SynthConfig& base,
                                      SweepSetting setting, double value,
                                      std::size_t point_index) {
  SynthConfig sc = base;
  sc.seed = base.seed + point_index;
  switch (setting) {
    case SweepSetting::mean_labels:
      sc.law = LabelCountLaw::uniform_around_mean;
      sc.mu = static_cast<int>(value);
      break;
    case SweepSetting::label_range:
      sc.law = LabelCountLaw::uniform_range;
      sc.range = static_cast<int>(value);
      break;
    case SweepSetting::doc_length:
      sc.law = LabelCountLaw::poisson;
      sc.poisson_mean = 5.0;
      sc.doc_length = static_cast<Index>(value);
      break;
  }
  validate(sc);
  return sc;
}

/// For every sweep point: generate a dataset, tune each arm's free
/// hyperparameter on the validation split, and evaluate the winning model on
/// the test split.  Deterministic given the config's seeds.
template <typename Scalar>
std::vector<ExperimentRow<Scalar>> run_experiment(
    SweepSetting setting, const ExperimentConfig<Scalar>& config) {
  if (config.sweep.empty() || config.arms.empty()) {
    throw std::invalid_argument(
        "run_experiment: sweep grid and arm list must be nonempty");
  }
  std::vector<ExperimentRow<Scalar>> rows;
  for (std::size_t point = 0; point < config.sweep.size(); ++point) {
    const double value = config.sweep[point];
    const Dataset<Scalar> data = generate_synthetic<Scalar>(
        sweep_point_config(config.base, setting, value, point));
    for (LossKind arm : config.arms) {
      ExperimentRow<Scalar> row;
      row.setting = setting;
      row.arm = arm;
      row.sweep_value = value;
      Scalar best_f1 = Scalar(-1);
      LinearModel<Scalar> best_model;
      for (const TrainConfig<Scalar>& candidate :
           detail::grid_for_arm(config, arm)) {
        const TrainResult<Scalar> result = train(data, candidate);
        const Scalar f1 = data.val.empty()
                              ? detail::validation_f1(result.model,
                                                      data.train, candidate)
                              : result.best_val_f1;
        if (f1 > best_f1) {
          best_f1 = f1;
          best_model = result.model;
          row.tuned = candidate;
        }
      }
      row.report = evaluate(best_model, data.test, row.tuned);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace sparsegen

#endif  // SPARSEGEN_MULTILABEL_HPP_
