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
// Command-line driver: mapping evaluation, contour grids, synthetic data,
// training, evaluation, sweep experiments, projection benchmarks, and
// gradient checks.
//
// Exit codes: 0 success, 1 check failure, 2 usage/parse error, 3 domain
// error on the input values.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsegen/io.hpp"
#include "sparsegen/jacobian.hpp"
#include "sparsegen/mappings.hpp"
#include "sparsegen/multilabel.hpp"
#include "sparsegen/simplex.hpp"

namespace sg = sparsegen;
using Vec = Eigen::VectorXd;
using Spec = sg::MappingSpec<double>;

namespace {

Vec parse_vector(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse vector entry: \"" + item +
                                  "\"");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.empty()) throw std::invalid_argument("empty vector");
  return Eigen::Map<const Vec>(values.data(),
                               static_cast<Eigen::Index>(values.size()));
}

sg::MappingKind parse_mapping_kind(const std::string& name) {
  if (name == "softmax") return sg::MappingKind::softmax;
  if (name == "spherical-softmax") return sg::MappingKind::spherical_softmax;
  if (name == "sum-normalization") return sg::MappingKind::sum_normalization;
  if (name == "hardmax") return sg::MappingKind::hardmax;
  if (name == "sparsemax") return sg::MappingKind::sparsemax;
  if (name == "sparsegen") return sg::MappingKind::sparsegen;
  if (name == "sparsegen-lin") return sg::MappingKind::sparsegen_lin;
  if (name == "sparsecone") return sg::MappingKind::sparsecone;
  if (name == "sparsehourglass") return sg::MappingKind::sparsehourglass;
  if (name == "sum-normalization-pp")
    return sg::MappingKind::sum_normalization_pp;
  throw std::invalid_argument("unknown mapping name: " + name);
}

sg::TransformKind parse_transform_kind(const std::string& name) {
  if (name == "identity") return sg::TransformKind::identity;
  if (name == "exp") return sg::TransformKind::exponential;
  if (name == "square") return sg::TransformKind::square;
  if (name == "log") return sg::TransformKind::logarithm;
  throw std::invalid_argument("unknown transform name: " + name);
}

/// Flags shared by every subcommand that selects a mapping.
struct MappingFlags {
  std::string fn;
  std::string transform;
  double lambda = 0.0;
  double q = 1.0;
  double temperature = 1.0;
  bool has_transform = false;
  bool has_lambda = false;
  bool has_q = false;
  bool has_temperature = false;
};

void add_mapping_flags(CLI::App* cmd, MappingFlags* flags) {
  cmd->add_option("--fn", flags->fn, "mapping name")->required();
  cmd->add_option("--transform", flags->transform,
                  "sparsegen transform: identity|exp|square|log")
      ->each([flags](const std::string&) { flags->has_transform = true; });
  cmd->add_option("--lambda", flags->lambda, "sparsegen regularizer, < 1")
      ->each([flags](const std::string&) { flags->has_lambda = true; });
  cmd->add_option("--q", flags->q, "cone/hourglass anchor, >= 0")
      ->each([flags](const std::string&) { flags->has_q = true; });
  cmd->add_option("--temperature", flags->temperature,
                  "softmax temperature, > 0")
      ->each([flags](const std::string&) { flags->has_temperature = true; });
}

Spec build_spec(const MappingFlags& flags) {
  Spec spec;
  spec.kind = parse_mapping_kind(flags.fn);
  if (flags.has_transform) {
    spec.transform = sg::Transform<double>{
        parse_transform_kind(flags.transform),
        flags.has_lambda ? flags.lambda : 0.0};
  } else if (flags.has_lambda) {
    spec.lambda = flags.lambda;
  }
  if (flags.has_q) spec.q = flags.q;
  if (flags.has_temperature) spec.temperature = flags.temperature;
  sg::validate(spec);
  return spec;
}

// ---------------------------------------------------------------------------

void run_map(const MappingFlags& flags, const std::string& z_text) {
  const Spec spec = build_spec(flags);
  const auto out = sg::apply(spec, parse_vector(z_text));
  nlohmann::json j;
  j["p"] = std::vector<double>(out.probs.data(),
                               out.probs.data() + out.probs.size());
  j["support"] = std::vector<long>(out.support.begin(), out.support.end());
  std::cout << j.dump() << "\n";
}

struct GridFlags {
  double xmin = -2, xmax = 2, ymin = -2, ymax = 2;
  long resolution = 50;
  std::string out;
};

void run_grid(const MappingFlags& flags, const GridFlags& grid) {
  if (grid.resolution < 2) {
    throw std::invalid_argument("grid resolution must be at least 2");
  }
  if (!(grid.xmin < grid.xmax) || !(grid.ymin < grid.ymax)) {
    throw std::invalid_argument("grid ranges need min < max");
  }
  const Spec spec = build_spec(flags);
  std::ofstream out = sg::detail::open_out(grid.out);
  out << "z1,z2,p1,sparse\n";
  for (long i = 0; i < grid.resolution; ++i) {
    const double z1 = grid.xmin + (grid.xmax - grid.xmin) * i /
                                      static_cast<double>(grid.resolution - 1);
    for (long k = 0; k < grid.resolution; ++k) {
      const double z2 =
          grid.ymin + (grid.ymax - grid.ymin) * k /
                          static_cast<double>(grid.resolution - 1);
      Vec z(2);
      z << z1, z2;
      out << sg::format_real(z1) << ',' << sg::format_real(z2) << ',';
      try {
        const auto p = sg::apply(spec, z);
        out << sg::format_real(p.probs[0]) << ','
            << (p.support.size() < 2 ? 1 : 0);
      } catch (const std::domain_error&) {
        out << ',';  // mapping undefined at this cell
      }
      out << "\n";
    }
  }
}

struct SynthFlags {
  sg::SynthConfig config;
  std::string law = "mean";
  std::string out;
};

void run_synth(SynthFlags& flags) {
  flags.config.law = sg::parse_law(flags.law);
  const auto data = sg::generate_synthetic(flags.config);
  std::error_code ec;
  std::filesystem::create_directories(flags.out, ec);
  if (ec) {
    throw std::invalid_argument("cannot create directory: " + flags.out);
  }
  const std::filesystem::path dir(flags.out);
  sg::write_dataset_jsonl((dir / "train.jsonl").string(), data.train);
  sg::write_dataset_jsonl((dir / "val.jsonl").string(), data.val);
  sg::write_dataset_jsonl((dir / "test.jsonl").string(), data.test);
  sg::write_manifest((dir / "manifest.json").string(), flags.config);
  std::cout << "wrote " << data.train.size() << "/" << data.val.size() << "/"
            << data.test.size() << " train/val/test instances to "
            << flags.out << "\n";
}

struct TrainFlags {
  std::string loss;
  sg::TrainConfig<double> config;
  std::string data_dir;
  std::string out;
};

sg::Dataset<double> load_dataset(const std::string& dir_text) {
  const std::filesystem::path dir(dir_text);
  sg::Dataset<double> data;
  data.train = sg::read_dataset_jsonl((dir / "train.jsonl").string());
  data.val = sg::read_dataset_jsonl((dir / "val.jsonl").string());
  data.test = sg::read_dataset_jsonl((dir / "test.jsonl").string());
  return data;
}

void run_train(TrainFlags& flags) {
  flags.config.loss.kind = sg::parse_loss_kind(flags.loss);
  const auto data = load_dataset(flags.data_dir);
  const auto result = sg::train(data, flags.config);
  sg::write_model_json(flags.out, result.model, flags.config);
  std::cout << "best epoch " << result.best_epoch << ", validation micro-F1 "
            << sg::format_real(result.best_val_f1) << ", model written to "
            << flags.out << "\n";
}

struct EvalFlags {
  std::string model;
  std::string data_dir;
  std::string split = "test";
  std::string out;
};

void run_eval(const EvalFlags& flags) {
  if (flags.split != "train" && flags.split != "val" &&
      flags.split != "test") {
    throw std::invalid_argument("unknown split: " + flags.split);
  }
  const auto [model, config] = sg::read_model_json(flags.model);
  const auto split = sg::read_dataset_jsonl(
      (std::filesystem::path(flags.data_dir) / (flags.split + ".jsonl"))
          .string());
  const auto report = sg::evaluate(model, split, config);
  std::ostringstream csv;
  csv << sg::kReportHeader << "\n"
      << sg::report_csv_row("eval", config.loss.kind, 0.0, report) << "\n";
  std::cout << csv.str();
  if (!flags.out.empty()) {
    std::ofstream file = sg::detail::open_out(flags.out);
    file << csv.str();
  }
}

struct ExperimentFlags {
  std::string setting = "mean-labels";
  std::string sweep;
  std::vector<std::string> arms = {"sparsegen-lin-hinge", "sparsehg-hinge",
                                   "sparsemax-huber", "softmax-log"};
  sg::ExperimentConfig<double> config;
  std::string out;
};

void run_experiment_cmd(ExperimentFlags& flags) {
  const sg::SweepSetting setting = sg::parse_setting(flags.setting);
  const Vec sweep = parse_vector(flags.sweep);
  flags.config.sweep.assign(sweep.data(), sweep.data() + sweep.size());
  flags.config.arms.clear();
  for (const auto& arm : flags.arms) {
    flags.config.arms.push_back(sg::parse_loss_kind(arm));
  }
  const auto rows = sg::run_experiment(setting, flags.config);
  sg::write_report_csv(flags.out, rows);
  std::cout << "wrote " << rows.size() << " report rows to " << flags.out
            << "\n";
}

struct BenchFlags {
  std::vector<long> sizes = {10, 100, 1000, 10000, 100000};
  long reps = 5;
  std::uint64_t seed = 0;
};

void run_bench(const BenchFlags& flags) {
  if (flags.reps < 1) {
    throw std::invalid_argument("bench repetitions must be at least 1");
  }
  for (long k : flags.sizes) {
    if (k < 1) throw std::invalid_argument("bench sizes must be positive");
  }
  auto median_ms = [](std::vector<double>& samples) {
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
  };
  std::cout << "K,sort_ms,pivot_ms,ratio\n";
  for (long k : flags.sizes) {
    std::mt19937_64 rng(flags.seed + static_cast<std::uint64_t>(k));
    std::normal_distribution<double> normal(0.0, 2.0);
    Vec z(k);
    for (long i = 0; i < k; ++i) z[i] = normal(rng);

    std::vector<double> sort_ms, pivot_ms;
    sg::ProbabilityVector<double> by_sort, by_pivot;
    for (long rep = 0; rep < flags.reps; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      by_sort = sg::project_to_simplex(z);
      auto t1 = std::chrono::steady_clock::now();
      by_pivot = sg::project_to_simplex_pivot(z, flags.seed + rep);
      auto t2 = std::chrono::steady_clock::now();
      sort_ms.push_back(
          std::chrono::duration<double, std::milli>(t1 - t0).count());
      pivot_ms.push_back(
          std::chrono::duration<double, std::milli>(t2 - t1).count());
      if (by_sort.support != by_pivot.support ||
          (by_sort.probs - by_pivot.probs).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::runtime_error(
            "bench: sort and pivot projections disagree at K=" +
            std::to_string(k));
      }
    }
    const double sm = median_ms(sort_ms);
    const double pm = median_ms(pivot_ms);
    std::cout << k << ',' << sg::format_real(sm) << ',' << sg::format_real(pm)
              << ',' << sg::format_real(sm > 0 ? pm / sm : 0.0) << "\n";
  }
}

struct GradcheckFlags {
  long trials = 1000;
  std::uint64_t seed = 0;
};

/// Interior-point filter: keeps finite differences away from support
/// boundaries and the hourglass ridge.
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
      if (std::abs(z.sum()) <= 1e-3) return false;  // kink of |sum z|
      projected = z * (1.0 + kq) / (std::abs(z.sum()) + kq);
      break;
    }
    default:
      return false;
  }
  return sg::threshold_and_support(projected, 0.0).boundary_margin > 1e-2;
}

void run_gradcheck(const MappingFlags& flags, const GradcheckFlags& grad) {
  if (grad.trials < 1) {
    throw std::invalid_argument("gradcheck trials must be at least 1");
  }
  const Spec spec = build_spec(flags);
  if (spec.kind == sg::MappingKind::hardmax ||
      spec.kind == sg::MappingKind::spherical_softmax ||
      spec.kind == sg::MappingKind::sum_normalization) {
    throw std::invalid_argument("gradcheck: " + flags.fn +
                                " has no analytic Jacobian here");
  }
  const bool positive_domain =
      spec.transform.has_value() &&
      spec.transform->kind == sg::TransformKind::logarithm;

  std::mt19937_64 rng(grad.seed);
  std::normal_distribution<double> normal(0.0, 1.5);
  std::uniform_real_distribution<double> positive(0.1, 3.0);
  std::uniform_int_distribution<Eigen::Index> dims(2, 8);

  long accepted = 0;
  double max_deviation = 0.0;
  for (long attempt = 0; attempt < 50 * grad.trials && accepted < grad.trials;
       ++attempt) {
    Vec z(dims(rng));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z[i] = positive_domain ? positive(rng) : normal(rng);
    }
    if (!interior_point(spec, z)) continue;
    ++accepted;
    const auto analytic = sg::analytic_jacobian(spec, z);
    const auto numeric = sg::finite_diff_jacobian(spec, z);
    max_deviation =
        std::max(max_deviation,
                 (analytic - numeric).cwiseAbs().maxCoeff());
  }
  if (accepted < grad.trials) {
    throw std::runtime_error("gradcheck: too few interior sample points");
  }
  const bool pass = max_deviation <= 1e-4;
  std::cout << "trials " << accepted << ", max deviation "
            << sg::format_real(max_deviation) << ", tolerance 0.0001: "
            << (pass ? "PASS" : "FAIL") << "\n";
  if (!pass) throw std::runtime_error("gradcheck failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controllable sparse probability mappings toolkit"};
  app.require_subcommand(1);

  MappingFlags map_flags;
  std::string map_z;
  CLI::App* map_cmd =
      app.add_subcommand("map", "evaluate a mapping on one score vector");
  add_mapping_flags(map_cmd, &map_flags);
  map_cmd->add_option("--z", map_z, "comma-separated scores")->required();

  MappingFlags grid_mapping;
  GridFlags grid_flags;
  CLI::App* grid_cmd =
      app.add_subcommand("grid", "tabulate rho_1 over a 2-D score grid");
  add_mapping_flags(grid_cmd, &grid_mapping);
  grid_cmd->add_option("--xmin", grid_flags.xmin, "z1 lower bound");
  grid_cmd->add_option("--xmax", grid_flags.xmax, "z1 upper bound");
  grid_cmd->add_option("--ymin", grid_flags.ymin, "z2 lower bound");
  grid_cmd->add_option("--ymax", grid_flags.ymax, "z2 upper bound");
  grid_cmd->add_option("--resolution", grid_flags.resolution,
                       "points per axis (>= 2)");
  grid_cmd->add_option("--out", grid_flags.out, "CSV output path")
      ->required();

  SynthFlags synth_flags;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic multilabel corpus");
  synth_cmd->add_option("--instances", synth_flags.config.num_instances,
                        "number of instances");
  synth_cmd->add_option("--vocab", synth_flags.config.vocab_size,
                        "vocabulary size");
  synth_cmd->add_option("--labels", synth_flags.config.num_labels,
                        "number of labels");
  synth_cmd->add_option("--law", synth_flags.law,
                        "label-count law: mean|range|poisson");
  synth_cmd->add_option("--mu", synth_flags.config.mu,
                        "mean-law center, 2..9");
  synth_cmd->add_option("--range", synth_flags.config.range,
                        "range-law half width, 0..4");
  synth_cmd->add_option("--poisson-mean", synth_flags.config.poisson_mean,
                        "poisson-law mean");
  synth_cmd->add_option("--doc-length", synth_flags.config.doc_length,
                        "words per instance");
  synth_cmd->add_option("--seed", synth_flags.config.seed, "generator seed");
  synth_cmd->add_option("--out", synth_flags.out, "output directory")
      ->required();

  TrainFlags train_flags;
  CLI::App* train_cmd =
      app.add_subcommand("train", "fit a linear model with one loss arm");
  train_cmd->add_option("--loss", train_flags.loss, "loss arm name")
      ->required();
  train_cmd->add_option("--lambda", train_flags.config.loss.lambda,
                        "sparsegen-lin-hinge regularizer");
  train_cmd->add_option("--q", train_flags.config.loss.q,
                        "sparsehg-hinge anchor");
  train_cmd->add_option("--p0", train_flags.config.p0,
                        "softmax-log decision threshold");
  train_cmd->add_option("--epochs", train_flags.config.epochs, "epochs");
  train_cmd->add_option("--batch", train_flags.config.batch_size,
                        "minibatch size");
  train_cmd->add_option("--lr", train_flags.config.learning_rate,
                        "learning rate");
  train_cmd->add_option("--seed", train_flags.config.seed, "shuffle seed");
  train_cmd->add_option("--data", train_flags.data_dir, "dataset directory")
      ->required();
  train_cmd->add_option("--out", train_flags.out, "model JSON path")
      ->required();

  EvalFlags eval_flags;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a trained model on one split");
  eval_cmd->add_option("--model", eval_flags.model, "model JSON path")
      ->required();
  eval_cmd->add_option("--data", eval_flags.data_dir, "dataset directory")
      ->required();
  eval_cmd->add_option("--split", eval_flags.split, "train|val|test");
  eval_cmd->add_option("--out", eval_flags.out, "optional CSV output path");

  ExperimentFlags exp_flags;
  CLI::App* exp_cmd = app.add_subcommand(
      "experiment", "run one sweep setting across the loss arms");
  exp_cmd->add_option("--setting", exp_flags.setting,
                      "mean-labels|label-range|doc-length");
  exp_cmd->add_option("--sweep", exp_flags.sweep,
                      "comma-separated sweep values")
      ->required();
  exp_cmd->add_option("--arms", exp_flags.arms, "loss arm names")
      ->delimiter(',');
  exp_cmd->add_option("--instances", exp_flags.config.base.num_instances,
                      "instances per sweep point");
  exp_cmd->add_option("--doc-length", exp_flags.config.base.doc_length,
                      "words per instance");
  exp_cmd->add_option("--epochs", exp_flags.config.train_base.epochs,
                      "training epochs");
  exp_cmd->add_option("--batch", exp_flags.config.train_base.batch_size,
                      "minibatch size");
  exp_cmd->add_option("--lr", exp_flags.config.train_base.learning_rate,
                      "learning rate");
  exp_cmd->add_option("--seed", exp_flags.config.base.seed, "master seed");
  exp_cmd->add_option("--out", exp_flags.out, "report CSV path")->required();

  BenchFlags bench_flags;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "time sort-based vs pivot-based simplex projection");
  bench_cmd->add_option("--sizes", bench_flags.sizes,
                        "projection sizes to time")
      ->delimiter(',');
  bench_cmd->add_option("--reps", bench_flags.reps, "repetitions per size");
  bench_cmd->add_option("--seed", bench_flags.seed, "input seed");

  MappingFlags grad_mapping;
  GradcheckFlags grad_flags;
  CLI::App* grad_cmd = app.add_subcommand(
      "gradcheck", "compare analytic Jacobians against finite differences");
  add_mapping_flags(grad_cmd, &grad_mapping);
  grad_cmd->add_option("--trials", grad_flags.trials, "interior test points");
  grad_cmd->add_option("--seed", grad_flags.seed, "sampling seed");

  map_cmd->callback([&] { run_map(map_flags, map_z); });
  grid_cmd->callback([&] { run_grid(grid_mapping, grid_flags); });
  synth_cmd->callback([&] { run_synth(synth_flags); });
  train_cmd->callback([&] { run_train(train_flags); });
  eval_cmd->callback([&] { run_eval(eval_flags); });
  exp_cmd->callback([&] {
    exp_flags.config.train_base.seed = exp_flags.config.base.seed;
    run_experiment_cmd(exp_flags);
  });
  bench_cmd->callback([&] { run_bench(bench_flags); });
  grad_cmd->callback([&] { run_gradcheck(grad_mapping, grad_flags); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
