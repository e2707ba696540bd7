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
// File formats: dataset JSONL ({"x":[...],"y":[...]} per line), manifest and
// model JSON, and the report CSV.  Numbers in CSV output are printed with 17
// significant digits so they round-trip exactly.

#ifndef SPARSEGEN_IO_HPP_
#define SPARSEGEN_IO_HPP_

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsegen/multilabel.hpp"

namespace sparsegen {

inline std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

// ---------------------------------------------------------------------------
// Name tables.

inline std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::sparsegen_lin_hinge: return "sparsegen-lin-hinge";
    case LossKind::sparsehg_hinge: return "sparsehg-hinge";
    case LossKind::sparsemax_hinge: return "sparsemax-hinge";
    case LossKind::sparsemax_huber: return "sparsemax-huber";
    case LossKind::softmax_log: return "softmax-log";
  }
  throw std::invalid_argument("loss_kind_name: unknown kind");
}

inline LossKind parse_loss_kind(const std::string& name) {
  if (name == "sparsegen-lin-hinge") return LossKind::sparsegen_lin_hinge;
  if (name == "sparsehg-hinge") return LossKind::sparsehg_hinge;
  if (name == "sparsemax-hinge") return LossKind::sparsemax_hinge;
  if (name == "sparsemax-huber") return LossKind::sparsemax_huber;
  if (name == "softmax-log") return LossKind::softmax_log;
  throw std::invalid_argument("unknown loss name: " + name);
}

inline std::string setting_name(SweepSetting setting) {
  switch (setting) {
    case SweepSetting::mean_labels: return "mean-labels";
    case SweepSetting::label_range: return "label-range";
    case SweepSetting::doc_length: return "doc-length";
  }
  throw std::invalid_argument("setting_name: unknown setting");
}

inline SweepSetting parse_setting(const std::string& name) {
  if (name == "mean-labels") return SweepSetting::mean_labels;
  if (name == "label-range") return SweepSetting::label_range;
  if (name == "doc-length") return SweepSetting::doc_length;
  throw std::invalid_argument("unknown sweep setting: " + name);
}

inline std::string law_name(LabelCountLaw law) {
  switch (law) {
    case LabelCountLaw::uniform_around_mean: return "mean";
    case LabelCountLaw::uniform_range: return "range";
    case LabelCountLaw::poisson: return "poisson";
  }
  throw std::invalid_argument("law_name: unknown law");
}

inline LabelCountLaw parse_law(const std::string& name) {
  if (name == "mean") return LabelCountLaw::uniform_around_mean;
  if (name == "range") return LabelCountLaw::uniform_range;
  if (name == "poisson") return LabelCountLaw::poisson;
  throw std::invalid_argument("unknown label-count law: " + name);
}

// ---------------------------------------------------------------------------
// Dataset JSONL.

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  return in;
}

}  // namespace detail

template <typename Scalar>
void write_dataset_jsonl(const std::string& path,
                         const std::vector<LabeledInstance<Scalar>>& split) {
  std::ofstream out = detail::open_out(path);
  for (const auto& inst : split) {
    nlohmann::json record;
    record["x"] = std::vector<double>(inst.x.data(),
                                      inst.x.data() + inst.x.size());
    record["y"] = std::vector<int>(inst.y.data(),
                                   inst.y.data() + inst.y.size());
    out << record.dump() << "\n";
  }
}

template <typename Scalar = double>
std::vector<LabeledInstance<Scalar>> read_dataset_jsonl(
    const std::string& path) {
  std::ifstream in = detail::open_in(path);
  std::vector<LabeledInstance<Scalar>> split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": " + e.what());
    }
    if (!record.contains("x") || !record.contains("y")) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": record needs \"x\" and \"y\"");
    }
    const auto xs = record["x"].get<std::vector<double>>();
    const auto ys = record["y"].get<std::vector<int>>();
    LabeledInstance<Scalar> inst;
    inst.x = Eigen::Map<const Eigen::VectorXd>(xs.data(), xs.size())
                 .cast<Scalar>();
    inst.y = Eigen::Map<const Eigen::VectorXi>(ys.data(), ys.size());
    inst.eta = label_distribution_from_binary<Scalar>(inst.y);
    split.push_back(std::move(inst));
  }
  return split;
}

// ---------------------------------------------------------------------------
// Manifest and model JSON.

inline nlohmann::json synth_config_json(const SynthConfig& config) {
  return {
      {"num_instances", config.num_instances},
      {"vocab_size", config.vocab_size},
      {"num_labels", config.num_labels},
      {"law", law_name(config.law)},
      {"mu", config.mu},
      {"range", config.range},
      {"poisson_mean", config.poisson_mean},
      {"doc_length", config.doc_length},
      {"split_fractions",
       {config.train_fraction, config.val_fraction, config.test_fraction}},
      {"seed", config.seed},
  };
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig config;
  config.num_instances = j.at("num_instances").get<Index>();
  config.vocab_size = j.at("vocab_size").get<Index>();
  config.num_labels = j.at("num_labels").get<Index>();
  config.law = parse_law(j.at("law").get<std::string>());
  config.mu = j.at("mu").get<int>();
  config.range = j.at("range").get<int>();
  config.poisson_mean = j.at("poisson_mean").get<double>();
  config.doc_length = j.at("doc_length").get<Index>();
  const auto fractions = j.at("split_fractions").get<std::vector<double>>();
  if (fractions.size() != 3) {
    throw std::invalid_argument("manifest: split_fractions needs 3 entries");
  }
  config.train_fraction = fractions[0];
  config.val_fraction = fractions[1];
  config.test_fraction = fractions[2];
  config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

inline void write_manifest(const std::string& path,
                           const SynthConfig& config) {
  std::ofstream out = detail::open_out(path);
  out << synth_config_json(config).dump(2) << "\n";
}

inline SynthConfig read_manifest(const std::string& path) {
  std::ifstream in = detail::open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return synth_config_from_json(j);
}

template <typename Scalar>
void write_model_json(const std::string& path,
                      const LinearModel<Scalar>& model,
                      const TrainConfig<Scalar>& config) {
  nlohmann::json j;
  j["loss"] = loss_kind_name(config.loss.kind);
  j["lambda"] = static_cast<double>(config.loss.lambda);
  j["q"] = static_cast<double>(config.loss.q);
  j["p0"] = static_cast<double>(config.p0);
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["learning_rate"] = static_cast<double>(config.learning_rate);
  j["seed"] = config.seed;
  std::vector<std::vector<double>> rows(model.W.rows());
  for (Index r = 0; r < model.W.rows(); ++r) {
    rows[r].assign(model.W.row(r).begin(), model.W.row(r).end());
  }
  j["W"] = rows;
  j["b"] = std::vector<double>(model.b.data(),
                               model.b.data() + model.b.size());
  std::ofstream out = detail::open_out(path);
  out << j.dump(2) << "\n";
}

template <typename Scalar = double>
std::pair<LinearModel<Scalar>, TrainConfig<Scalar>> read_model_json(
    const std::string& path) {
  std::ifstream in = detail::open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  TrainConfig<Scalar> config;
  config.loss.kind = parse_loss_kind(j.at("loss").get<std::string>());
  config.loss.lambda = static_cast<Scalar>(j.at("lambda").get<double>());
  config.loss.q = static_cast<Scalar>(j.at("q").get<double>());
  config.p0 = static_cast<Scalar>(j.at("p0").get<double>());
  config.epochs = j.at("epochs").get<Index>();
  config.batch_size = j.at("batch_size").get<Index>();
  config.learning_rate =
      static_cast<Scalar>(j.at("learning_rate").get<double>());
  config.seed = j.at("seed").get<std::uint64_t>();
  const auto rows = j.at("W").get<std::vector<std::vector<double>>>();
  const auto bias = j.at("b").get<std::vector<double>>();
  if (rows.empty() || bias.size() != rows.size()) {
    throw std::invalid_argument(path + ": W and b shapes disagree");
  }
  LinearModel<Scalar> model;
  model.W.resize(static_cast<Index>(rows.size()),
                 static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) {
      throw std::invalid_argument(path + ": ragged W rows");
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      model.W(static_cast<Index>(r), static_cast<Index>(c)) =
          static_cast<Scalar>(rows[r][c]);
    }
  }
  model.b = Eigen::Map<const Eigen::VectorXd>(bias.data(), bias.size())
                .cast<Scalar>();
  return {std::move(model), config};
}

// ---------------------------------------------------------------------------
// Report CSV: setting,arm,sweep_value,micro_f1,mean_jsd,mean_support

inline const char* kReportHeader =
    "setting,arm,sweep_value,micro_f1,mean_jsd,mean_support";

template <typename Scalar>
std::string report_csv_row(const std::string& setting, LossKind arm,
                           double sweep_value,
                           const EvalReport<Scalar>& report) {
  std::ostringstream row;
  row << setting << ',' << loss_kind_name(arm) << ','
      << format_real(sweep_value) << ','
      << format_real(static_cast<double>(report.micro_f1)) << ','
      << format_real(static_cast<double>(report.mean_jsd)) << ','
      << format_real(static_cast<double>(report.mean_support_size));
  return row.str();
}

template <typename Scalar>
std::string report_csv(const std::vector<ExperimentRow<Scalar>>& rows) {
  std::ostringstream out;
  out << kReportHeader << "\n";
  for (const auto& row : rows) {
    out << report_csv_row(setting_name(row.setting), row.arm,
                          row.sweep_value, row.report)
        << "\n";
  }
  return out.str();
}

template <typename Scalar>
void write_report_csv(const std::string& path,
                      const std::vector<ExperimentRow<Scalar>>& rows) {
  std::ofstream out = detail::open_out(path);
  out << report_csv(rows);
}

}  // namespace sparsegen

#endif  // SPARSEGEN_IO_HPP_
