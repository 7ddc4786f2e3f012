// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/model/checkpoint.hpp"

#include <fstream>

#include "conke/error.hpp"

namespace conke {

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& name) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw FormatError("weight '" + name + "' has the wrong number of entries");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
  return m;
}

}  // namespace

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"n_layers", c.n_layers}, {"d_model", c.d_model},         {"n_heads", c.n_heads},
          {"d_mlp", c.d_mlp},       {"vocab_size", c.vocab_size},   {"max_seq_len", c.max_seq_len},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n_layers = j.value("n_layers", c.n_layers);
  c.d_model = j.value("d_model", c.d_model);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_mlp = j.value("d_mlp", c.d_mlp);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json model_to_json(const ToyModel& model) {
  nlohmann::json weights = nlohmann::json::object();
  model.weights().for_each(
      [&](const std::string& name, const Matrix& m) { weights[name] = matrix_to_json(m); });
  return {{"format_version", kModelFormatVersion},
          {"config", config_to_json(model.config())},
          {"vocabulary", model.tokenizer().words()},
          {"weights", std::move(weights)}};
}

ToyModel model_from_json(const nlohmann::json& j) {
  try {
    const std::string version = j.at("format_version").get<std::string>();
    if (version != kModelFormatVersion)
      throw FormatError("unsupported model format '" + version + "', expected " +
                        std::string(kModelFormatVersion));
    ModelConfig config = config_from_json(j.at("config"));
    Tokenizer tok(j.at("vocabulary").get<std::vector<std::string>>());
    Weights w;
    w.layers.resize(config.n_layers);
    const auto& wj = j.at("weights");
    w.for_each([&](const std::string& name, Matrix& m) {
      if (!wj.contains(name)) throw FormatError("checkpoint is missing weight '" + name + "'");
      m = matrix_from_json(wj.at(name), name);
    });
    return ToyModel(config, std::move(tok), std::move(w));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model checkpoint: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("inconsistent model checkpoint: ") + e.what());
  }
}

void save_model(const ToyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model checkpoint: " + path.string());
  out << model_to_json(model).dump() << '\n';
  if (!out) throw IoError("failed writing model checkpoint: " + path.string());
}

ToyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model checkpoint: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model checkpoint is not valid JSON: " + path.string());
  }
  return model_from_json(j);
}

}  // namespace conke
