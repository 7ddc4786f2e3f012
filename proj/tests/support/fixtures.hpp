// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "conke/model/training.hpp"
#include "conke/pipeline/world.hpp"

namespace conke::testing {

// A small fact world and a model that has memorized it. Built once per test
// binary; tests copy the model before mutating it.
struct SmallWorld {
  std::vector<Fact> facts;
  std::vector<CorpusItem> corpus;
  TrainResult trained;
};

inline const SmallWorld& small_world() {
  static const SmallWorld world = [] {
    std::vector<Fact> facts = make_fact_world(40, 5);
    std::vector<CorpusItem> corpus = corpus_of(facts);
    ModelConfig config;
    config.d_model = 32;
    config.n_heads = 4;
    config.d_mlp = 128;
    config.seed = 11;
    TrainOptions options;
    options.epochs = 60;
    options.extra_vocabulary = fact_world_vocabulary();
    TrainResult trained = train_toy(corpus, config, options);
    return SmallWorld{std::move(facts), std::move(corpus), std::move(trained)};
  }();
  return world;
}

// The category world with a model trained on its (partly corrupted) corpus.
struct TrainedCategoryWorld {
  CategoryWorld world;
  TrainResult trained;
};

inline TrainedCategoryWorld train_category_world(std::uint64_t seed) {
  CategoryWorldOptions options;
  options.seed = seed;
  CategoryWorld world = make_category_world(options);
  ModelConfig config;
  config.seed = seed;
  TrainOptions train;
  train.extra_vocabulary = world.vocabulary;
  TrainResult trained = train_toy(world.corpus, config, train);
  return {std::move(world), std::move(trained)};
}

inline const TrainedCategoryWorld& category_world() {
  static const TrainedCategoryWorld world = train_category_world(1);
  return world;
}

inline std::vector<std::string> corpus_sentences(const std::vector<CorpusItem>& corpus) {
  std::vector<std::string> out;
  for (const auto& c : corpus) out.push_back(c.sentence());
  return out;
}

// Tiny untrained model over a fixed vocabulary, for shape and gradient tests.
inline ToyModel tiny_model(std::uint64_t seed = 1, std::size_t n_layers = 2) {
  ModelConfig config;
  config.n_layers = n_layers;
  config.d_model = 8;
  config.n_heads = 2;
  config.d_mlp = 16;
  config.max_seq_len = 12;
  config.seed = seed;
  return ToyModel(config, Tokenizer({"a", "b", "c", "d", "e", "f"}));
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("conke_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace conke::testing
