// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conke/model/model.hpp"

namespace conke {

// One training sentence, split into the part the model is prompted with and
// the part it should reproduce. The sentence is `prompt + " " + continuation`
// followed by end-of-sequence.
struct CorpusItem {
  std::string prompt;
  std::string continuation;

  std::string sentence() const;
};

// Splits plain sentences into prompt = all words but the last,
// continuation = last word.
std::vector<CorpusItem> corpus_from_sentences(const std::vector<std::string>& sentences);

struct TrainOptions {
  std::size_t epochs = 50;
  double learning_rate = 5e-3;
  std::size_t batch_size = 8;
  // When false, only continuation tokens (and end-of-sequence) carry loss.
  bool loss_on_prompt = false;
  // Words added to the vocabulary even if the corpus never uses them.
  std::vector<std::string> extra_vocabulary;
  // Mini-batch order; the model's config seed when unset.
  std::optional<std::uint64_t> shuffle_seed;
};

struct TrainResult {
  ToyModel model;
  std::vector<double> epoch_losses;
  // Fraction of corpus prompts whose greedy continuation reproduces the
  // corpus continuation.
  double memorization_accuracy = 0.0;
};

// Deterministic for fixed (corpus, config, options). config.vocab_size is
// derived from the corpus vocabulary.
// Throws InputError on an empty corpus, DivergenceError on a non-finite loss.
TrainResult train_toy(const std::vector<CorpusItem>& corpus, ModelConfig config,
                      const TrainOptions& options = {});

// Continues training an existing model in place. Every corpus word must
// already be in the model's vocabulary.
std::vector<double> train_in_place(ToyModel& model, const std::vector<CorpusItem>& corpus,
                                   const TrainOptions& options);

double memorization_accuracy(const ModelView& model, const std::vector<CorpusItem>& corpus);

}  // namespace conke
