// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/model/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "conke/error.hpp"
#include "conke/model/backprop.hpp"
#include "conke/model/generation.hpp"
#include "conke/text.hpp"

namespace conke {

namespace {

std::vector<Matrix*> matrices(Weights& w) {
  std::vector<Matrix*> out;
  w.for_each([&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

struct EncodedItem {
  std::vector<int> tokens;
  std::vector<std::size_t> positions;
  std::vector<int> targets;
};

EncodedItem encode_item(const ToyModel& model, const CorpusItem& item, bool loss_on_prompt) {
  const Tokenizer& tok = model.tokenizer();
  EncodedItem e;
  std::vector<int> prompt = tok.encode(item.prompt);
  std::vector<int> cont = tok.encode(item.continuation);
  if (prompt.empty()) throw InputError("corpus item with empty prompt");
  e.tokens = prompt;
  e.tokens.insert(e.tokens.end(), cont.begin(), cont.end());
  e.tokens.push_back(tok.eos());
  if (e.tokens.size() - 1 > model.config().max_seq_len)
    throw InputError("corpus sentence longer than max_seq_len: '" + item.sentence() + "'");
  const std::size_t first = loss_on_prompt ? 0 : prompt.size() - 1;
  for (std::size_t p = first; p + 1 < e.tokens.size(); ++p) {
    e.positions.push_back(p);
    e.targets.push_back(e.tokens[p + 1]);
  }
  // The input never needs the trailing end-of-sequence token itself.
  e.tokens.pop_back();
  return e;
}

}  // namespace

std::string CorpusItem::sentence() const {
  return normalize_whitespace(prompt + " " + continuation);
}

std::vector<CorpusItem> corpus_from_sentences(const std::vector<std::string>& sentences) {
  std::vector<CorpusItem> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    auto words = split_words(s);
    if (words.size() < 2)
      throw InputError("sentence needs at least two words: '" + s + "'");
    CorpusItem item;
    item.continuation = words.back();
    words.pop_back();
    item.prompt = join_words(words);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<double> train_in_place(ToyModel& model, const std::vector<CorpusItem>& corpus,
                                   const TrainOptions& options) {
  if (corpus.empty()) throw InputError("train: empty corpus");
  if (options.batch_size == 0) throw InputError("train: batch_size must be >= 1");
  if (!(options.learning_rate > 0.0)) throw InputError("train: learning_rate must be > 0");

  std::vector<EncodedItem> data;
  data.reserve(corpus.size());
  for (const auto& item : corpus) data.push_back(encode_item(model, item, options.loss_on_prompt));

  Weights& w = model.mutable_weights();
  Weights m1 = w.zeros_like();
  Weights m2 = w.zeros_like();
  std::vector<Matrix*> params = matrices(w);
  std::vector<Matrix*> mom1 = matrices(m1);
  std::vector<Matrix*> mom2 = matrices(m2);

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::mt19937_64 rng(options.shuffle_seed.value_or(model.config().seed) ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  const std::size_t batches_per_epoch =
      (data.size() + options.batch_size - 1) / options.batch_size;
  const double total_steps = static_cast<double>(batches_per_epoch * options.epochs);
  std::size_t step = 0;
  std::vector<double> epoch_losses;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      Weights grad = w.zeros_like();
      std::vector<Matrix*> g = matrices(grad);
      for (std::size_t b = start; b < end; ++b) {
        const EncodedItem& e = data[order[b]];
        ForwardCache cache = forward_cached(model, e.tokens);
        Matrix d_logits;
        const double loss = cross_entropy(cache.logits, e.positions, e.targets, &d_logits);
        epoch_loss += loss;
        if (!std::isfinite(loss))
          throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch) +
                                           ": non-finite loss");
        BackwardResult br = backward(model, cache, d_logits);
        std::vector<Matrix*> gi = matrices(br.grads);
        for (std::size_t k = 0; k < g.size(); ++k) *g[k] += *gi[k];
      }
      ++step;
      // Cosine decay to 10% of the base rate.
      const double progress = static_cast<double>(step - 1) / std::max(1.0, total_steps - 1);
      const double lr = options.learning_rate *
                        (0.1 + 0.45 * (1.0 + std::cos(progress * 3.14159265358979323846)));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix gk = *g[k] * inv_batch;
        *mom1[k] = kBeta1 * *mom1[k] + (1.0 - kBeta1) * gk;
        *mom2[k] = kBeta2 * *mom2[k] + (1.0 - kBeta2) * gk.cwiseAbs2();
        params[k]->array() -= lr * (mom1[k]->array() / c1) /
                              ((mom2[k]->array() / c2).sqrt() + kEps);
      }
    }
    epoch_loss /= static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss) || !model.all_finite())
      throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch));
    epoch_losses.push_back(epoch_loss);
  }
  return epoch_losses;
}

TrainResult train_toy(const std::vector<CorpusItem>& corpus, ModelConfig config,
                      const TrainOptions& options) {
  if (corpus.empty()) throw InputError("train: empty corpus");
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& item : corpus) texts.push_back(item.sentence());
  Tokenizer tok = Tokenizer::from_texts(texts, options.extra_vocabulary);
  if (config.vocab_size != 0 && config.vocab_size < tok.size())
    throw InputError("corpus vocabulary (" + std::to_string(tok.size()) +
                     " words) exceeds configured vocab_size " +
                     std::to_string(config.vocab_size));
  config.vocab_size = tok.size();
  TrainResult result{ToyModel(config, std::move(tok)), {}, 0.0};
  result.epoch_losses = train_in_place(result.model, corpus, options);
  result.memorization_accuracy = memorization_accuracy(result.model, corpus);
  return result;
}

double memorization_accuracy(const ModelView& model, const std::vector<CorpusItem>& corpus) {
  if (corpus.empty()) return 1.0;
  std::size_t hits = 0;
  for (const auto& item : corpus) {
    const std::string expected = normalize_whitespace(item.continuation);
    const std::size_t n = split_words(expected).size();
    if (generate(model, item.prompt, n) == expected) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(corpus.size());
}

}  // namespace conke
