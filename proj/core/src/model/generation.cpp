// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/model/generation.hpp"

#include <cmath>
#include <random>

#include "conke/error.hpp"

namespace conke {

std::vector<int> generate_tokens(const ModelView& model, std::span<const int> prompt,
                                 std::size_t max_new, const DecodeOptions& options) {
  if (prompt.empty()) throw InputError("generate: empty prompt");
  const std::size_t max_len = model.config().max_seq_len;
  if (prompt.size() > max_len)
    throw InputError("generate: prompt longer than max_seq_len");
  if (options.mode == DecodeMode::kSampled && !(options.temperature > 0.0))
    throw InputError("generate: temperature must be > 0");

  std::vector<int> seq(prompt.begin(), prompt.end());
  std::vector<int> out;
  std::mt19937_64 rng(options.seed);
  const int eos = model.tokenizer().eos();
  while (out.size() < max_new && seq.size() < max_len) {
    ForwardResult fr = model.forward(seq);
    const auto last = static_cast<Eigen::Index>(seq.size() - 1);
    int next = 0;
    if (options.mode == DecodeMode::kGreedy) {
      fr.logits.row(last).maxCoeff(&next);
    } else {
      Eigen::RowVectorXd z = fr.logits.row(last) / options.temperature;
      const double mx = z.maxCoeff();
      std::vector<double> w(static_cast<std::size_t>(z.size()));
      for (Eigen::Index j = 0; j < z.size(); ++j)
        w[static_cast<std::size_t>(j)] = std::exp(z(j) - mx);
      // Inverse-CDF draw; std::discrete_distribution is not portable across
      // standard libraries.
      double total = 0.0;
      for (double x : w) total += x;
      const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      next = static_cast<int>(w.size()) - 1;
      for (std::size_t j = 0; j < w.size(); ++j) {
        acc += w[j];
        if (u < acc) {
          next = static_cast<int>(j);
          break;
        }
      }
    }
    if (next == eos) break;
    out.push_back(next);
    seq.push_back(next);
  }
  return out;
}

std::string generate(const ModelView& model, std::string_view prompt, std::size_t max_new,
                     const DecodeOptions& options) {
  std::vector<int> ids = model.tokenizer().encode(prompt);
  if (max_new == 0) return {};
  return model.tokenizer().decode(generate_tokens(model, ids, max_new, options));
}

Vector key_at(const ModelView& model, std::string_view prompt, TokenSpan subject,
              std::size_t layer) {
  if (layer >= model.config().n_layers)
    throw InputError("key_at: layer " + std::to_string(layer) + " out of range");
  std::vector<int> ids = model.tokenizer().encode(prompt);
  if (subject.begin >= subject.end || subject.end > ids.size())
    throw InputError("key_at: subject span [" + std::to_string(subject.begin) + ", " +
                     std::to_string(subject.end) + ") outside prompt of " +
                     std::to_string(ids.size()) + " tokens");
  ForwardResult fr = model.forward(ids);
  return fr.tap(layer, subject.end - 1).key_vector;
}

Vector mean_key(const ModelView& model, const std::vector<std::string>& prefixes,
                std::string_view prompt, TokenSpan subject, std::size_t layer) {
  if (prefixes.empty()) return key_at(model, prompt, subject, layer);
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(model.config().d_mlp));
  for (const auto& prefix : prefixes) {
    const std::size_t shift = model.tokenizer().encode(prefix).size();
    const std::string text = prefix.empty() ? std::string(prompt)
                                            : prefix + " " + std::string(prompt);
    sum += key_at(model, text, TokenSpan{subject.begin + shift, subject.end + shift}, layer);
  }
  return sum / static_cast<double>(prefixes.size());
}

double continuation_probability(const ModelView& model, std::string_view prompt,
                                std::string_view continuation, bool include_eos) {
  std::vector<int> ids = model.tokenizer().encode(prompt);
  std::vector<int> cont = model.tokenizer().encode(continuation);
  if (include_eos) cont.push_back(model.tokenizer().eos());
  if (cont.empty()) return 1.0;
  const std::size_t p = ids.size();
  ids.insert(ids.end(), cont.begin(), cont.end());
  ids.pop_back();
  ForwardResult fr = model.forward(ids);
  double log_p = 0.0;
  for (std::size_t i = 0; i < cont.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(p - 1 + i);
    const double mx = fr.logits.row(row).maxCoeff();
    const double lse = mx + std::log((fr.logits.row(row).array() - mx).exp().sum());
    log_p += fr.logits(row, cont[i]) - lse;
  }
  return std::exp(log_p);
}

}  // namespace conke
