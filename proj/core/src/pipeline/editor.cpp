// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/pipeline/editor.hpp"

#include "conke/error.hpp"
#include "conke/model/generation.hpp"
#include "conke/text.hpp"

namespace conke {

Editor::Editor(const ToyModel& base, EditorSettings settings,
               std::vector<std::string> covariance_prompts)
    : model_(base), settings_(std::move(settings)),
      covariance_prompts_(std::move(covariance_prompts)) {
  const ModelConfig& config = model_.config();
  if (!settings_.layers.empty()) {
    for (std::size_t l : settings_.layers)
      if (l >= config.n_layers) throw InputError("edit layer " + std::to_string(l) + " out of range");
    layers_ = settings_.method == EditMethod::kMemit
                  ? settings_.layers
                  : std::vector<std::size_t>{settings_.layers.front()};
  } else if (settings_.method == EditMethod::kMemit) {
    layers_ = default_memit_layers(config);
  } else {
    layers_ = {default_edit_layer(config)};
  }
}

void Editor::ensure_covariances() {
  if (!covariances_.empty() || settings_.method == EditMethod::kGrace) return;
  if (covariance_prompts_.empty()) throw InputError("rome and memit need covariance prompts");
  for (std::size_t l : layers_)
    covariances_.push_back(
        estimate_covariance(model_, covariance_prompts_, l, settings_.covariance_ridge));
}

std::vector<EditRecord> Editor::apply(const std::vector<EditRequest>& batch, std::int64_t& clock) {
  std::vector<EditRecord> records;
  if (batch.empty()) return records;
  ensure_covariances();
  switch (settings_.method) {
    case EditMethod::kRome:
      for (const auto& r : batch) {
        records.push_back(rome_edit(model_, r, layers_.front(), covariances_.front(), settings_.rome));
        records.back().timestamp = clock++;
      }
      break;
    case EditMethod::kMemit:
      records.push_back(memit_edit(model_, batch, layers_, covariances_, settings_.memit));
      records.back().timestamp = clock++;
      break;
    case EditMethod::kGrace:
      for (const auto& r : batch) {
        records.push_back(grace_add(codebook_, model_, r, layers_.front(), settings_.grace_radius,
                                    settings_.grace));
        records.back().timestamp = clock++;
      }
      break;
  }
  return records;
}

ModelView Editor::view() const {
  if (settings_.method == EditMethod::kGrace)
    return apply_adapter(model_, codebook_, layers_.front());
  return ModelView(model_);
}

double edit_success(const ModelView& model, const std::vector<EditRequest>& requests,
                    std::size_t max_new) {
  if (requests.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& r : requests)
    if (normalize_whitespace(generate(model, r.prompt, max_new)) == r.target.continuation()) ++ok;
  return static_cast<double>(ok) / static_cast<double>(requests.size());
}

double locality(const ModelView& before, const ModelView& after,
                const std::vector<std::string>& prompts, std::size_t max_new) {
  if (prompts.empty()) return 1.0;
  std::size_t same = 0;
  for (const auto& p : prompts)
    if (generate(before, p, max_new) == generate(after, p, max_new)) ++same;
  return static_cast<double>(same) / static_cast<double>(prompts.size());
}

std::vector<double> drift(Editor& editor, const std::vector<std::vector<EditRequest>>& batches,
                          std::size_t max_new) {
  std::vector<double> curve;
  std::vector<EditRequest> seen;
  std::int64_t clock = 0;
  for (const auto& batch : batches) {
    editor.apply(batch, clock);
    seen.insert(seen.end(), batch.begin(), batch.end());
    curve.push_back(edit_success(editor.view(), seen, max_new));
  }
  return curve;
}

}  // namespace conke
