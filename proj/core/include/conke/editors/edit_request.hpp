// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conke/model/generation.hpp"

namespace conke {

// The unit of an edit is the (relation, tail) pair. The relation is part of
// the prompt (see render_prompt) and the tail is the continuation the model
// should produce. An empty relation encodes an open-ended free-text target.
struct EditTarget {
  std::string relation;
  std::string tail;

  // The normalized tail.
  std::string continuation() const;
  bool operator==(const EditTarget&) const = default;
};

inline constexpr std::string_view kDefaultPromptTemplate = "{head} {relation}";

// Substitutes {head} and {relation} and normalizes whitespace. Throws
// InputError when the template has no {head} placeholder.
std::string render_prompt(std::string_view prompt_template, const std::string& head,
                          const std::string& relation);

struct EditRequest {
  std::string id;
  std::string prompt;
  TokenSpan subject;
  EditTarget target;
  std::vector<std::string> source_triple_ids;

  // id = content id of (prompt, relation, tail). A default-constructed
  // subject span means "the whole prompt".
  static EditRequest make(std::string prompt, EditTarget target,
                          std::vector<std::string> source_triple_ids = {},
                          TokenSpan subject = {});

  // The request correcting `head` to `target`: prompt rendered from the
  // template, subject span over the whole prompt, so the key is read at the
  // token right before the tail.
  static EditRequest for_head(const std::string& head, EditTarget target,
                              std::vector<std::string> source_triple_ids = {},
                              std::string_view prompt_template = kDefaultPromptTemplate);

  // Throws InputError on an empty tail, empty prompt or empty subject span.
  void validate() const;
};

// Mean probability (teacher forced, end-of-sequence included) of each
// request's target continuation. 1.0 for an empty list.
double mean_target_probability(const ModelView& model, const std::vector<EditRequest>& requests);

void to_json(nlohmann::json& j, const EditRequest& r);
void from_json(const nlohmann::json& j, EditRequest& r);

}  // namespace conke
