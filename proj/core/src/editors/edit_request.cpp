// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/editors/edit_request.hpp"

#include "conke/error.hpp"
#include "conke/text.hpp"

namespace conke {

std::string EditTarget::continuation() const { return normalize_whitespace(tail); }

std::string render_prompt(std::string_view prompt_template, const std::string& head,
                          const std::string& relation) {
  std::string out(prompt_template);
  bool has_head = false;
  for (const auto& [key, value] : {std::pair<std::string_view, const std::string&>{"{head}", head},
                                   std::pair<std::string_view, const std::string&>{"{relation}", relation}}) {
    for (std::size_t at = out.find(key); at != std::string::npos; at = out.find(key, at + value.size())) {
      out.replace(at, key.size(), value);
      if (key == "{head}") has_head = true;
    }
  }
  if (!has_head) throw InputError("prompt template has no {head} placeholder");
  return normalize_whitespace(out);
}

EditRequest EditRequest::make(std::string prompt, EditTarget target,
                              std::vector<std::string> source_triple_ids, TokenSpan subject) {
  EditRequest r;
  r.prompt = normalize_whitespace(prompt);
  r.target = EditTarget{normalize_whitespace(target.relation), normalize_whitespace(target.tail)};
  r.source_triple_ids = std::move(source_triple_ids);
  r.subject = subject.end == 0 ? TokenSpan{0, split_words(r.prompt).size()} : subject;
  r.id = content_id(r.prompt, r.target.relation, r.target.tail);
  return r;
}

EditRequest EditRequest::for_head(const std::string& head, EditTarget target,
                                  std::vector<std::string> source_triple_ids,
                                  std::string_view prompt_template) {
  std::string prompt = render_prompt(prompt_template, head, target.relation);
  return make(std::move(prompt), std::move(target), std::move(source_triple_ids));
}

void EditRequest::validate() const {
  if (normalize_whitespace(prompt).empty()) throw InputError("edit request has an empty prompt");
  if (normalize_whitespace(target.tail).empty())
    throw InputError("edit request '" + id + "' has an empty target tail");
  if (subject.begin >= subject.end)
    throw InputError("edit request '" + id + "' has an empty subject span");
  if (subject.end > split_words(prompt).size())
    throw InputError("edit request '" + id + "' subject span runs past the prompt");
}

double mean_target_probability(const ModelView& model, const std::vector<EditRequest>& requests) {
  if (requests.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& r : requests)
    sum += continuation_probability(model, r.prompt, r.target.continuation(), true);
  return sum / static_cast<double>(requests.size());
}

void to_json(nlohmann::json& j, const EditRequest& r) {
  j = nlohmann::json{{"id", r.id},
                     {"prompt", r.prompt},
                     {"subject", {r.subject.begin, r.subject.end}},
                     {"relation", r.target.relation},
                     {"tail", r.target.tail},
                     {"source_triple_ids", r.source_triple_ids}};
}

void from_json(const nlohmann::json& j, EditRequest& r) {
  TokenSpan subject{};
  if (j.contains("subject")) {
    const auto& s = j.at("subject");
    if (!s.is_array() || s.size() != 2) throw FormatError("edit request subject must be [begin, end]");
    subject = TokenSpan{s[0].get<std::size_t>(), s[1].get<std::size_t>()};
  }
  std::vector<std::string> sources;
  if (j.contains("source_triple_ids"))
    sources = j.at("source_triple_ids").get<std::vector<std::string>>();
  r = EditRequest::make(j.at("prompt").get<std::string>(),
                        EditTarget{j.value("relation", std::string{}), j.at("tail").get<std::string>()},
                        std::move(sources), subject);
}

}  // namespace conke
