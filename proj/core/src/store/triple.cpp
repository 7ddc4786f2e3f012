// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/store/triple.hpp"

#include "conke/error.hpp"
#include "conke/text.hpp"

namespace conke {

const std::vector<std::string>& social_relations() {
  static const std::vector<std::string> kRelations = {
      "xNeed", "xIntent", "xAttr", "xEffect", "xReact", "xWant", "oEffect", "oReact", "oWant"};
  return kRelations;
}

std::string_view to_string(TripleSource source) {
  switch (source) {
    case TripleSource::kDataset: return "dataset";
    case TripleSource::kGenerated: return "generated";
    case TripleSource::kConceptualized: return "conceptualized";
    case TripleSource::kInstantiated: return "instantiated";
    case TripleSource::kCorrected: return "corrected";
  }
  return "unknown";
}

std::string_view to_string(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

TripleSource parse_triple_source(std::string_view text) {
  for (auto s : {TripleSource::kDataset, TripleSource::kGenerated, TripleSource::kConceptualized,
                 TripleSource::kInstantiated, TripleSource::kCorrected})
    if (to_string(s) == text) return s;
  throw InputError("unknown triple source '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw InputError("unknown split '" + std::string(text) + "' (expected train or test)");
}

std::string_view to_string(LinkDirection direction) {
  return direction == LinkDirection::kAbstracted ? "abstracted" : "instantiated";
}

LinkDirection parse_link_direction(std::string_view text) {
  if (text == "abstracted") return LinkDirection::kAbstracted;
  if (text == "instantiated") return LinkDirection::kInstantiated;
  throw InputError("unknown link direction '" + std::string(text) + "'");
}

Triple Triple::make(std::string_view head, std::string_view relation, std::string_view tail,
                    TripleSource source, Split split) {
  Triple t;
  t.head = normalize_whitespace(head);
  t.relation = normalize_whitespace(relation);
  t.tail = normalize_whitespace(tail);
  if (t.head.empty() || t.relation.empty() || t.tail.empty())
    throw InputError("triple needs a non-empty head, relation and tail");
  t.id = content_id(t.head, t.relation, t.tail);
  t.source = source;
  t.split = split;
  return t;
}

std::string abstract_id(std::string_view head_concept, std::string_view relation,
                        std::string_view tail) {
  return content_id("concept:" + normalize_whitespace(head_concept), relation, tail);
}

AbstractTriple AbstractTriple::make(std::string_view head_concept, std::string_view relation,
                                    std::string_view tail, std::vector<std::string> derived_from,
                                    bool identity) {
  AbstractTriple a;
  a.head_concept = normalize_whitespace(head_concept);
  a.relation = normalize_whitespace(relation);
  a.tail = normalize_whitespace(tail);
  if (a.head_concept.empty() || a.relation.empty() || a.tail.empty())
    throw InputError("abstract triple needs a non-empty concept head, relation and tail");
  if (derived_from.empty()) throw InputError("abstract triple needs at least one source");
  a.id = abstract_id(a.head_concept, a.relation, a.tail);
  a.derived_from = std::move(derived_from);
  a.identity = identity;
  return a;
}

void to_json(nlohmann::json& j, const Triple& t) {
  j = nlohmann::json{{"type", "triple"},     {"id", t.id},
                     {"head", t.head},       {"relation", t.relation},
                     {"tail", t.tail},       {"source", to_string(t.source)},
                     {"split", to_string(t.split)}};
  if (t.score) j["score"] = *t.score;
}

void from_json(const nlohmann::json& j, Triple& t) {
  t.id = j.at("id").get<std::string>();
  t.head = j.at("head").get<std::string>();
  t.relation = j.at("relation").get<std::string>();
  t.tail = j.at("tail").get<std::string>();
  t.source = parse_triple_source(j.at("source").get<std::string>());
  t.split = parse_split(j.at("split").get<std::string>());
  if (j.contains("score") && !j.at("score").is_null())
    t.score = j.at("score").get<double>();
  else
    t.score.reset();
}

void to_json(nlohmann::json& j, const AbstractTriple& t) {
  j = nlohmann::json{{"type", "abstract"},
                     {"id", t.id},
                     {"head_concept", t.head_concept},
                     {"relation", t.relation},
                     {"tail", t.tail},
                     {"derived_from", t.derived_from},
                     {"identity", t.identity}};
}

void from_json(const nlohmann::json& j, AbstractTriple& t) {
  t.id = j.at("id").get<std::string>();
  t.head_concept = j.at("head_concept").get<std::string>();
  t.relation = j.at("relation").get<std::string>();
  t.tail = j.at("tail").get<std::string>();
  t.derived_from = j.at("derived_from").get<std::vector<std::string>>();
  t.identity = j.value("identity", false);
}

void to_json(nlohmann::json& j, const ConceptLink& l) {
  j = nlohmann::json{{"type", "link"},
                     {"instance_id", l.instance_id},
                     {"concept_id", l.concept_id},
                     {"direction", to_string(l.direction)}};
}

void from_json(const nlohmann::json& j, ConceptLink& l) {
  l.instance_id = j.at("instance_id").get<std::string>();
  l.concept_id = j.at("concept_id").get<std::string>();
  l.direction = parse_link_direction(j.at("direction").get<std::string>());
}

}  // namespace conke
