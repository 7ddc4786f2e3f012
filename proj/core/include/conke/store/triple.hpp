// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace conke {

// The nine ATOMIC-style social relations.
const std::vector<std::string>& social_relations();

enum class TripleSource { kDataset, kGenerated, kConceptualized, kInstantiated, kCorrected };
enum class Split { kTrain, kTest };

std::string_view to_string(TripleSource source);
std::string_view to_string(Split split);
// Both throw InputError on an unknown tag.
TripleSource parse_triple_source(std::string_view text);
Split parse_split(std::string_view text);

// One (head, relation, tail) fact. The id is content_id over the
// whitespace-normalized fields, so equal content shares an id everywhere.
struct Triple {
  std::string id;
  std::string head;
  std::string relation;
  std::string tail;
  TripleSource source = TripleSource::kDataset;
  std::optional<double> score;
  Split split = Split::kTrain;

  // Normalizes the fields and computes the id. Throws InputError when head,
  // relation or tail is empty after normalization.
  static Triple make(std::string_view head, std::string_view relation, std::string_view tail,
                     TripleSource source = TripleSource::kDataset, Split split = Split::kTrain);

  bool operator==(const Triple&) const = default;
};

// Concept-level triple obtained by abstracting one or more instance triples.
struct AbstractTriple {
  std::string id;
  std::string head_concept;
  std::string relation;
  std::string tail;
  std::vector<std::string> derived_from;
  // Set when the concept head equals a source head on purpose.
  bool identity = false;

  // Ids live in their own namespace: the same text as a Triple gets a
  // different id.
  static AbstractTriple make(std::string_view head_concept, std::string_view relation,
                             std::string_view tail, std::vector<std::string> derived_from,
                             bool identity = false);

  bool operator==(const AbstractTriple&) const = default;
};

std::string abstract_id(std::string_view head_concept, std::string_view relation,
                        std::string_view tail);

enum class LinkDirection { kAbstracted, kInstantiated };

std::string_view to_string(LinkDirection direction);
LinkDirection parse_link_direction(std::string_view text);

// kAbstracted: the instance was abstracted into the concept.
// kInstantiated: the instance was produced from the concept.
struct ConceptLink {
  std::string instance_id;
  std::string concept_id;
  LinkDirection direction = LinkDirection::kAbstracted;

  auto operator<=>(const ConceptLink&) const = default;
  bool operator==(const ConceptLink&) const = default;
};

void to_json(nlohmann::json& j, const Triple& t);
void from_json(const nlohmann::json& j, Triple& t);
void to_json(nlohmann::json& j, const AbstractTriple& t);
void from_json(const nlohmann::json& j, AbstractTriple& t);
void to_json(nlohmann::json& j, const ConceptLink& l);
void from_json(const nlohmann::json& j, ConceptLink& l);

}  // namespace conke
