// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "conke/conceptualizer/backend.hpp"
#include "conke/editors/edit_request.hpp"
#include "conke/store/store.hpp"

namespace conke {

inline constexpr std::size_t kDefaultAbstractions = 3;
inline constexpr std::size_t kDefaultInstantiations = 5;

// Up to k concept-level versions of `triple`, same relation and tail,
// derived_from = {triple.id}. Heads equal to the source head are dropped.
// Throws InputError when k == 0.
std::vector<AbstractTriple> abstract(const ConceptBackend& backend, const Triple& triple,
                                     std::size_t k);

struct Instantiation {
  Triple triple;     // source kInstantiated, tail and relation of the concept
  ConceptLink link;  // triple -> concept, kInstantiated
};

// Up to k novel instances of `concept_triple`: an instance whose id equals a
// derived_from source is skipped before truncation. The triples take
// `split`. Throws InputError when k == 0.
std::vector<Instantiation> instantiate(const ConceptBackend& backend,
                                       const AbstractTriple& concept_triple, std::size_t k,
                                       Split split = Split::kTrain);

struct Augmentation {
  // The original correction, then abstractions, then instantiations, with
  // duplicate (head, relation, tail) keys dropped.
  std::vector<EditRequest> requests;
  Triple corrected;
  std::vector<AbstractTriple> abstracts;
  std::vector<Instantiation> instances;
  std::size_t duplicates = 0;
};

// Edit requests for an implausible triple and its corrected target: the
// correction itself, each abstraction carrying the corrected (relation,
// tail), and k_inst instantiations of each abstraction. Every request lists
// the implausible triple as its source. k_abs == 0 skips conceptualization.
Augmentation augment(const ConceptBackend& backend, const Triple& implausible,
                     const EditTarget& corrected, std::size_t k_abs = kDefaultAbstractions,
                     std::size_t k_inst = kDefaultInstantiations,
                     std::string_view prompt_template = kDefaultPromptTemplate);

// Writes the implausible triple (if missing), the corrected triple, the
// abstract triples with their kAbstracted links, and the instances with
// their kInstantiated links.
void record_augmentation(KnowledgeStore& store, const Triple& implausible,
                         const Augmentation& augmentation);

// An instance is consistent with a concept when the store holds the triple
// (instance head, concept relation, concept tail), compared after
// whitespace normalization.
bool is_consistent(const KnowledgeStore& store, const Triple& instance,
                   const AbstractTriple& concept_triple);

// One request per linked instance (either direction) that is not yet
// consistent with the concept, ascending instance id. Each request's source
// is the instance. Throws InputError for an unknown concept and
// IntegrityError for a link to a missing instance.
std::vector<EditRequest> propagate(const KnowledgeStore& store, const std::string& concept_id,
                                   std::string_view prompt_template = kDefaultPromptTemplate);

// Records each request as applied: adds the corrected triple (source
// instance head, request target) with the source's split. Returns how many
// triples were new. Throws IntegrityError when a source is missing.
std::size_t apply_propagation(KnowledgeStore& store, const std::vector<EditRequest>& requests);

}  // namespace conke
