// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/conceptualizer/conceptualizer.hpp"

#include <algorithm>
#include <set>

#include "conke/error.hpp"
#include "conke/text.hpp"

namespace conke {

std::vector<AbstractTriple> abstract(const ConceptBackend& backend, const Triple& triple,
                                     std::size_t k) {
  if (k == 0) throw InputError("abstract: k must be >= 1");
  std::vector<AbstractTriple> out;
  std::set<std::string> seen;
  for (const auto& head : backend.abstract_heads(triple.head, k)) {
    const std::string h = normalize_whitespace(head);
    if (h.empty() || h == triple.head || !seen.insert(h).second) continue;
    out.push_back(AbstractTriple::make(h, triple.relation, triple.tail, {triple.id}));
    if (out.size() == k) break;
  }
  return out;
}

std::vector<Instantiation> instantiate(const ConceptBackend& backend,
                                       const AbstractTriple& concept_triple, std::size_t k,
                                       Split split) {
  if (k == 0) throw InputError("instantiate: k must be >= 1");
  const std::set<std::string> sources(concept_triple.derived_from.begin(),
                                      concept_triple.derived_from.end());
  std::vector<Instantiation> out;
  std::set<std::string> seen;
  const auto heads =
      backend.instance_heads(concept_triple.head_concept, k + concept_triple.derived_from.size());
  for (const auto& head : heads) {
    const std::string h = normalize_whitespace(head);
    if (h.empty()) continue;
    Triple t = Triple::make(h, concept_triple.relation, concept_triple.tail,
                            TripleSource::kInstantiated, split);
    if (sources.count(t.id) || !seen.insert(t.id).second) continue;
    ConceptLink link{t.id, concept_triple.id, LinkDirection::kInstantiated};
    out.push_back({std::move(t), std::move(link)});
    if (out.size() == k) break;
  }
  return out;
}

Augmentation augment(const ConceptBackend& backend, const Triple& implausible,
                     const EditTarget& corrected, std::size_t k_abs, std::size_t k_inst,
                     std::string_view prompt_template) {
  if (normalize_whitespace(corrected.tail).empty() || normalize_whitespace(corrected.relation).empty())
    throw InputError("augment: corrected target needs a relation and a tail");
  Augmentation aug;
  aug.corrected = Triple::make(implausible.head, corrected.relation, corrected.tail,
                               TripleSource::kCorrected, implausible.split);
  const std::vector<std::string> provenance = {implausible.id};
  const EditTarget target{aug.corrected.relation, aug.corrected.tail};

  std::set<std::string> keys;
  auto push = [&](const std::string& head) {
    if (!keys.insert(content_id(head, target.relation, target.tail)).second) {
      ++aug.duplicates;
      return;
    }
    aug.requests.push_back(EditRequest::for_head(head, target, provenance, prompt_template));
  };
  push(aug.corrected.head);

  if (k_abs > 0) {
    for (const AbstractTriple& a : abstract(backend, implausible, k_abs)) {
      // Lift the corrected target to the concept.
      aug.abstracts.push_back(
          AbstractTriple::make(a.head_concept, target.relation, target.tail, provenance));
    }
  }
  for (const auto& a : aug.abstracts) push(a.head_concept);
  if (k_inst > 0) {
    for (const auto& a : aug.abstracts) {
      for (auto& inst : instantiate(backend, a, k_inst, implausible.split)) {
        push(inst.triple.head);
        aug.instances.push_back(std::move(inst));
      }
    }
  }
  return aug;
}

void record_augmentation(KnowledgeStore& store, const Triple& implausible,
                         const Augmentation& augmentation) {
  store.add_triple(implausible);
  store.add_triple(augmentation.corrected);
  for (const auto& a : augmentation.abstracts) {
    store.add_abstract(a);
    store.add_link({implausible.id, a.id, LinkDirection::kAbstracted});
  }
  for (const auto& inst : augmentation.instances) {
    store.add_triple(inst.triple);
    store.add_link(inst.link);
  }
}

bool is_consistent(const KnowledgeStore& store, const Triple& instance,
                   const AbstractTriple& concept_triple) {
  return store.contains_triple(
      content_id(instance.head, concept_triple.relation, concept_triple.tail));
}

std::vector<EditRequest> propagate(const KnowledgeStore& store, const std::string& concept_id,
                                   std::string_view prompt_template) {
  const auto concept_triple = store.abstract(concept_id);
  if (!concept_triple) throw InputError("propagate: unknown concept " + concept_id);
  std::set<std::string> instance_ids;
  for (const auto& link : store.links_to(concept_id)) instance_ids.insert(link.instance_id);

  std::vector<EditRequest> out;
  std::set<std::string> heads;
  const EditTarget target{concept_triple->relation, concept_triple->tail};
  for (const auto& id : instance_ids) {
    const auto instance = store.triple(id);
    if (!instance)
      throw IntegrityError("concept " + concept_id + " links to missing triple " + id, {id});
    if (is_consistent(store, *instance, *concept_triple)) continue;
    // Two stale instances with one head need a single correction.
    if (!heads.insert(instance->head).second) continue;
    out.push_back(EditRequest::for_head(instance->head, target, {id}, prompt_template));
  }
  return out;
}

std::size_t apply_propagation(KnowledgeStore& store, const std::vector<EditRequest>& requests) {
  std::size_t added = 0;
  for (const auto& r : requests) {
    if (r.source_triple_ids.empty())
      throw InputError("apply_propagation: request " + r.id + " has no source instance");
    const std::string& src_id = r.source_triple_ids.front();
    const auto src = store.triple(src_id);
    if (!src) throw IntegrityError("propagation source " + src_id + " is missing", {src_id});
    const Triple fixed = Triple::make(src->head, r.target.relation, r.target.tail,
                                      TripleSource::kCorrected, src->split);
    if (store.add_triple(fixed)) ++added;
  }
  return added;
}

}  // namespace conke
