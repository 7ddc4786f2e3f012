// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conke/conceptualizer/backend.hpp"
#include "conke/editors/edit_request.hpp"
#include "conke/model/training.hpp"
#include "conke/store/store.hpp"
#include "conke/verifier/verifier.hpp"

namespace conke {

// Deterministic synthetic data for offline experiments and tests.

struct Fact {
  std::string head;
  std::string relation;
  std::string tail;

  // Prompt "<head> <relation>", continuation the tail.
  CorpusItem corpus_item() const;
  EditTarget target() const { return {relation, tail}; }
};

// Tails each relation admits. Keys are exactly social_relations().
const std::map<std::string, std::vector<std::string>>& tail_pools();

// `count` facts with distinct "PersonX <verb> <object>" heads, a random
// relation each and a tail from that relation's pool.
std::vector<Fact> make_fact_world(std::size_t count, std::uint64_t seed);

// Same relation, a different tail from its pool: the corrected version of an
// implausible fact.
EditTarget flipped_target(const Fact& current, std::uint64_t seed);

// Every word make_fact_world and flipped_target can produce, so a model
// trained on a subset can still be edited toward any pool tail.
std::vector<std::string> fact_world_vocabulary();

std::vector<CorpusItem> corpus_of(const std::vector<Fact>& facts);

// A world with concept structure. Heads are "PersonX <verb> <instance>",
// instances grouped under categories; every (verb, category) group shares one
// relation and one true tail. The model learns every instance, but in
// corrupted groups it learns a wrong tail. Per group, the first
// train_per_group instances (ascending) are train-split reference triples and
// the last test_per_group instances are test-split probes. Everything in
// between is only in the training corpus.
struct CategoryWorldOptions {
  std::uint64_t seed = 1;
  std::size_t train_per_group = 2;
  std::size_t test_per_group = 2;
  // Groups 0, n, 2n, ... are corrupted.
  std::size_t corrupt_every = 3;
};

struct CategoryWorld {
  std::vector<CorpusItem> corpus;
  // Dataset triples with true tails and their split.
  std::vector<Triple> triples;
  // instance -> {category}.
  Lexicon lexicon;
  // True statements (instances and category heads) score 0.9, anything else
  // 0.1.
  MockVerifierConfig verifier;
  std::vector<std::string> vocabulary;
  // Heads of corrupted groups.
  std::vector<std::string> corrupted_heads;
};

CategoryWorld make_category_world(const CategoryWorldOptions& options = {});

// A store holding the world's triples.
KnowledgeStore category_store(const CategoryWorld& world);

}  // namespace conke
