// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/pipeline/world.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "conke/error.hpp"

namespace conke {

namespace {

const std::vector<std::string> kVerbs = {
    "buys",   "finds",  "loses",  "breaks", "cleans", "paints", "sells",
    "borrows", "fixes", "hides",  "throws", "carries", "washes", "opens",
    "drops",  "builds", "orders", "steals", "gives",  "wraps"};

const std::vector<std::string> kObjects = {
    "coffee", "tea",     "juice",   "milk",    "soda",    "water",   "apple",
    "banana", "orange",  "grape",   "mango",   "pear",    "car",     "bike",
    "bus",    "truck",   "boat",    "train",   "guitar",  "piano",   "violin",
    "drum",   "flute",   "trumpet", "hammer",  "saw",     "drill",   "wrench",
    "shovel", "ladder",  "shirt",   "jacket",  "scarf",   "hat",     "glove",
    "boot",   "lamp",    "chair",   "table",   "clock"};

}  // namespace

// Tails are typed by relation, as in the ATOMIC-style schema: needs are
// things, reactions are feelings, wants and intents are actions. One word
// each, all distinct.
const std::map<std::string, std::vector<std::string>>& tail_pools() {
  static const std::map<std::string, std::vector<std::string>> kPools = {
      {"xNeed", {"money", "tools", "directions", "permission", "time", "gloves"}},
      {"xIntent", {"relax", "impress", "save", "learn", "share", "win"}},
      {"xAttr", {"careful", "curious", "generous", "lazy", "clumsy", "patient"}},
      {"xEffect", {"sweats", "pays", "smiles", "cries", "laughs", "trips"}},
      {"xReact", {"happy", "tired", "proud", "nervous", "sad", "excited"}},
      {"xWant", {"rest", "eat", "leave", "celebrate", "sleep", "clean"}},
      {"oEffect", {"thanks", "waves", "nods", "frowns", "cheers", "complains"}},
      {"oReact", {"grateful", "angry", "surprised", "jealous", "relieved", "amused"}},
      {"oWant", {"repay", "apologize", "assist", "join", "reply", "visit"}}};
  return kPools;
}

CorpusItem Fact::corpus_item() const {
  return {render_prompt(kDefaultPromptTemplate, head, relation), tail};
}

std::vector<Fact> make_fact_world(std::size_t count, std::uint64_t seed) {
  const std::size_t capacity = kVerbs.size() * kObjects.size();
  if (count > capacity)
    throw InputError("fact world supports at most " + std::to_string(capacity) + " facts");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> combos(capacity);
  for (std::size_t i = 0; i < capacity; ++i) combos[i] = i;
  std::shuffle(combos.begin(), combos.end(), rng);
  const auto& rels = social_relations();
  std::uniform_int_distribution<std::size_t> pick_rel(0, rels.size() - 1);
  std::vector<Fact> facts;
  facts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t c = combos[i];
    Fact f;
    f.head = "PersonX " + kVerbs[c / kObjects.size()] + " " + kObjects[c % kObjects.size()];
    f.relation = rels[pick_rel(rng)];
    const auto& pool = tail_pools().at(f.relation);
    f.tail = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    facts.push_back(std::move(f));
  }
  return facts;
}

EditTarget flipped_target(const Fact& current, std::uint64_t seed) {
  const auto it = tail_pools().find(current.relation);
  if (it == tail_pools().end())
    throw InputError("unknown relation '" + current.relation + "'");
  std::vector<std::string> choices;
  for (const auto& t : it->second)
    if (t != current.tail) choices.push_back(t);
  std::mt19937_64 rng(seed);
  return {current.relation,
          choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)]};
}

std::vector<std::string> fact_world_vocabulary() {
  std::vector<std::string> words{"PersonX"};
  words.insert(words.end(), kVerbs.begin(), kVerbs.end());
  words.insert(words.end(), kObjects.begin(), kObjects.end());
  for (const auto& [relation, tails] : tail_pools()) {
    words.push_back(relation);
    words.insert(words.end(), tails.begin(), tails.end());
  }
  return words;
}

std::vector<CorpusItem> corpus_of(const std::vector<Fact>& facts) {
  std::vector<CorpusItem> out;
  out.reserve(facts.size());
  for (const auto& f : facts) out.push_back(f.corpus_item());
  return out;
}

namespace {

const std::vector<std::pair<std::string, std::vector<std::string>>> kCategories = {
    {"beverage", {"coffee", "tea", "juice", "milk", "soda", "water", "cocoa", "lemonade"}},
    {"tool", {"hammer", "wrench", "saw", "drill", "chisel", "shovel", "rake", "pliers"}},
    {"fruit", {"apple", "banana", "mango", "pear", "peach", "plum", "cherry", "grape"}},
    {"vehicle", {"car", "truck", "bike", "scooter", "van", "boat", "tractor", "bus"}},
    {"instrument", {"guitar", "piano", "violin", "drum", "flute", "trumpet", "harp", "cello"}},
    {"garment", {"jacket", "scarf", "sweater", "hat", "coat", "dress", "shirt", "boot"}},
};

const std::vector<std::string> kCategoryVerbs = {"buys", "finds", "borrows"};

}  // namespace

CategoryWorld make_category_world(const CategoryWorldOptions& options) {
  if (options.corrupt_every == 0) throw InputError("corrupt_every must be >= 1");
  CategoryWorld world;
  const auto& rels = social_relations();
  const auto& templates = default_statement_templates();
  std::mt19937_64 rng(options.seed);
  std::set<std::string> vocab{"PersonX"};
  std::size_t group = 0;
  for (const auto& [category, members] : kCategories) {
    std::vector<std::string> instances = members;
    std::sort(instances.begin(), instances.end());
    if (options.train_per_group + options.test_per_group > instances.size())
      throw InputError("category world: train_per_group + test_per_group exceeds " +
                       std::to_string(instances.size()));
    for (const auto& inst : instances) world.lexicon[inst] = {category};
    vocab.insert(category);
    vocab.insert(instances.begin(), instances.end());
    for (const auto& verb : kCategoryVerbs) {
      vocab.insert(verb);
      const std::string relation = rels[std::uniform_int_distribution<std::size_t>(0, rels.size() - 1)(rng)];
      const auto& pool = tail_pools().at(relation);
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const std::string truth = pool[pick(rng)];
      std::string wrong = pool[pick(rng)];
      while (wrong == truth) wrong = pool[pick(rng)];
      const bool corrupted = group % options.corrupt_every == 0;
      ++group;

      auto head_of = [&](const std::string& noun) { return "PersonX " + verb + " " + noun; };
      world.verifier.rules[render_statement(head_of(category), relation, truth, templates)] = 0.9;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        const std::string head = head_of(instances[i]);
        world.corpus.push_back(
            {render_prompt(kDefaultPromptTemplate, head, relation), corrupted ? wrong : truth});
        world.verifier.rules[render_statement(head, relation, truth, templates)] = 0.9;
        if (corrupted) world.corrupted_heads.push_back(head);
        if (i < options.train_per_group)
          world.triples.push_back(Triple::make(head, relation, truth, TripleSource::kDataset, Split::kTrain));
        else if (i >= instances.size() - options.test_per_group)
          world.triples.push_back(Triple::make(head, relation, truth, TripleSource::kDataset, Split::kTest));
      }
    }
  }
  world.verifier.fallback = MockVerifierConfig::Fallback::kConstant;
  world.verifier.constant = 0.1;
  for (const auto& [relation, tails] : tail_pools()) {
    vocab.insert(relation);
    vocab.insert(tails.begin(), tails.end());
  }
  world.vocabulary.assign(vocab.begin(), vocab.end());
  return world;
}

KnowledgeStore category_store(const CategoryWorld& world) {
  KnowledgeStore store;
  for (const auto& t : world.triples) store.add_triple(t);
  return store;
}

}  // namespace conke
