// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include <nlohmann/json.hpp>

#include "conke/error.hpp"
#include "conke/pipeline/pipeline.hpp"
#include "conke/pipeline/world.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace conke;
using conke::testing::category_world;
using conke::testing::TempDir;
using nlohmann::json;

namespace {

Backends world_backends(const CategoryWorld& world, bool with_concepts = true) {
  Backends b;
  b.verifier = std::make_unique<MockVerifier>(world.verifier);
  if (with_concepts) b.concepts = std::make_unique<LexiconBackend>(world.lexicon);
  b.templates = default_statement_templates();
  return b;
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++n;
  return n;
}

}  // namespace

// ------------------------------------------------------------------ config

TEST_CASE("config: json round trip and strict keys") {
  PipelineConfig c;
  c.edit_method = EditMethod::kGrace;
  c.layers = {1};
  c.k_abs = 2;
  c.seed = 9;
  c.relations = {"xWant"};
  const json j = pipeline_config_to_json(c);
  for (const auto& key : pipeline_config_keys()) CHECK(j.contains(key));
  const PipelineConfig back = pipeline_config_from_json(j);
  CHECK(pipeline_config_to_json(back) == j);

  json unknown = j;
  unknown["edit_methd"] = "rome";
  CHECK_THROWS_AS(pipeline_config_from_json(unknown), InputError);
  json wrong_type = j;
  wrong_type["k_abs"] = "three";
  CHECK_THROWS_AS(pipeline_config_from_json(wrong_type), InputError);
}

TEST_CASE("config: relative paths resolve against the file's directory") {
  TempDir dir;
  std::ofstream(dir / "config.json") << R"({"verifier_rules": "rules.json", "lexicon": "/abs/lex.json"})";
  const PipelineConfig c = load_pipeline_config(dir / "config.json");
  CHECK(c.verifier.rules == dir / "rules.json");
  CHECK(c.concepts.lexicon == std::filesystem::path("/abs/lex.json"));
}

TEST_CASE("config: validation") {
  PipelineConfig c;
  c.threshold = 1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = PipelineConfig{};
  c.value_steps = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = PipelineConfig{};
  c.verifier.kind = "oracle";
  CHECK_THROWS_AS(c.validate(), InputError);
  CHECK_NOTHROW(PipelineConfig{}.validate());
}

// -------------------------------------------------------------- candidates

TEST_CASE("generate_candidates: one per distinct slot, unencodable heads counted") {
  const auto& cw = category_world();
  const ModelView view(cw.trained.model);
  const std::string head = cw.world.triples.front().head;
  const std::string relation = cw.world.triples.front().relation;
  const std::vector<Slot> slots = {{head, relation}, {head, relation}, {"PersonX zorps", relation}};
  const CandidateSet cs = generate_candidates(view, slots);
  CHECK(cs.attempted == 2);
  CHECK(cs.parse_failures == 1);
  REQUIRE(cs.triples.size() == 1);
  CHECK(cs.triples[0].source == TripleSource::kGenerated);
  CHECK(cs.triples[0].head == head);
  CHECK_THROWS_AS(generate_candidates(view, std::vector<std::string>{}, {relation}), InputError);
}

TEST_CASE("generate_candidates: sampled decoding does not depend on slot order") {
  const auto& cw = category_world();
  const ModelView view(cw.trained.model);
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < 6; ++i) slots.push_back({cw.world.triples[i].head, cw.world.triples[i].relation});
  const auto options = DecodeOptions::sampled(5, 1.5);
  const CandidateSet forward = generate_candidates(view, slots, kDefaultPromptTemplate, 4, options);
  std::vector<Slot> reversed(slots.rbegin(), slots.rend());
  const CandidateSet backward = generate_candidates(view, reversed, kDefaultPromptTemplate, 4, options);
  std::map<std::string, std::string> a, b;
  for (const auto& t : forward.triples) a[t.head + "|" + t.relation] = t.tail;
  for (const auto& t : backward.triples) b[t.head + "|" + t.relation] = t.tail;
  CHECK(a == b);
}

// --------------------------------------------------------------------- run

TEST_CASE("run: corrections reach the store, the audit log and the model") {
  const auto& cw = category_world();
  TempDir dir;
  KnowledgeStore store = category_store(cw.world);
  PipelineConfig config;
  config.seed = 1;
  config.audit_log = dir / "audit.jsonl";
  const Backends backends = world_backends(cw.world);
  const RunResult result = run(config, store, cw.trained.model, backends);
  const RunReport& r = result.report;

  CHECK(r.counts.implausible > 0);
  CHECK(r.counts.plausible + r.counts.implausible + r.counts.parse_failures == r.counts.candidates);
  CHECK(r.counts.requests == result.requests.size());
  CHECK(r.counts.edit_records == store.edit_records().size());
  CHECK(count_lines(config.audit_log) == r.counts.edit_records);
  CHECK(r.post_plausible_rate > r.pre_plausible_rate);
  CHECK(r.edit_success_rate >= 0.9);
  CHECK(r.locality_rate >= 0.9);
  CHECK(r.drift_curve.size() == 1);

  TripleQuery generated;
  generated.source = TripleSource::kGenerated;
  for (const auto& t : store.query(generated)) CHECK(t.score.has_value());
  CHECK_FALSE(store.abstracts().empty());
  CHECK_NOTHROW(check_integrity(store.snapshot()));

  // Requests never target a held-out probe prompt.
  TripleQuery test_split;
  test_split.split = Split::kTest;
  test_split.source = TripleSource::kDataset;
  std::set<std::string> probe_prompts;
  for (const auto& t : store.query(test_split))
    probe_prompts.insert(render_prompt(kDefaultPromptTemplate, t.head, t.relation));
  for (const auto& req : result.requests) CHECK(probe_prompts.count(req.prompt) == 0);
  // Request ids ascend.
  for (std::size_t i = 1; i < result.requests.size(); ++i)
    CHECK(result.requests[i - 1].id < result.requests[i].id);
}

TEST_CASE("run: identical inputs give identical reports") {
  const auto& cw = category_world();
  PipelineConfig config;
  config.seed = 3;
  config.batch_size = 8;
  KnowledgeStore a = category_store(cw.world);
  KnowledgeStore b = category_store(cw.world);
  const RunResult ra = run(config, a, cw.trained.model, world_backends(cw.world));
  const RunResult rb = run(config, b, cw.trained.model, world_backends(cw.world));
  CHECK(json(ra.report).dump() == json(rb.report).dump());
  CHECK(a.snapshot() == b.snapshot());
  CHECK(ra.report.drift_curve.size() == (ra.report.counts.requests + 7) / 8);
}

TEST_CASE("run: without conceptualization only the corrections are edited") {
  const auto& cw = category_world();
  PipelineConfig config;
  config.conceptualization_enabled = false;
  KnowledgeStore store = category_store(cw.world);
  const RunResult r = run(config, store, cw.trained.model, world_backends(cw.world));
  CHECK(r.report.counts.abstractions == 0);
  CHECK(r.report.counts.requests == r.report.counts.implausible - r.report.counts.uncorrectable);
  CHECK(store.abstracts().empty());
}

TEST_CASE("run: a failing stage is named and keeps its cause") {
  const auto& cw = category_world();
  PipelineConfig config;
  config.verifier.kind = "http";
  config.verifier.url = "http://127.0.0.1:1";
  KnowledgeStore store = category_store(cw.world);
  try {
    run(config, store, cw.trained.model);
    FAIL("run should have thrown");
  } catch (const StageError& e) {
    CHECK(e.stage() == "triage");
    CHECK_THROWS_AS(std::rethrow_exception(e.cause()), BackendError);
  }
}

TEST_CASE("ablate: leaves the store alone and reports the difference") {
  const auto& cw = category_world();
  PipelineConfig config;
  config.seed = 1;
  const KnowledgeStore store = category_store(cw.world);
  const StoreSnapshot before = store.snapshot();
  const AblationReport r = ablate(config, store, cw.trained.model, world_backends(cw.world));
  CHECK(store.snapshot() == before);
  CHECK(r.with_concepts.conceptualization_enabled);
  CHECK_FALSE(r.without_concepts.conceptualization_enabled);
  CHECK(r.post_rate_difference ==
        doctest::Approx(r.with_concepts.post_plausible_rate - r.without_concepts.post_plausible_rate));
  CHECK(format_ablation(r).find("post_plausible_rate") != std::string::npos);
}

TEST_CASE("report: json round trip") {
  RunReport r;
  r.edit_method = "rome";
  r.seed = 4;
  r.pre_plausible_rate = 0.25;
  r.drift_curve = {1.0, 0.5};
  r.counts.requests = 3;
  CHECK(json(r).get<RunReport>() == r);
  CHECK(format_report(r).find("rome") != std::string::npos);
}
