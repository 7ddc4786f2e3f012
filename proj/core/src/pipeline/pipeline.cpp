// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/pipeline/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "conke/conceptualizer/conceptualizer.hpp"
#include "conke/error.hpp"
#include "conke/text.hpp"

namespace conke {

CandidateSet generate_candidates(const ModelView& model, const std::vector<Slot>& slots,
                                 std::string_view prompt_template, std::size_t max_new,
                                 const DecodeOptions& options, Split split) {
  CandidateSet out;
  std::set<Slot> seen;
  for (const auto& slot : slots) {
    if (!seen.insert(slot).second) continue;
    ++out.attempted;
    const std::string prompt = render_prompt(prompt_template, slot.head, slot.relation);
    if (!model.tokenizer().unknown_words(prompt).empty()) {
      ++out.parse_failures;
      continue;
    }
    DecodeOptions decode = options;
    if (decode.mode == DecodeMode::kSampled)
      decode.seed = fnv1a64(slot.head + "|" + slot.relation, 0xcbf29ce484222325ULL ^ options.seed);
    std::string tail;
    try {
      tail = normalize_whitespace(generate(model, prompt, max_new, decode));
    } catch (const InputError&) {
      // Prompt longer than the model's context.
      ++out.parse_failures;
      continue;
    }
    if (tail.empty()) {
      ++out.parse_failures;
      continue;
    }
    out.triples.push_back(
        Triple::make(slot.head, slot.relation, tail, TripleSource::kGenerated, split));
  }
  return out;
}

CandidateSet generate_candidates(const ModelView& model, const std::vector<std::string>& heads,
                                 const std::vector<std::string>& relations,
                                 std::string_view prompt_template, std::size_t max_new,
                                 const DecodeOptions& options, Split split) {
  if (heads.empty()) throw InputError("generate_candidates: no heads");
  std::vector<Slot> slots;
  for (const auto& h : heads)
    for (const auto& r : relations) slots.push_back({normalize_whitespace(h), normalize_whitespace(r)});
  return generate_candidates(model, slots, prompt_template, max_new, options, split);
}

void to_json(nlohmann::json& j, const StageCounts& c) {
  j = nlohmann::json{{"candidates", c.candidates},
                     {"parse_failures", c.parse_failures},
                     {"plausible", c.plausible},
                     {"implausible", c.implausible},
                     {"uncorrectable", c.uncorrectable},
                     {"abstractions", c.abstractions},
                     {"instantiations", c.instantiations},
                     {"propagated", c.propagated},
                     {"augmentation_duplicates", c.augmentation_duplicates},
                     {"held_out_skipped", c.held_out_skipped},
                     {"unencodable", c.unencodable},
                     {"requests", c.requests},
                     {"edit_records", c.edit_records},
                     {"probe_slots", c.probe_slots}};
}

void from_json(const nlohmann::json& j, StageCounts& c) {
  c.candidates = j.at("candidates").get<std::size_t>();
  c.parse_failures = j.at("parse_failures").get<std::size_t>();
  c.plausible = j.at("plausible").get<std::size_t>();
  c.implausible = j.at("implausible").get<std::size_t>();
  c.uncorrectable = j.at("uncorrectable").get<std::size_t>();
  c.abstractions = j.at("abstractions").get<std::size_t>();
  c.instantiations = j.at("instantiations").get<std::size_t>();
  c.propagated = j.at("propagated").get<std::size_t>();
  c.augmentation_duplicates = j.at("augmentation_duplicates").get<std::size_t>();
  c.held_out_skipped = j.at("held_out_skipped").get<std::size_t>();
  c.unencodable = j.at("unencodable").get<std::size_t>();
  c.requests = j.at("requests").get<std::size_t>();
  c.edit_records = j.at("edit_records").get<std::size_t>();
  c.probe_slots = j.at("probe_slots").get<std::size_t>();
}

void to_json(nlohmann::json& j, const RunReport& r) {
  j = nlohmann::json{{"edit_method", r.edit_method},
                     {"seed", r.seed},
                     {"conceptualization_enabled", r.conceptualization_enabled},
                     {"threshold", r.threshold},
                     {"pre_plausible_rate", r.pre_plausible_rate},
                     {"post_plausible_rate", r.post_plausible_rate},
                     {"edit_success_rate", r.edit_success_rate},
                     {"generalization_rate", r.generalization_rate},
                     {"locality_rate", r.locality_rate},
                     {"drift_curve", r.drift_curve},
                     {"counts", r.counts}};
}

void from_json(const nlohmann::json& j, RunReport& r) {
  r.edit_method = j.at("edit_method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.conceptualization_enabled = j.at("conceptualization_enabled").get<bool>();
  r.threshold = j.at("threshold").get<double>();
  r.pre_plausible_rate = j.at("pre_plausible_rate").get<double>();
  r.post_plausible_rate = j.at("post_plausible_rate").get<double>();
  r.edit_success_rate = j.at("edit_success_rate").get<double>();
  r.generalization_rate = j.at("generalization_rate").get<double>();
  r.locality_rate = j.at("locality_rate").get<double>();
  r.drift_curve = j.at("drift_curve").get<std::vector<double>>();
  r.counts = j.at("counts").get<StageCounts>();
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void row(std::ostringstream& out, const std::string& name, const std::string& value) {
  out << "  " << name << std::string(name.size() < 26 ? 26 - name.size() : 1, ' ') << value
      << '\n';
}

}  // namespace

std::string format_report(const RunReport& r) {
  std::ostringstream out;
  out << "run: method=" << r.edit_method << " seed=" << r.seed
      << " conceptualization=" << (r.conceptualization_enabled ? "on" : "off")
      << " threshold=" << fixed(r.threshold) << '\n';
  row(out, "pre_plausible_rate", fixed(r.pre_plausible_rate));
  row(out, "post_plausible_rate", fixed(r.post_plausible_rate));
  row(out, "edit_success_rate", fixed(r.edit_success_rate));
  row(out, "generalization_rate", fixed(r.generalization_rate));
  row(out, "locality_rate", fixed(r.locality_rate));
  std::string curve;
  for (double d : r.drift_curve) curve += (curve.empty() ? "" : " ") + fixed(d);
  row(out, "drift_curve", curve.empty() ? "-" : curve);
  const nlohmann::json counts = r.counts;
  for (const auto& [k, v] : counts.items()) row(out, k, v.dump());
  return out.str();
}

void to_json(nlohmann::json& j, const AblationReport& r) {
  j = nlohmann::json{{"with_conceptualization", r.with_concepts},
                     {"without_conceptualization", r.without_concepts},
                     {"post_rate_difference", r.post_rate_difference}};
}

std::string format_ablation(const AblationReport& r) {
  std::ostringstream out;
  out << "[with conceptualization]\n" << format_report(r.with_concepts);
  out << "[without conceptualization]\n" << format_report(r.without_concepts);
  out << "post_rate_difference " << fixed(r.post_rate_difference) << '\n';
  return out.str();
}

Backends make_backends(const PipelineConfig& config) {
  config.validate();
  Backends b;
  if (config.verifier.kind == "mock") {
    if (!config.verifier.rules.empty()) {
      b.verifier = std::make_unique<MockVerifier>(MockVerifier::from_file(config.verifier.rules));
    } else {
      MockVerifierConfig mc;
      mc.seed = config.seed;
      b.verifier = std::make_unique<MockVerifier>(mc);
    }
  } else {
    HttpVerifierConfig hc;
    hc.base_url = config.verifier.url;
    hc.batch_size = config.verifier.batch_size;
    hc.max_in_flight = config.verifier.max_in_flight;
    b.verifier = std::make_unique<HttpVerifier>(hc);
  }
  if (config.concepts.kind == "lexicon") {
    if (!config.concepts.lexicon.empty())
      b.concepts = std::make_unique<LexiconBackend>(load_lexicon(config.concepts.lexicon),
                                                    std::nullopt, config.concepts.focus_from_end);
  } else {
    LlmBackendConfig lc;
    lc.base_url = config.concepts.url;
    if (!config.concepts.abstract_prompt.empty())
      lc.abstract_prompt = load_prompt(config.concepts.abstract_prompt);
    if (!config.concepts.instantiate_prompt.empty())
      lc.instantiate_prompt = load_prompt(config.concepts.instantiate_prompt);
    b.concepts = std::make_unique<LlmBackend>(lc);
  }
  b.templates = config.statement_templates.empty()
                    ? default_statement_templates()
                    : load_statement_templates(config.statement_templates);
  return b;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), std::current_exception());
  }
}

double rate(std::size_t hits, std::size_t total) {
  return total == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(total);
}

struct SlotTable {
  std::vector<Slot> slots;
  std::map<Slot, std::string> reference;
};

SlotTable collect_slots(const KnowledgeStore& store, Split split,
                        const std::vector<std::string>& relations) {
  TripleQuery q;
  q.source = TripleSource::kDataset;
  q.split = split;
  SlotTable table;
  std::set<Slot> slots;
  std::set<std::string> heads;
  for (const auto& t : store.query(q)) {
    const Slot s{t.head, t.relation};
    table.reference.emplace(s, t.tail);  // ascending id decides ties
    heads.insert(t.head);
    slots.insert(s);
  }
  if (!relations.empty()) {
    slots.clear();
    for (const auto& h : heads)
      for (const auto& r : relations) slots.insert({h, normalize_whitespace(r)});
  }
  table.slots.assign(slots.begin(), slots.end());
  return table;
}

struct Probe {
  std::size_t plausible = 0;
  std::size_t attempted = 0;
  std::map<Slot, std::string> generations;
};

// Generation + triage over the test slots. Pre- and post-edit rates both go
// through here.
Probe probe(const ModelView& view, const SlotTable& table, const PipelineConfig& config,
            const Backends& backends, const DecodeOptions& decode, KnowledgeStore& store) {
  Probe p;
  CandidateSet cs = generate_candidates(view, table.slots, config.prompt_template,
                                        config.max_new_tokens, decode, Split::kTest);
  p.attempted = cs.attempted;
  for (const auto& t : cs.triples) p.generations[{t.head, t.relation}] = t.tail;
  TriageResult tr = triage(*backends.verifier, cs.triples, backends.templates, config.threshold);
  p.plausible = tr.plausible.size();
  for (const auto* side : {&tr.plausible, &tr.implausible})
    for (const auto& t : *side) {
      store.add_triple(t);
      store.set_score(t.id, *t.score);
    }
  return p;
}

bool expressible(const ToyModel& model, const EditRequest& r) {
  const Tokenizer& tok = model.tokenizer();
  if (!tok.unknown_words(r.prompt).empty() || !tok.unknown_words(r.target.continuation()).empty())
    return false;
  const std::size_t length =
      split_words(r.prompt).size() + split_words(r.target.continuation()).size();
  return length <= model.config().max_seq_len;
}

EditorSettings editor_settings(const PipelineConfig& config) {
  EditorSettings s;
  s.method = config.edit_method;
  s.layers = config.layers;
  s.covariance_ridge = config.covariance_ridge;
  s.grace_radius = config.grace_radius;
  ValueOptimizationOptions v;
  v.steps = config.value_steps;
  v.step_size = config.value_step_size;
  s.memit.value = v;
  s.memit.covariance_weight = config.covariance_weight;
  s.rome.value = v;
  s.grace.value = v;
  return s;
}

}  // namespace

RunResult run(const PipelineConfig& config, KnowledgeStore& store, const ToyModel& model,
              const Backends& backends) {
  stage("config", [&] {
    config.validate();
    if (!backends.verifier) throw InputError("no verifier backend");
  });
  RunResult result;
  RunReport& report = result.report;
  StageCounts& counts = report.counts;
  report.edit_method = std::string(to_string(config.edit_method));
  report.seed = config.seed;
  report.conceptualization_enabled = config.conceptualization_enabled;
  report.threshold = config.threshold;
  const DecodeOptions decode = config.sampled_decoding
                                   ? DecodeOptions::sampled(config.seed, config.temperature)
                                   : DecodeOptions::greedy();

  SlotTable train, test;
  stage("collect", [&] {
    train = collect_slots(store, Split::kTrain, config.relations);
    test = collect_slots(store, Split::kTest, config.relations);
    if (train.slots.empty()) throw InputError("store has no train-split dataset triples");
  });
  counts.probe_slots = test.slots.size();

  CandidateSet candidates = stage("generate", [&] {
    CandidateSet cs = generate_candidates(model, train.slots, config.prompt_template,
                                          config.max_new_tokens, decode, Split::kTrain);
    for (const auto& t : cs.triples) store.add_triple(t);
    return cs;
  });
  counts.candidates = candidates.attempted;
  counts.parse_failures = candidates.parse_failures;

  TriageResult triaged = stage("triage", [&] {
    TriageResult tr =
        triage(*backends.verifier, candidates.triples, backends.templates, config.threshold);
    for (const auto* side : {&tr.plausible, &tr.implausible})
      for (const auto& t : *side) store.set_score(t.id, *t.score);
    return tr;
  });
  counts.plausible = triaged.plausible.size();
  counts.implausible = triaged.implausible.size();

  const Probe before =
      stage("probe", [&] { return probe(model, test, config, backends, decode, store); });
  report.pre_plausible_rate = rate(before.plausible, before.attempted);

  const bool conceptualize = config.conceptualization_enabled && backends.concepts;
  std::vector<EditRequest> raw_requests;
  std::vector<EditRequest> propagated;
  stage("augment", [&] {
    std::vector<Triple> implausible = triaged.implausible;
    std::sort(implausible.begin(), implausible.end(),
              [](const Triple& a, const Triple& b) { return a.id < b.id; });
    std::set<std::string> concept_ids;
    for (const auto& t : implausible) {
      auto ref = train.reference.find({t.head, t.relation});
      if (ref == train.reference.end() || ref->second == t.tail) {
        ++counts.uncorrectable;
        continue;
      }
      const EditTarget corrected{t.relation, ref->second};
      if (conceptualize) {
        Augmentation aug = augment(*backends.concepts, t, corrected, config.k_abs, config.k_inst,
                                   config.prompt_template);
        record_augmentation(store, t, aug);
        counts.abstractions += aug.abstracts.size();
        counts.instantiations += aug.instances.size();
        counts.augmentation_duplicates += aug.duplicates;
        for (const auto& a : aug.abstracts) concept_ids.insert(a.id);
        raw_requests.insert(raw_requests.end(), aug.requests.begin(), aug.requests.end());
      } else {
        store.add_triple(Triple::make(t.head, corrected.relation, corrected.tail,
                                      TripleSource::kCorrected, t.split));
        raw_requests.push_back(
            EditRequest::for_head(t.head, corrected, {t.id}, config.prompt_template));
      }
    }
    for (const auto& id : concept_ids) {
      auto more = propagate(store, id, config.prompt_template);
      propagated.insert(propagated.end(), more.begin(), more.end());
    }
    counts.propagated = propagated.size();
    raw_requests.insert(raw_requests.end(), propagated.begin(), propagated.end());
  });

  // Deterministic edit order: ascending request id, test slots held out.
  std::set<std::string> test_prompts;
  for (const auto& s : test.slots)
    test_prompts.insert(render_prompt(config.prompt_template, s.head, s.relation));
  std::map<std::string, EditRequest> by_id;
  for (auto& r : raw_requests) {
    if (test_prompts.count(r.prompt)) {
      ++counts.held_out_skipped;
      continue;
    }
    if (!expressible(model, r)) {
      ++counts.unencodable;
      continue;
    }
    by_id.emplace(r.id, std::move(r));
  }
  for (auto& [id, r] : by_id) result.requests.push_back(std::move(r));
  counts.requests = result.requests.size();

  std::vector<std::string> covariance_prompts;
  {
    TripleQuery q;
    q.source = TripleSource::kDataset;
    for (const auto& t : store.query(q)) {
      std::string s = render_prompt(config.prompt_template, t.head, t.relation) + " " + t.tail;
      if (model.tokenizer().unknown_words(s).empty() &&
          split_words(s).size() <= model.config().max_seq_len)
        covariance_prompts.push_back(std::move(s));
    }
  }

  stage("edit", [&] {
    result.editor = std::make_unique<Editor>(model, editor_settings(config), covariance_prompts);
    const std::size_t n = result.requests.size();
    const std::size_t step = config.batch_size == 0 ? std::max<std::size_t>(n, 1) : config.batch_size;
    std::int64_t clock = static_cast<std::int64_t>(store.edit_records().size());
    std::vector<EditRequest> applied;
    for (std::size_t begin = 0; begin < n; begin += step) {
      const std::size_t end = std::min(n, begin + step);
      std::vector<EditRequest> batch(result.requests.begin() + begin, result.requests.begin() + end);
      for (const auto& rec : result.editor->apply(batch, clock)) {
        store.add_edit_record(rec);
        if (!config.audit_log.empty()) append_audit(config.audit_log, rec);
        ++counts.edit_records;
      }
      applied.insert(applied.end(), batch.begin(), batch.end());
      report.drift_curve.push_back(
          edit_success(result.editor->view(), applied, config.max_new_tokens));
    }
  });
  const ModelView after = result.editor->view();

  const Probe post =
      stage("reprobe", [&] { return probe(after, test, config, backends, decode, store); });
  report.post_plausible_rate = rate(post.plausible, post.attempted);

  stage("metrics", [&] {
    report.edit_success_rate = edit_success(after, result.requests, config.max_new_tokens);
    std::size_t general = 0;
    for (const auto& s : test.slots) {
      auto g = post.generations.find(s);
      auto ref = test.reference.find(s);
      if (g != post.generations.end() && ref != test.reference.end() && g->second == ref->second)
        ++general;
    }
    report.generalization_rate = rate(general, test.slots.size());
    std::vector<std::string> keep;
    for (const auto& t : triaged.plausible)
      keep.push_back(render_prompt(config.prompt_template, t.head, t.relation));
    report.locality_rate = locality(model, after, keep, config.max_new_tokens);

    std::set<std::string> edited;
    for (const auto& r : result.requests) edited.insert(r.id);
    std::vector<EditRequest> done;
    for (const auto& r : propagated)
      if (edited.count(r.id)) done.push_back(r);
    apply_propagation(store, done);
  });
  return result;
}

RunResult run(const PipelineConfig& config, KnowledgeStore& store, const ToyModel& model) {
  const Backends backends = stage("backends", [&] { return make_backends(config); });
  return run(config, store, model, backends);
}

AblationReport ablate(const PipelineConfig& config, const KnowledgeStore& store,
                      const ToyModel& model, const Backends& backends) {
  AblationReport out;
  const StoreSnapshot snapshot = store.snapshot();
  PipelineConfig with = config, without = config;
  with.conceptualization_enabled = true;
  without.conceptualization_enabled = false;
  // Separate audit logs would interleave; ablation runs do not write one.
  with.audit_log.clear();
  without.audit_log.clear();
  {
    KnowledgeStore copy = KnowledgeStore::from_snapshot(snapshot);
    out.with_concepts = run(with, copy, model, backends).report;
  }
  {
    KnowledgeStore copy = KnowledgeStore::from_snapshot(snapshot);
    out.without_concepts = run(without, copy, model, backends).report;
  }
  out.post_rate_difference =
      out.with_concepts.post_plausible_rate - out.without_concepts.post_plausible_rate;
  return out;
}

}  // namespace conke
