// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

// conke: one subcommand per pipeline stage.
//
// Exit codes: 0 success, 1 usage, 2 runtime failure, 3 integrity or
// protocol failure (broken store references, malformed backend answers,
// bad file formats).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "conke/conceptualizer/conceptualizer.hpp"
#include "conke/editors/grace.hpp"
#include "conke/editors/memit.hpp"
#include "conke/editors/rome.hpp"
#include "conke/error.hpp"
#include "conke/model/checkpoint.hpp"
#include "conke/model/training.hpp"
#include "conke/pipeline/pipeline.hpp"
#include "conke/pipeline/world.hpp"
#include "conke/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace conke::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitIntegrity = 3;

struct Common {
  std::string config;
  std::string store;
  std::string model_path;
  std::optional<std::uint64_t> seed;
  bool json = false;
  bool mock_verifier = false;
  bool mock_conceptualizer = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Pipeline config (flat JSON)");
  sub->add_option("--store", c.store, "Knowledge store file (JSON lines)");
  sub->add_option("--model-path", c.model_path, "Model checkpoint");
  sub->add_option("--seed", c.seed, "Seed; overrides the config");
  sub->add_flag("--json", c.json, "Print one JSON document instead of text");
  sub->add_flag("--mock-verifier", c.mock_verifier, "Use the deterministic mock verifier");
  sub->add_flag("--mock-conceptualizer", c.mock_conceptualizer,
                "Use the lexicon conceptualizer");
}

PipelineConfig load_config(const Common& c) {
  PipelineConfig config = c.config.empty() ? PipelineConfig{} : load_pipeline_config(c.config);
  if (c.seed) config.seed = *c.seed;
  if (c.mock_verifier) config.verifier.kind = "mock";
  if (c.mock_conceptualizer) config.concepts.kind = "lexicon";
  config.validate();
  return config;
}

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw InputError(std::string(flag) + " is required");
  return value;
}

KnowledgeStore open_store(const Common& c) {
  return KnowledgeStore::load(require(c.store, "--store"));
}

ToyModel open_model(const Common& c) { return load_model(require(c.model_path, "--model-path")); }

void emit(const Common& c, const json& j, const std::string& text) {
  if (c.json)
    std::cout << j.dump(2) << '\n';
  else
    std::cout << text;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

// Two columns: prompt, continuation. Three: head, relation, tail.
std::vector<CorpusItem> read_corpus(const fs::path& path, std::string_view prompt_template) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read corpus " + path.string());
  std::vector<CorpusItem> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, '\t');) cols.push_back(normalize_whitespace(col));
    if (cols.size() == 2)
      out.push_back({cols[0], cols[1]});
    else if (cols.size() == 3)
      out.push_back({render_prompt(prompt_template, cols[0], cols[1]), cols[2]});
    else
      throw InputError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 2 or 3 tab-separated columns");
  }
  if (out.empty()) throw InputError("corpus " + path.string() + " is empty");
  return out;
}

std::vector<CorpusItem> store_corpus(const KnowledgeStore& store, std::string_view prompt_template) {
  TripleQuery q;
  q.source = TripleSource::kDataset;
  std::vector<CorpusItem> out;
  for (const auto& t : store.query(q))
    out.push_back({render_prompt(prompt_template, t.head, t.relation), t.tail});
  if (out.empty()) throw InputError("store has no dataset triples to train on");
  return out;
}

// ---- init-model ------------------------------------------------------------

struct InitArgs {
  std::string world_dir;
  std::string corpus;
  std::size_t d_model = 64, n_layers = 2, n_heads = 4, d_mlp = 256, max_seq_len = 32;
};

int cmd_init_model(const Common& c, const InitArgs& a) {
  const fs::path model_path = require(c.model_path, "--model-path");
  const std::uint64_t seed = c.seed.value_or(0);
  std::set<std::string> words;
  json out{{"model_path", model_path.string()}};

  if (!a.world_dir.empty()) {
    const fs::path dir = a.world_dir;
    fs::create_directories(dir);
    CategoryWorldOptions wo;
    wo.seed = seed;
    const CategoryWorld world = make_category_world(wo);
    const fs::path store_path = c.store.empty() ? dir / "store.jsonl" : fs::path(c.store);
    category_store(world).save(store_path);
    std::string corpus;
    for (const auto& item : world.corpus) corpus += item.prompt + "\t" + item.continuation + "\n";
    write_text(dir / "corpus.tsv", corpus);
    write_text(dir / "lexicon.json", json(world.lexicon).dump(2) + "\n");
    write_text(dir / "verifier_rules.json",
               json{{"rules", world.verifier.rules}, {"fallback", world.verifier.constant}}.dump(2) +
                   "\n");
    PipelineConfig config;
    config.seed = seed;
    config.verifier.rules = "verifier_rules.json";
    config.concepts.lexicon = "lexicon.json";
    save_pipeline_config(config, dir / "config.json");
    words.insert(world.vocabulary.begin(), world.vocabulary.end());
    out["world_dir"] = dir.string();
    out["store"] = store_path.string();
  } else if (!c.store.empty()) {
    const KnowledgeStore store = open_store(c);
    for (const auto& item : store_corpus(store, kDefaultPromptTemplate))
      for (const auto& w : split_words(item.sentence())) words.insert(w);
  }
  if (!a.corpus.empty())
    for (const auto& item : read_corpus(a.corpus, kDefaultPromptTemplate))
      for (const auto& w : split_words(item.sentence())) words.insert(w);
  if (words.empty())
    throw InputError("init-model needs a vocabulary source: --world-dir, --store or --corpus");

  ModelConfig mc;
  mc.d_model = a.d_model;
  mc.n_layers = a.n_layers;
  mc.n_heads = a.n_heads;
  mc.d_mlp = a.d_mlp;
  mc.max_seq_len = a.max_seq_len;
  mc.seed = seed;
  const ToyModel model(mc, Tokenizer(std::vector<std::string>(words.begin(), words.end())));
  save_model(model, model_path);
  out["vocab_size"] = model.tokenizer().size();
  out["config"] = config_to_json(model.config());
  emit(c, out,
       "initialized " + model_path.string() + " (vocabulary " +
           std::to_string(model.tokenizer().size()) + " words)\n");
  return kExitOk;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::size_t epochs = 50;
  double learning_rate = 5e-3;
};

int cmd_train(const Common& c, const TrainArgs& a) {
  const PipelineConfig config = load_config(c);
  ToyModel model = open_model(c);
  const std::vector<CorpusItem> corpus = a.corpus.empty()
                                             ? store_corpus(open_store(c), config.prompt_template)
                                             : read_corpus(a.corpus, config.prompt_template);
  TrainOptions options;
  options.epochs = a.epochs;
  options.learning_rate = a.learning_rate;
  if (c.seed) options.shuffle_seed = *c.seed;
  const std::vector<double> losses = train_in_place(model, corpus, options);
  const double acc = memorization_accuracy(model, corpus);
  save_model(model, c.model_path);
  const json out{{"model_path", c.model_path},
                 {"items", corpus.size()},
                 {"final_loss", losses.empty() ? 0.0 : losses.back()},
                 {"memorization_accuracy", acc}};
  std::ostringstream text;
  text << "trained " << c.model_path << " on " << corpus.size() << " items: final loss "
       << (losses.empty() ? 0.0 : losses.back()) << ", memorization " << acc << "\n";
  emit(c, out, text.str());
  return kExitOk;
}

// ---- generate ----------------------------------------------------------------

struct GenerateArgs {
  std::vector<std::string> heads;
  std::vector<std::string> relations;
  bool sample = false;
  bool add = false;
};

int cmd_generate(const Common& c, const GenerateArgs& a) {
  const PipelineConfig config = load_config(c);
  const ToyModel model = open_model(c);
  std::optional<KnowledgeStore> store;
  if (!c.store.empty()) store = open_store(c);

  std::vector<Slot> slots;
  if (!a.heads.empty()) {
    if (a.relations.empty()) throw InputError("--head needs at least one --relation");
    for (const auto& h : a.heads)
      for (const auto& r : a.relations) slots.push_back({normalize_whitespace(h), r});
  } else {
    if (!store) throw InputError("generate needs --head or --store");
    TripleQuery q;
    q.source = TripleSource::kDataset;
    q.split = Split::kTrain;
    std::set<Slot> unique;
    for (const auto& t : store->query(q)) {
      if (a.relations.empty()) {
        unique.insert({t.head, t.relation});
      } else {
        for (const auto& r : a.relations) unique.insert({t.head, r});
      }
    }
    slots.assign(unique.begin(), unique.end());
  }
  if (slots.empty()) throw InputError("nothing to generate");
  const DecodeOptions decode =
      a.sample ? DecodeOptions::sampled(config.seed, config.temperature) : DecodeOptions::greedy();
  const CandidateSet cs =
      generate_candidates(model, slots, config.prompt_template, config.max_new_tokens, decode);
  if (a.add) {
    if (!store) throw InputError("--add needs --store");
    for (const auto& t : cs.triples) store->add_triple(t);
    store->save(c.store);
  }
  std::string text;
  for (const auto& t : cs.triples) text += t.head + "\t" + t.relation + "\t" + t.tail + "\n";
  text += std::to_string(cs.triples.size()) + " candidates, " + std::to_string(cs.parse_failures) +
          " parse failures\n";
  emit(c, json{{"candidates", cs.triples},
               {"attempted", cs.attempted},
               {"parse_failures", cs.parse_failures}},
       text);
  return kExitOk;
}

// ---- verify ------------------------------------------------------------------

struct VerifyArgs {
  std::vector<std::string> statements;
};

int cmd_verify(const Common& c, const VerifyArgs& a) {
  const PipelineConfig config = load_config(c);
  const Backends backends = make_backends(config);
  if (!a.statements.empty()) {
    const std::vector<double> scores = backends.verifier->score(a.statements);
    json arr = json::array();
    std::string text;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool ok = classify(scores[i], config.threshold) == Verdict::kPlausible;
      arr.push_back({{"statement", a.statements[i]}, {"score", scores[i]}, {"plausible", ok}});
      std::ostringstream line;
      line << scores[i] << "\t" << (ok ? "plausible" : "implausible") << "\t" << a.statements[i]
           << "\n";
      text += line.str();
    }
    emit(c, json{{"results", arr}}, text);
    return kExitOk;
  }
  KnowledgeStore store = open_store(c);
  TripleQuery q;
  q.source = TripleSource::kGenerated;
  std::vector<Triple> pending;
  for (auto& t : store.query(q))
    if (!t.score) pending.push_back(std::move(t));
  const TriageResult tr = triage(*backends.verifier, pending, backends.templates, config.threshold);
  for (const auto* side : {&tr.plausible, &tr.implausible})
    for (const auto& t : *side) store.set_score(t.id, *t.score);
  store.save(c.store);
  emit(c, json{{"plausible", tr.plausible}, {"implausible", tr.implausible}},
       "scored " + std::to_string(pending.size()) + " generated triples: " +
           std::to_string(tr.plausible.size()) + " plausible, " +
           std::to_string(tr.implausible.size()) + " implausible\n");
  return kExitOk;
}

// ---- augment -----------------------------------------------------------------

struct AugmentArgs {
  std::string triple_id;
  std::string head, relation, tail;
  std::string corrected_tail;
  std::optional<std::size_t> k_abs, k_inst;
};

int cmd_augment(const Common& c, const AugmentArgs& a) {
  const PipelineConfig config = load_config(c);
  const Backends backends = make_backends(config);
  if (!backends.concepts)
    throw InputError("no conceptualizer: set \"lexicon\" or concept_backend=llm-http in --config");
  std::optional<KnowledgeStore> store;
  if (!c.store.empty()) store = open_store(c);
  Triple source;
  if (!a.triple_id.empty()) {
    if (!store) throw InputError("--triple-id needs --store");
    auto t = store->triple(a.triple_id);
    if (!t) throw InputError("unknown triple id " + a.triple_id);
    source = *t;
  } else {
    source = Triple::make(require(a.head, "--head"), require(a.relation, "--relation"),
                          require(a.tail, "--tail"), TripleSource::kGenerated);
  }
  const EditTarget corrected{source.relation, require(a.corrected_tail, "--corrected-tail")};
  const Augmentation aug =
      augment(*backends.concepts, source, corrected, a.k_abs.value_or(config.k_abs),
              a.k_inst.value_or(config.k_inst), config.prompt_template);
  if (store) {
    record_augmentation(*store, source, aug);
    store->save(c.store);
  }
  std::string text;
  for (const auto& r : aug.requests) text += r.prompt + " -> " + r.target.continuation() + "\n";
  text += std::to_string(aug.requests.size()) + " requests (" + std::to_string(aug.abstracts.size()) +
          " abstractions, " + std::to_string(aug.instances.size()) + " instantiations, " +
          std::to_string(aug.duplicates) + " duplicates dropped)\n";
  emit(c, json{{"requests", aug.requests},
               {"abstracts", aug.abstracts},
               {"duplicates", aug.duplicates}},
       text);
  return kExitOk;
}

// ---- edit --------------------------------------------------------------------

struct EditArgs {
  std::string method;
  std::vector<std::size_t> layers;
  std::string requests;
  std::string head, relation, tail;
  std::string codebook;
  std::string output;
};

std::vector<EditRequest> read_requests(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read requests " + path.string());
  std::vector<EditRequest> out;
  std::string line;
  while (std::getline(in, line)) {
    if (normalize_whitespace(line).empty()) continue;
    try {
      out.push_back(json::parse(line).get<EditRequest>());
    } catch (const json::exception& e) {
      throw FormatError("malformed request line in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

int cmd_edit(const Common& c, const EditArgs& a) {
  PipelineConfig config = load_config(c);
  if (!a.method.empty()) config.edit_method = parse_edit_method(a.method);
  if (!a.layers.empty()) config.layers = a.layers;
  config.validate();
  ToyModel model = open_model(c);
  std::optional<KnowledgeStore> store;
  if (!c.store.empty()) store = open_store(c);

  std::vector<EditRequest> requests;
  if (!a.requests.empty()) {
    requests = read_requests(a.requests);
  } else {
    requests.push_back(EditRequest::for_head(require(a.head, "--head"),
                                             {require(a.relation, "--relation"),
                                              require(a.tail, "--tail")},
                                             {}, config.prompt_template));
  }
  if (requests.empty()) throw InputError("no edit requests");

  ValueOptimizationOptions v;
  v.steps = config.value_steps;
  v.step_size = config.value_step_size;
  std::vector<EditRecord> records;
  std::int64_t clock = store ? static_cast<std::int64_t>(store->edit_records().size()) : 0;
  ModelView view(model);
  Codebook book;
  std::size_t grace_layer = 0;

  auto covariances = [&](const std::vector<std::size_t>& layers) {
    if (!store) throw InputError("rome and memit need --store for key statistics");
    std::vector<std::string> prompts;
    for (const auto& item : store_corpus(*store, config.prompt_template))
      if (model.tokenizer().unknown_words(item.sentence()).empty())
        prompts.push_back(item.sentence());
    std::vector<KeyCovariance> covs;
    for (std::size_t l : layers)
      covs.push_back(estimate_covariance(model, prompts, l, config.covariance_ridge));
    return covs;
  };

  switch (config.edit_method) {
    case EditMethod::kRome: {
      const std::size_t layer =
          config.layers.empty() ? default_edit_layer(model.config()) : config.layers.front();
      const auto covs = covariances({layer});
      RomeOptions ro;
      ro.value = v;
      for (const auto& r : requests) records.push_back(rome_edit(model, r, layer, covs.front(), ro));
      break;
    }
    case EditMethod::kMemit: {
      const auto layers = config.layers.empty() ? default_memit_layers(model.config()) : config.layers;
      const auto covs = covariances(layers);
      MemitOptions mo;
      mo.value = v;
      mo.covariance_weight = config.covariance_weight;
      records.push_back(memit_edit(model, requests, layers, covs, mo));
      break;
    }
    case EditMethod::kGrace: {
      const fs::path book_path = require(a.codebook, "--codebook");
      if (fs::exists(book_path)) book = Codebook::load(book_path);
      grace_layer = config.layers.empty() ? default_edit_layer(model.config()) : config.layers.front();
      GraceOptions go;
      go.value = v;
      for (const auto& r : requests)
        records.push_back(grace_add(book, model, r, grace_layer, config.grace_radius, go));
      book.save(book_path);
      view = apply_adapter(model, book, grace_layer);
      break;
    }
  }
  for (auto& rec : records) {
    rec.timestamp = clock++;
    if (store) store->add_edit_record(rec);
    if (!config.audit_log.empty()) append_audit(config.audit_log, rec);
  }
  if (store) store->save(c.store);
  if (config.edit_method != EditMethod::kGrace)
    save_model(model, a.output.empty() ? c.model_path : a.output);
  const double success = edit_success(view, requests, config.max_new_tokens);
  std::ostringstream text;
  text << "applied " << requests.size() << " request(s) with " << to_string(config.edit_method)
       << " in " << records.size() << " record(s); edit success " << success << "\n";
  emit(c, json{{"records", records}, {"edit_success", success}}, text.str());
  return kExitOk;
}

// ---- run / ablate / report -------------------------------------------------

struct RunArgs {
  std::string report;
  std::string output_model;
  std::string codebook;
  bool write_store = false;
};

int cmd_run(const Common& c, const RunArgs& a) {
  const PipelineConfig config = load_config(c);
  KnowledgeStore store = open_store(c);
  const ToyModel model = open_model(c);
  const RunResult result = run(config, store, model);
  const json j = result.report;
  if (!a.report.empty()) write_text(a.report, j.dump(2) + "\n");
  if (a.write_store) store.save(c.store);
  if (!a.output_model.empty()) save_model(result.editor->model(), a.output_model);
  if (!a.codebook.empty()) result.editor->codebook().save(a.codebook);
  emit(c, j, format_report(result.report));
  return kExitOk;
}

int cmd_ablate(const Common& c, const RunArgs& a) {
  const PipelineConfig config = load_config(c);
  const KnowledgeStore store = open_store(c);
  const ToyModel model = open_model(c);
  const Backends backends = make_backends(config);
  const AblationReport report = ablate(config, store, model, backends);
  const json j = report;
  if (!a.report.empty()) write_text(a.report, j.dump(2) + "\n");
  emit(c, j, format_ablation(report));
  return kExitOk;
}

int cmd_report(const Common& c, const std::string& path) {
  std::ifstream in(require(path, "--report"));
  if (!in) throw IoError("cannot read report " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("report " + path + " is not JSON: " + e.what());
  }
  try {
    if (j.contains("with_conceptualization")) {
      AblationReport r;
      r.with_concepts = j.at("with_conceptualization").get<RunReport>();
      r.without_concepts = j.at("without_conceptualization").get<RunReport>();
      r.post_rate_difference = j.at("post_rate_difference").get<double>();
      emit(c, j, format_ablation(r));
    } else {
      emit(c, j, format_report(j.get<RunReport>()));
    }
  } catch (const json::exception& e) {
    throw FormatError("report " + path + " has the wrong shape: " + e.what());
  }
  return kExitOk;
}

int exit_code(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const StageError& e) {
    return e.cause() ? exit_code(e.cause()) : kExitRuntime;
  } catch (const IntegrityError&) {
    return kExitIntegrity;
  } catch (const ProtocolError&) {
    return kExitIntegrity;
  } catch (const FormatError&) {
    return kExitIntegrity;
  } catch (...) {
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify, conceptualize and edit the knowledge of a toy language model", "conke"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Common common;
  InitArgs init;
  TrainArgs train;
  GenerateArgs gen;
  VerifyArgs ver;
  AugmentArgs aug;
  EditArgs edit;
  RunArgs run_args;
  std::string report_path;

  auto* init_cmd = app.add_subcommand("init-model", "Create a randomly initialized model");
  add_common(init_cmd, common);
  init_cmd->add_option("--world-dir", init.world_dir,
                       "Also write a synthetic category world (store, corpus, lexicon, "
                       "verifier rules, config) here");
  init_cmd->add_option("--corpus", init.corpus, "TSV corpus whose words join the vocabulary");
  init_cmd->add_option("--d-model", init.d_model)->capture_default_str();
  init_cmd->add_option("--n-layers", init.n_layers)->capture_default_str();
  init_cmd->add_option("--n-heads", init.n_heads)->capture_default_str();
  init_cmd->add_option("--d-mlp", init.d_mlp)->capture_default_str();
  init_cmd->add_option("--max-seq-len", init.max_seq_len)->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train the model on a corpus or the store");
  add_common(train_cmd, common);
  train_cmd->add_option("--corpus", train.corpus,
                        "TSV: prompt<TAB>continuation or head<TAB>relation<TAB>tail");
  train_cmd->add_option("--epochs", train.epochs)->capture_default_str();
  train_cmd->add_option("--learning-rate", train.learning_rate)->capture_default_str();

  auto* gen_cmd = app.add_subcommand("generate", "Generate candidate tails");
  add_common(gen_cmd, common);
  gen_cmd->add_option("--head", gen.heads, "Head event (repeatable)");
  gen_cmd->add_option("--relation", gen.relations, "Relation (repeatable)");
  gen_cmd->add_flag("--sample", gen.sample, "Sampled decoding seeded by --seed");
  gen_cmd->add_flag("--add", gen.add, "Add the candidates to --store");

  auto* ver_cmd = app.add_subcommand("verify", "Score statements or unscored store candidates");
  add_common(ver_cmd, common);
  ver_cmd->add_option("--statement", ver.statements, "Statement to score (repeatable)");

  auto* aug_cmd = app.add_subcommand("augment", "Conceptualize one corrected triple");
  add_common(aug_cmd, common);
  aug_cmd->add_option("--triple-id", aug.triple_id, "Implausible triple in --store");
  aug_cmd->add_option("--head", aug.head);
  aug_cmd->add_option("--relation", aug.relation);
  aug_cmd->add_option("--tail", aug.tail, "The implausible tail");
  aug_cmd->add_option("--corrected-tail", aug.corrected_tail)->required();
  aug_cmd->add_option("--k-abs", aug.k_abs);
  aug_cmd->add_option("--k-inst", aug.k_inst);

  auto* edit_cmd = app.add_subcommand("edit", "Apply edit requests to the model");
  add_common(edit_cmd, common);
  edit_cmd->add_option("--method", edit.method, "rome, memit or grace");
  edit_cmd->add_option("--layer", edit.layers, "Edit layer (repeatable)");
  edit_cmd->add_option("--requests", edit.requests, "JSON lines of edit requests");
  edit_cmd->add_option("--head", edit.head);
  edit_cmd->add_option("--relation", edit.relation);
  edit_cmd->add_option("--tail", edit.tail, "Target tail");
  edit_cmd->add_option("--codebook", edit.codebook, "Codebook file (grace)");
  edit_cmd->add_option("--output", edit.output, "Write the edited model here");

  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline");
  add_common(run_cmd, common);
  run_cmd->add_option("--report", run_args.report, "Write the report JSON here");
  run_cmd->add_option("--output-model", run_args.output_model, "Write the edited model here");
  run_cmd->add_option("--codebook", run_args.codebook, "Write the grace codebook here");
  run_cmd->add_flag("--write-store", run_args.write_store, "Save the updated store");

  auto* abl_cmd = app.add_subcommand("ablate", "Run with and without conceptualization");
  add_common(abl_cmd, common);
  abl_cmd->add_option("--report", run_args.report, "Write the ablation JSON here");

  auto* rep_cmd = app.add_subcommand("report", "Print a saved report");
  add_common(rep_cmd, common);
  rep_cmd->add_option("--report", report_path, "Report JSON from run or ablate")->required();

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "conke: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const auto* sub : app.get_subcommands()) failed = sub;
    std::cerr << failed->help();
    return kExitUsage;
  }

  try {
    if (*init_cmd) return cmd_init_model(common, init);
    if (*train_cmd) return cmd_train(common, train);
    if (*gen_cmd) return cmd_generate(common, gen);
    if (*ver_cmd) return cmd_verify(common, ver);
    if (*aug_cmd) return cmd_augment(common, aug);
    if (*edit_cmd) return cmd_edit(common, edit);
    if (*run_cmd) return cmd_run(common, run_args);
    if (*abl_cmd) return cmd_ablate(common, run_args);
    if (*rep_cmd) return cmd_report(common, report_path);
  } catch (const std::exception& e) {
    std::cerr << "conke: error: " << e.what() << "\n";
    return exit_code(std::current_exception());
  }
  return kExitUsage;
}

}  // namespace conke::cli

int main(int argc, char** argv) { return conke::cli::main(argc, argv); }
