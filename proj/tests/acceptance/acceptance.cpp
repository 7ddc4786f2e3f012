// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "conke/conceptualizer/conceptualizer.hpp"
#include "conke/editors/covariance.hpp"
#include "conke/editors/grace.hpp"
#include "conke/editors/memit.hpp"
#include "conke/editors/rome.hpp"
#include "conke/error.hpp"
#include "conke/model/generation.hpp"
#include "conke/model/training.hpp"
#include "conke/model/value_optimization.hpp"
#include "conke/pipeline/editor.hpp"
#include "conke/pipeline/pipeline.hpp"
#include "conke/pipeline/world.hpp"
#include "conke/verifier/verifier.hpp"

using namespace conke;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

const std::vector<std::string> kWords = {"amber", "birch", "cedar", "delta", "ember", "fjord",
                                         "grove", "heath", "inlet", "jetty", "knoll", "larch"};

std::string random_sentence(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + kWords[pick(rng)];
  return s;
}

ToyModel random_model(std::mt19937_64& rng, std::uint64_t seed) {
  std::uniform_int_distribution<int> layers(1, 3), width(1, 3), heads(1, 2);
  ModelConfig c;
  c.n_layers = static_cast<std::size_t>(layers(rng));
  c.n_heads = static_cast<std::size_t>(heads(rng));
  c.d_model = 4 * c.n_heads * static_cast<std::size_t>(width(rng));
  c.d_mlp = 4 * c.d_model;
  c.max_seq_len = 16;
  c.seed = seed;
  return ToyModel(c, Tokenizer(kWords));
}

// ---------------------------------------------------------------- editors

Outcome rank_one_exactness() {
  const double t0 = cpu_seconds();
  std::mt19937_64 rng(101);
  double worst_install = 0.0, worst_null = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    ToyModel model = random_model(rng, i + 1);
    const std::size_t layer = default_edit_layer(model.config());
    std::vector<std::string> sample;
    for (int s = 0; s < 3 * static_cast<int>(model.config().d_mlp); ++s)
      sample.push_back(random_sentence(rng, 2, 6));
    const KeyCovariance cov = estimate_covariance(model, sample, layer);
    const auto req = EditRequest::make(random_sentence(rng, 1, 4), EditTarget{"", random_sentence(rng, 1, 1)});
    const ToyModel before = model;
    const Vector v_star = optimize_value(before, req, layer, {}).value;
    const Vector k_star = key_at(before, req.prompt, req.subject, layer);
    rome_edit(model, req, layer, cov);
    worst_install =
        std::max(worst_install, (model.mlp_out(layer) * k_star - v_star).norm() / v_star.norm());

    // A key orthogonal to k* under C^{-1}.
    const Vector u = cov.solve(k_star);
    const Vector r = random_matrix(rng, k_star.size(), 1).col(0);
    const Vector k_null = r - (r.dot(u) / k_star.dot(u)) * k_star;
    const Vector before_out = before.mlp_out(layer) * k_null;
    const double scale = std::max(1.0, before_out.norm());
    worst_null = std::max(worst_null, (model.mlp_out(layer) * k_null - before_out).norm() / scale);
  }
  const double elapsed = cpu_seconds() - t0;
  return {worst_install <= 1e-6 && worst_null <= 1e-12 && elapsed < 10.0,
          "max ||W k* - v*||/||v*|| = " + fmt("%.2e", worst_install) + " (<= 1e-6), max null drift " +
              fmt("%.2e", worst_null) + " (<= 1e-12), " + fmt("%.1f", elapsed) + " s CPU (< 10 s)"};
}

struct FactModel {
  std::vector<Fact> facts;
  std::vector<CorpusItem> corpus;
  TrainResult trained;
  double train_seconds = 0.0;
};

const FactModel& fact_model() {
  static const FactModel fm = [] {
    const double t0 = cpu_seconds();
    std::vector<Fact> facts = make_fact_world(200, 1);
    std::vector<CorpusItem> corpus = corpus_of(facts);
    ModelConfig config;
    config.seed = 3;
    TrainOptions options;
    options.extra_vocabulary = fact_world_vocabulary();
    TrainResult trained = train_toy(corpus, config, options);
    return FactModel{std::move(facts), std::move(corpus), std::move(trained), cpu_seconds() - t0};
  }();
  return fm;
}

std::vector<std::string> sentences(const std::vector<CorpusItem>& corpus) {
  std::vector<std::string> out;
  for (const auto& c : corpus) out.push_back(c.sentence());
  return out;
}

Outcome batched_oracle() {
  // Hand instance: d_mlp = 2, two keys, 2x2 covariance. Oracle is the
  // explicit adjugate inverse.
  ModelConfig config;
  config.n_layers = 2;
  config.d_model = 2;
  config.n_heads = 1;
  config.d_mlp = 2;
  config.seed = 17;
  ToyModel model(config, Tokenizer({"p", "q", "r", "s"}));
  const ToyModel before = model;
  const auto r1 = EditRequest::make("p q", EditTarget{"", "r"});
  const auto r2 = EditRequest::make("s p", EditTarget{"", "q"});
  KeyCovariance cov;
  cov.layer = 1;
  cov.matrix.resize(2, 2);
  cov.matrix << 1.25, -0.3, -0.3, 0.9;
  Vector v1(2), v2(2);
  v1 << -0.4, 1.1;
  v2 << 0.8, 0.25;
  MemitOptions opts;
  opts.covariance_weight = 1.0;
  memit_apply(model, {r1, r2}, {v1, v2}, {1}, {cov}, opts);
  const Vector k1 = key_at(before, r1.prompt, r1.subject, 1);
  const Vector k2 = key_at(before, r2.prompt, r2.subject, 1);
  const Matrix& w = before.mlp_out(1);
  // S = C + k1 k1^T + k2 k2^T, written out entry by entry.
  const double s00 = cov.matrix(0, 0) + k1(0) * k1(0) + k2(0) * k2(0);
  const double s01 = cov.matrix(0, 1) + k1(0) * k1(1) + k2(0) * k2(1);
  const double s11 = cov.matrix(1, 1) + k1(1) * k1(1) + k2(1) * k2(1);
  const double det = s00 * s11 - s01 * s01;
  Matrix s_inv(2, 2);
  s_inv << s11 / det, -s01 / det, -s01 / det, s00 / det;
  const Vector res1 = v1 - w * k1, res2 = v2 - w * k2;
  const Matrix expected = w + (res1 * k1.transpose() + res2 * k2.transpose()) * s_inv;
  const double hand_err = (model.mlp_out(1) - expected).cwiseAbs().maxCoeff();

  // Regularizer limit on the trained fact model.
  const FactModel& fm = fact_model();
  const std::size_t layer = 1;
  const KeyCovariance c = estimate_covariance(fm.trained.model, sentences(fm.corpus), layer);
  const auto req = EditRequest::for_head(fm.facts[7].head, flipped_target(fm.facts[7], 2));
  const Vector v_star = optimize_value(fm.trained.model, req, layer, {}).value;
  const Vector k = key_at(fm.trained.model, req.prompt, req.subject, layer);
  ToyModel rome_model = fm.trained.model;
  rome_apply(rome_model, layer, k, v_star, c);
  const Vector rome_out = rome_model.mlp_out(layer) * k;
  ToyModel memit_model = fm.trained.model;
  MemitOptions small;
  small.covariance_weight = 1e-9;
  memit_apply(memit_model, {req}, {v_star}, {layer}, {c}, small);
  const double limit_err = (memit_model.mlp_out(layer) * k - rome_out).norm() / rome_out.norm();
  return {hand_err <= 1e-9 && limit_err <= 1e-5,
          "hand 2x2 max abs err " + fmt("%.2e", hand_err) + " (<= 1e-9), memit vs rome at weight 1e-9 " +
              fmt("%.2e", limit_err) + " (<= 1e-5)"};
}

Outcome gradient_correctness() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (std::uint64_t cfg = 0; cfg < 20; ++cfg) {
    const ToyModel model = random_model(rng, 1000 + cfg);
    std::uniform_int_distribution<std::size_t> pick_layer(0, model.config().n_layers - 1);
    const std::size_t layer = pick_layer(rng);
    const auto req = EditRequest::make(random_sentence(rng, 1, 4),
                                       EditTarget{"", random_sentence(rng, 1, 3)});
    const ValueObjective obj(model, req, layer);
    Vector v = obj.initial_value() + 0.5 * random_matrix(rng, obj.initial_value().size(), 1).col(0);
    const Vector grad = obj.gradient(v);
    for (int d = 0; d < 5; ++d) {
      Vector dir = random_matrix(rng, v.size(), 1).col(0);
      dir.normalize();
      const double h = 1e-5;
      const double secant = (obj.loss(v + h * dir) - obj.loss(v - h * dir)) / (2 * h);
      const double analytic = grad.dot(dir);
      const double denom = std::max({std::abs(secant), std::abs(analytic), 1e-12});
      worst = std::max(worst, std::abs(analytic - secant) / denom);
    }
  }
  return {worst <= 1e-3, "max relative gap " + fmt("%.2e", worst) + " over 20 configs x 5 directions (<= 1e-3)"};
}

Outcome edit_efficacy() {
  const double t0 = cpu_seconds();
  const FactModel& fm = fact_model();
  const ToyModel& base = fm.trained.model;
  ToyModel model = base;
  const auto layers = default_memit_layers(model.config());
  std::vector<KeyCovariance> covs;
  for (auto l : layers) covs.push_back(estimate_covariance(model, sentences(fm.corpus), l));
  std::vector<EditRequest> reqs;
  for (std::size_t i = 0; i < 50; ++i)
    reqs.push_back(EditRequest::for_head(fm.facts[i].head, flipped_target(fm.facts[i], 100 + i)));
  memit_edit(model, reqs, layers, covs, MemitOptions{});
  const double success = edit_success(ModelView(model), reqs);
  std::vector<std::string> holdouts;
  for (std::size_t i = 50; i < 200; ++i) holdouts.push_back(fm.corpus[i].prompt);
  const double loc = locality(ModelView(base), ModelView(model), holdouts);
  const double elapsed = fm.train_seconds + (cpu_seconds() - t0);
  const double mem = fm.trained.memorization_accuracy;
  return {mem >= 0.9 && success >= 0.9 && loc >= 0.95 && elapsed < 300.0,
          "memorization " + fmt("%.3f", mem) + " (>= 0.9), edit_success " + fmt("%.3f", success) +
              " (>= 0.9), locality " + fmt("%.3f", loc) + " on 150 holdouts (>= 0.95), " +
              fmt("%.1f", elapsed) + " s CPU (< 300 s)"};
}

Outcome grace_deferral() {
  std::mt19937_64 rng(303);
  ModelConfig config;
  config.n_layers = 2;
  config.d_model = 8;
  config.n_heads = 2;
  config.d_mlp = 16;
  config.max_seq_len = 12;
  config.seed = 5;
  const ToyModel model(config, Tokenizer(kWords));
  const std::size_t layer = 1;
  GraceOptions go;
  go.value.steps = 5;
  Codebook book;
  std::size_t conflicts = 0;
  std::size_t invariant_breaks = 0;
  std::uniform_real_distribution<double> radius(0.05, 3.0);
  for (int op = 0; op < 1000; ++op) {
    // Short prompts over a small vocabulary repeat often, so identical and
    // nearby keys with different targets keep colliding.
    const auto req = EditRequest::make(random_sentence(rng, 1, 2), EditTarget{"", random_sentence(rng, 1, 1)});
    try {
      grace_add(book, model, req, layer, radius(rng), go);
    } catch (const ConflictError&) {
      ++conflicts;
    }
    if (!book.non_overlapping()) ++invariant_breaks;
  }

  std::size_t hits = 0;
  for (std::size_t i = 0; i < book.size(); ++i) {
    const auto idx = book.lookup_index(book.entries()[i].key);
    if (idx && (*idx == i || book.entries()[*idx].target == book.entries()[i].target)) ++hits;
  }

  // Far queries: at twice an entry's radius in a random direction, plus
  // random points, kept only when >= 2x radius from every entry.
  auto far_from_all = [&](const Vector& q) {
    for (const auto& e : book.entries())
      if ((q - e.key).norm() < 2.0 * e.radius) return false;
    return true;
  };
  std::size_t far = 0, activated = 0;
  for (std::size_t i = 0; i < book.size(); ++i) {
    for (int t = 0; t < 5; ++t) {
      Vector dir = random_matrix(rng, book.entries()[i].key.size(), 1).col(0);
      dir.normalize();
      const Vector q = book.entries()[i].key + 2.0 * book.entries()[i].radius * dir;
      if (!far_from_all(q)) continue;
      ++far;
      if (book.lookup(q)) ++activated;
    }
  }
  for (int t = 0; t < 2000; ++t) {
    const Vector q = 3.0 * random_matrix(rng, static_cast<Eigen::Index>(config.d_mlp), 1).col(0);
    if (!far_from_all(q)) continue;
    ++far;
    if (book.lookup(q)) ++activated;
  }
  const bool pass = hits == book.size() && far > 0 && activated == 0 && invariant_breaks == 0 && conflicts > 0;
  return {pass, "retrieval " + std::to_string(hits) + "/" + std::to_string(book.size()) + " (100%), " +
                    std::to_string(activated) + "/" + std::to_string(far) +
                    " far queries activated (0%), non-overlap held after each of 1000 adds (" +
                    std::to_string(invariant_breaks) + " breaks, " + std::to_string(conflicts) +
                    " forced identical-key conflicts)"};
}

// -------------------------------------------------------------- verifier

Outcome threshold_semantics() {
  const double eps = 1e-9;
  const bool above = classify(0.5 + eps) == Verdict::kPlausible;
  const bool at = classify(0.5) == Verdict::kImplausible;
  const bool below = classify(0.5 - eps) == Verdict::kImplausible;
  return {above && at && below, std::string("0.5+1e-9 ") + (above ? "plausible" : "implausible") +
                                    ", 0.5 " + (at ? "implausible" : "plausible") + ", 0.5-1e-9 " +
                                    (below ? "implausible" : "plausible")};
}

// -------------------------------------------------------------- pipeline

struct CategoryRun {
  CategoryWorld world;
  TrainResult trained;
};

const CategoryRun& category_run(std::uint64_t seed) {
  static std::map<std::uint64_t, CategoryRun> cache;
  auto it = cache.find(seed);
  if (it != cache.end()) return it->second;
  CategoryWorldOptions wo;
  wo.seed = seed;
  CategoryWorld world = make_category_world(wo);
  ModelConfig mc;
  mc.seed = seed;
  TrainOptions to;
  to.extra_vocabulary = world.vocabulary;
  TrainResult trained = train_toy(world.corpus, mc, to);
  return cache.emplace(seed, CategoryRun{std::move(world), std::move(trained)}).first->second;
}

Backends mock_backends(const CategoryWorld& world) {
  Backends b;
  b.verifier = std::make_unique<MockVerifier>(world.verifier);
  b.concepts = std::make_unique<LexiconBackend>(world.lexicon);
  b.templates = default_statement_templates();
  return b;
}

Outcome ablation_ordering() {
  std::ostringstream detail;
  bool pass = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CategoryRun& cr = category_run(seed);
    PipelineConfig config;
    config.seed = seed;
    const KnowledgeStore store = category_store(cr.world);
    const AblationReport r = ablate(config, store, cr.trained.model, mock_backends(cr.world));
    const double with = r.with_concepts.post_plausible_rate;
    const double without = r.without_concepts.post_plausible_rate;
    pass = pass && with > without;
    detail << (seed > 1 ? ", " : "") << "seed " << seed << " " << fmt("%.3f", with) << " vs "
           << fmt("%.3f", without);
  }
  return {pass, "post_plausible_rate with vs without conceptualization: " + detail.str() +
                    " (strictly greater on all 5 seeds)"};
}

Outcome pipeline_determinism() {
  const CategoryRun& cr = category_run(1);
  PipelineConfig config;
  config.seed = 1;
  config.batch_size = 10;
  KnowledgeStore a = category_store(cr.world);
  KnowledgeStore b = category_store(cr.world);
  const std::string ja = nlohmann::json(run(config, a, cr.trained.model, mock_backends(cr.world)).report).dump();
  const std::string jb = nlohmann::json(run(config, b, cr.trained.model, mock_backends(cr.world)).report).dump();
  return {ja == jb, ja == jb ? "report JSON identical (" + std::to_string(ja.size()) + " bytes)"
                             : "report JSON differs"};
}

// ---------------------------------------------------------- conceptualizer

Outcome conceptualization_fixpoint() {
  std::mt19937_64 rng(404);
  const auto& relations = social_relations();
  const std::vector<std::string> tails = {"rest", "eat", "pay", "smile", "leave", "call"};
  std::size_t nonempty_after = 0, propagated = 0, concepts_checked = 0;
  for (int g = 0; g < 100; ++g) {
    KnowledgeStore store;
    std::uniform_int_distribution<int> n_inst(1, 12), n_con(1, 5);
    std::uniform_int_distribution<std::size_t> pick_rel(0, relations.size() - 1), pick_tail(0, tails.size() - 1),
        pick_head(0, 7);
    std::bernoulli_distribution coin(0.5);
    std::vector<Triple> instances;
    const int ni = n_inst(rng);
    for (int i = 0; i < ni; ++i) {
      // Heads repeat so one instance head can carry several tails.
      const Triple t = Triple::make("PersonX visits place" + std::to_string(pick_head(rng)),
                                    relations[pick_rel(rng)], tails[pick_tail(rng)]);
      if (store.add_triple(t)) instances.push_back(t);
    }
    std::vector<std::string> concept_ids;
    const int nc = n_con(rng);
    for (int c = 0; c < nc; ++c) {
      const Triple& src = instances[std::uniform_int_distribution<std::size_t>(0, instances.size() - 1)(rng)];
      const AbstractTriple a = AbstractTriple::make("PersonX visits concept" + std::to_string(c),
                                                    relations[pick_rel(rng)], tails[pick_tail(rng)], {src.id});
      if (!store.add_abstract(a)) continue;
      concept_ids.push_back(a.id);
      for (const auto& inst : instances)
        if (coin(rng))
          store.add_link({inst.id, a.id, coin(rng) ? LinkDirection::kAbstracted : LinkDirection::kInstantiated});
    }
    for (const auto& id : concept_ids) {
      const auto out = propagate(store, id);
      propagated += out.size();
      apply_propagation(store, out);
      ++concepts_checked;
      if (!propagate(store, id).empty()) ++nonempty_after;
    }
  }
  return {nonempty_after == 0 && propagated > 0,
          std::to_string(nonempty_after) + " of " + std::to_string(concepts_checked) +
              " concepts non-empty after applying their own output, 100 graphs, " +
              std::to_string(propagated) + " corrections applied"};
}

// ------------------------------------------------------------------- store

Outcome store_round_trip() {
  std::mt19937_64 rng(505);
  const auto& relations = social_relations();
  const auto dir = std::filesystem::temp_directory_path() / ("conke_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::ostringstream detail;
  bool pass = true;
  for (std::size_t target : {1u, 10u, 100u, 1000u, 10000u}) {
    KnowledgeStore s;
    std::vector<std::string> triple_ids, concept_ids;
    std::uniform_int_distribution<int> kind(0, 9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t n = 0;
    while (s.record_count() < target) {
      const int k = triple_ids.empty() ? 0 : kind(rng);
      if (k < 5) {
        Triple t = Triple::make("PersonX does thing" + std::to_string(n++), relations[n % relations.size()],
                                "tail" + std::to_string(rng() % 50),
                                static_cast<TripleSource>(rng() % 5), rng() % 2 ? Split::kTrain : Split::kTest);
        if (rng() % 2) t.score = unit(rng);
        if (s.add_triple(t)) triple_ids.push_back(t.id);
      } else if (k < 7) {
        const auto& src = triple_ids[rng() % triple_ids.size()];
        const auto a = AbstractTriple::make("PersonX does concept" + std::to_string(n++),
                                            relations[n % relations.size()], "tail", {src}, rng() % 2);
        if (s.add_abstract(a)) concept_ids.push_back(a.id);
      } else if (k < 9 && !concept_ids.empty()) {
        s.add_link({triple_ids[rng() % triple_ids.size()], concept_ids[rng() % concept_ids.size()],
                    rng() % 2 ? LinkDirection::kAbstracted : LinkDirection::kInstantiated});
      } else {
        EditRecord r;
        r.method = static_cast<EditMethod>(rng() % 3);
        r.layers = {rng() % 4};
        r.delta_frobenius_norms = {unit(rng)};
        r.pre_score = unit(rng);
        r.post_score = unit(rng);
        r.request_ids = {triple_ids[rng() % triple_ids.size()]};
        r.timestamp = static_cast<std::int64_t>(n++);
        s.add_edit_record(r);
      }
    }
    const auto path = dir / ("s" + std::to_string(target) + ".jsonl");
    s.save(path);
    const bool equal = KnowledgeStore::load(path).snapshot() == s.snapshot();
    pass = pass && equal;
    detail << (target > 1 ? ", " : "") << s.record_count() << (equal ? " ok" : " DIFFERS");
  }

  // Duplicate ingestion.
  {
    std::ofstream tsv(dir / "ingest.tsv");
    for (int i = 0; i < 300; ++i)
      tsv << "PersonX reads book" << i << "\t" << relations[i % relations.size()] << "\tlearn\n";
  }
  KnowledgeStore s;
  const IngestReport first = s.ingest(dir / "ingest.tsv", IngestFormat::kTsv, Split::kTrain);
  const std::size_t count = s.record_count();
  const IngestReport second = s.ingest(dir / "ingest.tsv", IngestFormat::kTsv, Split::kTrain);
  const bool dup_ok = first.added == 300 && second.added == 0 && s.record_count() == count;
  std::filesystem::remove_all(dir);
  return {pass && dup_ok, "load(save(s)) == s at record counts " + detail.str() +
                              "; re-ingesting 300 rows added " + std::to_string(second.added) + " (0)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rank-one exactness", rank_one_exactness},
      {"batched-edit oracle equivalence", batched_oracle},
      {"gradient correctness", gradient_correctness},
      {"end-to-end edit efficacy", edit_efficacy},
      {"grace deferral", grace_deferral},
      {"threshold semantics", threshold_semantics},
      {"ablation ordering", ablation_ordering},
      {"pipeline determinism", pipeline_determinism},
      {"conceptualization fixpoint", conceptualization_fixpoint},
      {"store round-trip", store_round_trip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
