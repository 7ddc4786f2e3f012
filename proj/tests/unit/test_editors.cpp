// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "conke/editors/covariance.hpp"
#include "conke/editors/edit_record.hpp"
#include "conke/editors/grace.hpp"
#include "conke/editors/memit.hpp"
#include "conke/editors/rome.hpp"
#include "conke/error.hpp"
#include "conke/model/generation.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace conke;
using conke::testing::random_matrix;
using conke::testing::small_world;

namespace {

KeyCovariance random_spd(std::mt19937_64& rng, Eigen::Index n, std::size_t layer = 0) {
  const Matrix a = random_matrix(rng, n, 3 * n);
  return covariance_from_keys(a, layer, 0.1);
}

Vector col(const Matrix& m) { return m.col(0); }

}  // namespace

// ---------------------------------------------------------------- covariance

TEST_CASE("covariance: mean outer product plus ridge, symmetric positive definite") {
  std::mt19937_64 rng(1);
  const Matrix keys = random_matrix(rng, 5, 40);
  const KeyCovariance c = covariance_from_keys(keys, 2, 0.25);
  Matrix expected = Matrix::Zero(5, 5);
  for (Eigen::Index i = 0; i < keys.cols(); ++i) expected += keys.col(i) * keys.col(i).transpose();
  expected /= 40.0;
  expected += 0.25 * Matrix::Identity(5, 5);
  CHECK((c.matrix - expected).norm() <= 1e-12);
  CHECK(c.layer == 2);
  CHECK(c.sample_count == 40);
  CHECK(c.is_symmetric(0.0));
  const Vector x = random_matrix(rng, 5, 1);
  CHECK((c.matrix * c.solve(x) - x).norm() <= 1e-10);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(c.matrix).eigenvalues().minCoeff() >= 0.25 - 1e-12);
}

TEST_CASE("covariance: singular without ridge, rejected inputs") {
  KeyCovariance c = covariance_from_keys(Matrix::Zero(3, 4), 0, 0.0);
  CHECK_THROWS_AS(c.solve(Vector::Ones(3)), SingularityError);
  const auto& w = small_world();
  CHECK_THROWS_AS(estimate_covariance(w.trained.model, {}, 1), InputError);
  CHECK_THROWS_AS(estimate_covariance(w.trained.model, {w.corpus[0].prompt}, 1, -1.0), InputError);
  const auto est = estimate_covariance(w.trained.model, conke::testing::corpus_sentences(w.corpus), 1);
  CHECK(est.sample_count >= 100);
  CHECK(est.matrix.rows() == static_cast<Eigen::Index>(w.trained.model.config().d_mlp));
  CHECK(est.is_symmetric());
}

// ------------------------------------------------------------------ rank one

TEST_CASE("rank-one update maps k to v on randomized instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d_out = 6, d_in = 9;
    const Matrix w = random_matrix(rng, d_out, d_in);
    const KeyCovariance c = random_spd(rng, d_in);
    const Vector k = col(random_matrix(rng, d_in, 1));
    const Vector v = col(random_matrix(rng, d_out, 1));
    const Matrix w_hat = rank_one_update(w, k, v, c);
    CHECK((w_hat * k - v).norm() / v.norm() <= 1e-6);

    // Directions orthogonal to k under C^{-1} keep their image.
    const Vector u = c.solve(k);
    const Vector r = col(random_matrix(rng, d_in, 1));
    const Vector k_null = r - (r.dot(u) / k.dot(u)) * k;
    REQUIRE(std::abs(k_null.dot(u)) <= 1e-10 * r.norm() * u.norm());
    CHECK((w_hat * k_null - w * k_null).norm() <= 1e-12 * std::max(1.0, (w * k_null).norm()));
  }
}

TEST_CASE("rank-one update: hand example with identity covariance") {
  // C = I: W_hat = W + (v - W k) k^T / (k^T k).
  Matrix w(2, 2);
  w << 1, 2, 3, 4;
  Vector k(2), v(2);
  k << 1, 0;
  v << 5, 6;
  KeyCovariance c;
  c.matrix = Matrix::Identity(2, 2);
  const Matrix w_hat = rank_one_update(w, k, v, c);
  Matrix expected(2, 2);
  expected << 5, 2, 6, 4;
  CHECK((w_hat - expected).norm() <= 1e-15);
}

TEST_CASE("rank-one update guards the denominator and non-finite input") {
  KeyCovariance c;
  c.matrix = Matrix::Identity(3, 3);
  const Matrix w = Matrix::Ones(2, 3);
  CHECK_THROWS_AS(rank_one_update(w, Vector::Zero(3), Vector::Ones(2), c), SingularityError);
  CHECK_THROWS_AS(rank_one_update(w, Vector::Constant(3, 1e-5), Vector::Ones(2), c),
                  SingularityError);
  Vector bad = Vector::Ones(3);
  bad(1) = std::nan("");
  CHECK_THROWS_AS(rank_one_update(w, bad, Vector::Ones(2), c), NumericError);
  CHECK_THROWS_AS(rank_one_update(w, Vector::Ones(3), Vector::Constant(2, INFINITY), c),
                  NumericError);
}

TEST_CASE("rome_edit changes only mlp_out at the edited layer and records the edit") {
  const auto& w = small_world();
  ToyModel model = w.trained.model;
  const ToyModel before = model;
  const std::size_t layer = default_edit_layer(model.config());
  const auto cov = estimate_covariance(model, conke::testing::corpus_sentences(w.corpus), layer);
  const auto req = EditRequest::for_head(w.facts[2].head, flipped_target(w.facts[2], 1));
  const auto v_star = optimize_value(model, req, layer, {}).value;
  const EditRecord rec = rome_edit(model, req, layer, cov);

  const Vector k = key_at(before, req.prompt, req.subject, layer);
  CHECK((model.mlp_out(layer) * k - v_star).norm() / v_star.norm() <= 1e-6);
  Weights a = before.weights(), b = model.weights();
  std::vector<std::string> changed;
  a.for_each([&](const std::string& name, Matrix& m) {
    b.for_each([&](const std::string& other, Matrix& n) {
      if (name == other && m != n) changed.push_back(name);
    });
  });
  CHECK(changed == std::vector<std::string>{"layers." + std::to_string(layer) + ".mlp_out"});
  CHECK(rec.method == EditMethod::kRome);
  CHECK(rec.layers == std::vector<std::size_t>{layer});
  REQUIRE(rec.delta_frobenius_norms.size() == 1);
  CHECK(rec.delta_frobenius_norms[0] ==
        doctest::Approx((model.mlp_out(layer) - before.mlp_out(layer)).norm()));
  CHECK(rec.post_score > rec.pre_score);
  CHECK(rec.request_ids == std::vector<std::string>{req.id});
  CHECK(generate(model, req.prompt, 3) == req.target.continuation());
}

TEST_CASE("rome_apply rejects a covariance from another layer") {
  const auto& w = small_world();
  ToyModel model = w.trained.model;
  const auto cov = estimate_covariance(model, {w.corpus[0].sentence(), w.corpus[1].sentence()}, 0);
  const Vector k = Vector::Ones(static_cast<Eigen::Index>(model.config().d_mlp));
  const Vector v = Vector::Ones(static_cast<Eigen::Index>(model.config().d_model));
  const auto hash = model.weights_hash();
  CHECK_THROWS_AS(rome_apply(model, 1, k, v, cov), InputError);
  CHECK(model.weights_hash() == hash);
}

// --------------------------------------------------------------------- memit

TEST_CASE("batched update matches hand linear algebra on a 2-key 2x2 instance") {
  // Independent oracle: explicit 2x2 inverse via the adjugate.
  Matrix k(2, 2), r(3, 2), c(2, 2);
  k << 1.0, 0.5, -0.25, 2.0;
  r << 0.3, -1.2, 2.0, 0.7, -0.4, 1.1;
  c << 2.0, 0.3, 0.3, 1.5;
  const Matrix s = c + k * k.transpose();
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  Matrix s_inv(2, 2);
  s_inv << s(1, 1) / det, -s(0, 1) / det, -s(1, 0) / det, s(0, 0) / det;
  const Matrix expected = r * k.transpose() * s_inv;
  CHECK((batched_update(k, r, c) - expected).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("memit_apply on a model with d_mlp = 2 matches the hand update") {
  ModelConfig config;
  config.n_layers = 2;
  config.d_model = 2;
  config.n_heads = 1;
  config.d_mlp = 2;
  config.seed = 3;
  ToyModel model(config, Tokenizer({"p", "q", "r", "s"}));
  const ToyModel before = model;
  const auto r1 = EditRequest::make("p q", EditTarget{"", "r"});
  const auto r2 = EditRequest::make("q s", EditTarget{"", "p"});
  KeyCovariance cov;
  cov.layer = 1;
  cov.matrix.resize(2, 2);
  cov.matrix << 1.5, 0.2, 0.2, 0.8;
  Vector v1(2), v2(2);
  v1 << 0.7, -0.3;
  v2 << -1.0, 0.4;
  MemitOptions opts;
  opts.covariance_weight = 1.0;
  memit_apply(model, {r1, r2}, {v1, v2}, {1}, {cov}, opts);

  Matrix k(2, 2), res(2, 2);
  const Vector k1 = key_at(before, "p q", r1.subject, 1), k2 = key_at(before, "q s", r2.subject, 1);
  k << k1, k2;
  res << v1 - before.mlp_out(1) * k1, v2 - before.mlp_out(1) * k2;
  const Matrix s = cov.matrix + k * k.transpose();
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  Matrix s_inv(2, 2);
  s_inv << s(1, 1) / det, -s(0, 1) / det, -s(1, 0) / det, s(0, 0) / det;
  const Matrix expected = before.mlp_out(1) + res * k.transpose() * s_inv;
  CHECK((model.mlp_out(1) - expected).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(model.mlp_out(0) == before.mlp_out(0));
}

TEST_CASE("single-request single-layer memit approaches rome as the regularizer shrinks") {
  const auto& w = small_world();
  const std::size_t layer = 1;
  const auto cov = estimate_covariance(w.trained.model, conke::testing::corpus_sentences(w.corpus), layer);
  const auto req = EditRequest::for_head(w.facts[4].head, flipped_target(w.facts[4], 2));
  const Vector v_star = optimize_value(w.trained.model, req, layer, {}).value;
  const Vector k = key_at(w.trained.model, req.prompt, req.subject, layer);

  ToyModel rome_model = w.trained.model;
  rome_apply(rome_model, layer, k, v_star, cov);
  const Vector rome_out = rome_model.mlp_out(layer) * k;

  double previous = INFINITY;
  for (double weight : {1e-2, 1e-4, 1e-6, 1e-8}) {
    ToyModel memit_model = w.trained.model;
    MemitOptions opts;
    opts.covariance_weight = weight;
    memit_apply(memit_model, {req}, {v_star}, {layer}, {cov}, opts);
    const double gap = (memit_model.mlp_out(layer) * k - rome_out).norm() / rome_out.norm();
    CHECK(gap <= previous);
    previous = gap;
  }
  CHECK(previous <= 1e-5);
}

TEST_CASE("memit with a single layer and request installs the value up to the regularizer") {
  const auto& w = small_world();
  const auto cov = estimate_covariance(w.trained.model, conke::testing::corpus_sentences(w.corpus), 1);
  const auto req = EditRequest::for_head(w.facts[6].head, flipped_target(w.facts[6], 2));
  ToyModel model = w.trained.model;
  const Vector v_star = optimize_value(model, req, 1, {}).value;
  MemitOptions opts;
  opts.covariance_weight = 1e-9;
  memit_apply(model, {req}, {v_star}, {1}, {cov}, opts);
  const Vector k = key_at(w.trained.model, req.prompt, req.subject, 1);
  CHECK((model.mlp_out(1) * k - v_star).norm() / v_star.norm() <= 1e-5);
}

TEST_CASE("memit_edit rewrites a batch of facts with default layers") {
  const auto& w = small_world();
  ToyModel model = w.trained.model;
  const auto layers = default_memit_layers(model.config());
  CHECK(layers == std::vector<std::size_t>{1});
  std::vector<KeyCovariance> covs;
  for (auto l : layers)
    covs.push_back(estimate_covariance(model, conke::testing::corpus_sentences(w.corpus), l));
  std::vector<EditRequest> reqs;
  for (std::size_t i = 0; i < 5; ++i)
    reqs.push_back(EditRequest::for_head(w.facts[i].head, flipped_target(w.facts[i], 7 + i)));
  const EditRecord rec = memit_edit(model, reqs, layers, covs);
  CHECK(rec.method == EditMethod::kMemit);
  CHECK(rec.layers == layers);
  CHECK(rec.delta_frobenius_norms.size() == layers.size());
  CHECK(rec.post_score > rec.pre_score);
  std::size_t ok = 0;
  for (const auto& r : reqs) ok += generate(model, r.prompt, 3) == r.target.continuation();
  CHECK(ok >= 4);
}

TEST_CASE("memit spreads the residual over several layers") {
  const auto& w = small_world();
  ToyModel model = w.trained.model;
  const std::vector<std::size_t> layers{0, 1};
  std::vector<KeyCovariance> covs;
  for (auto l : layers)
    covs.push_back(estimate_covariance(model, conke::testing::corpus_sentences(w.corpus), l));
  const auto req = EditRequest::for_head(w.facts[1].head, flipped_target(w.facts[1], 5));
  MemitOptions opts;
  opts.covariance_weight = 1e-6;
  const EditRecord rec = memit_edit(model, {req}, layers, covs, opts);
  REQUIRE(rec.delta_frobenius_norms.size() == 2);
  CHECK(rec.delta_frobenius_norms[0] > 0.0);
  CHECK(rec.delta_frobenius_norms[1] > 0.0);
  CHECK(generate(model, req.prompt, 3) == req.target.continuation());
}

TEST_CASE("memit_edit validates its preconditions and leaves the model untouched") {
  const auto& w = small_world();
  ToyModel model = w.trained.model;
  const auto hash = model.weights_hash();
  const auto cov1 = estimate_covariance(model, {w.corpus[0].sentence(), w.corpus[1].sentence()}, 1);
  const auto cov0 = estimate_covariance(model, {w.corpus[0].sentence(), w.corpus[1].sentence()}, 0);
  const auto req = EditRequest::for_head(w.facts[0].head, flipped_target(w.facts[0], 1));
  CHECK_THROWS_AS(memit_edit(model, {req}, {}, {}), InputError);
  CHECK_THROWS_AS(memit_edit(model, {req}, {1, 0}, {cov1, cov0}), InputError);
  CHECK_THROWS_AS(memit_edit(model, {req}, {0, 1}, {cov1}), InputError);
  CHECK_THROWS_AS(memit_edit(model, {req}, {1}, {cov0}), InputError);
  CHECK_THROWS_AS(memit_edit(model, {req, req}, {1}, {cov1}), InputError);
  CHECK_THROWS_AS(memit_edit(model, {req}, {5}, {cov1}), InputError);
  CHECK(model.weights_hash() == hash);
}

// --------------------------------------------------------------------- grace

namespace {

GraceEntry entry(double x, double y, double radius, std::string id, std::string target) {
  GraceEntry e;
  e.key = Vector(2);
  e.key << x, y;
  e.value = Vector::Constant(3, x + y);
  e.radius = radius;
  e.request_id = std::move(id);
  e.target = std::move(target);
  return e;
}

}  // namespace

TEST_CASE("codebook: disjoint balls keep their radii") {
  Codebook book;
  book.insert(entry(0, 0, 1.0, "a", "x"));
  book.insert(entry(3, 0, 1.0, "b", "y"));
  CHECK(book.entries()[0].radius == 1.0);
  CHECK(book.entries()[1].radius == 1.0);
  CHECK(book.non_overlapping());
}

TEST_CASE("codebook: new key outside an existing ball shrinks to the gap") {
  Codebook book;
  book.insert(entry(0, 0, 1.0, "a", "x"));
  book.insert(entry(1.5, 0, 1.0, "b", "y"));
  CHECK(book.entries()[0].radius == doctest::Approx(1.0));
  CHECK(book.entries()[1].radius == doctest::Approx(0.5));
  CHECK(book.non_overlapping());
}

TEST_CASE("codebook: new key inside an existing ball halves both radii") {
  Codebook book;
  book.insert(entry(0, 0, 1.0, "a", "x"));
  book.insert(entry(0.5, 0, 1.0, "b", "y"));
  CHECK(book.entries()[0].radius == doctest::Approx(0.25));
  CHECK(book.entries()[1].radius == doctest::Approx(0.25));
  CHECK(book.non_overlapping());
}

TEST_CASE("codebook: equal targets never split") {
  Codebook book;
  book.insert(entry(0, 0, 1.0, "a", "same"));
  book.insert(entry(0.5, 0, 1.0, "b", "same"));
  CHECK(book.entries()[0].radius == 1.0);
  CHECK(book.entries()[1].radius == 1.0);
  CHECK(book.non_overlapping());
}

TEST_CASE("codebook: identical conflicting keys raise and leave the book unchanged") {
  Codebook book;
  book.insert(entry(0, 0, 1.0, "a", "x"));
  CHECK_THROWS_AS(book.insert(entry(0, 0, 1.0, "b", "y")), ConflictError);
  CHECK_THROWS_AS(book.insert(entry(1e-7, 0, 1.0, "c", "y")), ConflictError);
  REQUIRE(book.size() == 1);
  CHECK(book.entries()[0].radius == 1.0);
  CHECK_THROWS_AS(book.insert(entry(5, 5, 0.0, "d", "y")), InputError);
}

TEST_CASE("codebook: lookup inside the ball hits, at or beyond the radius passes through") {
  Codebook book;
  book.insert(entry(0, 0, 1.0, "a", "x"));
  book.insert(entry(3, 0, 1.0, "b", "y"));
  Vector q(2);
  q << 0.5, 0.0;
  REQUIRE(book.lookup(q) != nullptr);
  CHECK(*book.lookup(q) == book.entries()[0].value);
  q << 1.0, 0.0;
  CHECK(book.lookup(q) == nullptr);
  q << 2.9, 0.0;
  CHECK(book.lookup_index(q) == std::optional<std::size_t>{1});
  q << 10.0, 10.0;
  CHECK(book.lookup(q) == nullptr);
}

TEST_CASE("codebook: random insertions stay pairwise non-overlapping") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coord(-2.0, 2.0), radius(0.1, 1.5);
  std::uniform_int_distribution<int> target(0, 4);
  Codebook book;
  for (int i = 0; i < 300; ++i) {
    GraceEntry e;
    e.key = Vector(3);
    for (auto& x : e.key) x = coord(rng);
    e.value = Vector::Zero(2);
    e.radius = radius(rng);
    e.request_id = "r" + std::to_string(i);
    e.target = "t" + std::to_string(target(rng));
    try {
      book.insert(std::move(e));
    } catch (const ConflictError&) {
    }
  }
  CHECK(book.size() > 250);
  // Independent pairwise check.
  const auto& es = book.entries();
  for (std::size_t i = 0; i < es.size(); ++i)
    for (std::size_t j = i + 1; j < es.size(); ++j) {
      if (es[i].target == es[j].target) continue;
      const double d = (es[i].key - es[j].key).norm();
      CHECK(d >= es[i].radius + es[j].radius - 1e-9);
    }
  CHECK(book.non_overlapping());
}

TEST_CASE("codebook save/load round-trips") {
  Codebook book;
  book.insert(entry(0, 0, 1.0, "a", "x"));
  book.insert(entry(0.5, 0.25, 1.0, "b", ""));
  conke::testing::TempDir dir;
  book.save(dir / "book.jsonl");
  const Codebook loaded = Codebook::load(dir / "book.jsonl");
  REQUIRE(loaded.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(loaded.entries()[i].key == book.entries()[i].key);
    CHECK(loaded.entries()[i].value == book.entries()[i].value);
    CHECK(loaded.entries()[i].radius == book.entries()[i].radius);
    CHECK(loaded.entries()[i].request_id == book.entries()[i].request_id);
    CHECK(loaded.entries()[i].target == book.entries()[i].target);
  }
  CHECK_THROWS_AS(Codebook::load(dir / "missing.jsonl"), IoError);
}

TEST_CASE("adapter: installs the edit, defers elsewhere, never touches weights") {
  const auto& w = small_world();
  const ToyModel& model = w.trained.model;
  const auto hash = model.weights_hash();
  const std::size_t layer = 1;
  Codebook book;
  const auto req = EditRequest::for_head(w.facts[3].head, flipped_target(w.facts[3], 4));
  CHECK(generate(model, req.prompt, 3) != req.target.continuation());
  const EditRecord rec = grace_add(book, model, req, layer, 1.0);
  CHECK(rec.method == EditMethod::kGrace);
  CHECK(rec.layers.empty());
  CHECK(rec.post_score > rec.pre_score);
  CHECK(book.size() == 1);

  const ModelView adapted = apply_adapter(model, book, layer);
  CHECK(generate(adapted, req.prompt, 3) == req.target.continuation());
  CHECK(model.weights_hash() == hash);
  std::size_t same = 0;
  for (std::size_t i = 10; i < w.corpus.size(); ++i)
    same += generate(adapted, w.corpus[i].prompt, 3) == generate(model, w.corpus[i].prompt, 3);
  CHECK(same == w.corpus.size() - 10);
  CHECK_THROWS_AS(grace_add(book, model, req, layer, 0.0), InputError);
  CHECK_THROWS_AS(apply_adapter(model, book, 9), InputError);
}

// ------------------------------------------------------- requests and records

TEST_CASE("render_prompt and request ids") {
  CHECK(render_prompt(kDefaultPromptTemplate, "PersonX buys coffee", "xNeed") ==
        "PersonX buys coffee xNeed");
  CHECK(render_prompt("{relation} of {head}", "PersonX runs", "xIntent") == "xIntent of PersonX runs");
  CHECK(render_prompt(kDefaultPromptTemplate, "PersonX runs", "") == "PersonX runs");
  CHECK_THROWS_AS(render_prompt("{relation} only", "h", "r"), InputError);

  const auto a = EditRequest::for_head("PersonX  buys coffee", {"xNeed", "money"});
  const auto b = EditRequest::for_head("PersonX buys coffee", {"xNeed", " money "});
  CHECK(a.id == b.id);
  CHECK(a.id.size() == 16);
  CHECK(a.subject == TokenSpan{0, 4});
  CHECK(a.target.continuation() == "money");
  CHECK(EditRequest::for_head("PersonX buys coffee", {"xNeed", "tools"}).id != a.id);
}

TEST_CASE("edit requests validate and round-trip through JSON") {
  auto r = EditRequest::for_head("PersonX buys coffee", {"xNeed", "money"}, {"t1", "t2"});
  const EditRequest back = nlohmann::json(r).get<EditRequest>();
  CHECK(back.id == r.id);
  CHECK(back.prompt == r.prompt);
  CHECK(back.subject == r.subject);
  CHECK(back.target == r.target);
  CHECK(back.source_triple_ids == r.source_triple_ids);
  EditRequest bad = r;
  bad.target.tail = " ";
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = r;
  bad.subject = TokenSpan{1, 9};
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("edit records round-trip through the audit log") {
  EditRecord a;
  a.method = EditMethod::kMemit;
  a.layers = {1, 2};
  a.delta_frobenius_norms = {0.5, 1.25};
  a.pre_score = 0.1;
  a.post_score = 0.9;
  a.timestamp = 3;
  a.request_ids = {"x", "y"};
  EditRecord b;
  b.method = EditMethod::kGrace;
  b.timestamp = 4;
  conke::testing::TempDir dir;
  append_audit(dir / "audit.jsonl", a);
  append_audit(dir / "audit.jsonl", b);
  const auto back = read_audit(dir / "audit.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);
  CHECK(parse_edit_method("rome") == EditMethod::kRome);
  CHECK_THROWS_AS(parse_edit_method("finetune"), InputError);
}
