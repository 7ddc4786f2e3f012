// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "conke/editors/covariance.hpp"
#include "conke/editors/grace.hpp"
#include "conke/editors/memit.hpp"
#include "conke/editors/rome.hpp"
#include "conke/model/generation.hpp"
#include "conke/model/value_optimization.hpp"
#include "conke/store/store.hpp"
#include "conke/verifier/verifier.hpp"

namespace {

using namespace conke;

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

ToyModel bench_model() {
  ModelConfig c;
  c.seed = 1;
  return ToyModel(c, Tokenizer({"PersonX", "buys", "finds", "apples", "pears", "xIntent", "to", "eat"}));
}

void BM_Forward(benchmark::State& state) {
  const ToyModel model = bench_model();
  const auto tokens = model.tokenizer().encode("PersonX buys apples xIntent to eat");
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(tokens));
}
BENCHMARK(BM_Forward);

void BM_RankOneUpdate(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Matrix w = random_matrix(rng, n / 4, n);
  const KeyCovariance cov = covariance_from_keys(random_matrix(rng, n, 2 * n), 0, 0.1);
  const Vector k = random_matrix(rng, n, 1).col(0);
  const Vector v = random_matrix(rng, n / 4, 1).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(rank_one_update(w, k, v, cov));
}
BENCHMARK(BM_RankOneUpdate)->Arg(64)->Arg(256);

void BM_BatchedUpdate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Eigen::Index d = 256;
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Matrix keys = random_matrix(rng, d, n);
  const Matrix residuals = random_matrix(rng, 64, n);
  const Matrix cov = covariance_from_keys(random_matrix(rng, d, 2 * d), 0, 0.1).matrix;
  for (auto _ : state) benchmark::DoNotOptimize(batched_update(keys, residuals, cov));
}
BENCHMARK(BM_BatchedUpdate)->Arg(1)->Arg(50);

void BM_ValueGradient(benchmark::State& state) {
  const ToyModel model = bench_model();
  const auto req = EditRequest::for_head("PersonX buys apples", {"xIntent", "to eat"});
  const ValueObjective obj(model, req, 1);
  const Vector v = obj.initial_value();
  for (auto _ : state) benchmark::DoNotOptimize(obj.gradient(v));
}
BENCHMARK(BM_ValueGradient);

void BM_CodebookLookup(benchmark::State& state) {
  std::mt19937_64 rng(3);
  Codebook book;
  for (int i = 0; i < state.range(0); ++i) {
    GraceEntry e;
    e.key = 10.0 * random_matrix(rng, 256, 1).col(0);
    e.value = Vector::Zero(64);
    e.radius = 1.0;
    e.request_id = std::to_string(i);
    e.target = std::to_string(i);
    book.insert(e);
  }
  const Vector q = 10.0 * random_matrix(rng, 256, 1).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(book.lookup(q));
}
BENCHMARK(BM_CodebookLookup)->Arg(100)->Arg(1000);

void BM_StoreQuery(benchmark::State& state) {
  KnowledgeStore store;
  for (int i = 0; i < 10000; ++i)
    store.add_triple(Triple::make("PersonX does thing" + std::to_string(i), "xWant", "rest" + std::to_string(i % 7)));
  TripleQuery q;
  q.head = "PersonX does thing42";
  for (auto _ : state) benchmark::DoNotOptimize(store.query(q));
}
BENCHMARK(BM_StoreQuery);

void BM_MockVerifier(benchmark::State& state) {
  const MockVerifier v(MockVerifierConfig{});
  std::vector<std::string> statements;
  for (int i = 0; i < 1000; ++i) statements.push_back("PersonX does thing" + std::to_string(i) + ". PersonX wanted rest.");
  for (auto _ : state) benchmark::DoNotOptimize(v.score(statements));
}
BENCHMARK(BM_MockVerifier);

}  // namespace

BENCHMARK_MAIN();
