// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/verifier/verifier.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "conke/error.hpp"
#include "conke/text.hpp"
#include "net/http.hpp"

namespace conke {

const StatementTemplates& default_statement_templates() {
  static const StatementTemplates kTemplates = {
      {"xNeed", "{head}. Before that, PersonX needed {tail}."},
      {"xIntent", "{head}. PersonX wanted {tail}."},
      {"xAttr", "{head}. PersonX is seen as {tail}."},
      {"xEffect", "{head}. As a result, PersonX {tail}."},
      {"xReact", "{head}. As a result, PersonX feels {tail}."},
      {"xWant", "{head}. As a result, PersonX wants {tail}."},
      {"oEffect", "{head}. As a result, others {tail}."},
      {"oReact", "{head}. As a result, others feel {tail}."},
      {"oWant", "{head}. As a result, others want {tail}."},
  };
  return kTemplates;
}

StatementTemplates load_statement_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read statement templates " + path.string());
  StatementTemplates out = default_statement_templates();
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    for (const auto& [rel, pattern] : j.items()) out[rel] = pattern.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed statement templates " + path.string() + ": " + e.what());
  }
  return out;
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

std::string render_statement(std::string_view head, std::string_view relation,
                             std::string_view tail, const StatementTemplates& templates) {
  auto it = templates.find(relation);
  if (it == templates.end())
    throw InputError("no statement template for relation '" + std::string(relation) + "'");
  std::string out = it->second;
  // Tail first, so a head containing "{tail}" is left alone.
  replace_all(out, "{tail}", normalize_whitespace(tail));
  replace_all(out, "{head}", normalize_whitespace(head));
  return normalize_whitespace(out);
}

std::string render_statement(const Triple& triple, const StatementTemplates& templates) {
  return render_statement(triple.head, triple.relation, triple.tail, templates);
}

Verdict classify(double score, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InputError("threshold must lie in (0, 1)");
  return score > threshold ? Verdict::kPlausible : Verdict::kImplausible;
}

void check_score(double score) {
  if (!(score >= 0.0 && score <= 1.0))
    throw ProtocolError("plausibility score " + std::to_string(score) + " outside [0, 1]");
}

std::vector<double> Verifier::score(const std::vector<std::string>& statements) const {
  if (statements.empty()) throw InputError("score: no statements");
  std::vector<double> out = do_score(statements);
  if (out.size() != statements.size())
    throw ProtocolError("verifier returned " + std::to_string(out.size()) + " scores for " +
                        std::to_string(statements.size()) + " statements");
  for (double s : out) check_score(s);
  return out;
}

MockVerifier::MockVerifier(MockVerifierConfig config) : config_() {
  config_.fallback = config.fallback;
  config_.constant = config.constant;
  config_.seed = config.seed;
  if (config_.fallback == MockVerifierConfig::Fallback::kConstant) check_score(config_.constant);
  for (auto& [statement, score] : config.rules) {
    check_score(score);
    config_.rules[normalize_whitespace(statement)] = score;
  }
}

MockVerifier MockVerifier::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read mock verifier rules " + path.string());
  MockVerifierConfig config;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    const bool wrapped = j.contains("rules") && j.at("rules").is_object();
    const nlohmann::json& rules = wrapped ? j.at("rules") : j;
    for (const auto& [statement, score] : rules.items())
      config.rules[statement] = score.get<double>();
    if (wrapped) {
      config.seed = j.value("seed", std::uint64_t{0});
      if (j.contains("fallback")) {
        const auto& f = j.at("fallback");
        if (f.is_number()) {
          config.fallback = MockVerifierConfig::Fallback::kConstant;
          config.constant = f.get<double>();
        } else if (f.get<std::string>() != "hash") {
          throw FormatError("fallback must be \"hash\" or a number");
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed mock verifier rules " + path.string() + ": " + e.what());
  }
  return MockVerifier(std::move(config));
}

double MockVerifier::hash_score(std::string_view statement, std::uint64_t seed) {
  std::uint64_t h = fnv1a64(normalize_whitespace(statement), 0xcbf29ce484222325ULL ^ seed);
  // Finalizer so nearby strings spread over the whole range.
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::vector<double> MockVerifier::do_score(const std::vector<std::string>& statements) const {
  std::vector<double> out;
  out.reserve(statements.size());
  for (const auto& s : statements) {
    const std::string key = normalize_whitespace(s);
    auto it = config_.rules.find(key);
    if (it != config_.rules.end())
      out.push_back(it->second);
    else if (config_.fallback == MockVerifierConfig::Fallback::kConstant)
      out.push_back(config_.constant);
    else
      out.push_back(hash_score(key, config_.seed));
  }
  return out;
}

HttpVerifier::HttpVerifier(HttpVerifierConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    if (const char* env = std::getenv("CONKE_VERIFIER_URL")) config_.base_url = env;
  }
  if (config_.base_url.empty())
    throw InputError("http verifier needs a base URL (or CONKE_VERIFIER_URL)");
  net::Endpoint::parse(config_.base_url);
  if (config_.batch_size == 0) throw InputError("verifier batch_size must be >= 1");
  if (config_.max_in_flight == 0) throw InputError("verifier max_in_flight must be >= 1");
}

std::vector<double> HttpVerifier::score_batch(const std::vector<std::string>& batch) const {
  const net::Endpoint endpoint = net::Endpoint::parse(config_.base_url);
  net::RetryPolicy retry{config_.attempts, config_.initial_backoff, config_.timeout};
  const std::string body = nlohmann::json{{"statements", batch}}.dump();
  const std::string raw = net::post_json(endpoint, "/score", body, retry);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("verifier response is not JSON", raw);
  }
  if (!j.is_object() || !j.contains("scores") || !j.at("scores").is_array())
    throw ProtocolError("verifier response has no \"scores\" array", raw);
  const auto& arr = j.at("scores");
  if (arr.size() != batch.size())
    throw ProtocolError("verifier returned " + std::to_string(arr.size()) + " scores for " +
                            std::to_string(batch.size()) + " statements",
                        raw);
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw ProtocolError("non-numeric score in verifier response", raw);
    const double s = v.get<double>();
    if (!(s >= 0.0 && s <= 1.0))
      throw ProtocolError("verifier score " + std::to_string(s) + " outside [0, 1]", raw);
    out.push_back(s);
  }
  return out;
}

std::vector<double> HttpVerifier::do_score(const std::vector<std::string>& statements) const {
  const std::size_t n_batches = (statements.size() + config_.batch_size - 1) / config_.batch_size;
  std::vector<double> out(statements.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  // Workers pull batch indices; each result lands at its batch offset, so
  // the output order never depends on completion order.
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_batches || failed.load()) return;
      const std::size_t begin = b * config_.batch_size;
      const std::size_t end = std::min(statements.size(), begin + config_.batch_size);
      try {
        std::vector<std::string> batch(statements.begin() + begin, statements.begin() + end);
        std::vector<double> scores = score_batch(batch);
        std::copy(scores.begin(), scores.end(), out.begin() + begin);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  const std::size_t n_workers = std::min(config_.max_in_flight, n_batches);
  std::vector<std::thread> threads;
  for (std::size_t i = 1; i < n_workers; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

TriageResult triage(const Verifier& verifier, const std::vector<Triple>& triples,
                    const StatementTemplates& templates, double threshold) {
  classify(0.5, threshold);  // validates the threshold up front
  TriageResult result;
  if (triples.empty()) return result;
  std::set<std::string> ids;
  std::vector<std::string> statements;
  statements.reserve(triples.size());
  for (const auto& t : triples) {
    if (!ids.insert(t.id).second) throw InputError("triage: duplicate triple id " + t.id);
    statements.push_back(render_statement(t, templates));
  }
  const std::vector<double> scores = verifier.score(statements);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    Triple t = triples[i];
    t.score = scores[i];
    if (classify(scores[i], threshold) == Verdict::kPlausible)
      result.plausible.push_back(std::move(t));
    else
      result.implausible.push_back(std::move(t));
  }
  return result;
}

}  // namespace conke
