// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/store/store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "conke/error.hpp"
#include "conke/text.hpp"

namespace conke {

RelationRegistry::RelationRegistry()
    : RelationRegistry(social_relations()) {}

RelationRegistry::RelationRegistry(std::vector<std::string> relations) {
  for (auto& r : relations) add(std::move(r));
}

bool RelationRegistry::contains(std::string_view relation) const {
  return names_.find(relation) != names_.end();
}

void RelationRegistry::add(std::string relation) {
  relation = normalize_whitespace(relation);
  if (relation.empty()) throw InputError("relation name is empty");
  names_.insert(std::move(relation));
}

std::vector<std::string> RelationRegistry::names() const {
  return {names_.begin(), names_.end()};
}

bool ScoreRange::contains(double score) const {
  const bool above = low_inclusive ? score >= low : score > low;
  const bool below = high_inclusive ? score <= high : score < high;
  return above && below;
}

IngestFormat parse_ingest_format(std::string_view text) {
  if (text == "jsonl") return IngestFormat::kJsonl;
  if (text == "tsv") return IngestFormat::kTsv;
  throw InputError("unknown ingest format '" + std::string(text) + "' (expected jsonl or tsv)");
}

void check_integrity(const StoreSnapshot& s) {
  std::vector<std::string> bad;
  std::set<std::string> triple_ids, abstract_ids;
  for (const auto& t : s.triples) {
    if (!triple_ids.insert(t.id).second) bad.push_back(t.id);
    if (t.id != content_id(t.head, t.relation, t.tail)) bad.push_back(t.id);
  }
  for (const auto& a : s.abstracts) {
    if (!abstract_ids.insert(a.id).second) bad.push_back(a.id);
    if (a.id != abstract_id(a.head_concept, a.relation, a.tail)) bad.push_back(a.id);
    if (a.derived_from.empty()) bad.push_back(a.id);
    for (const auto& src : a.derived_from)
      if (!triple_ids.count(src)) bad.push_back(src);
  }
  std::set<ConceptLink> seen;
  for (const auto& l : s.links) {
    if (!triple_ids.count(l.instance_id)) bad.push_back(l.instance_id);
    if (!abstract_ids.count(l.concept_id)) bad.push_back(l.concept_id);
    if (!seen.insert(l).second) bad.push_back(l.instance_id + "->" + l.concept_id);
  }
  if (bad.empty()) return;
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  std::string msg = "store integrity violated; offending ids:";
  for (const auto& id : bad) msg += " " + id;
  throw IntegrityError(msg, bad);
}

struct KnowledgeStore::State {
  mutable std::shared_mutex mutex;
  RelationRegistry relations;
  std::map<std::string, Triple> triples;
  std::map<std::string, AbstractTriple> abstracts;
  std::set<ConceptLink> links;
  std::vector<EditRecord> records;

  bool add_triple(const Triple& t) {
    if (t.id != content_id(t.head, t.relation, t.tail) || normalize_whitespace(t.head).empty() ||
        normalize_whitespace(t.tail).empty())
      throw InputError("malformed triple '" + t.id + "'");
    if (!relations.contains(t.relation))
      throw InputError("unregistered relation '" + t.relation + "'");
    if (t.score && !(*t.score >= 0.0 && *t.score <= 1.0))
      throw ProtocolError("score outside [0, 1] for triple " + t.id);
    return triples.emplace(t.id, t).second;
  }
};

KnowledgeStore::KnowledgeStore(RelationRegistry relations) : state_(std::make_unique<State>()) {
  state_->relations = std::move(relations);
}

KnowledgeStore::~KnowledgeStore() = default;
KnowledgeStore::KnowledgeStore(KnowledgeStore&&) noexcept = default;
KnowledgeStore& KnowledgeStore::operator=(KnowledgeStore&&) noexcept = default;

KnowledgeStore KnowledgeStore::from_snapshot(const StoreSnapshot& snapshot) {
  if (snapshot.format_version != kStoreFormatVersion)
    throw FormatError("store format '" + snapshot.format_version + "' is not " +
                      std::string(kStoreFormatVersion));
  check_integrity(snapshot);
  KnowledgeStore store{RelationRegistry(snapshot.relations)};
  State& st = *store.state_;
  for (const auto& t : snapshot.triples) st.add_triple(t);
  for (const auto& a : snapshot.abstracts) st.abstracts.emplace(a.id, a);
  st.links.insert(snapshot.links.begin(), snapshot.links.end());
  st.records = snapshot.edit_records;
  return store;
}

StoreSnapshot KnowledgeStore::snapshot() const {
  std::shared_lock lock(state_->mutex);
  StoreSnapshot s;
  s.relations = state_->relations.names();
  for (const auto& [id, t] : state_->triples) s.triples.push_back(t);
  for (const auto& [id, a] : state_->abstracts) s.abstracts.push_back(a);
  s.links.assign(state_->links.begin(), state_->links.end());
  s.edit_records = state_->records;
  return s;
}

RelationRegistry KnowledgeStore::relations() const {
  std::shared_lock lock(state_->mutex);
  return state_->relations;
}

void KnowledgeStore::register_relation(std::string relation) {
  std::unique_lock lock(state_->mutex);
  state_->relations.add(std::move(relation));
}

bool KnowledgeStore::add_triple(const Triple& triple) {
  std::unique_lock lock(state_->mutex);
  return state_->add_triple(triple);
}

bool KnowledgeStore::add_abstract(const AbstractTriple& abstract) {
  std::unique_lock lock(state_->mutex);
  if (abstract.id != abstract_id(abstract.head_concept, abstract.relation, abstract.tail))
    throw InputError("malformed abstract triple '" + abstract.id + "'");
  if (abstract.derived_from.empty())
    throw InputError("abstract triple " + abstract.id + " has no source");
  std::vector<std::string> missing;
  for (const auto& src : abstract.derived_from)
    if (!state_->triples.count(src)) missing.push_back(src);
  if (!missing.empty())
    throw IntegrityError("abstract triple " + abstract.id + " has unknown sources", missing);
  return state_->abstracts.emplace(abstract.id, abstract).second;
}

bool KnowledgeStore::add_link(const ConceptLink& link) {
  std::unique_lock lock(state_->mutex);
  std::vector<std::string> missing;
  if (!state_->triples.count(link.instance_id)) missing.push_back(link.instance_id);
  if (!state_->abstracts.count(link.concept_id)) missing.push_back(link.concept_id);
  if (!missing.empty()) throw IntegrityError("link endpoint does not exist", missing);
  return state_->links.insert(link).second;
}

void KnowledgeStore::add_edit_record(const EditRecord& record) {
  std::unique_lock lock(state_->mutex);
  state_->records.push_back(record);
}

void KnowledgeStore::set_score(const std::string& triple_id, double score) {
  if (!(score >= 0.0 && score <= 1.0))
    throw ProtocolError("score " + std::to_string(score) + " outside [0, 1]");
  std::unique_lock lock(state_->mutex);
  auto it = state_->triples.find(triple_id);
  if (it == state_->triples.end()) throw InputError("unknown triple id " + triple_id);
  it->second.score = score;
}

std::optional<Triple> KnowledgeStore::triple(const std::string& id) const {
  std::shared_lock lock(state_->mutex);
  auto it = state_->triples.find(id);
  if (it == state_->triples.end()) return std::nullopt;
  return it->second;
}

std::optional<AbstractTriple> KnowledgeStore::abstract(const std::string& id) const {
  std::shared_lock lock(state_->mutex);
  auto it = state_->abstracts.find(id);
  if (it == state_->abstracts.end()) return std::nullopt;
  return it->second;
}

bool KnowledgeStore::contains_triple(const std::string& id) const {
  std::shared_lock lock(state_->mutex);
  return state_->triples.count(id) > 0;
}

std::vector<Triple> KnowledgeStore::query(const TripleQuery& q) const {
  std::shared_lock lock(state_->mutex);
  std::set<std::string> linked;
  if (q.linked_concept)
    for (const auto& l : state_->links)
      if (l.concept_id == *q.linked_concept) linked.insert(l.instance_id);
  const std::optional<std::string> head =
      q.head ? std::optional(normalize_whitespace(*q.head)) : std::nullopt;
  std::vector<Triple> out;
  for (const auto& [id, t] : state_->triples) {
    if (head && t.head != *head) continue;
    if (q.relation && t.relation != *q.relation) continue;
    if (q.source && t.source != *q.source) continue;
    if (q.split && t.split != *q.split) continue;
    if (q.score && !(t.score && q.score->contains(*t.score))) continue;
    if (q.linked_concept && !linked.count(id)) continue;
    out.push_back(t);
  }
  return out;
}

std::vector<AbstractTriple> KnowledgeStore::abstracts() const {
  std::shared_lock lock(state_->mutex);
  std::vector<AbstractTriple> out;
  for (const auto& [id, a] : state_->abstracts) out.push_back(a);
  return out;
}

std::vector<ConceptLink> KnowledgeStore::links_to(const std::string& concept_id) const {
  std::shared_lock lock(state_->mutex);
  std::vector<ConceptLink> out;
  for (const auto& l : state_->links)
    if (l.concept_id == concept_id) out.push_back(l);
  return out;
}

std::vector<ConceptLink> KnowledgeStore::links() const {
  std::shared_lock lock(state_->mutex);
  return {state_->links.begin(), state_->links.end()};
}

std::vector<EditRecord> KnowledgeStore::edit_records() const {
  std::shared_lock lock(state_->mutex);
  return state_->records;
}

std::size_t KnowledgeStore::triple_count() const {
  std::shared_lock lock(state_->mutex);
  return state_->triples.size();
}

std::size_t KnowledgeStore::record_count() const {
  std::shared_lock lock(state_->mutex);
  return state_->triples.size() + state_->abstracts.size() + state_->links.size() +
         state_->records.size();
}

namespace {

// Returns (head, relation, tail) or nullopt for a malformed row.
std::optional<std::array<std::string, 3>> parse_row(const std::string& line, IngestFormat format) {
  std::array<std::string, 3> f;
  if (format == IngestFormat::kTsv) {
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      if (start > line.size()) return std::nullopt;
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos && i < 2) return std::nullopt;
      f[i] = line.substr(start, tab == std::string::npos ? std::string::npos : tab - start);
      start = tab == std::string::npos ? line.size() + 1 : tab + 1;
    }
  } else {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!j.is_object()) return std::nullopt;
    const char* keys[] = {"head", "relation", "tail"};
    for (int i = 0; i < 3; ++i) {
      auto it = j.find(keys[i]);
      if (it == j.end() || !it->is_string()) return std::nullopt;
      f[i] = it->get<std::string>();
    }
  }
  for (auto& s : f) {
    // Tolerate CRLF files.
    s = normalize_whitespace(s);
    if (s.empty()) return std::nullopt;
  }
  return f;
}

}  // namespace

IngestReport KnowledgeStore::ingest(const std::filesystem::path& path, IngestFormat format,
                                    Split split) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  IngestReport report;
  std::vector<Triple> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (normalize_whitespace(line).empty()) continue;
    auto fields = parse_row(line, format);
    if (!fields) {
      ++report.malformed;
      continue;
    }
    rows.push_back(Triple::make((*fields)[0], (*fields)[1], (*fields)[2], TripleSource::kDataset,
                                split));
  }
  if (in.bad()) throw IoError("failed reading " + path.string());

  std::unique_lock lock(state_->mutex);
  std::size_t valid = 0;
  for (const auto& t : rows) {
    if (!state_->relations.contains(t.relation)) {
      ++report.unknown_relation;
      continue;
    }
    ++valid;
    if (state_->add_triple(t))
      ++report.added;
    else
      ++report.duplicates;
  }
  if (valid == 0)
    throw InputError("no valid rows in " + path.string() + " (" +
                     std::to_string(report.malformed) + " malformed, " +
                     std::to_string(report.unknown_relation) + " with unknown relations)");
  return report;
}

void KnowledgeStore::save(const std::filesystem::path& path) const {
  const StoreSnapshot s = snapshot();
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << nlohmann::json{{"type", "header"},
                          {"format_version", s.format_version},
                          {"relations", s.relations}}
               .dump()
        << '\n';
    for (const auto& t : s.triples) out << nlohmann::json(t).dump() << '\n';
    for (const auto& a : s.abstracts) out << nlohmann::json(a).dump() << '\n';
    for (const auto& l : s.links) out << nlohmann::json(l).dump() << '\n';
    for (const auto& r : s.edit_records) out << nlohmann::json(r).dump() << '\n';
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

KnowledgeStore KnowledgeStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read store " + path.string());
  StoreSnapshot s;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        s.format_version = j.at("format_version").get<std::string>();
        if (s.format_version != kStoreFormatVersion)
          throw FormatError(where + ": store format '" + s.format_version + "' is not " +
                            std::string(kStoreFormatVersion));
        s.relations = j.at("relations").get<std::vector<std::string>>();
        have_header = true;
      } else if (!have_header) {
        throw FormatError(where + ": record before the header line");
      } else if (type == "triple") {
        s.triples.push_back(j.get<Triple>());
      } else if (type == "abstract") {
        s.abstracts.push_back(j.get<AbstractTriple>());
      } else if (type == "link") {
        s.links.push_back(j.get<ConceptLink>());
      } else if (type == "edit_record") {
        s.edit_records.push_back(j.get<EditRecord>());
      } else {
        throw FormatError(where + ": unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": " + e.what());
    } catch (const InputError& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  if (!have_header) throw FormatError(path.string() + ": missing header line");
  std::sort(s.triples.begin(), s.triples.end(),
            [](const Triple& a, const Triple& b) { return a.id < b.id; });
  std::sort(s.abstracts.begin(), s.abstracts.end(),
            [](const AbstractTriple& a, const AbstractTriple& b) { return a.id < b.id; });
  std::sort(s.links.begin(), s.links.end());
  return from_snapshot(s);
}

}  // namespace conke
