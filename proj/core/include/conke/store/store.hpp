// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "conke/editors/edit_record.hpp"
#include "conke/store/triple.hpp"

namespace conke {

inline constexpr std::string_view kStoreFormatVersion = "conke-store-v1";

// Relations a store accepts. Defaults to the nine social relations.
class RelationRegistry {
 public:
  RelationRegistry();
  explicit RelationRegistry(std::vector<std::string> relations);

  bool contains(std::string_view relation) const;
  void add(std::string relation);
  std::vector<std::string> names() const;  // sorted

  bool operator==(const RelationRegistry&) const = default;

 private:
  std::set<std::string, std::less<>> names_;
};

// Everything a store holds, in canonical order: triples and abstract triples
// by ascending id, links by (instance, concept, direction), edit records in
// insertion order.
struct StoreSnapshot {
  std::string format_version{kStoreFormatVersion};
  std::vector<std::string> relations;
  std::vector<Triple> triples;
  std::vector<AbstractTriple> abstracts;
  std::vector<ConceptLink> links;
  std::vector<EditRecord> edit_records;

  bool operator==(const StoreSnapshot&) const = default;
};

// Throws IntegrityError listing every dangling id: links whose instance is
// not a triple or whose concept is not an abstract triple, and abstract
// sources that are not triples. Duplicate ids and triple ids that do not
// match their content are reported the same way.
void check_integrity(const StoreSnapshot& snapshot);

struct ScoreRange {
  double low = 0.0;
  double high = 1.0;
  bool low_inclusive = true;
  bool high_inclusive = true;

  bool contains(double score) const;
};

// Conjunctive filters; unset fields match everything. A score filter never
// matches an unscored triple.
struct TripleQuery {
  std::optional<std::string> head;
  std::optional<std::string> relation;
  std::optional<TripleSource> source;
  std::optional<Split> split;
  std::optional<ScoreRange> score;
  // Triples linked to this abstract triple in either direction.
  std::optional<std::string> linked_concept;
};

enum class IngestFormat { kJsonl, kTsv };
IngestFormat parse_ingest_format(std::string_view text);

struct IngestReport {
  std::size_t added = 0;
  std::size_t duplicates = 0;
  // Too few fields, empty fields or unparseable JSON.
  std::size_t malformed = 0;
  // Relation not in the registry.
  std::size_t unknown_relation = 0;
};

// In-memory knowledge store persisted as JSON lines. Single writer, many
// readers: mutating calls take an exclusive lock, reads a shared one.
class KnowledgeStore {
 public:
  explicit KnowledgeStore(RelationRegistry relations = {});
  ~KnowledgeStore();
  KnowledgeStore(KnowledgeStore&&) noexcept;
  KnowledgeStore& operator=(KnowledgeStore&&) noexcept;

  // Validates integrity first.
  static KnowledgeStore from_snapshot(const StoreSnapshot& snapshot);
  StoreSnapshot snapshot() const;

  RelationRegistry relations() const;
  void register_relation(std::string relation);

  // Returns false when the id is already present; the stored triple is kept.
  // Throws InputError on an unregistered relation or a malformed triple.
  bool add_triple(const Triple& triple);
  // Throws IntegrityError when a source is missing.
  bool add_abstract(const AbstractTriple& abstract);
  // Throws IntegrityError when an endpoint is missing.
  bool add_link(const ConceptLink& link);
  void add_edit_record(const EditRecord& record);
  // Throws InputError for an unknown id and ProtocolError for a score
  // outside [0, 1].
  void set_score(const std::string& triple_id, double score);

  std::optional<Triple> triple(const std::string& id) const;
  std::optional<AbstractTriple> abstract(const std::string& id) const;
  bool contains_triple(const std::string& id) const;

  // Ascending id.
  std::vector<Triple> query(const TripleQuery& filters = {}) const;
  std::vector<AbstractTriple> abstracts() const;
  // Links whose concept is `concept_id`, in canonical order.
  std::vector<ConceptLink> links_to(const std::string& concept_id) const;
  std::vector<ConceptLink> links() const;
  std::vector<EditRecord> edit_records() const;

  std::size_t triple_count() const;
  // Triples, abstract triples, links and edit records together.
  std::size_t record_count() const;

  // Rows become dataset triples in `split`. Throws IoError when the file
  // cannot be read and InputError when no row is valid.
  IngestReport ingest(const std::filesystem::path& path, IngestFormat format, Split split);

  void save(const std::filesystem::path& path) const;
  // Throws FormatError on a version mismatch or a malformed line and
  // IntegrityError on dangling references.
  static KnowledgeStore load(const std::filesystem::path& path);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace conke
