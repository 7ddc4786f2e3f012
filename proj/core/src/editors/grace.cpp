// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/editors/grace.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "conke/error.hpp"

namespace conke {

bool grace_targets_agree(const GraceEntry& a, const GraceEntry& b) {
  if (a.target.empty() || b.target.empty()) return false;
  return a.target == b.target;
}

void Codebook::insert(GraceEntry entry) {
  if (!(entry.radius > 0.0)) throw InputError("grace: radius must be > 0");
  if (!entry.key.allFinite()) throw NumericError("grace: key is not finite");
  if (!entry.value.allFinite()) throw NumericError("grace: value is not finite");
  if (!entries_.empty()) {
    if (entry.key.size() != entries_.front().key.size() ||
        entry.value.size() != entries_.front().value.size())
      throw InputError("grace: entry dimensions differ from the codebook");
  }
  entry.radius = std::max(entry.radius, kMinGraceRadius);

  std::vector<double> radii(entries_.size());
  for (std::size_t j = 0; j < entries_.size(); ++j) radii[j] = entries_[j].radius;

  for (std::size_t j = 0; j < entries_.size(); ++j) {
    const GraceEntry& other = entries_[j];
    if (grace_targets_agree(entry, other)) continue;
    const double d = (entry.key - other.key).norm();
    if (d == 0.0)
      throw ConflictError("grace: key of '" + entry.request_id + "' equals key of '" +
                          other.request_id + "' with a different target");
    if (d >= radii[j] + entry.radius) continue;
    if (d < radii[j] || d - radii[j] < kMinGraceRadius) {
      const double half = 0.5 * d;
      if (half < kMinGraceRadius)
        throw ConflictError("grace: keys of '" + entry.request_id + "' and '" +
                            other.request_id + "' are too close to separate");
      radii[j] = std::min(radii[j], half);
      entry.radius = std::min(entry.radius, half);
    } else {
      entry.radius = d - radii[j];
    }
  }

  for (std::size_t j = 0; j < entries_.size(); ++j) entries_[j].radius = radii[j];
  entries_.push_back(std::move(entry));
}

std::optional<std::size_t> Codebook::lookup_index(const Vector& query) const {
  std::optional<std::size_t> best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    const auto& e = entries_[j];
    if (e.key.size() != query.size()) continue;
    const double d = (query - e.key).norm();
    if (d < e.radius && d < best_distance) {
      best = j;
      best_distance = d;
    }
  }
  return best;
}

const Vector* Codebook::lookup(const Vector& query) const {
  auto idx = lookup_index(query);
  return idx ? &entries_[*idx].value : nullptr;
}

bool Codebook::non_overlapping() const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      if (grace_targets_agree(entries_[i], entries_[j])) continue;
      const double d = (entries_[i].key - entries_[j].key).norm();
      const double r = entries_[i].radius + entries_[j].radius;
      if (d < r - 1e-12 * std::max(1.0, d)) return false;
    }
  return true;
}

void Codebook::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write codebook: " + path.string());
  for (const auto& e : entries_) {
    nlohmann::json j{{"key", std::vector<double>(e.key.data(), e.key.data() + e.key.size())},
                     {"value", std::vector<double>(e.value.data(), e.value.data() + e.value.size())},
                     {"radius", e.radius},
                     {"request_id", e.request_id}};
    if (!e.target.empty()) j["target"] = e.target;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing codebook: " + path.string());
}

Codebook Codebook::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read codebook: " + path.string());
  Codebook book;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GraceEntry e;
      auto key = j.at("key").get<std::vector<double>>();
      auto value = j.at("value").get<std::vector<double>>();
      e.key = Eigen::Map<const Vector>(key.data(), static_cast<Eigen::Index>(key.size()));
      e.value = Eigen::Map<const Vector>(value.data(), static_cast<Eigen::Index>(value.size()));
      e.radius = j.at("radius").get<double>();
      e.request_id = j.at("request_id").get<std::string>();
      e.target = j.value("target", std::string{});
      if (!(e.radius > 0.0)) throw FormatError("codebook line " + std::to_string(line_no) + ": radius must be > 0");
      // Loaded verbatim: the stored radii already satisfy the split rule.
      book.entries_.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError("codebook line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return book;
}

AdaptedModel::AdaptedModel(const ToyModel& base, const Codebook& book, std::size_t layer)
    : base_(&base), book_(&book), layer_(layer) {
  if (layer >= base.config().n_layers)
    throw InputError("adapter layer " + std::to_string(layer) + " out of range");
}

ModelView AdaptedModel::view() const {
  const Codebook* book = book_;
  const std::size_t layer = layer_;
  return ModelView(*base_, [book, layer](std::size_t l, std::size_t, const Vector& key, Vector& value) {
    if (l != layer) return false;
    const Vector* hit = book->lookup(key);
    if (!hit) return false;
    value = *hit;
    return true;
  });
}

ModelView apply_adapter(const ToyModel& model, const Codebook& book, std::size_t layer) {
  return AdaptedModel(model, book, layer).view();
}

EditRecord grace_add(Codebook& book, const ToyModel& model, const EditRequest& request,
                     std::size_t layer, double init_radius, const GraceOptions& options) {
  if (!(init_radius > 0.0)) throw InputError("grace_add: init_radius must be > 0");
  request.validate();
  const ModelView adapted = apply_adapter(model, book, layer);
  GraceEntry entry;
  entry.key = key_at(adapted, request.prompt, request.subject, layer);
  entry.value = optimize_value(adapted, request, layer, options.value).value;
  entry.radius = init_radius;
  entry.request_id = request.id;
  entry.target = request.target.continuation();

  EditRecord record;
  record.method = EditMethod::kGrace;
  record.request_ids = {request.id};
  record.pre_score = mean_target_probability(adapted, {request});
  book.insert(std::move(entry));
  record.post_score = mean_target_probability(apply_adapter(model, book, layer), {request});
  return record;
}

}  // namespace conke
