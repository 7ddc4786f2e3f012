// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "conke/editors/edit_record.hpp"
#include "conke/editors/edit_request.hpp"
#include "conke/model/value_optimization.hpp"

namespace conke {

inline constexpr double kMinGraceRadius = 1e-6;

struct GraceEntry {
  Vector key;    // d_mlp
  Vector value;  // d_model
  double radius = 1.0;
  std::string request_id;
  // Normalized target continuation; entries with equal targets never
  // conflict. Empty means "unknown", which conflicts with everything.
  std::string target;
};

// Key-value codebook with deferral. A query inside an entry's ball gets that
// entry's value; anything else passes through to the unedited MLP.
class Codebook {
 public:
  const std::vector<GraceEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Appends `entry`. Against every conflicting entry whose ball would
  // overlap: if the new key falls inside the existing ball, both radii
  // shrink to half the key distance; otherwise the new radius shrinks to
  // the gap. Throws ConflictError if a conflicting key is identical (or
  // closer than 2 * kMinGraceRadius); the book is unchanged in that case.
  void insert(GraceEntry entry);

  // Nearest entry whose distance to `query` is strictly below its radius;
  // ties go to the lower insertion index.
  std::optional<std::size_t> lookup_index(const Vector& query) const;
  // Pointer into the book, or nullptr for pass-through.
  const Vector* lookup(const Vector& query) const;

  // Pairwise: distance >= r_i + r_j (up to rounding) or targets agree.
  bool non_overlapping() const;

  // One JSON object per line: {"key", "value", "radius", "request_id",
  // "target"}.
  void save(const std::filesystem::path& path) const;
  static Codebook load(const std::filesystem::path& path);

 private:
  std::vector<GraceEntry> entries_;
};

bool grace_targets_agree(const GraceEntry& a, const GraceEntry& b);

struct GraceOptions {
  ValueOptimizationOptions value;
};

// Wraps a model so the MLP output at `layer` goes through the codebook at
// every position. Holds references; model and book must outlive it.
class AdaptedModel {
 public:
  AdaptedModel(const ToyModel& base, const Codebook& book, std::size_t layer);
  ModelView view() const;
  std::size_t layer() const { return layer_; }

 private:
  const ToyModel* base_;
  const Codebook* book_;
  std::size_t layer_;
};

ModelView apply_adapter(const ToyModel& model, const Codebook& book, std::size_t layer);

// Adds an entry for `request`: key at the subject's last token, value
// optimized through the model with the current codebook in place.
// Throws InputError when init_radius <= 0.
EditRecord grace_add(Codebook& book, const ToyModel& model, const EditRequest& request,
                     std::size_t layer, double init_radius = 1.0,
                     const GraceOptions& options = {});

}  // namespace conke
