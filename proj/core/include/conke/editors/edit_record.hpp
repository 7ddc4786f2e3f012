// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace conke {

enum class EditMethod { kRome, kMemit, kGrace };

std::string_view to_string(EditMethod method);
// Throws InputError for anything but rome, memit or grace.
EditMethod parse_edit_method(std::string_view text);

// Audit entry for one applied edit.
struct EditRecord {
  EditMethod method = EditMethod::kRome;
  std::vector<std::size_t> layers;  // empty for the adapter method
  std::vector<double> delta_frobenius_norms;
  // Mean probability of the requested continuations before and after.
  double pre_score = 0.0;
  double post_score = 0.0;
  // Logical clock: position of the edit in its audit sequence.
  std::int64_t timestamp = 0;
  std::vector<std::string> request_ids;

  bool operator==(const EditRecord&) const = default;
};

void to_json(nlohmann::json& j, const EditRecord& r);
void from_json(const nlohmann::json& j, EditRecord& r);

// Appends one JSON line and flushes.
void append_audit(const std::filesystem::path& path, const EditRecord& record);
std::vector<EditRecord> read_audit(const std::filesystem::path& path);

}  // namespace conke
