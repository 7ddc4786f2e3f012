// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/editors/edit_record.hpp"

#include <fstream>

#include "conke/error.hpp"

namespace conke {

std::string_view to_string(EditMethod method) {
  switch (method) {
    case EditMethod::kRome: return "rome";
    case EditMethod::kMemit: return "memit";
    case EditMethod::kGrace: return "grace";
  }
  return "unknown";
}

EditMethod parse_edit_method(std::string_view text) {
  if (text == "rome") return EditMethod::kRome;
  if (text == "memit") return EditMethod::kMemit;
  if (text == "grace") return EditMethod::kGrace;
  throw InputError("unknown edit method '" + std::string(text) + "' (expected rome, memit or grace)");
}

void to_json(nlohmann::json& j, const EditRecord& r) {
  j = nlohmann::json{{"type", "edit_record"},
                     {"method", to_string(r.method)},
                     {"layers", r.layers},
                     {"delta_frobenius_norms", r.delta_frobenius_norms},
                     {"pre_score", r.pre_score},
                     {"post_score", r.post_score},
                     {"timestamp", r.timestamp},
                     {"request_ids", r.request_ids}};
}

void from_json(const nlohmann::json& j, EditRecord& r) {
  r.method = parse_edit_method(j.at("method").get<std::string>());
  r.layers = j.at("layers").get<std::vector<std::size_t>>();
  r.delta_frobenius_norms = j.at("delta_frobenius_norms").get<std::vector<double>>();
  r.pre_score = j.at("pre_score").get<double>();
  r.post_score = j.at("post_score").get<double>();
  r.timestamp = j.at("timestamp").get<std::int64_t>();
  r.request_ids = j.value("request_ids", std::vector<std::string>{});
}

void append_audit(const std::filesystem::path& path, const EditRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open audit log: " + path.string());
  out << nlohmann::json(record).dump() << '\n';
  out.flush();
  if (!out) throw IoError("failed writing audit log: " + path.string());
}

std::vector<EditRecord> read_audit(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read audit log: " + path.string());
  std::vector<EditRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<EditRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("malformed audit line: " + std::string(e.what()));
    }
  }
  return out;
}

}  // namespace conke
