#pragma once

// Canonical report serialization and run manifests.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opramsey/linalg.hpp"

namespace opramsey {

inline constexpr const char* tool_version = "0.1.0";

struct RunManifest {
  std::string command;               // "<module> <verb>"
  std::vector<std::string> argv;     // resolved arguments, enough to replay the run
  std::uint64_t config_hash = 0;     // of the canonical input
  std::uint64_t seed = 0;
  std::string version = tool_version;
  std::int64_t wall_time_ms = 0;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

/// Sorted keys, no whitespace, floats as %.12e. Infinities become the
/// strings "inf" and "-inf"; NaN is an encoding error.
std::string canonical_json(const nlohmann::json& j);

/// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const nlohmann::json& input);

enum class ReportFormat { json, csv };

ReportFormat report_format_from_string(const std::string& s);

/// One row per entry of the matrix under the header row,col,re,im.
std::string matrix_csv(const ComplexMatrix& m);

/// The first matrix-encoded value of a payload, keys visited in sorted order.
/// An encoding error when there is none.
ComplexMatrix primary_matrix(const nlohmann::json& payload);

/// {"manifest": ..., "payload": ...} as canonical JSON, or the CSV of the
/// primary matrix preceded by "# key=value" manifest lines.
std::string emit_report(const nlohmann::json& payload, const RunManifest& manifest, ReportFormat format);

/// The canonical payload text of a report; what replays compare.
std::string payload_bytes(const nlohmann::json& report);

}  // namespace opramsey
