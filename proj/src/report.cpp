#include "opramsey/report.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "opramsey/error.hpp"

namespace opramsey {

namespace {

void write(const nlohmann::json& j, std::string& out) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // object_t is an ordered std::map
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(k).dump();
        out += ':';
        write(v, out);
      }
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write(j[i], out);
      }
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isnan(v)) fail(ErrorKind::encoding, "NaN cannot be serialized");
      if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.12e", v == 0.0 ? 0.0 : v);
      out += buf;
      return;
    }
    case nlohmann::json::value_t::discarded:
      fail(ErrorKind::encoding, "discarded value in payload");
    case nlohmann::json::value_t::binary:
      fail(ErrorKind::encoding, "binary values are not serializable");
    default:
      out += j.dump();
  }
}

bool is_matrix(const nlohmann::json& j) {
  return j.is_object() && j.size() == 3 && j.contains("rows") && j.contains("cols") && j.contains("data") &&
         j["data"].is_array();
}

std::optional<ComplexMatrix> find_matrix(const nlohmann::json& j) {
  if (is_matrix(j)) return matrix_from_json(j);
  if (j.is_object()) {
    for (const auto& [k, v] : j.items())
      if (auto m = find_matrix(v)) return m;
  } else if (j.is_array()) {
    for (const auto& v : j)
      if (auto m = find_matrix(v)) return m;
  }
  return std::nullopt;
}

}  // namespace

std::string canonical_json(const nlohmann::json& j) {
  std::string out;
  write(j, out);
  return out;
}

std::uint64_t config_hash(const nlohmann::json& input) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json(input)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  return {{"command", m.command},        {"argv", m.argv},
          {"config_hash", m.config_hash}, {"seed", m.seed},
          {"tool_version", m.version},    {"wall_time_ms", m.wall_time_ms}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config_hash = j.at("config_hash").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("tool_version").get<std::string>();
    m.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::encoding, std::string("malformed manifest: ") + e.what());
  }
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  fail(ErrorKind::parameter, "unknown format '" + s + "' (json or csv)");
}

std::string matrix_csv(const ComplexMatrix& m) {
  std::string out = "row,col,re,im\n";
  char buf[96];
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%ld,%ld,%.12e,%.12e\n", static_cast<long>(r), static_cast<long>(c),
                    m(r, c).real() + 0.0, m(r, c).imag() + 0.0);
      out += buf;
    }
  return out;
}

ComplexMatrix primary_matrix(const nlohmann::json& payload) {
  auto m = find_matrix(payload);
  require(m.has_value(), ErrorKind::encoding, "payload has no matrix to write as CSV");
  return *m;
}

std::string emit_report(const nlohmann::json& payload, const RunManifest& manifest, ReportFormat format) {
  if (format == ReportFormat::json)
    return canonical_json({{"manifest", manifest_to_json(manifest)}, {"payload", payload}}) + "\n";
  std::string out;
  const nlohmann::json m = manifest_to_json(manifest);
  for (const auto& [k, v] : m.items()) out += "# " + k + "=" + canonical_json(v) + "\n";
  return out + matrix_csv(primary_matrix(payload));
}

std::string payload_bytes(const nlohmann::json& report) {
  require(report.is_object() && report.contains("payload"), ErrorKind::encoding, "not a report");
  return canonical_json(report["payload"]);
}

}  // namespace opramsey
