#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "ftns/ddns.hpp"
#include "ftns/ftns_fid.hpp"

namespace ftns {

enum class RunMethod { fid_ftns, se_ftns, se_ftns_1f, ddns_as, ddns_delta };

std::string to_string(RunMethod method);

struct RunConfig {
  std::optional<SpectrumModel> spectrum;
  PulseSequence sequence;
  MeasurementPlan plan;
  RunMethod method = RunMethod::fid_ftns;
  PrepOptions prep;
  std::optional<DDNSPlan> ddns;
  std::optional<std::pair<double, double>> band;
  std::filesystem::path output_dir = "out";
  nlohmann::json document;
  std::string source = "config";

  // SHA-256 of the canonical (key-sorted, compact) document.
  std::string hash() const;
  // SHA-256 of the spectrum section alone.
  std::string spectrum_hash() const;
};

// Parses one run document ("schema_version": 1). Errors are ConfigError with
// "<source>:<line>: <json pointer>: <message>".
RunConfig parse_config(const nlohmann::json& doc, const std::string& text = {},
                       const std::string& source = "config");
nlohmann::json read_config_document(const std::filesystem::path& path, std::string* text = nullptr);
RunConfig load_config(const std::filesystem::path& path);

// Copy with plan.seed replaced, re-validated and re-hashed.
RunConfig with_seed(const RunConfig& cfg, std::uint64_t seed);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace ftns
