#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ftns/config.hpp"
#include "ftns/report.hpp"

namespace ftns {

CoherenceTrace simulate_for(const RunConfig& cfg);

// Runs the configured method. Fourier methods use the given trace, or simulate one when
// trace is null; comb methods query the configured spectrum directly.
ReconstructedSpectrum reconstruct_for(const RunConfig& cfg, const CoherenceTrace* trace);

std::pair<double, double> comparison_band(const RunConfig& cfg, const ReconstructedSpectrum& rec);

// A document with a "runs" array expands into one config per entry, each entry merged
// over the rest of the document as a JSON merge patch.
std::vector<RunConfig> expand_runs(const nlohmann::json& doc, const std::string& text, const std::string& source);

void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_reconstruct(const RunConfig& cfg, const std::filesystem::path& trace_csv,
                     const std::filesystem::path& out_dir);
nlohmann::json cmd_compare(const std::vector<RunConfig>& runs, const std::filesystem::path& out_dir, bool force);
nlohmann::json cmd_sweep(const RunConfig& base, const std::filesystem::path& out_dir, unsigned workers = 0);
void cmd_oracle(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace ftns
