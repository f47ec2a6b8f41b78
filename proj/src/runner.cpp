#include "ftns/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

#include "ftns/errors.hpp"
#include "ftns/ftns_se.hpp"

namespace ftns {

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

const SpectrumModel& need_spectrum(const RunConfig& cfg) {
  if (!cfg.spectrum) throw ConfigError(cfg.source + ": /spectrum: this command needs a spectrum section");
  return *cfg.spectrum;
}

bool is_comb(RunMethod m) { return m == RunMethod::ddns_as || m == RunMethod::ddns_delta; }

void write_delta_table(const ErrorReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "omega,S_true,S_rec,delta\n";
  for (std::size_t k = 0; k < r.omega.size(); ++k) {
    out << format_number(r.omega[k]) << ',' << format_number(r.truth[k]) << ',' << format_number(r.reconstructed[k])
        << ',' << format_number(r.delta_abs[k]) << '\n';
  }
}

nlohmann::json spectrum_metadata(const RunConfig& cfg, const std::string& provenance) {
  nlohmann::json meta{{"config_hash", cfg.hash()}, {"provenance", provenance}, {"run_method", to_string(cfg.method)}};
  if (cfg.ddns) meta["ddns_plan"] = *cfg.ddns;
  return meta;
}

// Writes spectrum, and when a truth is configured, the error report; returns the summary.
nlohmann::json emit_reconstruction(const RunConfig& cfg, const ReconstructedSpectrum& rec,
                                   const std::filesystem::path& dir, const std::string& provenance) {
  write_spectrum(rec, dir / "spectrum.csv", spectrum_metadata(cfg, provenance));
  nlohmann::json summary{{"config_hash", cfg.hash()}, {"method", to_string(rec.method)}, {"points", rec.size()}};
  if (rec.one_over_f) summary["one_over_f"] = *rec.one_over_f;
  if (cfg.spectrum) {
    const auto [lo, hi] = comparison_band(cfg, rec);
    const auto report = error_report(*cfg.spectrum, rec, lo, hi);
    write_delta_table(report, dir / "delta.csv");
    nlohmann::json rj = report;
    rj["config_hash"] = cfg.hash();
    write_json(dir / "report.json", rj);
    summary["report"] = rj;
  }
  return summary;
}

}  // namespace

CoherenceTrace simulate_for(const RunConfig& cfg) {
  auto trace = simulate_trace(need_spectrum(cfg), cfg.sequence, cfg.plan);
  trace.config_hash = cfg.hash();
  return trace;
}

ReconstructedSpectrum reconstruct_for(const RunConfig& cfg, const CoherenceTrace* trace) {
  if (is_comb(cfg.method)) {
    const auto oracle = model_oracle(need_spectrum(cfg));
    return cfg.method == RunMethod::ddns_as ? run_alvarez_suter(oracle, *cfg.ddns) : run_single_delta(oracle, *cfg.ddns);
  }
  std::optional<CoherenceTrace> own;
  if (!trace) {
    own = simulate_for(cfg);
    trace = &*own;
  }
  if (!(trace->sequence == cfg.sequence)) {
    throw InputError("trace sequence " + trace->sequence.name() + " does not match configured " + cfg.sequence.name());
  }
  switch (cfg.method) {
    case RunMethod::fid_ftns:
      return reconstruct_fid(*trace, cfg.prep);
    case RunMethod::se_ftns:
      return reconstruct_se(*trace, cfg.prep);
    case RunMethod::se_ftns_1f:
      return reconstruct_with_one_over_f(*trace, cfg.prep);
    default:
      break;
  }
  throw ConfigError("unsupported method");
}

std::pair<double, double> comparison_band(const RunConfig& cfg, const ReconstructedSpectrum& rec) {
  double lo = rec.omega.empty() ? 0.0 : rec.omega.front();
  double hi = rec.omega.empty() ? 0.0 : rec.omega.back();
  if (cfg.band) {
    lo = std::max(lo, cfg.band->first);
    hi = std::min(hi, cfg.band->second);
  }
  return {lo, hi};
}

std::vector<RunConfig> expand_runs(const nlohmann::json& doc, const std::string& text, const std::string& source) {
  if (!doc.is_object() || !doc.contains("runs")) return {parse_config(doc, text, source)};
  if (!doc.at("runs").is_array() || doc.at("runs").empty()) {
    throw ConfigError(source + ": /runs: must be a non-empty array");
  }
  auto base = doc;
  base.erase("runs");
  std::vector<RunConfig> out;
  std::size_t i = 0;
  for (const auto& patch : doc.at("runs")) {
    auto d = base;
    d.merge_patch(patch);
    out.push_back(parse_config(d, text, source + " run " + std::to_string(i++)));
  }
  return out;
}

void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_trace(simulate_for(cfg), out_dir / "trace.csv");
}

void cmd_reconstruct(const RunConfig& cfg, const std::filesystem::path& trace_csv, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  if (is_comb(cfg.method)) {
    emit_reconstruction(cfg, reconstruct_for(cfg, nullptr), out_dir, "model");
    return;
  }
  const auto trace = read_trace(trace_csv);
  const auto rec = reconstruct_for(cfg, &trace);
  emit_reconstruction(cfg, rec, out_dir, file_sha256(trace_csv));
}

nlohmann::json cmd_compare(const std::vector<RunConfig>& runs, const std::filesystem::path& out_dir, bool force) {
  if (runs.size() < 2) throw ConfigError("compare needs at least 2 runs");
  for (const auto& r : runs) {
    need_spectrum(r);
    if (r.spectrum_hash() != runs.front().spectrum_hash() && !force) {
      throw ConfigError("compare: runs describe different spectra (hash mismatch); pass --force to override");
    }
  }
  std::filesystem::create_directories(out_dir);
  std::vector<ReconstructedSpectrum> recs;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    recs.push_back(reconstruct_for(r, nullptr));
    const auto [a, b] = comparison_band(r, recs.back());
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  }
  nlohmann::json out{{"runs", nlohmann::json::array()}};
  if (!(hi > lo)) {
    std::cerr << "warning: reconstruction bands are disjoint; nothing to compare\n";
    out["warning"] = "disjoint bands";
    write_json(out_dir / "compare.json", out);
    return out;
  }
  constexpr std::size_t kGrid = 1024;
  std::vector<double> grid(kGrid);
  for (std::size_t k = 0; k < kGrid; ++k) grid[k] = lo + (hi - lo) * static_cast<double>(k) / (kGrid - 1);
  const auto& truth = *runs.front().spectrum;
  std::vector<std::vector<double>> aligned(runs.size(), std::vector<double>(kGrid));
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t k = 0; k < kGrid; ++k) aligned[r][k] = recs[r].at(grid[k]).value_or(std::nan(""));
  }
  std::ofstream csv(out_dir / "compare.csv");
  csv << "omega,S_true";
  for (std::size_t r = 0; r < runs.size(); ++r) csv << ",run" << r << "_S,run" << r << "_delta";
  csv << '\n';
  for (std::size_t k = 0; k < kGrid; ++k) {
    const bool skip = grid[k] == 0.0 && truth.has_one_over_f();
    const double s = skip ? std::numeric_limits<double>::infinity() : truth(grid[k]);
    csv << format_number(grid[k]) << ',' << format_number(s);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      csv << ',' << format_number(aligned[r][k]) << ',' << format_number(std::abs(s - aligned[r][k]));
    }
    csv << '\n';
  }
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto report = error_report(truth, recs[r], lo, hi);
    nlohmann::json rj = report;
    out["runs"].push_back({{"index", r},
                           {"config_hash", runs[r].hash()},
                           {"method", to_string(recs[r].method)},
                           {"report", rj}});
  }
  auto pairs = nlohmann::json::array();
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      double m = 0.0;
      for (std::size_t k = 0; k < kGrid; ++k) {
        const double d = std::abs(aligned[a][k] - aligned[b][k]);
        if (std::isfinite(d)) m = std::max(m, d);
      }
      pairs.push_back({{"a", a}, {"b", b}, {"max_abs_difference", m}});
    }
  }
  out["pairs"] = pairs;
  out["band"] = {lo, hi};
  write_json(out_dir / "compare.json", out);
  return out;
}

nlohmann::json cmd_sweep(const RunConfig& base, const std::filesystem::path& out_dir, unsigned workers) {
  const auto& doc = base.document;
  if (!doc.contains("sweep")) throw ConfigError(base.source + ": /sweep: missing section");
  const auto& sw = doc.at("sweep");
  const std::string axis = sw.value("axis", "");
  if (axis != "dt" && axis != "noise_sigma" && axis != "n_pulses") {
    throw ConfigError(base.source + ": /sweep/axis: must be dt, noise_sigma or n_pulses");
  }
  if (!sw.contains("values") || !sw.at("values").is_array() || sw.at("values").empty()) {
    throw ConfigError(base.source + ": /sweep/values: usage error, need a non-empty list");
  }
  std::vector<RunConfig> runs;
  for (const auto& v : sw.at("values")) {
    auto d = doc;
    if (axis == "dt") d["plan"]["dt"] = v;
    if (axis == "noise_sigma") d["plan"]["noise_sigma"] = v;
    if (axis == "n_pulses") {
      d["sequence"]["n_pulses"] = v;
      if (d.contains("ddns")) d["ddns"]["n_pulses"] = v;
    }
    runs.push_back(parse_config(d, {}, base.source));
  }
  std::filesystem::create_directories(out_dir);
  std::vector<nlohmann::json> results(runs.size());
  std::vector<std::string> errors(runs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      const auto dir = out_dir / ("run_" + std::to_string(i));
      try {
        std::filesystem::create_directories(dir);
        std::optional<CoherenceTrace> trace;
        if (!is_comb(runs[i].method)) {
          trace = simulate_for(runs[i]);
          write_trace(*trace, dir / "trace.csv");
        }
        const auto rec = reconstruct_for(runs[i], trace ? &*trace : nullptr);
        results[i] = emit_reconstruction(runs[i], rec, dir, trace ? file_sha256(dir / "trace.csv") : "model");
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(runs.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!errors[i].empty()) throw NumericError("sweep run " + std::to_string(i) + " failed: " + errors[i]);
  }
  nlohmann::json out{{"axis", axis}, {"config_hash", base.hash()}, {"runs", nlohmann::json::array()}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto r = results[i];
    r["value"] = sw.at("values")[i];
    r["dir"] = "run_" + std::to_string(i);
    out["runs"].push_back(r);
  }
  write_json(out_dir / "sweep.json", out);
  return out;
}

void cmd_oracle(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const auto& model = need_spectrum(cfg);
  std::filesystem::create_directories(out_dir);
  const MeasurementPlan& plan = cfg.plan;
  plan.validate();
  bool closed = true;
  {
    std::ofstream csv(out_dir / "oracle_chi.csv");
    csv << "t,chi\n";
    for (std::size_t k = 0; k < plan.grid_size(); ++k) {
      const double t = static_cast<double>(k) * plan.dt;
      auto c = closed_form_chi(model, cfg.sequence, t);
      if (!c) {
        closed = false;
        c = attenuation(model, cfg.sequence, t);
      }
      csv << format_number(t) << ',' << format_number(*c) << '\n';
    }
  }
  constexpr std::size_t kPoints = 2049;
  const double top = std::numbers::pi / plan.dt;
  std::ofstream csv(out_dir / "oracle_spectrum.csv");
  csv << "omega,S\n";
  for (std::size_t k = 0; k < kPoints; ++k) {
    const double w = top * static_cast<double>(k) / (kPoints - 1);
    const double s = (w == 0.0 && model.has_one_over_f()) ? std::numeric_limits<double>::infinity() : model(w);
    csv << format_number(w) << ',' << format_number(s) << '\n';
  }
  write_json(out_dir / "oracle.json", {{"config_hash", cfg.hash()},
                                       {"chi_source", closed ? "closed_form" : "quadrature"},
                                       {"sequence", cfg.sequence},
                                       {"spectrum", model}});
}

}  // namespace ftns
