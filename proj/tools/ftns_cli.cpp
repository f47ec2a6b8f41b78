#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ftns/errors.hpp"
#include "ftns/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
  std::string trace;
  unsigned workers = 0;
};

void common_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "run configuration (JSON, schema_version 1)")->required();
  cmd->add_option("--out", o.out, "output directory (default: config output_dir)");
  cmd->add_option("--seed", o.seed, "override plan.seed");
  cmd->add_flag("--force", o.force, "compare runs even when their spectra differ");
}

std::vector<ftns::RunConfig> load(const Options& o) {
  std::string text;
  const auto doc = ftns::read_config_document(o.config, &text);
  auto runs = ftns::expand_runs(doc, text, o.config);
  if (o.seed) {
    for (auto& r : runs) r = ftns::with_seed(r, *o.seed);
  }
  return runs;
}

std::filesystem::path out_dir(const Options& o, const ftns::RunConfig& cfg) {
  return o.out.empty() ? cfg.output_dir : std::filesystem::path(o.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier transform noise spectroscopy"};
  app.require_subcommand(1);
  Options o;
  auto* simulate = app.add_subcommand("simulate", "simulate a coherence trace");
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct a spectrum from a trace");
  auto* compare = app.add_subcommand("compare", "compare reconstructions of one spectrum");
  auto* sweep = app.add_subcommand("sweep", "sweep dt, noise_sigma or n_pulses");
  auto* oracle = app.add_subcommand("oracle", "dump closed-form chi and S for fixtures");
  for (auto* c : {simulate, reconstruct, compare, sweep, oracle}) common_flags(c, o);
  reconstruct->add_option("trace", o.trace, "trace CSV (unused for comb methods)");
  sweep->add_option("--workers", o.workers, "worker threads (default: hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const auto runs = load(o);
    const auto& first = runs.front();
    if (simulate->parsed()) {
      ftns::cmd_simulate(first, out_dir(o, first));
    } else if (reconstruct->parsed()) {
      if (o.trace.empty() && (first.method != ftns::RunMethod::ddns_as && first.method != ftns::RunMethod::ddns_delta)) {
        throw ftns::ConfigError("reconstruct needs a trace file for Fourier methods");
      }
      ftns::cmd_reconstruct(first, o.trace, out_dir(o, first));
    } else if (compare->parsed()) {
      const auto j = ftns::cmd_compare(runs, out_dir(o, first), o.force);
      for (const auto& r : j["runs"]) {
        std::cout << "run " << r["index"] << " " << r["method"].get<std::string>()
                  << " max_delta=" << r["report"]["max_delta"] << '\n';
      }
    } else if (sweep->parsed()) {
      ftns::cmd_sweep(first, out_dir(o, first), o.workers);
    } else if (oracle->parsed()) {
      ftns::cmd_oracle(first, out_dir(o, first));
    }
  } catch (const ftns::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ftns::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const ftns::DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  }
  return kOk;
}
