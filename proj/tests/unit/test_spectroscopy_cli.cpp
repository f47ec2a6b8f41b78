#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ftns/config.hpp"
#include "ftns/errors.hpp"
#include "ftns/runner.hpp"

using namespace ftns;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = FTNS_CONFIG_DIR;

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ftns_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FTNS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const fs::path& p, const std::string& body) {
  std::ofstream(p) << body;
  return p;
}

const char* kMinimal = R"({
  "schema_version": 1,
  "method": "fid_ftns",
  "spectrum": {"components": [{"kind": "gaussian", "A": 1.0, "sigma": 1.0}]},
  "sequence": {"kind": "fid"},
  "plan": {"dt": 0.05, "t_max": 6.0, "coherence_floor": 0.0}
})";

}  // namespace

TEST_CASE("config hash ignores layout and key order", "[config]") {
  const auto a = parse_config(nlohmann::json::parse(kMinimal));
  const auto b = parse_config(nlohmann::json::parse(
      R"({"plan":{"coherence_floor":0.0,"t_max":6.0,"dt":0.05},"sequence":{"kind":"fid"},"schema_version":1,)"
      R"("spectrum":{"components":[{"sigma":1.0,"A":1.0,"kind":"gaussian"}]},"method":"fid_ftns"})"));
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 64);
  CHECK(with_seed(a, 3).hash() != a.hash());
  CHECK(with_seed(a, 3).plan.seed == 3);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config errors carry the source line", "[config]") {
  const auto dir = fresh_dir("errors");
  std::string body = kMinimal;
  body.replace(body.find("\"dt\": 0.05"), 10, "\"dt\": -1.0");
  const auto bad_plan = write_file(dir / "bad_plan.json", body);
  try {
    load_config(bad_plan);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("bad_plan.json:6: /plan"));
  }

  const auto broken = write_file(dir / "broken.json", "{\n  \"schema_version\": 1,\n  \"method\": \n}\n");
  try {
    load_config(broken);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("broken.json:4"));
  }

  auto doc = nlohmann::json::parse(kMinimal);
  doc["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = nlohmann::json::parse(kMinimal);
  doc["method"] = "se_ftns";
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = nlohmann::json::parse(kMinimal);
  doc["band"] = {3.0, 1.0};
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  doc = nlohmann::json::parse(kMinimal);
  doc.erase("sequence");
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("shipped configs parse", "[config]") {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    std::string text;
    const auto doc = read_config_document(entry.path(), &text);
    CHECK_NOTHROW(expand_runs(doc, text, entry.path().string()));
  }
}

TEST_CASE("runs expand as merge patches", "[config]") {
  auto doc = nlohmann::json::parse(kMinimal);
  doc["runs"] = nlohmann::json::array({nlohmann::json::object(), {{"plan", {{"dt", 0.1}}}}});
  const auto runs = expand_runs(doc, {}, "cfg");
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].plan.dt == 0.05);
  CHECK(runs[1].plan.dt == 0.1);
  CHECK(runs[1].plan.t_max == 6.0);
  CHECK(runs[0].spectrum_hash() == runs[1].spectrum_hash());
  doc["runs"] = nlohmann::json::array();
  CHECK_THROWS_AS(expand_runs(doc, {}, "cfg"), ConfigError);
}

TEST_CASE("cli verbs and exit codes", "[cli]") {
  const auto dir = fresh_dir("verbs");
  const auto cfg = write_file(dir / "run.json", kMinimal);
  const std::string c = " --config " + cfg.string();

  CHECK(run_cli("simulate" + c + " --out " + (dir / "sim").string()) == 0);
  REQUIRE(fs::exists(dir / "sim" / "trace.csv"));
  REQUIRE(fs::exists(dir / "sim" / "trace.json"));

  CHECK(run_cli("reconstruct " + (dir / "sim" / "trace.csv").string() + c + " --out " + (dir / "rec").string()) == 0);
  REQUIRE(fs::exists(dir / "rec" / "spectrum.csv"));
  const auto meta = nlohmann::json::parse(slurp(dir / "rec" / "spectrum.json"));
  for (const char* key : {"method", "d_omega", "omega_max", "provenance", "config_hash"}) CHECK(meta.contains(key));
  CHECK(meta["config_hash"] == load_config(cfg).hash());
  CHECK(meta["provenance"] == file_sha256(dir / "sim" / "trace.csv"));
  CHECK(nlohmann::json::parse(slurp(dir / "sim" / "trace.json"))["config_hash"] == load_config(cfg).hash());

  CHECK(run_cli("oracle" + c + " --out " + (dir / "oracle").string()) == 0);
  CHECK(fs::exists(dir / "oracle" / "oracle_chi.csv"));
  CHECK(nlohmann::json::parse(slurp(dir / "oracle" / "oracle.json"))["chi_source"] == "closed_form");

  CHECK(run_cli("simulate --config " + (dir / "nope.json").string()) == 2);
  CHECK(run_cli("simulate" + c + " --bogus") == 2);
  CHECK(run_cli("frobnicate" + c) == 2);
  CHECK(run_cli("reconstruct" + c + " --out " + (dir / "x").string()) == 2);
  CHECK(run_cli("sweep" + c + " --out " + (dir / "sw").string()) == 2);

  std::string diverge = kMinimal;
  diverge.replace(diverge.find(R"({"kind": "gaussian", "A": 1.0, "sigma": 1.0})"), 44,
                  R"({"kind": "one_over_f", "A": 1.0, "n": 1.5})");
  const auto dcfg = write_file(dir / "diverge.json", diverge);
  CHECK(run_cli("simulate --config " + dcfg.string() + " --out " + (dir / "div").string()) == 3);
}

TEST_CASE("compare refuses mismatched spectra without force", "[cli]") {
  const auto dir = fresh_dir("compare");
  auto doc = nlohmann::json::parse(kMinimal);
  doc["runs"] = nlohmann::json::array(
      {nlohmann::json::object(), {{"spectrum", {{"components", {{{"kind", "gaussian"}, {"A", 2.0}, {"sigma", 1.0}}}}}}}});
  const auto cfg = write_file(dir / "cmp.json", doc.dump(2));
  CHECK(run_cli("compare --config " + cfg.string() + " --out " + (dir / "a").string()) == 2);
  CHECK(run_cli("compare --config " + cfg.string() + " --out " + (dir / "b").string() + " --force") == 0);
  CHECK(fs::exists(dir / "b" / "compare.json"));
  CHECK(fs::exists(dir / "b" / "compare.csv"));
}

TEST_CASE("seeded runs are byte-identical", "[cli][determinism]") {
  const auto dir = fresh_dir("determinism");
  auto doc = nlohmann::json::parse(kMinimal);
  doc["plan"]["noise_sigma"] = 0.01;
  doc["reconstruction"] = {{"mitigate", false}};
  const auto cfg = write_file(dir / "noisy.json", doc.dump(2));
  const std::string c = " --config " + cfg.string() + " --seed 1234";
  REQUIRE(run_cli("simulate" + c + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run_cli("simulate" + c + " --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  CHECK(slurp(dir / "a" / "trace.json") == slurp(dir / "b" / "trace.json"));
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --seed 99 --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "trace.csv") != slurp(dir / "c" / "trace.csv"));
}
