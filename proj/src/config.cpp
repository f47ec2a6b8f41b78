#include "ftns/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "ftns/errors.hpp"

namespace ftns {

std::string to_string(RunMethod method) {
  switch (method) {
    case RunMethod::fid_ftns:
      return "fid_ftns";
    case RunMethod::se_ftns:
      return "se_ftns";
    case RunMethod::se_ftns_1f:
      return "se_ftns_1f";
    case RunMethod::ddns_as:
      return "ddns_as";
    case RunMethod::ddns_delta:
      return "ddns_delta";
  }
  return "fid_ftns";
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("SHA-256 digest failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string RunConfig::hash() const { return sha256_hex(document.dump()); }

std::string RunConfig::spectrum_hash() const {
  return sha256_hex(document.contains("spectrum") ? document.at("spectrum").dump() : std::string("null"));
}

namespace {

class Locator {
 public:
  Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    std::string where = source_;
    if (const auto line = line_of(pointer)) where += ":" + std::to_string(*line);
    throw ConfigError(where + ": " + (pointer.empty() ? "/" : pointer) + ": " + message);
  }

 private:
  std::optional<std::size_t> line_of(const std::string& pointer) const {
    if (text_.empty()) return std::nullopt;
    std::size_t pos = 0;
    bool found = false;
    std::stringstream ss(pointer);
    std::string token;
    while (std::getline(ss, token, '/')) {
      if (token.empty() || token.find_first_not_of("0123456789") == std::string::npos) continue;
      const auto p = text_.find("\"" + token + "\"", pos);
      if (p == std::string::npos) break;
      pos = p;
      found = true;
    }
    if (!found) return std::nullopt;
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  const std::string& text_;
  std::string source_;
};

RunMethod run_method_from_string(const std::string& s, const Locator& loc) {
  if (s == "fid_ftns") return RunMethod::fid_ftns;
  if (s == "se_ftns") return RunMethod::se_ftns;
  if (s == "se_ftns_1f") return RunMethod::se_ftns_1f;
  if (s == "ddns_as") return RunMethod::ddns_as;
  if (s == "ddns_delta") return RunMethod::ddns_delta;
  loc.fail("/method", "unknown method '" + s + "'");
}

template <class T, class F>
T section(const nlohmann::json& doc, const std::string& key, const Locator& loc, F&& read) {
  if (!doc.contains(key)) loc.fail("/" + key, "missing section");
  try {
    return read(doc.at(key));
  } catch (const nlohmann::json::exception& e) {
    loc.fail("/" + key, e.what());
  } catch (const InputError& e) {
    loc.fail("/" + key, e.what());
  }
}

MitigationConfig read_mitigation(const nlohmann::json& j) {
  MitigationConfig m;
  if (j.contains("tail_window") && !j.at("tail_window").is_null()) {
    const auto& w = j.at("tail_window");
    if (!w.is_array() || w.size() != 2) throw InputError("tail_window must be a pair of fractions");
    m.tail_window = std::make_pair(w[0].get<double>(), w[1].get<double>());
  }
  m.lowpass1_cutoff = j.value("lowpass1_cutoff", m.lowpass1_cutoff);
  m.lowpass2_enabled = j.value("lowpass2_enabled", m.lowpass2_enabled);
  m.lowpass2_cutoff = j.value("lowpass2_cutoff", m.lowpass2_cutoff);
  if (j.contains("extend_to") && !j.at("extend_to").is_null()) m.extend_to = j.at("extend_to").get<double>();
  return m;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc, const std::string& text, const std::string& source) {
  const Locator loc(text, source);
  if (!doc.is_object()) loc.fail("", "config must be a JSON object");
  if (!doc.contains("schema_version")) loc.fail("/schema_version", "missing");
  if (!doc.at("schema_version").is_number_integer() || doc.at("schema_version").get<int>() != 1) {
    loc.fail("/schema_version", "unsupported schema version, expected 1");
  }
  RunConfig cfg;
  cfg.document = doc;
  cfg.source = source;
  if (!doc.contains("method") || !doc.at("method").is_string()) loc.fail("/method", "missing or not a string");
  cfg.method = run_method_from_string(doc.at("method").get<std::string>(), loc);

  if (doc.contains("spectrum")) {
    cfg.spectrum = section<SpectrumModel>(doc, "spectrum", loc, [](const nlohmann::json& j) {
      return j.get<SpectrumModel>();
    });
  }
  cfg.sequence = section<PulseSequence>(doc, "sequence", loc, [](const nlohmann::json& j) {
    return j.get<PulseSequence>();
  });
  const bool ddns = cfg.method == RunMethod::ddns_as || cfg.method == RunMethod::ddns_delta;
  if (doc.contains("plan") || !ddns) {
    cfg.plan = section<MeasurementPlan>(doc, "plan", loc, [](const nlohmann::json& j) {
      auto p = j.get<MeasurementPlan>();
      p.validate();
      return p;
    });
  }
  if (doc.contains("mitigation")) {
    cfg.prep.mitigation = section<MitigationConfig>(doc, "mitigation", loc, read_mitigation);
  }
  if (doc.contains("reconstruction")) {
    section<int>(doc, "reconstruction", loc, [&](const nlohmann::json& j) {
      cfg.prep.pad_factor = j.value("pad_factor", 8);
      if (cfg.prep.pad_factor < 1) throw InputError("pad_factor must be a positive integer");
      cfg.prep.epsilon = j.value("epsilon", -1.0);
      cfg.prep.fast_transform = j.value("fast_transform", false);
      if (j.contains("mitigate") && !j.at("mitigate").is_null()) cfg.prep.mitigate = j.at("mitigate").get<bool>();
      return 0;
    });
  }
  if (doc.contains("ddns")) {
    cfg.ddns = section<DDNSPlan>(doc, "ddns", loc, [](const nlohmann::json& j) {
      auto p = j.get<DDNSPlan>();
      p.validate();
      return p;
    });
  }
  if (doc.contains("band")) {
    const auto& b = doc.at("band");
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number() || !(b[0] < b[1])) {
      loc.fail("/band", "band must be [lo, hi] with lo < hi");
    }
    cfg.band = std::make_pair(b[0].get<double>(), b[1].get<double>());
  }
  if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();

  const auto kind = cfg.sequence.kind();
  switch (cfg.method) {
    case RunMethod::fid_ftns:
      if (kind != SequenceKind::fid) loc.fail("/sequence", "fid_ftns needs the fid sequence");
      break;
    case RunMethod::se_ftns:
    case RunMethod::se_ftns_1f:
      if (kind != SequenceKind::spin_echo) loc.fail("/sequence", to_string(cfg.method) + " needs spin_echo");
      break;
    case RunMethod::ddns_as:
    case RunMethod::ddns_delta:
      if (kind != SequenceKind::cpmg) loc.fail("/sequence", to_string(cfg.method) + " needs cpmg");
      if (!cfg.ddns) loc.fail("/ddns", "ddns methods need a ddns section");
      if (cfg.ddns->n_pulses != cfg.sequence.n_pulses()) loc.fail("/ddns/n_pulses", "must match sequence n_pulses");
      break;
  }
  return cfg;
}

nlohmann::json read_config_document(const std::filesystem::path& path, std::string* text) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string body = ss.str();
  if (text) *text = body;
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, body.size());
    const auto line = 1 + std::count(body.begin(), body.begin() + static_cast<long>(upto), '\n');
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  const auto doc = read_config_document(path, &text);
  return parse_config(doc, text, path.string());
}

RunConfig with_seed(const RunConfig& cfg, std::uint64_t seed) {
  if (!cfg.document.contains("plan")) return cfg;
  auto doc = cfg.document;
  doc["plan"]["seed"] = seed;
  return parse_config(doc, {}, cfg.source);
}

}  // namespace ftns
