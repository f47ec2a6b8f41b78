#include "ftns/forward.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ftns/errors.hpp"

namespace ftns {

namespace {

constexpr double kPi = std::numbers::pi;

void check_convergent(const SpectrumModel& model, const PulseSequence& sequence) {
  const int p = sequence.low_frequency_order();
  for (const auto& c : model.components()) {
    if (const auto* f = std::get_if<OneOverF>(&c)) {
      if (f->exponent >= 2.0 * p + 1.0) {
        throw DivergentIntegral("attenuation integral diverges at omega = 0 for 1/f exponent " +
                                std::to_string(f->exponent) + " under " + sequence.name());
      }
    }
  }
}

SpectrumModel varying_part(const SpectrumModel& model) {
  std::vector<SpectrumComponent> comps;
  for (const auto& c : model.components()) {
    if (!std::holds_alternative<Constant>(c)) comps.push_back(c);
  }
  return SpectrumModel(std::move(comps), model.symmetrize());
}

template <class F>
double gk(F&& f, double a, double b, unsigned depth = 10) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, depth, 1e-13, &err);
}

// Period in omega of w^2 F(w, t).
double filter_period(const PulseSequence& sequence, double t) {
  switch (sequence.kind()) {
    case SequenceKind::fid:
      return 2.0 * kPi / t;
    case SequenceKind::spin_echo:
      return 4.0 * kPi / t;
    case SequenceKind::cpmg:
      return 4.0 * kPi * sequence.n_pulses() / t;
  }
  return 4.0 * kPi / t;
}

// Mean of w^2 F(w, t) over one period.
double filter_mean(const PulseSequence& sequence, double t) {
  const double p = filter_period(sequence, t);
  constexpr int n = 4096;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = p * (i + 0.5) / n + p;
    sum += w * w * filter_value(sequence, w, t);
  }
  return sum / n;
}

double frequency_route(const SpectrumModel& model, const PulseSequence& sequence, double t) {
  const SpectrumModel s = varying_part(model);
  const double white = model.white_level();
  if (s.components().empty()) return 0.5 * white * t;

  // (1/4pi) int_R S F dw = (1/2pi) int_0^inf Seven F dw
  auto even_part = [&](double w) { return s.is_even() ? s(w) : 0.5 * (s(w) + s(-w)); };
  auto integrand = [&](double w) {
    const double v = even_part(w) * filter_value(sequence, w, t) / (2.0 * kPi);
    return std::isfinite(v) ? v : 0.0;
  };

  std::vector<double> marks;
  double feature_end = 0.0;
  for (const auto& f : s.features()) {
    if (f.width <= 0.0) continue;
    for (int k = -8; k <= 8; ++k) {
      const double m = f.center + k * f.width;
      if (m > 0.0) marks.push_back(m);
    }
    feature_end = std::max(feature_end, f.center + 10.0 * f.width);
  }
  std::sort(marks.begin(), marks.end());

  const double h = kPi / t;
  const double tail_k = filter_tail_constant(sequence);
  const double period = filter_period(sequence, t);
  double lo = 0.0;
  double total = 0.0;
  std::size_t next_mark = 0;
  bool first = true;
  while (true) {
    const bool tail = lo > feature_end;
    double hi = lo + h;
    while (next_mark < marks.size() && marks[next_mark] <= lo) ++next_mark;
    if (next_mark < marks.size() && marks[next_mark] < hi) hi = marks[next_mark];
    if (first && s.has_one_over_f()) {
      boost::math::quadrature::tanh_sinh<double> ts;
      total += ts.integrate(integrand, lo, hi);
    } else {
      total += gk(integrand, lo, hi, tail ? 2 : 10);
    }
    first = false;
    lo = hi;
    if (lo > feature_end) {
      const double tol = 1e-12 * std::abs(total) + 1e-16;
      const double level = even_part(lo) * tail_k / (2.0 * kPi);
      if (level / lo <= tol) break;
      // Past this point the oscillating part of the filter contributes below tol; the rest
      // is the smooth tail under the period-averaged filter.
      if (level * period / (lo * lo) <= tol) {
        const double mean = filter_mean(sequence, t);
        auto smooth = [&](double w) { return even_part(w) * mean / (w * w) / (2.0 * kPi); };
        boost::math::quadrature::exp_sinh<double> es;
        total += es.integrate(smooth, lo, std::numeric_limits<double>::infinity());
        break;
      }
    }
    if (lo > 1e9) throw NumericError("frequency quadrature failed to reach its tail tolerance");
  }
  return total + 0.5 * white * t;
}

// Breakpoints of the switching-function autocorrelation Q(lag) and its value.
struct Autocorrelation {
  std::vector<Segment> segs;

  double operator()(double lag) const {
    double q = 0.0;
    for (const auto& a : segs) {
      for (const auto& b : segs) {
        const double lo = std::max(a.begin, b.begin - lag);
        const double hi = std::min(a.end, b.end - lag);
        if (hi > lo) q += a.sign * b.sign * (hi - lo);
      }
    }
    return q;
  }

  std::vector<double> kinks(double t) const {
    std::vector<double> bounds;
    for (const auto& s : segs) bounds.push_back(s.begin);
    bounds.push_back(t);
    std::vector<double> k;
    for (double a : bounds) {
      for (double b : bounds) {
        if (b - a >= 0.0) k.push_back(b - a);
      }
    }
    std::sort(k.begin(), k.end());
    std::vector<double> out;
    for (double v : k) {
      if (out.empty() || v - out.back() > 1e-12 * t) out.push_back(v);
    }
    out.back() = t;
    return out;
  }
};

double time_route(const SpectrumModel& model, const PulseSequence& sequence, double t) {
  if (model.has_one_over_f()) throw DomainError("time-domain route needs an integrable spectrum");
  double h = t;
  for (const auto& f : model.features()) {
    if (f.center != 0.0) h = std::min(h, kPi / f.center);
    if (f.width > 0.0) h = std::min(h, 2.0 / f.width);
  }
  const Autocorrelation q{sequence.segments(t)};
  const auto kinks = q.kinks(t);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < kinks.size(); ++i) {
    const double a = kinks[i], b = kinks[i + 1];
    const double qa = q(a), qb = q(b);
    if (qa == 0.0 && qb == 0.0) continue;
    const double slope = (qb - qa) / (b - a);
    auto integrand = [&](double lag) { return model.correlation(lag) * (qa + slope * (lag - a)); };
    const int chunks = static_cast<int>(std::ceil((b - a) / h));
    for (int c = 0; c < chunks; ++c) {
      const double lo = a + (b - a) * c / chunks;
      const double hi = (c + 1 == chunks) ? b : a + (b - a) * (c + 1) / chunks;
      total += gk(integrand, lo, hi);
    }
  }
  return total + 0.5 * model.white_level() * t;
}

}  // namespace

double attenuation(const SpectrumModel& model, const PulseSequence& sequence, double t, Route route) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("attenuation requires finite t >= 0");
  check_convergent(model, sequence);
  if (t == 0.0) return 0.0;
  switch (route) {
    case Route::frequency:
      return frequency_route(model, sequence, t);
    case Route::time:
      return time_route(model, sequence, t);
    case Route::automatic:
      if (auto c = closed_form_chi(model, sequence, t)) return *c;
      if (!model.has_one_over_f()) return time_route(model, sequence, t);
      return frequency_route(model, sequence, t);
  }
  return 0.0;
}

std::vector<double> attenuation(const SpectrumModel& model, const PulseSequence& sequence,
                                const std::vector<double>& times, Route route) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(attenuation(model, sequence, t, route));
  return out;
}

void MeasurementPlan::validate() const {
  if (!(dt > 0.0 && dt <= t_max)) throw InputError("plan: need 0 < dt <= t_max");
  if (!(tau_min >= 0.0)) throw InputError("plan: tau_min must be >= 0");
  if (!(coherence_floor >= 0.0 && coherence_floor < 1.0)) {
    throw InputError("plan: coherence_floor must lie in [0, 1)");
  }
  if (!(noise_sigma >= 0.0)) throw InputError("plan: noise_sigma must be >= 0");
}

std::size_t MeasurementPlan::grid_size() const {
  return static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
}

std::string to_string(SampleMask mask) {
  switch (mask) {
    case SampleMask::measured:
      return "measured";
    case SampleMask::withheld_below_tau_min:
      return "withheld_below_tau_min";
    case SampleMask::truncated_by_floor:
      return "truncated_by_floor";
  }
  return "measured";
}

SampleMask sample_mask_from_string(const std::string& s) {
  if (s == "measured") return SampleMask::measured;
  if (s == "withheld_below_tau_min") return SampleMask::withheld_below_tau_min;
  if (s == "truncated_by_floor") return SampleMask::truncated_by_floor;
  throw InputError("unknown sample mask '" + s + "'");
}

std::size_t CoherenceTrace::retained() const {
  const auto it = std::find(mask.begin(), mask.end(), SampleMask::truncated_by_floor);
  return static_cast<std::size_t>(it - mask.begin());
}

CoherenceTrace simulate_trace(const SpectrumModel& model, const PulseSequence& sequence,
                              const MeasurementPlan& plan) {
  plan.validate();
  const std::size_t n = plan.grid_size();
  CoherenceTrace tr;
  tr.plan = plan;
  tr.sequence = sequence;
  tr.t.resize(n);
  for (std::size_t k = 0; k < n; ++k) tr.t[k] = static_cast<double>(k) * plan.dt;
  const auto chi = attenuation(model, sequence, tr.t);
  tr.C.resize(n);
  tr.mask.assign(n, SampleMask::measured);
  bool below = false;
  for (std::size_t k = 0; k < n; ++k) {
    tr.C[k] = std::exp(-chi[k]);
    if (k > 0 && tr.C[k] <= plan.coherence_floor) below = true;
    if (below) {
      tr.mask[k] = SampleMask::truncated_by_floor;
    } else if (tr.t[k] > 0.0 && tr.t[k] < plan.tau_min) {
      tr.mask[k] = SampleMask::withheld_below_tau_min;
    }
  }
  tr.C[0] = 1.0;
  if (plan.noise_sigma > 0.0) {
    const std::size_t kept = std::max<std::size_t>(tr.retained(), 1);
    const auto [lo, hi] = std::minmax_element(tr.C.begin(), tr.C.begin() + static_cast<long>(kept));
    const double std_dev = plan.noise_sigma * (*hi - *lo);
    std::mt19937_64 rng(plan.seed);
    std::normal_distribution<double> noise(0.0, std_dev);
    for (std::size_t k = 1; k < n; ++k) {
      tr.C[k] = std::clamp(tr.C[k] + noise(rng), 1e-12, 1.0);
    }
  }
  return tr;
}

double t2_from_trace(const CoherenceTrace& trace, T2Definition definition) {
  const std::size_t n = trace.retained();
  if (definition == T2Definition::e_folding) {
    const double target = std::exp(-1.0);
    for (std::size_t k = 1; k < n; ++k) {
      if (trace.C[k] <= target) {
        const double c0 = trace.C[k - 1], c1 = trace.C[k];
        const double f = (c0 - target) / (c0 - c1);
        return trace.t[k - 1] + f * (trace.t[k] - trace.t[k - 1]);
      }
    }
    throw NumericError("coherence never falls below 1/e; no e-folding time");
  }
  const std::size_t start = n - n / 4;
  if (n / 4 < 10) throw NumericError("trace too short for a tail slope fit");
  double st = 0, sc = 0, stt = 0, stc = 0;
  const double m = static_cast<double>(n - start);
  for (std::size_t k = start; k < n; ++k) {
    const double x = trace.t[k], y = -std::log(trace.C[k]);
    st += x;
    sc += y;
    stt += x * x;
    stc += x * y;
  }
  const double slope = (m * stc - st * sc) / (m * stt - st * st);
  if (!(slope > 0.0)) throw NumericError("tail slope of chi is not positive");
  return 1.0 / slope;
}

void to_json(nlohmann::json& j, const MeasurementPlan& plan) {
  j = nlohmann::json{{"dt", plan.dt},
                     {"t_max", plan.t_max},
                     {"tau_min", plan.tau_min},
                     {"coherence_floor", plan.coherence_floor},
                     {"noise_sigma", plan.noise_sigma},
                     {"seed", plan.seed}};
}

void from_json(const nlohmann::json& j, MeasurementPlan& plan) {
  plan = MeasurementPlan{};
  plan.dt = j.at("dt").get<double>();
  plan.t_max = j.at("t_max").get<double>();
  plan.tau_min = j.value("tau_min", 0.0);
  plan.coherence_floor = j.value("coherence_floor", 0.005);
  plan.noise_sigma = j.value("noise_sigma", 0.0);
  plan.seed = j.value("seed", std::uint64_t{0});
}

void to_json(nlohmann::json& j, const PulseSequence& sequence) {
  j = nlohmann::json{{"kind", sequence.name()}, {"n_pulses", sequence.n_pulses()}};
}

void from_json(const nlohmann::json& j, PulseSequence& sequence) {
  sequence = PulseSequence::parse(j.at("kind").get<std::string>(), j.value("n_pulses", 0));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::filesystem::path sidecar_of(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw InputError(where + ": cannot parse number '" + s + "'");
  return v;
}

}  // namespace

void write_trace(const CoherenceTrace& trace, const std::filesystem::path& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw InputError("cannot write " + csv_path.string());
  csv << "t,C,mask\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    csv << format_number(trace.t[k]) << ',' << format_number(trace.C[k]) << ',' << to_string(trace.mask[k])
        << '\n';
  }
  nlohmann::json side{{"plan", trace.plan},
                      {"sequence", trace.sequence},
                      {"seed", trace.plan.seed},
                      {"config_hash", trace.config_hash}};
  std::ofstream js(sidecar_of(csv_path));
  js << side.dump(2) << '\n';
}

CoherenceTrace read_trace(const std::filesystem::path& csv_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw InputError("cannot open trace " + csv_path.string());
  CoherenceTrace tr;
  std::string line;
  if (!std::getline(csv, line) || line != "t,C,mask") {
    throw InputError(csv_path.string() + " row 1: expected header 't,C,mask'");
  }
  std::size_t row = 1;
  while (std::getline(csv, line)) {
    ++row;
    if (line.empty()) continue;
    const std::string where = csv_path.string() + " row " + std::to_string(row);
    std::stringstream ss(line);
    std::string a, b, c, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
        std::getline(ss, extra, ',')) {
      throw InputError(where + ": expected 3 fields");
    }
    tr.t.push_back(parse_double(a, where));
    tr.C.push_back(parse_double(b, where));
    try {
      tr.mask.push_back(sample_mask_from_string(c));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  std::ifstream js(sidecar_of(csv_path));
  if (!js) throw InputError("missing trace sidecar " + sidecar_of(csv_path).string());
  const auto side = nlohmann::json::parse(js);
  tr.plan = side.at("plan").get<MeasurementPlan>();
  tr.sequence = side.at("sequence").get<PulseSequence>();
  tr.config_hash = side.value("config_hash", std::string{});
  return tr;
}

}  // namespace ftns
