#include "ftns/ddns.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ftns/errors.hpp"
#include "ftns/forward.hpp"

namespace ftns {

namespace {

constexpr double kPi = std::numbers::pi;

// c_k = (1/T) int_0^T f(s) e^{-i k w0 s} ds over one period T = 2 tau, here tau = 1.
std::complex<double> fourier_coefficient(int k) {
  struct Piece {
    double a, b;
    int sign;
  };
  constexpr Piece period[] = {{0.0, 0.5, 1}, {0.5, 1.5, -1}, {1.5, 2.0, 1}};
  const double w = k * kPi;
  std::complex<double> c = 0.0;
  for (const auto& p : period) {
    if (w == 0.0) {
      c += p.sign * (p.b - p.a);
    } else {
      c += static_cast<double>(p.sign) * (std::polar(1.0, -w * p.a) - std::polar(1.0, -w * p.b)) /
           std::complex<double>(0.0, w);
    }
  }
  return 0.5 * c;
}

}  // namespace

double CombCoefficients::total() const {
  double s = 0.0;
  for (double v : A_sq) s += v;
  return s;
}

CombCoefficients comb_coefficients(int n_pulses, int k_c) {
  if (n_pulses < 2 || n_pulses % 2 != 0) {
    throw InputError("comb baseline needs an even CPMG pulse count >= 2, got " + std::to_string(n_pulses));
  }
  if (k_c < 1) throw InputError("harmonic cutoff k_c must be >= 1");
  CombCoefficients c;
  c.n_pulses = n_pulses;
  c.k_c = k_c;
  c.A_sq.resize(static_cast<std::size_t>(k_c));
  for (int k = 1; k <= k_c; ++k) c.A_sq[static_cast<std::size_t>(k - 1)] = std::norm(fourier_coefficient(k));
  return c;
}

void DDNSPlan::validate() const {
  comb_coefficients(n_pulses, k_c);
  if (!(tau_min > 0.0 && tau_max > tau_min)) throw InputError("ddns: need 0 < tau_min < tau_max");
  if (n_probes < 2) throw InputError("ddns: need at least 2 probes");
  if (!(coherence_floor >= 0.0 && coherence_floor < 1.0)) throw InputError("ddns: floor must lie in [0, 1)");
}

std::vector<double> DDNSPlan::probe_frequencies() const {
  validate();
  std::vector<double> w(n_probes);
  const double ratio = std::log(tau_max / tau_min);
  for (std::size_t i = 0; i < n_probes; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n_probes - 1);
    const double tau = i + 1 == n_probes ? tau_min : tau_max * std::exp(-ratio * f);
    w[i] = i == 0 ? omega_min() : kPi / tau;
  }
  return w;
}

double DDNSPlan::omega_min() const { return kPi / tau_max; }
double DDNSPlan::omega_max() const { return kPi / tau_min; }

void to_json(nlohmann::json& j, const DDNSPlan& plan) {
  j = nlohmann::json{{"n_pulses", plan.n_pulses},   {"k_c", plan.k_c},
                     {"tau_min", plan.tau_min},     {"tau_max", plan.tau_max},
                     {"n_probes", plan.n_probes},   {"coherence_floor", plan.coherence_floor},
                     {"densify", plan.densify}};
}

void from_json(const nlohmann::json& j, DDNSPlan& plan) {
  plan = DDNSPlan{};
  plan.n_pulses = j.value("n_pulses", 32);
  plan.k_c = j.value("k_c", 41);
  plan.tau_min = j.at("tau_min").get<double>();
  plan.tau_max = j.at("tau_max").get<double>();
  plan.n_probes = j.value("n_probes", std::size_t{200});
  plan.coherence_floor = j.value("coherence_floor", 0.0);
  plan.densify = j.value("densify", false);
}

AttenuationOracle model_oracle(const SpectrumModel& model) {
  return [model](const PulseSequence& seq, double t) { return attenuation(model, seq, t); };
}

Eigen::MatrixXd comb_matrix(const CombCoefficients& comb, const std::vector<double>& probes) {
  const auto n = static_cast<Eigen::Index>(probes.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 1; k <= comb.k_c; ++k) {
      const double weight = comb[k];
      if (weight < 1e-20) continue;
      const double w = k * probes[static_cast<std::size_t>(i)];
      if (w >= probes.back()) {
        a(i, n - 1) += weight;
        continue;
      }
      const auto it = std::upper_bound(probes.begin(), probes.end(), w);
      const auto j = static_cast<Eigen::Index>(it - probes.begin());
      const double f = (w - probes[static_cast<std::size_t>(j - 1)]) /
                       (probes[static_cast<std::size_t>(j)] - probes[static_cast<std::size_t>(j - 1)]);
      a(i, j - 1) += weight * (1.0 - f);
      a(i, j) += weight * f;
    }
  }
  return a;
}

ReconstructedSpectrum invert_comb_rates(const DDNSPlan& plan, const std::vector<double>& probes,
                                        const std::vector<double>& rates) {
  const auto comb = comb_coefficients(plan.n_pulses, plan.k_c);
  const Eigen::MatrixXd a = comb_matrix(comb, probes);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rates.data(), static_cast<Eigen::Index>(rates.size()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const Eigen::VectorXd x = svd.solve(b);
  const auto& sv = svd.singularValues();
  ReconstructedSpectrum out;
  out.method = Method::ddns_as;
  out.omega = probes;
  out.S.assign(x.data(), x.data() + x.size());
  out.omega_max = plan.omega_max();
  out.d_omega = probes.size() > 1 ? probes[1] - probes[0] : 0.0;
  const double smin = sv(sv.size() - 1);
  out.extra["condition_number"] = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  out.extra["rank"] = svd.rank();
  if (svd.rank() < a.cols()) out.extra["warning"] = "ill-conditioned comb system; truncated singular values";
  return out;
}

std::vector<double> synthesize_comb_rates(const DDNSPlan& plan, const std::vector<double>& planted) {
  const auto probes = plan.probe_frequencies();
  if (planted.size() != probes.size()) throw InputError("planted spectrum must have one value per probe");
  const auto a = comb_matrix(comb_coefficients(plan.n_pulses, plan.k_c), probes);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(planted.data(), static_cast<Eigen::Index>(planted.size()));
  const Eigen::VectorXd r = a * x;
  return {r.data(), r.data() + r.size()};
}

double single_delta_probe(const AttenuationOracle& oracle, const DDNSPlan& plan, double omega_probe) {
  if (omega_probe < plan.omega_min() * (1.0 - 1e-12) || omega_probe > plan.omega_max() * (1.0 + 1e-12)) {
    throw InputError("probe frequency " + format_number(omega_probe) + " outside the band [pi/tau_max, pi/tau_min]");
  }
  const auto comb = comb_coefficients(plan.n_pulses, 1);
  const double tau = kPi / omega_probe;
  const double t = plan.n_pulses * tau;
  return oracle(PulseSequence::cpmg(plan.n_pulses), t) / (t * comb[1]);
}

ReconstructedSpectrum run_single_delta(const AttenuationOracle& oracle, const DDNSPlan& plan) {
  ReconstructedSpectrum out;
  out.method = Method::ddns_delta;
  out.omega_max = plan.omega_max();
  const auto seq = PulseSequence::cpmg(plan.n_pulses);
  for (double w : plan.probe_frequencies()) {
    const double t = plan.n_pulses * kPi / w;
    const double chi = oracle(seq, t);
    if (std::exp(-chi) < plan.coherence_floor) continue;
    out.omega.push_back(w);
    out.S.push_back(single_delta_probe(oracle, plan, w));
  }
  if (out.omega.size() > 1) out.d_omega = out.omega[1] - out.omega[0];
  return out;
}

ReconstructedSpectrum run_alvarez_suter(const AttenuationOracle& oracle, const DDNSPlan& plan) {
  const auto all = plan.probe_frequencies();
  const auto seq = PulseSequence::cpmg(plan.n_pulses);
  std::vector<double> probes, rates;
  for (double w : all) {
    const double t = plan.n_pulses * kPi / w;
    const double chi = oracle(seq, t);
    if (std::exp(-chi) < plan.coherence_floor) continue;
    probes.push_back(w);
    rates.push_back(chi / t);
  }
  if (probes.size() < 2) throw NumericError("fewer than 2 delays keep the coherence above the floor");
  auto out = invert_comb_rates(plan, probes, rates);
  out.extra["dropped_rungs"] = all.size() - probes.size();
  if (plan.densify) {
    std::vector<std::pair<double, double>> merged;
    for (std::size_t i = 0; i < out.size(); ++i) merged.emplace_back(out.omega[i], out.S[i]);
    for (std::size_t i = 0; i + 1 < probes.size(); ++i) {
      const double w = std::sqrt(probes[i] * probes[i + 1]);
      merged.emplace_back(w, single_delta_probe(oracle, plan, w));
    }
    std::sort(merged.begin(), merged.end());
    out.omega.clear();
    out.S.clear();
    for (const auto& [w, s] : merged) {
      out.omega.push_back(w);
      out.S.push_back(s);
    }
    out.extra["densified"] = true;
  }
  return out;
}

}  // namespace ftns
