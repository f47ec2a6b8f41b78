#include "ftns/ftns_fid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "ftns/errors.hpp"

namespace ftns {

std::string to_string(Method method) {
  switch (method) {
    case Method::fid_ftns:
      return "FID_FTNS";
    case Method::se_ftns:
      return "SE_FTNS";
    case Method::ddns_as:
      return "DDNS_AS";
    case Method::ddns_delta:
      return "DDNS_DELTA";
  }
  return "FID_FTNS";
}

Method method_from_string(const std::string& s) {
  if (s == "FID_FTNS") return Method::fid_ftns;
  if (s == "SE_FTNS") return Method::se_ftns;
  if (s == "DDNS_AS") return Method::ddns_as;
  if (s == "DDNS_DELTA") return Method::ddns_delta;
  throw InputError("unknown method tag '" + s + "'");
}

void to_json(nlohmann::json& j, const OneOverFFit& fit) {
  j = nlohmann::json{{"alpha", fit.alpha}, {"beta", fit.beta}, {"delta", fit.delta},
                     {"gamma", fit.gamma}, {"A", fit.amplitude}, {"n", fit.exponent},
                     {"residual", fit.residual}, {"present", fit.present}};
}

std::optional<double> ReconstructedSpectrum::at(double w) const {
  if (omega.empty() || w < omega.front() || w > omega.back()) return std::nullopt;
  const auto it = std::upper_bound(omega.begin(), omega.end(), w);
  if (it == omega.end()) return S.back();
  const std::size_t k = static_cast<std::size_t>(it - omega.begin());
  if (k == 0) return S.front();
  const double f = (w - omega[k - 1]) / (omega[k] - omega[k - 1]);
  return S[k - 1] + f * (S[k] - S[k - 1]);
}

namespace {

std::vector<double> gradient(const std::vector<double>& y, double dt) {
  const std::size_t n = y.size();
  std::vector<double> d(n);
  d[0] = (y[1] - y[0]) / dt;
  d[n - 1] = (y[n - 1] - y[n - 2]) / dt;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (2.0 * dt);
  return d;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<double> second_derivative(const AttenuationTrace& input, std::optional<double> smooth_cutoff) {
  const AttenuationTrace att = mirror(input);
  const std::size_t n = att.size();
  if (n < 5) throw InputError("second derivative needs at least 5 samples");
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(att.t[k] - att.t[k - 1] - att.dt) > 1e-9 * std::max(att.dt, std::abs(att.t[k]))) {
      throw InputError("second derivative needs a uniform grid");
    }
  }
  auto d1 = gradient(att.chi, att.dt);
  if (att.tail) {
    const std::size_t o = att.origin();
    std::size_t seam = n;
    for (std::size_t k = o; k < n; ++k) {
      if (att.source[k] == PointSource::linear_fit) {
        seam = k;
        break;
      }
    }
    if (seam < n && seam > o) {
      for (std::size_t k : {seam - 1, seam}) {
        d1[k] = att.tail->slope;
        d1[2 * o - k] = -att.tail->slope;
      }
    }
    if (smooth_cutoff) d1 = lowpass(d1, *smooth_cutoff);
  }
  return gradient(d1, att.dt);
}

ReconstructedSpectrum fourier_to_spectrum(const std::vector<double>& ddchi, double dt, int pad_factor, bool fast) {
  if (pad_factor < 1) throw InputError("pad_factor must be a positive integer");
  if (ddchi.size() % 2 == 0) throw InputError("transform input must be a mirrored (odd-length) trace");
  const std::size_t o = (ddchi.size() - 1) / 2;
  const std::size_t n = o + 1;
  std::size_t m = static_cast<std::size_t>(pad_factor) * n;
  if (m % 2) ++m;
  const std::size_t bins = m / 2 + 1;

  ReconstructedSpectrum out;
  out.padded_length = static_cast<double>(m) * dt;
  out.d_omega = 2.0 * std::numbers::pi / out.padded_length;
  out.omega_max = std::numbers::pi / dt;
  out.omega.resize(bins);
  out.S.assign(bins, 0.0);
  for (std::size_t j = 0; j < bins; ++j) {
    out.omega[j] = out.omega_max * (2.0 * static_cast<double>(j) / static_cast<double>(m));
  }
  const double* f = ddchi.data() + o;

  if (fast) {
    std::vector<double> in(m, 0.0);
    std::copy(f, f + n, in.begin());
    fftw_complex* spec = fftw_alloc_complex(bins);
    fftw_plan plan;
    {
      std::lock_guard lock(fftw_planner_mutex());
      plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), spec, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    for (std::size_t j = 0; j < bins; ++j) out.S[j] = dt * (2.0 * spec[j][0] - f[0]);
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(spec);
  } else {
    std::vector<double> table(m);
    for (std::size_t k = 0; k < m; ++k) {
      table[k] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m));
    }
    for (std::size_t j = 0; j < bins; ++j) {
      double acc = 0.0;
      std::size_t phase = 0;
      for (std::size_t k = 1; k < n; ++k) {
        phase += j;
        if (phase >= m) phase -= m;
        acc += f[k] * table[phase];
      }
      out.S[j] = dt * (f[0] + 2.0 * acc);
    }
  }

  double peak = 0.0;
  for (double v : out.S) peak = std::max(peak, std::abs(v));
  double asym = 0.0;
  for (std::size_t k = 1; k < n; ++k) asym += std::abs(ddchi[o + k] - ddchi[o - k]);
  asym *= dt;
  if (asym > 1e-10 * peak) {
    double worst = 0.0;
    for (std::size_t j = 0; j < bins; ++j) {
      double acc = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        acc += (ddchi[o + k] - ddchi[o - k]) * std::sin(out.omega[j] * static_cast<double>(k) * dt);
      }
      worst = std::max(worst, std::abs(dt * acc));
    }
    if (worst > 1e-10 * peak) {
      throw NumericError("imaginary residue " + std::to_string(worst) + " exceeds 1e-10 of the spectrum peak");
    }
  }
  return out;
}

PreparedTrace prepare(const AttenuationTrace& att, const PulseSequence& sequence, const MeasurementPlan& plan,
                      const PrepOptions& prep) {
  PreparedTrace out;
  AttenuationTrace work = att;
  if (plan.tau_min > 0.0) {
    out.early = fit_early_time(work, sequence, plan.tau_min, prep.epsilon);
    work = fill_early_time(work, *out.early);
  }
  if (prep.mitigate.value_or(plan.noise_sigma > 0.0)) {
    out.att = mitigate(work, prep.mitigation);
    const auto smooth = prep.mitigation.lowpass2_enabled ? std::optional(prep.mitigation.lowpass2_cutoff)
                                                         : std::nullopt;
    out.ddchi = second_derivative(out.att, smooth);
  } else {
    out.att = mirror(work);
    out.ddchi = second_derivative(out.att);
  }
  return out;
}

ReconstructedSpectrum reconstruct_fid(const CoherenceTrace& trace, const PrepOptions& prep) {
  if (trace.sequence.kind() != SequenceKind::fid) {
    throw InputError("reconstruct_fid needs a fid trace, got " + trace.sequence.name());
  }
  const auto p = prepare(to_attenuation(trace), trace.sequence, trace.plan, prep);
  auto spec = fourier_to_spectrum(p.ddchi, trace.plan.dt, prep.pad_factor, prep.fast_transform);
  spec.method = Method::fid_ftns;
  if (p.early) {
    spec.extra["early_fit"] = {{"kappa0", p.early->kappa0}, {"kappa1", p.early->kappa1}, {"kappa2", p.early->kappa2}};
  }
  if (p.att.tail) spec.extra["tail_slope"] = p.att.tail->slope;
  return spec;
}

void write_spectrum(const ReconstructedSpectrum& spec, const std::filesystem::path& csv_path,
                    const nlohmann::json& metadata) {
  std::ofstream csv(csv_path);
  if (!csv) throw InputError("cannot write " + csv_path.string());
  csv << "omega,S\n";
  for (std::size_t k = 0; k < spec.size(); ++k) {
    csv << format_number(spec.omega[k]) << ',' << format_number(spec.S[k]) << '\n';
  }
  nlohmann::json meta = metadata;
  meta["method"] = to_string(spec.method);
  meta["d_omega"] = spec.d_omega;
  meta["omega_max"] = spec.omega_max;
  meta["padded_length"] = spec.padded_length;
  meta["d_omega_ordinary"] = spec.d_omega / (2.0 * std::numbers::pi);
  if (spec.one_over_f) meta["one_over_f"] = *spec.one_over_f;
  for (const auto& [k, v] : spec.extra.items()) meta[k] = v;
  auto side = csv_path;
  side.replace_extension(".json");
  std::ofstream js(side);
  js << meta.dump(2) << '\n';
}

}  // namespace ftns
