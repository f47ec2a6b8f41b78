#include "ftns/ftns_se.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "ftns/errors.hpp"
#include "ftns/special_functions.hpp"

namespace ftns {

MArray m_from_model(const SpectrumModel& model, double d_omega, std::size_t n_max) {
  MArray m;
  m.d_omega = d_omega;
  m.M.resize(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double w = static_cast<double>(n) * d_omega;
    m.M[n] = model(w) - 0.5 * model(0.5 * w);
  }
  return m;
}

MArray extract_m(const AttenuationTrace& att, const PulseSequence& sequence, const MeasurementPlan& plan,
                 const PrepOptions& prep) {
  const auto p = prepare(att, sequence, plan, prep);
  const auto t = fourier_to_spectrum(p.ddchi, plan.dt, prep.pad_factor, prep.fast_transform);
  if (t.size() < 4) throw NumericError("echo transform has fewer than 4 frequency bins");
  MArray m;
  m.d_omega = 2.0 * t.d_omega;
  m.padded_length = t.padded_length;
  m.M.resize(t.size());
  for (std::size_t n = 0; n < t.size(); ++n) m.M[n] = 0.5 * t.S[n];
  m.M[0] = 3.0 * m.M[1] - 3.0 * m.M[2] + m.M[3];
  return m;
}

MArray extract_m(const CoherenceTrace& trace, const PrepOptions& prep) {
  if (trace.sequence.kind() != SequenceKind::spin_echo) {
    throw InputError("extract_m needs a spin_echo trace, got " + trace.sequence.name());
  }
  return extract_m(to_attenuation(trace), trace.sequence, trace.plan, prep);
}

ReconstructedSpectrum recursion_s_from_m(const MArray& m) {
  const std::size_t n = m.M.size();
  ReconstructedSpectrum out;
  out.method = Method::se_ftns;
  out.d_omega = m.d_omega;
  out.padded_length = m.padded_length;
  out.S.assign(n, 0.0);
  out.omega.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.omega[k] = static_cast<double>(k) * m.d_omega;
  out.omega_max = out.omega.empty() ? 0.0 : out.omega.back();
  if (n == 0) return out;
  out.S[0] = 2.0 * m.M[0];
  if (n > 1) out.S[1] = (4.0 / 3.0) * (m.M[1] + 0.25 * out.S[0]);
  for (std::size_t k = 2; k < n; ++k) {
    const std::size_t h = k / 2;
    out.S[k] = (k % 2 == 0) ? m.M[k] + 0.5 * out.S[h] : m.M[k] + 0.25 * (out.S[h] + out.S[h + 1]);
  }
  return out;
}

std::vector<double> m_from_recursion(const std::vector<double>& s) {
  std::vector<double> m(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::size_t h = k / 2;
    if (k == 0) {
      m[k] = 0.5 * s[0];
    } else if (k % 2 == 0) {
      m[k] = s[k] - 0.5 * s[h];
    } else {
      m[k] = s[k] - 0.25 * (s[h] + s[h + 1]);
    }
  }
  return m;
}

ReconstructedSpectrum reconstruct_se(const CoherenceTrace& trace, const PrepOptions& prep) {
  auto out = recursion_s_from_m(extract_m(trace, prep));
  out.extra["transform_omega_max"] = std::numbers::pi / trace.plan.dt;
  return out;
}

namespace {

struct Samples {
  std::vector<double> t, chi;
};

Samples usable(const AttenuationTrace& att) {
  Samples s;
  for (std::size_t k = att.origin(); k < att.size(); ++k) {
    if (att.source[k] != PointSource::measured || att.t[k] <= 0.0) continue;
    s.t.push_back(att.t[k]);
    s.chi.push_back(att.chi[k]);
  }
  if (s.t.size() < 8) throw InputError("1/f fit needs at least 8 usable samples");
  return s;
}

struct ProjectedFit {
  Eigen::Vector3d coef;
  double sse;
};

ProjectedFit project(const Samples& s, double gamma) {
  const double scale = s.t.back();
  const auto n = static_cast<Eigen::Index>(s.t.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double u = s.t[static_cast<std::size_t>(k)] / scale;
    a(k, 0) = std::pow(u, gamma);
    a(k, 1) = u;
    a(k, 2) = 1.0;
    b(k) = s.chi[static_cast<std::size_t>(k)];
  }
  Eigen::Vector3d x = a.colPivHouseholderQr().solve(b);
  const double sse = (a * x - b).squaredNorm();
  x(0) /= std::pow(scale, gamma);
  x(1) /= scale;
  return {x, sse};
}

}  // namespace

OneOverFFit fit_one_over_f(const AttenuationTrace& att) {
  const Samples s = usable(att);
  constexpr double lo = 1.0, hi = 4.0, step = 0.005;
  double best_gamma = lo + step;
  double best = std::numeric_limits<double>::infinity();
  for (double g = lo + step; g < hi - 0.5 * step; g += step) {
    const double e = project(s, g).sse;
    if (e < best) {
      best = e;
      best_gamma = g;
    }
  }
  const auto [gamma, sse] = boost::math::tools::brent_find_minima(
      [&](double g) { return project(s, g).sse; }, std::max(lo + 1e-6, best_gamma - step),
      std::min(hi - 1e-6, best_gamma + step), 52);
  if (!std::isfinite(sse)) throw NumericError("1/f fit did not converge");
  const auto p = project(s, gamma);

  OneOverFFit fit;
  fit.alpha = p.coef(0);
  fit.beta = p.coef(1);
  fit.delta = p.coef(2);
  fit.gamma = gamma;
  fit.residual = std::sqrt(p.sse / static_cast<double>(s.t.size()));
  const double chi_max = std::abs(s.chi.back());
  const double power_term = fit.alpha * std::pow(s.t.back(), gamma);
  const bool at_bound = gamma < lo + 0.02 || gamma > hi - 0.02;
  fit.present = fit.alpha > 0.0 && !at_bound && power_term > 1e-6 * std::max(chi_max, 1e-300);
  fit.exponent = gamma - 1.0;
  if (fit.present) fit.amplitude = one_over_f_amplitude(fit.alpha, gamma);
  return fit;
}

RegimeReport classify_regime(const AttenuationTrace& att) {
  const Samples s = usable(att);
  RegimeReport r;
  const std::size_t n = s.t.size();
  const std::size_t start = n - n / 4;
  double st = 0, sc = 0, stt = 0, stc = 0;
  const double m = static_cast<double>(n - start);
  for (std::size_t k = start; k < n; ++k) {
    st += s.t[k];
    sc += s.chi[k];
    stt += s.t[k] * s.t[k];
    stc += s.t[k] * s.chi[k];
  }
  const double slope = (m * stc - st * sc) / (m * stt - st * st);
  const double icpt = (sc - slope * st) / m;
  double ss = 0.0;
  for (std::size_t k = start; k < n; ++k) {
    const double e = s.chi[k] - slope * s.t[k] - icpt;
    ss += e * e;
  }
  r.tail_residual = std::sqrt(ss / m) / std::abs(s.chi.back());

  const auto fit = fit_one_over_f(att);
  double mean = 0.0;
  for (double v : s.chi) mean += v;
  mean /= static_cast<double>(n);
  double tot = 0.0;
  for (double v : s.chi) tot += (v - mean) * (v - mean);
  r.power_law_r2 = 1.0 - fit.residual * fit.residual * static_cast<double>(n) / tot;

  if (r.tail_residual < 1e-3) {
    r.regime = Regime::integrable;
  } else if (fit.present && r.power_law_r2 > 0.999) {
    r.regime = Regime::one_over_f;
  }
  return r;
}

ReconstructedSpectrum reconstruct_with_one_over_f(const CoherenceTrace& trace, const PrepOptions& prep) {
  if (trace.sequence.kind() != SequenceKind::spin_echo) {
    throw InputError("1/f reconstruction needs a spin_echo trace, got " + trace.sequence.name());
  }
  const auto att = to_attenuation(trace);
  const auto fit = fit_one_over_f(att);
  if (!fit.present) {
    auto out = reconstruct_se(trace, prep);
    out.one_over_f = fit;
    return out;
  }
  AttenuationTrace residual = att;
  for (std::size_t k = 0; k < residual.size(); ++k) {
    residual.chi[k] -= fit.alpha * std::pow(std::abs(residual.t[k]), fit.gamma);
  }
  auto out = recursion_s_from_m(extract_m(residual, trace.sequence, trace.plan, prep));
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out.omega[k] == 0.0) {
      out.S[k] = std::numeric_limits<double>::infinity();
    } else {
      out.S[k] += fit.amplitude / std::pow(out.omega[k], fit.exponent);
    }
  }
  out.one_over_f = fit;
  out.extra["divergent_at_zero"] = true;
  out.extra["transform_omega_max"] = std::numbers::pi / trace.plan.dt;
  return out;
}

}  // namespace ftns
