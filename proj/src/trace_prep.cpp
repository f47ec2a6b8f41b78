#include "ftns/trace_prep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

#include "ftns/errors.hpp"

namespace ftns {

std::string to_string(PointSource source) {
  switch (source) {
    case PointSource::measured:
      return "measured";
    case PointSource::early_fit:
      return "early_fit";
    case PointSource::linear_fit:
      return "linear_fit";
    case PointSource::zero_pad:
      return "zero_pad";
    case PointSource::withheld:
      return "withheld";
  }
  return "measured";
}

AttenuationTrace to_attenuation(const CoherenceTrace& trace) {
  const std::size_t n = trace.retained();
  if (n < 2) throw InputError("trace has fewer than 2 retained samples");
  AttenuationTrace att;
  att.dt = trace.plan.dt;
  att.t.assign(trace.t.begin(), trace.t.begin() + static_cast<long>(n));
  att.chi.resize(n);
  att.source.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = trace.C[k];
    if (!(c > 0.0) || c > 1.0 + 1e-12) {
      throw InputError("coherence at t = " + format_number(trace.t[k]) + " is outside (0, 1]");
    }
    att.chi[k] = -std::log(c);
    att.source[k] = trace.mask[k] == SampleMask::withheld_below_tau_min ? PointSource::withheld
                                                                        : PointSource::measured;
  }
  return att;
}

AttenuationTrace mirror(const AttenuationTrace& att) {
  if (att.mirrored) return att;
  const std::size_t n = att.size();
  AttenuationTrace m;
  m.dt = att.dt;
  m.mirrored = true;
  m.tail = att.tail;
  m.t.resize(2 * n - 1);
  m.chi.resize(2 * n - 1);
  m.source.resize(2 * n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t up = n - 1 + k, down = n - 1 - k;
    m.t[up] = att.t[k];
    m.t[down] = -att.t[k];
    m.chi[up] = m.chi[down] = att.chi[k];
    m.source[up] = m.source[down] = att.source[k];
  }
  return m;
}

double EarlyTimeFit::operator()(double t) const {
  const double t2 = t * t;
  const double poly = t2 * (kappa0 + t2 * (kappa1 + t2 * kappa2));
  return sequence.kind() == SequenceKind::fid ? poly : poly * t2;
}

EarlyTimeFit fit_early_time(const AttenuationTrace& att, const PulseSequence& sequence, double tau_min,
                            double epsilon) {
  if (sequence.kind() == SequenceKind::cpmg) {
    throw InputError("early-time fitting supports fid and spin_echo only");
  }
  if (epsilon < 0.0) epsilon = 10.0 * att.dt;
  EarlyTimeFit fit;
  fit.sequence = sequence;
  fit.tau_min = tau_min;
  fit.window_end = tau_min + epsilon;
  const std::size_t o = att.origin();
  std::vector<std::size_t> idx;
  std::size_t inside = 0;
  for (std::size_t k = o; k < att.size(); ++k) {
    const double t = att.t[k];
    if (t > fit.window_end * (1.0 + 1e-12)) break;
    if (t <= 0.0 || att.source[k] != PointSource::measured) continue;
    idx.push_back(k);
    if (t > tau_min) ++inside;
  }
  if (inside < 4) {
    throw InputError("early-time fit needs at least 4 measured points in (tau_min, tau_min + epsilon], found " +
                     std::to_string(inside));
  }
  const double scale = fit.window_end;
  const int base = sequence.kind() == SequenceKind::fid ? 2 : 4;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(idx.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double u = att.t[idx[r]] / scale;
    for (int c = 0; c < 3; ++c) a(static_cast<Eigen::Index>(r), c) = std::pow(u, base + 2 * c);
    b(static_cast<Eigen::Index>(r)) = att.chi[idx[r]];
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  fit.kappa0 = x(0) / std::pow(scale, base);
  fit.kappa1 = x(1) / std::pow(scale, base + 2);
  fit.kappa2 = x(2) / std::pow(scale, base + 4);
  return fit;
}

AttenuationTrace fill_early_time(const AttenuationTrace& att, const EarlyTimeFit& fit) {
  AttenuationTrace out = att;
  if (fit.tau_min <= 0.0) return out;
  const double centre = fit.tau_min + 5.0 * att.dt;
  const double width = 2.5 * att.dt;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double t = std::abs(out.t[k]);
    if (t < fit.tau_min) {
      out.chi[k] = fit(t);
      out.source[k] = PointSource::early_fit;
    } else {
      const double w = 0.5 * (1.0 + std::erf((t - centre) / width));
      out.chi[k] = w * out.chi[k] + (1.0 - w) * fit(t);
    }
  }
  return out;
}

std::vector<double> lowpass(const std::vector<double>& x, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < std::numbers::pi)) {
    throw InputError("low-pass cutoff must lie in (0, pi) radians per sample");
  }
  const std::size_t n = x.size();
  if (n < 2) return x;
  const int half = static_cast<int>(std::ceil(8.0 * std::numbers::pi / cutoff));
  std::vector<double> h(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double arg = cutoff * k;
    const double sinc = k == 0 ? cutoff / std::numbers::pi : std::sin(arg) / (std::numbers::pi * k);
    const double phase = 2.0 * std::numbers::pi * (k + half) / (2.0 * half);
    const double win = 0.42 - 0.5 * std::cos(phase) + 0.08 * std::cos(2.0 * phase);
    h[static_cast<std::size_t>(k + half)] = sinc * win;
    sum += sinc * win;
  }
  for (double& v : h) v /= sum;

  // Odd reflection about both end samples.
  const long pad = 2L * half;
  const long last = static_cast<long>(n) - 1;
  auto at = [&](long i) {
    if (i < 0) return 2.0 * x[0] - x[static_cast<std::size_t>(std::min(-i, last))];
    if (i > last) return 2.0 * x[n - 1] - x[static_cast<std::size_t>(std::max(2 * last - i, 0L))];
    return x[static_cast<std::size_t>(i)];
  };
  std::vector<double> z(n + 2 * static_cast<std::size_t>(pad));
  for (long i = -pad; i <= last + pad; ++i) z[static_cast<std::size_t>(i + pad)] = at(i);

  auto pass = [&](const std::vector<double>& in) {
    const long m = static_cast<long>(in.size());
    std::vector<double> out(in.size());
    for (long i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        const long j = std::clamp(i - k, 0L, m - 1);
        acc += h[static_cast<std::size_t>(k + half)] * in[static_cast<std::size_t>(j)];
      }
      out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
  };
  // The kernel is symmetric, so the backward pass is a second forward pass.
  const auto y = pass(pass(z));
  return {y.begin() + pad, y.begin() + pad + static_cast<long>(n)};
}

std::pair<std::size_t, std::size_t> auto_tail_window(const std::vector<double>& chi, double dt) {
  const std::size_t n = chi.size();
  const std::size_t s = std::max<std::size_t>(1, n / 100);
  if (n < 4 * s + 10) throw NumericError("trace too short for automatic tail window selection");
  std::vector<double> d2(n, 0.0);
  const double norm = 12.0 * static_cast<double>(s * s) * dt * dt;
  for (std::size_t k = 2 * s; k + 2 * s < n; ++k) {
    d2[k] = std::abs(-chi[k - 2 * s] + 16.0 * chi[k - s] - 30.0 * chi[k] + 16.0 * chi[k + s] - chi[k + 2 * s]) /
            norm;
  }
  std::vector<double> run(n, 0.0);
  for (std::size_t k = 2 * s; k + 2 * s < n; ++k) {
    const std::size_t lo = std::max(k, 3 * s) - s;
    const std::size_t hi = std::min(k + s, n - 2 * s - 1);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += d2[j];
    run[k] = acc / static_cast<double>(hi - lo + 1);
  }
  const double peak = *std::max_element(run.begin(), run.end());
  std::size_t start = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (run[k] > 0.05 * peak) start = k + 1;
  }
  if (n - start < 10) {
    throw NumericError("automatic tail window has " + std::to_string(n - start) + " samples, need 10");
  }
  return {start, n - 1};
}

AttenuationTrace mitigate(const AttenuationTrace& att, const MitigationConfig& cfg) {
  AttenuationTrace m = mirror(att);
  const std::size_t o = m.origin();
  const std::size_t n = o + 1;

  std::vector<double> c(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) c[k] = std::exp(-m.chi[k]);
  c = lowpass(c, cfg.lowpass1_cutoff);
  for (std::size_t k = 0; k < m.size(); ++k) m.chi[k] = -std::log(std::max(c[k], 1e-12));

  const std::vector<double> side(m.chi.begin() + static_cast<long>(o), m.chi.end());
  std::size_t i0 = 0, i1 = n - 1;
  if (cfg.tail_window) {
    const auto [f0, f1] = *cfg.tail_window;
    if (!(0.0 <= f0 && f0 < f1 && f1 <= 1.0)) throw InputError("tail_window must satisfy 0 <= a < b <= 1");
    i0 = static_cast<std::size_t>(std::lround(f0 * static_cast<double>(n - 1)));
    i1 = static_cast<std::size_t>(std::lround(f1 * static_cast<double>(n - 1)));
  } else {
    std::tie(i0, i1) = auto_tail_window(side, m.dt);
  }
  if (i1 + 1 < i0 + 10) {
    throw NumericError("tail window has " + std::to_string(i1 + 1 - std::min(i0, i1 + 1)) +
                       " samples, need at least 10");
  }

  double st = 0, sc = 0, stt = 0, stc = 0;
  const double cnt = static_cast<double>(i1 - i0 + 1);
  for (std::size_t k = i0; k <= i1; ++k) {
    const double x = m.t[o + k], y = side[k];
    st += x;
    sc += y;
    stt += x * x;
    stc += x * y;
  }
  const double slope = (cnt * stc - st * sc) / (cnt * stt - st * st);
  const double intercept = (sc - slope * st) / cnt;
  m.tail = LinearTail{slope, intercept, m.t[o + i0]};

  for (std::size_t k = i0; k < n; ++k) {
    const double v = slope * m.t[o + k] + intercept;
    m.chi[o + k] = m.chi[o - k] = v;
    m.source[o + k] = m.source[o - k] = PointSource::linear_fit;
  }

  if (cfg.extend_to && *cfg.extend_to > m.t.back()) {
    const std::size_t extra =
        static_cast<std::size_t>(std::floor((*cfg.extend_to - m.t.back()) / m.dt + 1e-9));
    const std::size_t half = n - 1 + extra;
    AttenuationTrace e;
    e.dt = m.dt;
    e.mirrored = true;
    e.tail = m.tail;
    e.t.resize(2 * half + 1);
    e.chi.resize(2 * half + 1);
    e.source.resize(2 * half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
      const double t = static_cast<double>(k) * m.dt;
      double v;
      PointSource src;
      if (k < n) {
        v = m.chi[o + k];
        src = m.source[o + k];
      } else {
        v = slope * t + intercept;
        src = PointSource::linear_fit;
      }
      e.t[half + k] = t;
      e.t[half - k] = -t;
      e.chi[half + k] = e.chi[half - k] = v;
      e.source[half + k] = e.source[half - k] = src;
    }
    return e;
  }
  return m;
}

void write_attenuation(const AttenuationTrace& att, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw InputError("cannot write " + csv_path.string());
  out << "t,chi,source\n";
  for (std::size_t k = 0; k < att.size(); ++k) {
    out << format_number(att.t[k]) << ',' << format_number(att.chi[k]) << ',' << to_string(att.source[k]) << '\n';
  }
}

}  // namespace ftns
