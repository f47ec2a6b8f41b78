#include "ftns/sequence.hpp"

#include <cmath>
#include <complex>

#include "ftns/errors.hpp"

namespace ftns {

PulseSequence PulseSequence::cpmg(int n_pulses) {
  if (n_pulses < 1) {
    throw InputError("CPMG requires n_pulses >= 1, got " + std::to_string(n_pulses));
  }
  return PulseSequence(SequenceKind::cpmg, n_pulses);
}

std::vector<double> PulseSequence::pulse_times(double t) const {
  switch (kind_) {
    case SequenceKind::fid:
      return {};
    case SequenceKind::spin_echo:
      return {0.5 * t};
    case SequenceKind::cpmg: {
      std::vector<double> times;
      times.reserve(static_cast<std::size_t>(n_pulses_));
      for (int j = 1; j <= n_pulses_; ++j) {
        times.push_back((j - 0.5) * t / n_pulses_);
      }
      return times;
    }
  }
  return {};
}

std::vector<Segment> PulseSequence::segments(double t) const {
  std::vector<Segment> out;
  double begin = 0.0;
  int sign = 1;
  for (double p : pulse_times(t)) {
    out.push_back({begin, p, sign});
    begin = p;
    sign = -sign;
  }
  out.push_back({begin, t, sign});
  return out;
}

int PulseSequence::low_frequency_order() const {
  switch (kind_) {
    case SequenceKind::fid:
      return 0;
    case SequenceKind::spin_echo:
      return 1;
    case SequenceKind::cpmg:
      return n_pulses_ % 2 == 0 ? 2 : 1;
  }
  return 0;
}

std::string PulseSequence::name() const {
  switch (kind_) {
    case SequenceKind::fid:
      return "fid";
    case SequenceKind::spin_echo:
      return "spin_echo";
    case SequenceKind::cpmg:
      return "cpmg";
  }
  return "fid";
}

PulseSequence PulseSequence::parse(std::string_view name, int n_pulses) {
  if (name == "fid") return fid();
  if (name == "spin_echo" || name == "se") return spin_echo();
  if (name == "cpmg") return cpmg(n_pulses);
  throw InputError("unknown pulse sequence '" + std::string(name) + "'");
}

namespace {

// sin(n x) / cos(x) for even n, cos(n x) / cos(x) for odd n, expanded as a finite
// trigonometric sum so that the removable poles at cos(x) = 0 need no special case.
double comb_ratio(int n, double x) {
  double r = 0.0;
  if (n % 2 == 0) {
    const int h = n / 2;
    for (int j = 0; j < h; ++j) {
      const double sign = ((h - 1 - j) % 2 == 0) ? 1.0 : -1.0;
      r += 2.0 * sign * std::sin((2 * j + 1) * x);
    }
  } else {
    const int h = (n - 1) / 2;
    r = (h % 2 == 0) ? 1.0 : -1.0;
    for (int j = 1; j <= h; ++j) {
      const double sign = ((h - j) % 2 == 0) ? 1.0 : -1.0;
      r += 2.0 * sign * std::cos(2 * j * x);
    }
  }
  return r;
}

}  // namespace

double filter_value(const PulseSequence& sequence, double omega, double t) {
  if (t < 0.0) throw InputError("filter_value requires t >= 0");
  if (t == 0.0) return 0.0;
  const double x = std::abs(omega) * t;
  switch (sequence.kind()) {
    case SequenceKind::fid: {
      if (x < 1e-4) return t * t * (1.0 - x * x / 12.0);
      const double s = std::sin(0.5 * omega * t);
      return 4.0 * s * s / (omega * omega);
    }
    case SequenceKind::spin_echo: {
      if (x < 1e-4) return omega * omega * t * t * t * t / 16.0 * (1.0 - x * x / 24.0);
      const double s = std::sin(0.25 * omega * t);
      return 16.0 * s * s * s * s / (omega * omega);
    }
    case SequenceKind::cpmg: {
      if (omega == 0.0) return 0.0;
      // n identical cells of length tau, each a +/- half-cell pair, with alternating sign.
      const int n = sequence.n_pulses();
      const double tau = t / n;
      const double s = std::sin(0.25 * omega * tau);
      const double r = comb_ratio(n, 0.5 * omega * tau);
      return 16.0 * s * s * s * s * r * r / (omega * omega);
    }
  }
  return 0.0;
}

double filter_by_segments(const PulseSequence& sequence, double omega, double t) {
  if (t < 0.0) throw InputError("filter_by_segments requires t >= 0");
  if (omega == 0.0) {
    double y = 0.0;
    for (const auto& s : sequence.segments(t)) y += s.sign * (s.end - s.begin);
    return y * y;
  }
  std::complex<double> y = 0.0;
  for (const auto& s : sequence.segments(t)) {
    const double mid = 0.5 * (s.begin + s.end);
    const double half = 0.5 * (s.end - s.begin);
    y += static_cast<double>(s.sign) * std::polar(2.0 * std::sin(omega * half) / omega, omega * mid);
  }
  return std::norm(y);
}

double filter_tail_constant(const PulseSequence& sequence) {
  switch (sequence.kind()) {
    case SequenceKind::fid:
      return 4.0;
    case SequenceKind::spin_echo:
      return 16.0;
    case SequenceKind::cpmg:
      return 16.0 * sequence.n_pulses() * sequence.n_pulses();
  }
  return 16.0;
}

}  // namespace ftns
