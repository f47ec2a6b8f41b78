#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ftns/forward.hpp"

namespace ftns {

enum class PointSource { measured, early_fit, linear_fit, zero_pad, withheld };

std::string to_string(PointSource source);

// Straight-line fit chi ~ slope t + intercept used to replace a noisy tail.
struct LinearTail {
  double slope = 0.0;
  double intercept = 0.0;
  double t_start = 0.0;  // first replaced time on the positive side
};

struct AttenuationTrace {
  std::vector<double> t;
  std::vector<double> chi;
  std::vector<PointSource> source;
  double dt = 0.0;
  bool mirrored = false;
  std::optional<LinearTail> tail;

  std::size_t size() const { return t.size(); }
  // Index of t = 0.
  std::size_t origin() const { return mirrored ? (t.size() - 1) / 2 : 0; }
};

// chi = -ln C on the retained part of the trace (samples before the floor cut).
AttenuationTrace to_attenuation(const CoherenceTrace& trace);

// Even extension about t = 0; the result has 2N - 1 samples.
AttenuationTrace mirror(const AttenuationTrace& att);

struct EarlyTimeFit {
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  PulseSequence sequence;
  double tau_min = 0.0;
  double window_end = 0.0;

  // kappa0 t^2 + kappa1 t^4 + kappa2 t^6 (FID) or the same times t^2 (echo sequences).
  double operator()(double t) const;
};

// epsilon < 0 selects the default of 10 dt.
EarlyTimeFit fit_early_time(const AttenuationTrace& att, const PulseSequence& sequence, double tau_min,
                            double epsilon = -1.0);

AttenuationTrace fill_early_time(const AttenuationTrace& att, const EarlyTimeFit& fit);

// Zero-phase windowed-sinc (Blackman) low-pass. cutoff in radians per sample, in (0, pi).
std::vector<double> lowpass(const std::vector<double>& x, double cutoff);

struct MitigationConfig {
  std::optional<std::pair<double, double>> tail_window;  // fractions of T_max
  double lowpass1_cutoff = 0.5;                         // radians per sample
  bool lowpass2_enabled = false;
  double lowpass2_cutoff = 0.25;
  std::optional<double> extend_to;
};

// Index range [first, last] of the automatic tail window on a one-sided trace.
std::pair<std::size_t, std::size_t> auto_tail_window(const std::vector<double>& chi, double dt);

// Mirror, low-pass the coherence, take the log, fit a line to the tail window and replace
// the tail with it. Returns a mirrored trace carrying the fitted line.
AttenuationTrace mitigate(const AttenuationTrace& att, const MitigationConfig& cfg);

void write_attenuation(const AttenuationTrace& att, const std::filesystem::path& csv_path);

}  // namespace ftns
