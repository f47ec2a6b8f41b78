#pragma once

#include <vector>

#include "ftns/ftns_fid.hpp"

namespace ftns {

// M(w) = S(w) - S(w/2)/2 sampled at w_n = n d_omega.
struct MArray {
  double d_omega = 0.0;
  double padded_length = 0.0;  // total padded time of the echo transform, 0 when synthetic
  std::vector<double> M;
};

// Samples M on n_max + 1 grid points directly from a model.
MArray m_from_model(const SpectrumModel& model, double d_omega, std::size_t n_max);

MArray extract_m(const CoherenceTrace& trace, const PrepOptions& prep = {});
MArray extract_m(const AttenuationTrace& att, const PulseSequence& sequence, const MeasurementPlan& plan,
                 const PrepOptions& prep);

// Even/odd unfolding of M into S on the same grid.
ReconstructedSpectrum recursion_s_from_m(const MArray& m);

// M recomputed from S with the same neighbour averaging at half-grid points.
std::vector<double> m_from_recursion(const std::vector<double>& s);

ReconstructedSpectrum reconstruct_se(const CoherenceTrace& trace, const PrepOptions& prep = {});

// chi ~ alpha t^gamma + beta t + delta over the retained samples, 1 < gamma < 4.
OneOverFFit fit_one_over_f(const AttenuationTrace& att);

enum class Regime { integrable, one_over_f, undetermined };

struct RegimeReport {
  Regime regime = Regime::undetermined;
  double tail_residual = 0.0;    // rms of the tail line fit over chi(T_max)
  double power_law_r2 = 0.0;
};

RegimeReport classify_regime(const AttenuationTrace& att);

// Fit and remove the 1/f attenuation, reconstruct the residual by the echo recursion, add
// A / |w|^n back. S at w = 0 is +inf and flagged as divergent in the metadata.
ReconstructedSpectrum reconstruct_with_one_over_f(const CoherenceTrace& trace, const PrepOptions& prep = {});

}  // namespace ftns
