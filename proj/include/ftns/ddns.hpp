#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ftns/ftns_fid.hpp"

namespace ftns {

// Fourier power of the periodic CPMG switching function at harmonics k w0, w0 = pi / tau.
// A_sq[k - 1] holds harmonic k; even harmonics vanish and the odd ones sum to 1/2.
struct CombCoefficients {
  int n_pulses = 0;
  int k_c = 0;
  std::vector<double> A_sq;

  double operator[](int k) const { return A_sq[static_cast<std::size_t>(k - 1)]; }
  double total() const;
};

CombCoefficients comb_coefficients(int n_pulses, int k_c);

struct DDNSPlan {
  int n_pulses = 32;
  int k_c = 41;
  double tau_min = 0.01;
  double tau_max = 1.0;
  std::size_t n_probes = 200;
  double coherence_floor = 0.0;
  bool densify = false;

  void validate() const;
  // pi / tau over a geometric ladder of delays, ascending in frequency.
  std::vector<double> probe_frequencies() const;
  double omega_min() const;
  double omega_max() const;
};

void to_json(nlohmann::json& j, const DDNSPlan& plan);
void from_json(const nlohmann::json& j, DDNSPlan& plan);

// Returns chi(t) for the given sequence.
using AttenuationOracle = std::function<double(const PulseSequence&, double)>;

AttenuationOracle model_oracle(const SpectrumModel& model);

// Rows: chi_i / t_i = sum_k A_sq[k] S(k w_i) with S linearly interpolated between the probe
// frequencies and held at the top probe value above the band.
Eigen::MatrixXd comb_matrix(const CombCoefficients& comb, const std::vector<double>& probes);

ReconstructedSpectrum run_alvarez_suter(const AttenuationOracle& oracle, const DDNSPlan& plan);

double single_delta_probe(const AttenuationOracle& oracle, const DDNSPlan& plan, double omega_probe);

ReconstructedSpectrum run_single_delta(const AttenuationOracle& oracle, const DDNSPlan& plan);

// Attenuation per unit time synthesized from the comb model for a planted spectrum
// sampled at the plan's probes.
std::vector<double> synthesize_comb_rates(const DDNSPlan& plan, const std::vector<double>& planted);

// Inverts rates (chi_i / t_i) on the plan's probes; exposes the solver for exactness checks.
ReconstructedSpectrum invert_comb_rates(const DDNSPlan& plan, const std::vector<double>& probes,
                                        const std::vector<double>& rates);

}  // namespace ftns
