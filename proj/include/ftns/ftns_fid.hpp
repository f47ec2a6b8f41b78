#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftns/trace_prep.hpp"

namespace ftns {

enum class Method { fid_ftns, se_ftns, ddns_as, ddns_delta };

std::string to_string(Method method);
Method method_from_string(const std::string& s);

struct OneOverFFit {
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double amplitude = 0.0;  // A of A / |w|^n
  double exponent = 0.0;   // n = gamma - 1
  double residual = 0.0;   // rms of the fit
  bool present = false;
};

void to_json(nlohmann::json& j, const OneOverFFit& fit);

struct ReconstructedSpectrum {
  std::vector<double> omega;
  std::vector<double> S;
  Method method = Method::fid_ftns;
  double d_omega = 0.0;    // angular grid spacing
  double omega_max = 0.0;  // pi / dt for the Fourier methods
  double padded_length = 0.0;
  std::optional<OneOverFFit> one_over_f;
  nlohmann::json extra = nlohmann::json::object();

  std::size_t size() const { return omega.size(); }
  // Linear interpolation; outside the grid returns nullopt.
  std::optional<double> at(double w) const;
};

// Two successive first derivatives: one-sided first-order stencils at the ends, centered
// second-order stencils inside. When the trace carries a fitted tail, the first
// derivative at the two samples next to each seam is set to the fitted slope and, if
// smooth_cutoff is given, the first derivative is low-passed before differentiating again.
std::vector<double> second_derivative(const AttenuationTrace& att,
                                      std::optional<double> smooth_cutoff = std::nullopt);

// S(w) = 2 int_0^inf f(t) cos(w t) dt by trapezoidal summation of the even samples f on the
// grid zero-padded to pad_factor times its one-sided length.
ReconstructedSpectrum fourier_to_spectrum(const std::vector<double>& ddchi, double dt, int pad_factor = 8,
                                          bool fast = false);

struct PrepOptions {
  int pad_factor = 8;
  double epsilon = -1.0;            // early-time window extension, default 10 dt
  std::optional<bool> mitigate;     // default: on when the trace is noisy
  MitigationConfig mitigation;
  bool fast_transform = false;
};

struct PreparedTrace {
  AttenuationTrace att;  // mirrored
  std::vector<double> ddchi;
  std::optional<EarlyTimeFit> early;
};

// Early-time fill, mitigation or plain mirroring, then the second derivative.
PreparedTrace prepare(const AttenuationTrace& att, const PulseSequence& sequence, const MeasurementPlan& plan,
                      const PrepOptions& prep);

ReconstructedSpectrum reconstruct_fid(const CoherenceTrace& trace, const PrepOptions& prep = {});

void write_spectrum(const ReconstructedSpectrum& spec, const std::filesystem::path& csv_path,
                    const nlohmann::json& metadata);

}  // namespace ftns
