#pragma once

#include <vector>

#include <json.hpp>

#include "ftns/ftns_fid.hpp"

namespace ftns {

struct PeakError {
  double true_position = 0.0;
  double true_height = 0.0;
  double found_position = 0.0;
  double found_height = 0.0;
  double position_error = 0.0;
  double height_error = 0.0;  // relative
  bool matched = false;
};

struct ErrorReport {
  std::vector<double> omega;
  std::vector<double> truth;
  std::vector<double> reconstructed;
  std::vector<double> delta_abs;
  std::vector<PeakError> peaks;
  double band_lo = 0.0;
  double band_hi = 0.0;

  double max_delta() const;
};

// Indices of local maxima of y above rel_threshold times its maximum. An endpoint counts
// when it exceeds its only neighbour.
std::vector<std::size_t> find_peaks(const std::vector<double>& y, double rel_threshold = 0.05);

// Delta(w) = |S(w) - S_rec(w)| on the reconstruction's own grid inside [band_lo, band_hi],
// plus per-peak position and height errors with a match window of 3 grid steps.
ErrorReport error_report(const SpectrumModel& truth, const ReconstructedSpectrum& rec, double band_lo,
                         double band_hi);

void to_json(nlohmann::json& j, const ErrorReport& report);

}  // namespace ftns
