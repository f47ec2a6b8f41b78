#include "ftns/report.hpp"

#include <algorithm>
#include <cmath>

#include "ftns/errors.hpp"

namespace ftns {

double ErrorReport::max_delta() const {
  double m = 0.0;
  for (double d : delta_abs) m = std::max(m, d);
  return m;
}

std::vector<std::size_t> find_peaks(const std::vector<double>& y, double rel_threshold) {
  std::vector<std::size_t> out;
  const std::size_t n = y.size();
  if (n == 0) return out;
  const double top = *std::max_element(y.begin(), y.end());
  const double floor = rel_threshold * top;
  if (n == 1) return {0};
  for (std::size_t k = 0; k < n; ++k) {
    const bool left = k == 0 || y[k] > y[k - 1];
    const bool right = k + 1 == n || y[k] >= y[k + 1];
    if (left && right && y[k] > floor) out.push_back(k);
  }
  return out;
}

ErrorReport error_report(const SpectrumModel& truth, const ReconstructedSpectrum& rec, double band_lo,
                         double band_hi) {
  ErrorReport r;
  r.band_lo = band_lo;
  r.band_hi = band_hi;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const double w = rec.omega[k];
    if (w < band_lo || w > band_hi || !std::isfinite(rec.S[k])) continue;
    if (w == 0.0 && truth.has_one_over_f()) continue;
    const double s = truth(w);
    r.omega.push_back(w);
    r.truth.push_back(s);
    r.reconstructed.push_back(rec.S[k]);
    r.delta_abs.push_back(std::abs(s - rec.S[k]));
  }
  if (r.omega.empty()) throw InputError("reconstruction has no finite points inside the comparison band");
  const double step = r.omega.size() > 1 ? r.omega[1] - r.omega[0] : rec.d_omega;
  const double window = 3.0 * step;
  for (std::size_t p : find_peaks(r.truth)) {
    PeakError e;
    e.true_position = r.omega[p];
    e.true_height = r.truth[p];
    std::size_t best = p;
    for (std::size_t k = 0; k < r.omega.size(); ++k) {
      if (std::abs(r.omega[k] - e.true_position) > window * (1.0 + 1e-9)) continue;
      if (r.reconstructed[k] > r.reconstructed[best]) best = k;
    }
    e.found_position = r.omega[best];
    e.found_height = r.reconstructed[best];
    e.position_error = std::abs(e.found_position - e.true_position);
    e.height_error = std::abs(e.found_height - e.true_height) / e.true_height;
    e.matched = e.position_error < window;
    r.peaks.push_back(e);
  }
  return r;
}

void to_json(nlohmann::json& j, const ErrorReport& report) {
  auto peaks = nlohmann::json::array();
  for (const auto& p : report.peaks) {
    peaks.push_back({{"true_position", p.true_position},
                     {"true_height", p.true_height},
                     {"found_position", p.found_position},
                     {"found_height", p.found_height},
                     {"position_error", p.position_error},
                     {"height_error", p.height_error},
                     {"matched", p.matched}});
  }
  j = nlohmann::json{{"band", {report.band_lo, report.band_hi}},
                     {"max_delta", report.max_delta()},
                     {"peaks", peaks}};
}

}  // namespace ftns
