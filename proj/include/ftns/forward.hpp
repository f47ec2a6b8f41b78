#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftns/sequence.hpp"
#include "ftns/spectrum.hpp"

namespace ftns {

// How chi(t) is evaluated.
//   frequency  adaptive quadrature of S(w) F(w t) over w
//   time       integral of the correlation function against the switching-function
//              autocorrelation (integrable models only)
//   automatic  closed form if available, else time, else frequency
enum class Route { automatic, frequency, time };

double attenuation(const SpectrumModel& model, const PulseSequence& sequence, double t,
                   Route route = Route::automatic);

std::vector<double> attenuation(const SpectrumModel& model, const PulseSequence& sequence,
                                const std::vector<double>& times, Route route = Route::automatic);

struct MeasurementPlan {
  double dt = 0.01;
  double t_max = 1.0;
  double tau_min = 0.0;
  double coherence_floor = 0.005;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t grid_size() const;
};

enum class SampleMask { measured, withheld_below_tau_min, truncated_by_floor };

std::string to_string(SampleMask mask);
SampleMask sample_mask_from_string(const std::string& s);

struct CoherenceTrace {
  std::vector<double> t;
  std::vector<double> C;
  std::vector<SampleMask> mask;
  MeasurementPlan plan;
  PulseSequence sequence;
  std::string config_hash;

  std::size_t size() const { return t.size(); }
  // Number of leading samples before the first floor-truncated one.
  std::size_t retained() const;
};

CoherenceTrace simulate_trace(const SpectrumModel& model, const PulseSequence& sequence,
                              const MeasurementPlan& plan);

enum class T2Definition { slope, e_folding };

double t2_from_trace(const CoherenceTrace& trace, T2Definition definition);

void to_json(nlohmann::json& j, const MeasurementPlan& plan);
void from_json(const nlohmann::json& j, MeasurementPlan& plan);
void to_json(nlohmann::json& j, const PulseSequence& sequence);
void from_json(const nlohmann::json& j, PulseSequence& sequence);

// <stem>.csv with header "t,C,mask" and <stem>.json holding plan, sequence and seed.
void write_trace(const CoherenceTrace& trace, const std::filesystem::path& csv_path);
CoherenceTrace read_trace(const std::filesystem::path& csv_path);

std::string format_number(double v);

}  // namespace ftns
