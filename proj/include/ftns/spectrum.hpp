#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ftns/sequence.hpp"

namespace ftns {

// Denominator conventions used by the Lorentzian line shapes.
//   fig1        s0 / (1 + (8 (w - d) / wc)^2)         half width wc / 8
//   fig2b, fig5 s0 / (1 + 8 (8 (w - d) / wc)^2)       half width wc / (8 sqrt 8)
//   plain_hwhm  s0 / (1 + ((w - d) / wc)^2)           half width wc
enum class WidthForm { fig1, fig2b, fig5, plain_hwhm };

struct Lorentzian {
  double s0 = 0.0;
  double omega_c = 1.0;
  double d = 0.0;
  WidthForm width_form = WidthForm::fig1;

  double half_width() const;
};

struct Gaussian {
  double amplitude = 0.0;
  double sigma = 1.0;
  double mu = 0.0;
};

// A / |omega|^n with 0 < n < 3.
struct OneOverF {
  double amplitude = 0.0;
  double exponent = 1.0;
};

struct Constant {
  double level = 0.0;
};

using SpectrumComponent = std::variant<Lorentzian, Gaussian, OneOverF, Constant>;

// Sum of parametric components. With symmetrize set, every component whose center is
// off zero also contributes its mirror image at -center, so the model is even.
class SpectrumModel {
 public:
  SpectrumModel() = default;
  explicit SpectrumModel(std::vector<SpectrumComponent> components, bool symmetrize = true);

  const std::vector<SpectrumComponent>& components() const { return components_; }
  bool symmetrize() const { return symmetrize_; }

  double operator()(double omega) const;

  bool is_even() const;
  bool has_one_over_f() const;
  double white_level() const;

  // R(tau) = (1/2pi) int S(w) cos(w tau) dw for the integrable, non-constant part.
  // Throws DomainError when the model has a 1/f component.
  double correlation(double tau) const;

  // Smallest and largest feature scales: used for quadrature panel placement.
  struct Feature {
    double center;
    double width;
  };
  std::vector<Feature> features() const;

 private:
  std::vector<SpectrumComponent> components_;
  bool symmetrize_ = true;
};

double evaluate(const SpectrumModel& model, double omega);

// Exact attenuation chi(t) where a closed form exists:
//   FID with centered Gaussians, Lorentzians (single or mirrored pairs) and constants;
//   spin echo with 1/f components and constants.
// Returns nullopt for every other (model, sequence) combination.
std::optional<double> closed_form_chi(const SpectrumModel& model, const PulseSequence& sequence,
                                      double t);

// Long-time slope of chi_FID for integrable models: S(0) / 2.
double asymptotic_fid_slope(const SpectrumModel& model);

std::string to_string(WidthForm form);
WidthForm width_form_from_string(const std::string& s);

void to_json(nlohmann::json& j, const SpectrumModel& model);
void from_json(const nlohmann::json& j, SpectrumModel& model);

}  // namespace ftns
