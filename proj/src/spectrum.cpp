#include "ftns/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftns/errors.hpp"
#include "ftns/special_functions.hpp"

namespace ftns {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void validate(const SpectrumComponent& c) {
  std::visit(overloaded{
                 [](const Lorentzian& l) {
                   if (!(l.s0 >= 0.0)) throw InputError("lorentzian: s0 must be >= 0");
                   if (!(l.omega_c > 0.0)) throw InputError("lorentzian: omega_c must be > 0");
                   if (!std::isfinite(l.d)) throw InputError("lorentzian: d must be finite");
                 },
                 [](const Gaussian& g) {
                   if (!(g.amplitude >= 0.0)) throw InputError("gaussian: A must be >= 0");
                   if (!(g.sigma > 0.0)) throw InputError("gaussian: sigma must be > 0");
                   if (!std::isfinite(g.mu)) throw InputError("gaussian: mu must be finite");
                 },
                 [](const OneOverF& f) {
                   if (!(f.amplitude >= 0.0)) throw InputError("one_over_f: A must be >= 0");
                   if (!(f.exponent > 0.0 && f.exponent < 3.0)) {
                     throw InputError("one_over_f: exponent n must satisfy 0 < n < 3");
                   }
                 },
                 [](const Constant& k) {
                   if (!(k.level >= 0.0)) throw InputError("constant: c must be >= 0");
                 },
             },
             c);
}

double center_of(const SpectrumComponent& c) {
  if (const auto* l = std::get_if<Lorentzian>(&c)) return l->d;
  if (const auto* g = std::get_if<Gaussian>(&c)) return g->mu;
  return 0.0;
}

double lorentzian_value(const Lorentzian& l, double omega) {
  const double x = (omega - l.d) / l.omega_c;
  switch (l.width_form) {
    case WidthForm::fig1:
      return l.s0 / (1.0 + 64.0 * x * x);
    case WidthForm::fig2b:
    case WidthForm::fig5:
      return l.s0 / (1.0 + 512.0 * x * x);
    case WidthForm::plain_hwhm:
      return l.s0 / (1.0 + x * x);
  }
  return 0.0;
}

double component_value(const SpectrumComponent& c, double omega) {
  return std::visit(overloaded{
                        [&](const Lorentzian& l) { return lorentzian_value(l, omega); },
                        [&](const Gaussian& g) {
                          const double x = (omega - g.mu) / g.sigma;
                          return g.amplitude * std::exp(-x * x);
                        },
                        [&](const OneOverF& f) {
                          if (omega == 0.0) {
                            throw DomainError("1/f component diverges at omega = 0");
                          }
                          return f.amplitude / std::pow(std::abs(omega), f.exponent);
                        },
                        [&](const Constant& k) { return k.level; },
                    },
                    c);
}

// Single-peak chi_FID for s0 / (1 + ((w - d)/hw)^2), from the exponential correlation
// R(tau) = (s0 hw / 2) e^{-hw tau} cos(d tau) integrated twice with chi(0) = chi'(0) = 0.
double lorentzian_fid_chi(double s0, double hw, double d, double t) {
  const double den = d * d + hw * hw;
  const double transient =
      hw * std::exp(-hw * t) * ((hw * hw - d * d) * std::cos(d * t) - 2.0 * d * hw * std::sin(d * t)) /
      (den * den);
  const double offset = hw * (hw * hw - d * d) / (den * den);
  return 0.5 * s0 * (transient + hw * hw * t / den - offset);
}

double gaussian_fid_chi(double a, double sigma, double t) {
  const double x = 0.5 * t * sigma;
  return (a / sigma) * (x * std::erf(x) + std::expm1(-x * x) / std::sqrt(kPi));
}

}  // namespace

double Lorentzian::half_width() const {
  switch (width_form) {
    case WidthForm::fig1:
      return omega_c / 8.0;
    case WidthForm::fig2b:
    case WidthForm::fig5:
      return omega_c / (8.0 * std::sqrt(8.0));
    case WidthForm::plain_hwhm:
      return omega_c;
  }
  return omega_c;
}

SpectrumModel::SpectrumModel(std::vector<SpectrumComponent> components, bool symmetrize)
    : components_(std::move(components)), symmetrize_(symmetrize) {
  for (const auto& c : components_) validate(c);
}

double SpectrumModel::operator()(double omega) const {
  if (!std::isfinite(omega)) throw DomainError("spectrum evaluated at non-finite omega");
  double total = 0.0;
  for (const auto& c : components_) {
    total += component_value(c, omega);
    if (symmetrize_ && center_of(c) != 0.0) total += component_value(c, -omega);
  }
  return total;
}

double evaluate(const SpectrumModel& model, double omega) { return model(omega); }

bool SpectrumModel::is_even() const {
  if (symmetrize_) return true;
  return std::all_of(components_.begin(), components_.end(),
                     [](const SpectrumComponent& c) { return center_of(c) == 0.0; });
}

bool SpectrumModel::has_one_over_f() const {
  return std::any_of(components_.begin(), components_.end(),
                     [](const SpectrumComponent& c) { return std::holds_alternative<OneOverF>(c); });
}

double SpectrumModel::white_level() const {
  double c = 0.0;
  for (const auto& comp : components_) {
    if (const auto* k = std::get_if<Constant>(&comp)) c += k->level;
  }
  return c;
}

double SpectrumModel::correlation(double tau) const {
  tau = std::abs(tau);
  double r = 0.0;
  for (const auto& c : components_) {
    const double mirror = (symmetrize_ && center_of(c) != 0.0) ? 2.0 : 1.0;
    if (const auto* l = std::get_if<Lorentzian>(&c)) {
      const double hw = l->half_width();
      r += mirror * 0.5 * l->s0 * hw * std::exp(-hw * tau) * std::cos(l->d * tau);
    } else if (const auto* g = std::get_if<Gaussian>(&c)) {
      const double x = 0.5 * g->sigma * tau;
      r += mirror * g->amplitude * g->sigma / (2.0 * std::sqrt(kPi)) * std::exp(-x * x) *
           std::cos(g->mu * tau);
    } else if (std::holds_alternative<OneOverF>(c)) {
      throw DomainError("1/f spectra have no integrable correlation function");
    }
  }
  return r;
}

std::vector<SpectrumModel::Feature> SpectrumModel::features() const {
  std::vector<Feature> out;
  for (const auto& c : components_) {
    if (const auto* l = std::get_if<Lorentzian>(&c)) {
      out.push_back({std::abs(l->d), l->half_width()});
    } else if (const auto* g = std::get_if<Gaussian>(&c)) {
      out.push_back({std::abs(g->mu), g->sigma});
    } else if (std::holds_alternative<OneOverF>(c)) {
      out.push_back({0.0, 0.0});
    }
  }
  return out;
}

std::optional<double> closed_form_chi(const SpectrumModel& model, const PulseSequence& sequence,
                                      double t) {
  if (t < 0.0) return std::nullopt;
  double chi = 0.0;
  for (const auto& c : model.components()) {
    const double mirror = (model.symmetrize() && center_of(c) != 0.0) ? 2.0 : 1.0;
    if (const auto* k = std::get_if<Constant>(&c)) {
      chi += 0.5 * k->level * t;
      continue;
    }
    switch (sequence.kind()) {
      case SequenceKind::fid:
        if (const auto* l = std::get_if<Lorentzian>(&c)) {
          chi += mirror * lorentzian_fid_chi(l->s0, l->half_width(), l->d, t);
        } else if (const auto* g = std::get_if<Gaussian>(&c); g && g->mu == 0.0) {
          chi += gaussian_fid_chi(g->amplitude, g->sigma, t);
        } else {
          return std::nullopt;
        }
        break;
      case SequenceKind::spin_echo:
        if (const auto* f = std::get_if<OneOverF>(&c)) {
          chi += one_over_f_se_coefficient(f->amplitude, f->exponent) * std::pow(t, f->exponent + 1.0);
        } else {
          return std::nullopt;
        }
        break;
      case SequenceKind::cpmg:
        return std::nullopt;
    }
  }
  return chi;
}

double asymptotic_fid_slope(const SpectrumModel& model) {
  if (model.has_one_over_f()) throw DomainError("1/f spectra have no linear FID asymptote");
  return 0.5 * model(0.0);
}

std::string to_string(WidthForm form) {
  switch (form) {
    case WidthForm::fig1:
      return "fig1";
    case WidthForm::fig2b:
      return "fig2b";
    case WidthForm::fig5:
      return "fig5";
    case WidthForm::plain_hwhm:
      return "plain_hwhm";
  }
  return "fig1";
}

WidthForm width_form_from_string(const std::string& s) {
  if (s == "fig1") return WidthForm::fig1;
  if (s == "fig2b") return WidthForm::fig2b;
  if (s == "fig5") return WidthForm::fig5;
  if (s == "plain_hwhm") return WidthForm::plain_hwhm;
  throw InputError("unknown width_form '" + s + "'");
}

void to_json(nlohmann::json& j, const SpectrumModel& model) {
  auto comps = nlohmann::json::array();
  for (const auto& c : model.components()) {
    std::visit(overloaded{
                   [&](const Lorentzian& l) {
                     comps.push_back({{"kind", "lorentzian"},
                                      {"s0", l.s0},
                                      {"omega_c", l.omega_c},
                                      {"d", l.d},
                                      {"width_form", to_string(l.width_form)}});
                   },
                   [&](const Gaussian& g) {
                     comps.push_back({{"kind", "gaussian"}, {"A", g.amplitude}, {"sigma", g.sigma}, {"mu", g.mu}});
                   },
                   [&](const OneOverF& f) {
                     comps.push_back({{"kind", "one_over_f"}, {"A", f.amplitude}, {"n", f.exponent}});
                   },
                   [&](const Constant& k) { comps.push_back({{"kind", "constant"}, {"c", k.level}}); },
               },
               c);
  }
  j = nlohmann::json{{"components", comps}, {"symmetrize", model.symmetrize()}};
}

namespace {

double number_field(const nlohmann::json& j, const char* key, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw InputError(std::string("spectrum component missing field '") + key + "'");
  }
  if (!j.at(key).is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

void from_json(const nlohmann::json& j, SpectrumModel& model) {
  if (!j.is_object() || !j.contains("components") || !j.at("components").is_array()) {
    throw InputError("spectrum document needs a 'components' array");
  }
  std::vector<SpectrumComponent> comps;
  for (const auto& c : j.at("components")) {
    const std::string kind = c.value("kind", "");
    if (kind == "lorentzian") {
      Lorentzian l;
      l.s0 = number_field(c, "s0");
      l.omega_c = number_field(c, "omega_c");
      l.d = number_field(c, "d", 0.0);
      l.width_form = width_form_from_string(c.value("width_form", std::string("fig1")));
      comps.emplace_back(l);
    } else if (kind == "gaussian") {
      comps.emplace_back(Gaussian{number_field(c, "A"), number_field(c, "sigma"), number_field(c, "mu", 0.0)});
    } else if (kind == "one_over_f") {
      const char* amp = c.contains("A_coef") ? "A_coef" : "A";
      comps.emplace_back(OneOverF{number_field(c, amp), number_field(c, "n")});
    } else if (kind == "constant") {
      comps.emplace_back(Constant{number_field(c, "c")});
    } else {
      throw InputError("unknown spectrum component kind '" + kind + "'");
    }
  }
  model = SpectrumModel(std::move(comps), j.value("symmetrize", true));
}

}  // namespace ftns
