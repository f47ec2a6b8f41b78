#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "../fixtures.hpp"
#include "ftns/errors.hpp"
#include "ftns/ftns_se.hpp"
#include "ftns/report.hpp"
#include "ftns/special_functions.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace ftns;

namespace {

constexpr double kPi = std::numbers::pi;

CoherenceTrace echo_trace(const SpectrumModel& model, double dt, double t_max, double tau_min = 0.0,
                          double floor = 0.0) {
  MeasurementPlan plan;
  plan.dt = dt;
  plan.t_max = t_max;
  plan.tau_min = tau_min;
  plan.coherence_floor = floor;
  return simulate_trace(model, PulseSequence::spin_echo(), plan);
}

AttenuationTrace power_law(double alpha, double gamma, double beta, double delta) {
  AttenuationTrace att;
  att.dt = 0.01;
  for (int k = 0; k <= 300; ++k) {
    const double t = k * 0.01;
    att.t.push_back(t);
    att.chi.push_back(alpha * std::pow(t, gamma) + beta * t + delta);
    att.source.push_back(PointSource::measured);
  }
  return att;
}

}  // namespace

TEST_CASE("gamma function", "[special]") {
  CHECK_THAT(gamma_fn(5.0), WithinRel(24.0, 1e-14));
  CHECK_THAT(gamma_fn(0.5), WithinRel(std::sqrt(kPi), 1e-14));
  CHECK_THAT(gamma_fn(-0.5), WithinRel(-2.0 * std::sqrt(kPi), 1e-14));
  CHECK_THAT(gamma_fn(-1.5), WithinRel(4.0 * std::sqrt(kPi) / 3.0, 1e-14));
  CHECK_THROWS_AS(gamma_fn(-2.0), DomainError);
  CHECK_THROWS_AS(gamma_fn(0.0), DomainError);
}

TEST_CASE("echo 1/f coefficients", "[special]") {
  CHECK_THAT(one_over_f_se_coefficient(1.0, 2.5), WithinRel(0.0392982681164943, 1e-13));
  CHECK_THAT(one_over_f_se_coefficient(1.0, 2.0), WithinRel(1.0 / 24.0, 1e-15));
  CHECK_THAT(one_over_f_se_coefficient(1.0, 1.0), WithinRel(0.110317800076326, 1e-14));
  CHECK_THAT(one_over_f_se_coefficient(3.0, 1.0), WithinRel(3.0 * std::log(2.0) / (2.0 * kPi), 1e-14));
  for (double n : {1.0, 2.0}) {
    CHECK_THAT(one_over_f_se_coefficient(1.0, n + 1e-6), WithinRel(one_over_f_se_coefficient(1.0, n), 1e-5));
    CHECK_THAT(one_over_f_se_coefficient(1.0, n - 1e-6), WithinRel(one_over_f_se_coefficient(1.0, n), 1e-5));
  }
  for (double n : {0.3, 1.0, 1.7, 2.0, 2.5, 2.9}) {
    const double alpha = one_over_f_se_coefficient(1.7, n);
    CHECK_THAT(one_over_f_amplitude(alpha, n + 1.0), WithinRel(1.7, 1e-12));
    const double t = 1.3;
    CHECK_THAT(attenuation(SpectrumModel({OneOverF{1.7, n}}), PulseSequence::spin_echo(), t, Route::frequency),
               WithinRel(alpha * std::pow(t, n + 1.0), 1e-9));
  }
  CHECK_THROWS_AS(one_over_f_se_coefficient(1.0, 3.0), DomainError);
  CHECK_THROWS_AS(one_over_f_se_coefficient(1.0, 0.0), DomainError);
}

TEST_CASE("recursion inverts the echo relation", "[se][recursion][property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(257);
    for (auto& v : s) v = u(rng);
    MArray m;
    m.d_omega = 0.1;
    m.M = m_from_recursion(s);
    const auto back = recursion_s_from_m(m);
    REQUIRE(back.size() == s.size());
    for (std::size_t k = 0; k < s.size(); ++k) CHECK_THAT(back.S[k], WithinAbs(s[k], 1e-12 * (1.0 + s[k])));
    CHECK_THAT(back.omega[256], WithinRel(25.6, 1e-14));
  }
}

TEST_CASE("recursion seed", "[se][recursion]") {
  MArray m;
  m.d_omega = 1.0;
  m.M = {0.5, 1.0};
  const auto s = recursion_s_from_m(m);
  CHECK(s.S[0] == 1.0);
  CHECK_THAT(s.S[1], WithinRel(4.0 / 3.0 * (1.0 + 0.25), 1e-15));
}

TEST_CASE("recursion from model samples", "[se][recursion]") {
  const SpectrumModel model({Lorentzian{1.0, 1.5, 3.0, WidthForm::plain_hwhm}, Lorentzian{0.5, 1.0, 0.0, WidthForm::plain_hwhm}});
  const auto m = m_from_model(model, 0.05, 511);
  const auto s = recursion_s_from_m(m);
  CHECK(s.S[0] == model(0.0));
  for (std::size_t k = 0; k < s.size() / 2; ++k) CHECK_THAT(s.S[k], WithinRel(model(s.omega[k]), 1e-2));
  const auto again = m_from_recursion(s.S);
  for (std::size_t k = 0; k < again.size(); ++k) CHECK_THAT(again[k], WithinAbs(m.M[k], 1e-14));
}

TEST_CASE("echo reconstruction of a lorentzian mixture", "[se]") {
  const auto trace = echo_trace(fixtures::echo_mixture(), 0.01, 25.0);
  const auto m = extract_m(trace);
  CHECK_THAT(m.d_omega, WithinRel(2.0 * (2.0 * kPi / m.padded_length), 1e-14));
  const auto s = reconstruct_se(trace);
  CHECK(s.method == Method::se_ftns);
  CHECK(s.padded_length == m.padded_length);
  CHECK(std::abs(s.S[0]) < 0.01 * fixtures::echo_mixture()(0.0));

  std::vector<double> w, y;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s.omega[k] > 0.5 && s.omega[k] < 4.0) {
      w.push_back(s.omega[k]);
      y.push_back(s.S[k]);
    }
  }
  const auto peaks = find_peaks(y, 0.1);
  REQUIRE(peaks.size() == 3);
  const double centres[] = {1.25, 1.875, 2.5};
  for (int i = 0; i < 3; ++i) CHECK_THAT(w[peaks[i]], WithinAbs(centres[i], 0.1));

  MeasurementPlan p;
  p.dt = 0.01;
  p.t_max = 1.0;
  CHECK_THROWS_AS(extract_m(simulate_trace(fixtures::unit_gaussian(), PulseSequence::fid(), p)), InputError);
}

TEST_CASE("power-law fit recovers planted parameters", "[se][one_over_f]") {
  const auto fit = fit_one_over_f(power_law(0.04, 3.5, 0.2, 0.01));
  CHECK(fit.present);
  CHECK_THAT(fit.gamma, WithinRel(3.5, 1e-6));
  CHECK_THAT(fit.alpha, WithinRel(0.04, 1e-5));
  CHECK_THAT(fit.beta, WithinAbs(0.2, 1e-5));
  CHECK_THAT(fit.delta, WithinAbs(0.01, 1e-6));
  CHECK_THAT(fit.exponent, WithinRel(2.5, 1e-6));
  CHECK_THAT(fit.amplitude, WithinRel(0.04 / 0.0392982681164943, 1e-4));

  const auto none = fit_one_over_f(power_law(0.0, 2.0, 0.5, 0.0));
  CHECK_FALSE(none.present);

  AttenuationTrace tiny = power_law(1.0, 2.0, 0.0, 0.0);
  tiny.t.resize(5);
  tiny.chi.resize(5);
  tiny.source.resize(5);
  CHECK_THROWS_AS(fit_one_over_f(tiny), InputError);
}

TEST_CASE("regime classification", "[se][one_over_f]") {
  const auto lor = to_attenuation(echo_trace(SpectrumModel({Lorentzian{1.0, 1.5, 0.0, WidthForm::plain_hwhm}}),
                                             0.01, 8.0));
  CHECK(classify_regime(lor).regime == Regime::integrable);
  const auto flick = to_attenuation(echo_trace(SpectrumModel({OneOverF{1.0, 2.5}}), 0.01, 4.0, 0.0, 0.005));
  const auto r = classify_regime(flick);
  CHECK(r.regime == Regime::one_over_f);
  CHECK(r.power_law_r2 > 0.999);
}

TEST_CASE("1/f reconstruction flags the divergence", "[se][one_over_f]") {
  const auto trace = echo_trace(fixtures::flicker_plus_pair(), 4.0 / 300.0, 4.0, 0.01, 0.005);
  const auto s = reconstruct_with_one_over_f(trace);
  REQUIRE(s.one_over_f.has_value());
  CHECK(s.one_over_f->present);
  CHECK(std::isinf(s.S[0]));
  CHECK(s.extra["divergent_at_zero"] == true);
  CHECK_THAT(s.one_over_f->exponent, WithinAbs(2.5, 0.05));
  const auto rep = error_report(fixtures::flicker_plus_pair(), s, 0.5, 20.0);
  CHECK(std::isfinite(rep.max_delta()));

  const auto plain = reconstruct_with_one_over_f(echo_trace(fixtures::echo_mixture(), 0.01, 6.0));
  REQUIRE(plain.one_over_f.has_value());
  CHECK(std::isfinite(plain.S[0]));
}
