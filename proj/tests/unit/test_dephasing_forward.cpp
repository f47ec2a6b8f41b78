#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "../fixtures.hpp"
#include "ftns/errors.hpp"
#include "ftns/forward.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace ftns;

namespace {

constexpr double kPi = std::numbers::pi;

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ftns_unit_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("filter values", "[filter]") {
  CHECK_THAT(filter_value(PulseSequence::fid(), 1.3, 2.0), WithinRel(2.19750148327686, 1e-13));
  CHECK_THAT(filter_value(PulseSequence::spin_echo(), 3.7, 2.5), WithinRel(0.345412125811076, 1e-13));
  CHECK_THAT(filter_value(PulseSequence::cpmg(4), 3.7, 2.5), WithinRel(0.637510902538707, 1e-12));
  CHECK_THAT(filter_value(PulseSequence::cpmg(3), 3.7, 2.5), WithinRel(2.47310309251327, 1e-12));
  CHECK_THAT(filter_value(PulseSequence::fid(), 0.0, 2.0), WithinRel(4.0, 1e-15));
  CHECK_THAT(filter_value(PulseSequence::spin_echo(), 0.0, 2.0), WithinAbs(0.0, 1e-15));
  CHECK_THROWS_AS(filter_value(PulseSequence::fid(), 1.0, -1.0), InputError);
}

TEST_CASE("closed-form filters match the segment sum", "[filter][property]") {
  std::mt19937_64 rng(20261018);
  std::uniform_real_distribution<double> w(-60.0, 60.0), t(0.01, 8.0);
  const PulseSequence seqs[] = {PulseSequence::fid(), PulseSequence::spin_echo(), PulseSequence::cpmg(1),
                                PulseSequence::cpmg(2), PulseSequence::cpmg(7), PulseSequence::cpmg(32)};
  for (const auto& s : seqs) {
    const double k = filter_tail_constant(s);
    for (int i = 0; i < 400; ++i) {
      const double om = w(rng), tt = t(rng);
      const double f = filter_value(s, om, tt);
      CHECK_THAT(f, WithinAbs(filter_by_segments(s, om, tt), 1e-9 * (1.0 + tt * tt)));
      CHECK(f >= 0.0);
      CHECK_THAT(filter_value(s, -om, tt), WithinAbs(f, 1e-12 * (1.0 + f)));
      CHECK(f <= k / (om * om) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("filter low-frequency order", "[filter]") {
  CHECK(PulseSequence::fid().low_frequency_order() == 0);
  CHECK(PulseSequence::spin_echo().low_frequency_order() == 1);
  CHECK(PulseSequence::cpmg(3).low_frequency_order() == 1);
  CHECK(PulseSequence::cpmg(4).low_frequency_order() == 2);
  for (const auto& s : {PulseSequence::spin_echo(), PulseSequence::cpmg(3), PulseSequence::cpmg(4)}) {
    const int p = s.low_frequency_order();
    const double a = filter_value(s, 1e-2, 1.0) / std::pow(1e-2, 2 * p);
    const double b = filter_value(s, 5e-3, 1.0) / std::pow(5e-3, 2 * p);
    CHECK_THAT(a, WithinRel(b, 1e-3));
  }
}

TEST_CASE("pulse timing", "[sequence]") {
  const auto times = PulseSequence::cpmg(4).pulse_times(2.0);
  REQUIRE(times.size() == 4);
  for (int j = 1; j <= 4; ++j) CHECK_THAT(times[j - 1], WithinRel((j - 0.5) * 2.0 / 4.0, 1e-15));
  CHECK(PulseSequence::spin_echo().pulse_times(3.0) == std::vector<double>{1.5});
  CHECK(PulseSequence::fid().pulse_times(3.0).empty());
  const auto seg = PulseSequence::cpmg(2).segments(1.0);
  double total = 0.0;
  for (const auto& s : seg) total += s.end - s.begin;
  CHECK_THAT(total, WithinRel(1.0, 1e-15));
  CHECK_THROWS_AS(PulseSequence::cpmg(0), InputError);
  CHECK_THROWS_AS(PulseSequence::parse("hahn"), InputError);
  CHECK(PulseSequence::parse("cpmg", 8) == PulseSequence::cpmg(8));
}

TEST_CASE("attenuation routes agree", "[forward][property]") {
  const auto fid = PulseSequence::fid();
  const auto se = PulseSequence::spin_echo();
  struct Case {
    SpectrumModel model;
    PulseSequence seq;
    double t;
  };
  const Case cases[] = {
      {fixtures::unit_gaussian(), fid, 2.0},         {fixtures::single_lorentzian(), fid, 1.0},
      {fixtures::gaussian_mixture(), fid, 1.7},      {fixtures::lorentzian_triplet(), fid, 0.4},
      {fixtures::lorentzian_triplet(), se, 0.9},     {fixtures::echo_mixture(), se, 2.0},
      {fixtures::gaussian_mixture(), se, 3.0},       {fixtures::unit_gaussian(), PulseSequence::cpmg(3), 2.5},
  };
  for (const auto& c : cases) {
    const double freq = attenuation(c.model, c.seq, c.t, Route::frequency);
    const double time = attenuation(c.model, c.seq, c.t, Route::time);
    CHECK_THAT(time, WithinRel(freq, 1e-9));
    if (auto exact = closed_form_chi(c.model, c.seq, c.t)) CHECK_THAT(freq, WithinRel(*exact, 1e-10));
  }
}

TEST_CASE("1/f attenuation", "[forward]") {
  const SpectrumModel m({OneOverF{1.0, 2.5}});
  CHECK_THAT(attenuation(m, PulseSequence::spin_echo(), 1.3, Route::frequency),
             WithinRel(0.0392982681164943 * std::pow(1.3, 3.5), 1e-9));
  CHECK_THAT(attenuation(SpectrumModel({OneOverF{1.0, 1.5}}), PulseSequence::spin_echo(), 1.0, Route::frequency),
             WithinRel(*closed_form_chi(SpectrumModel({OneOverF{1.0, 1.5}}), PulseSequence::spin_echo(), 1.0), 1e-9));
  CHECK_THROWS_AS(attenuation(m, PulseSequence::fid(), 1.0), DivergentIntegral);
  CHECK_THROWS_AS(attenuation(SpectrumModel({OneOverF{1.0, 1.0}}), PulseSequence::fid(), 1.0), DivergentIntegral);
  CHECK(std::isfinite(attenuation(SpectrumModel({OneOverF{1.0, 0.5}}), PulseSequence::fid(), 1.0)));
  CHECK(std::isfinite(attenuation(SpectrumModel({OneOverF{1.0, 2.9}}), PulseSequence::cpmg(3), 1.0)));
  CHECK_THROWS_AS(attenuation(m, PulseSequence::spin_echo(), 1.0, Route::time), DomainError);
  CHECK_THROWS_AS(attenuation(m, PulseSequence::spin_echo(), -1.0), InputError);
}

TEST_CASE("attenuation is additive over components", "[forward][property]") {
  const auto parts = fixtures::echo_mixture().components();
  for (double t : {0.5, 2.0, 5.0}) {
    double sum = 0.0;
    for (const auto& c : parts) sum += attenuation(SpectrumModel({c}), PulseSequence::spin_echo(), t);
    CHECK_THAT(attenuation(fixtures::echo_mixture(), PulseSequence::spin_echo(), t), WithinRel(sum, 1e-10));
  }
}

TEST_CASE("echo suppresses quasi-static broadening", "[forward]") {
  const auto m = fixtures::echo_mixture();
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (attenuation(m, PulseSequence::fid(), mid) < 1.0 ? lo : hi) = mid;
  }
  const double t2 = lo;
  CHECK(t2 > 0.5);
  for (double f : {0.02, 0.05, 0.1, 0.15, 0.199}) {
    const double t = f * t2;
    CHECK(attenuation(m, PulseSequence::spin_echo(), t) / attenuation(m, PulseSequence::fid(), t) < 0.1);
  }
}

TEST_CASE("simulated trace grid and mask", "[trace]") {
  MeasurementPlan plan;
  plan.dt = 0.01;
  plan.t_max = 4.0;
  plan.tau_min = 0.05;
  plan.coherence_floor = 0.05;
  const auto tr = simulate_trace(fixtures::single_lorentzian(), PulseSequence::fid(), plan);
  REQUIRE(tr.size() == plan.grid_size());
  CHECK(tr.size() == 401);
  CHECK(tr.C[0] == 1.0);
  CHECK(tr.mask[0] == SampleMask::measured);
  for (std::size_t k = 1; k < 5; ++k) CHECK(tr.mask[k] == SampleMask::withheld_below_tau_min);
  CHECK(tr.mask[5] == SampleMask::measured);
  const std::size_t kept = tr.retained();
  CHECK(tr.C[kept - 1] > plan.coherence_floor);
  CHECK(tr.C[kept] <= plan.coherence_floor);
  for (std::size_t k = kept; k < tr.size(); ++k) CHECK(tr.mask[k] == SampleMask::truncated_by_floor);
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK_THAT(tr.t[k], WithinRel(k * plan.dt, 1e-15));
}

TEST_CASE("noisy traces are reproducible from the seed", "[trace]") {
  MeasurementPlan plan;
  plan.dt = 0.01;
  plan.t_max = 2.0;
  plan.coherence_floor = 0.0;
  plan.noise_sigma = 0.01;
  plan.seed = 42;
  const auto a = simulate_trace(fixtures::unit_gaussian(), PulseSequence::fid(), plan);
  const auto b = simulate_trace(fixtures::unit_gaussian(), PulseSequence::fid(), plan);
  CHECK(a.C == b.C);
  plan.seed = 43;
  const auto c = simulate_trace(fixtures::unit_gaussian(), PulseSequence::fid(), plan);
  CHECK(a.C != c.C);
  plan.noise_sigma = 0.0;
  const auto clean = simulate_trace(fixtures::unit_gaussian(), PulseSequence::fid(), plan);
  double var = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) var += (a.C[k] - clean.C[k]) * (a.C[k] - clean.C[k]);
  const double rms = std::sqrt(var / static_cast<double>(a.size() - 1));
  const double span = 1.0 - *std::min_element(clean.C.begin(), clean.C.end());
  CHECK_THAT(rms, WithinRel(0.01 * span, 0.15));
}

TEST_CASE("plan validation", "[trace]") {
  MeasurementPlan p;
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = MeasurementPlan{};
  p.dt = 2.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = MeasurementPlan{};
  p.coherence_floor = 1.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = MeasurementPlan{};
  p.noise_sigma = -1.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = MeasurementPlan{};
  p.tau_min = -0.1;
  CHECK_THROWS_AS(p.validate(), InputError);
}

TEST_CASE("T2 from the tail slope", "[trace]") {
  MeasurementPlan plan;
  plan.dt = 0.00314;
  plan.t_max = 6.05706;
  plan.coherence_floor = 0.0;
  const auto tr = simulate_trace(fixtures::single_lorentzian(), PulseSequence::fid(), plan);
  CHECK_THAT(t2_from_trace(tr, T2Definition::slope), WithinRel(1.0 / asymptotic_fid_slope(fixtures::single_lorentzian()), 0.01));
  const double te = t2_from_trace(tr, T2Definition::e_folding);
  CHECK_THAT(attenuation(fixtures::single_lorentzian(), PulseSequence::fid(), te), WithinRel(1.0, 1e-4));
}

TEST_CASE("trace csv round trip", "[trace][io]") {
  MeasurementPlan plan;
  plan.dt = 0.007;
  plan.t_max = 1.5;
  plan.tau_min = 0.02;
  plan.noise_sigma = 0.001;
  plan.seed = 9;
  auto tr = simulate_trace(fixtures::gaussian_mixture(), PulseSequence::fid(), plan);
  tr.config_hash = "abc123";
  const auto dir = scratch_dir("trace");
  write_trace(tr, dir / "trace.csv");
  CHECK(std::filesystem::exists(dir / "trace.json"));
  const auto back = read_trace(dir / "trace.csv");
  CHECK(back.t == tr.t);
  CHECK(back.C == tr.C);
  CHECK(back.mask == tr.mask);
  CHECK(back.plan.seed == 9);
  CHECK(back.plan.dt == plan.dt);
  CHECK(back.sequence == tr.sequence);
  CHECK(back.config_hash == "abc123");

  std::ifstream in(dir / "trace.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,C,mask");

  std::ofstream(dir / "bad.csv") << "t,C,mask\n0,1,measured\n0.1,abc,measured\n";
  std::filesystem::copy_file(dir / "trace.json", dir / "bad.json");
  try {
    read_trace(dir / "bad.csv");
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("row 3"));
  }
  std::ofstream(dir / "nosidecar.csv") << "t,C,mask\n0,1,measured\n";
  CHECK_THROWS_AS(read_trace(dir / "nosidecar.csv"), InputError);
}

TEST_CASE("number formatting keeps 17 significant digits", "[io]") {
  for (double v : {0.1, 1.0 / 3.0, kPi, 1e-300, 123456.789012345678}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}
