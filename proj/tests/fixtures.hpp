#pragma once

#include <numbers>

#include "ftns/spectrum.hpp"

namespace fixtures {

inline ftns::SpectrumModel unit_gaussian() { return ftns::SpectrumModel({ftns::Gaussian{1.0, 1.0, 0.0}}); }

inline ftns::SpectrumModel single_lorentzian() {
  return ftns::SpectrumModel({ftns::Lorentzian{2.0, 10.186, 0.0, ftns::WidthForm::fig1}});
}

inline ftns::SpectrumModel gaussian_mixture() {
  return ftns::SpectrumModel({ftns::Gaussian{1.998, 0.9537, 0.0}, ftns::Gaussian{0.3995, 0.1272, 1.272},
                              ftns::Gaussian{0.7990, 0.9537, 4.769}, ftns::Gaussian{0.9988, 0.9537, 2.543}});
}

inline ftns::SpectrumModel lorentzian_triplet() {
  return ftns::SpectrumModel({ftns::Lorentzian{1.939, 19.39, 0.0, ftns::WidthForm::fig1},
                              ftns::Lorentzian{6.093, 19.39, 12.12, ftns::WidthForm::fig2b}});
}

inline ftns::SpectrumModel echo_mixture() {
  constexpr double pi = std::numbers::pi;
  return ftns::SpectrumModel({ftns::Lorentzian{150.0 * pi, 0.02, 0.0, ftns::WidthForm::fig1},
                              ftns::Lorentzian{2.0 * pi, 6.0, 15.0 / 8.0, ftns::WidthForm::fig5},
                              ftns::Lorentzian{pi, 2.0, 20.0 / 8.0, ftns::WidthForm::fig5},
                              ftns::Lorentzian{2.0, 1.0, 10.0 / 8.0, ftns::WidthForm::fig5}});
}

inline ftns::SpectrumModel flicker_plus_pair() {
  return ftns::SpectrumModel({ftns::OneOverF{1.0, 2.5}, ftns::Lorentzian{1.0, 1.5, 12.5, ftns::WidthForm::plain_hwhm}});
}

}  // namespace fixtures
