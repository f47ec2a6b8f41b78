#include "ftns/special_functions.hpp"

#include <cmath>
#include <numbers>

#include "ftns/errors.hpp"

namespace ftns {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(pi x) with the argument reduced first, so that values near integers keep
// their relative accuracy.
double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  if (r > 1.0) return -sin_pi(r - 1.0);
  if (r > 0.5) r = 1.0 - r;
  return std::sin(kPi * r);
}

// Y_n / A = -(1/pi) (1 - 2^(1-n)) sin(pi n / 2) Gamma(-n - 1)
double general_branch(double n) {
  const double one_minus_pow = -std::expm1((1.0 - n) * std::numbers::ln2);
  return -one_minus_pow * sin_pi(0.5 * n) * gamma_fn(-n - 1.0) / kPi;
}

}  // namespace

double gamma_fn(double x) {
  if (x > 0.0) return std::tgamma(x);
  if (x == std::floor(x)) throw DomainError("gamma function pole at " + std::to_string(x));
  return kPi / (sin_pi(x) * std::tgamma(1.0 - x));
}

double one_over_f_se_coefficient(double amplitude, double n) {
  if (!(n > 0.0 && n < 3.0)) {
    throw DomainError("spin-echo 1/f coefficient needs 0 < n < 3, got " + std::to_string(n));
  }
  if (n == 1.0) return amplitude * std::numbers::ln2 / (2.0 * kPi);
  if (n == 2.0) return amplitude / 24.0;
  return amplitude * general_branch(n);
}

double one_over_f_amplitude(double alpha, double gamma) {
  const double n = gamma - 1.0;
  const double unit = one_over_f_se_coefficient(1.0, n);
  return alpha / unit;
}

}  // namespace ftns
