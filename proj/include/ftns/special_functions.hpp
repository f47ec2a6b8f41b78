#pragma once

namespace ftns {

// Gamma function for any real argument that is not a pole. Negative arguments go
// through the reflection formula.
double gamma_fn(double x);

// Coefficient Y_n of chi_SE(t) = Y_n t^(n+1) for S(w) = A / |w|^n, 0 < n < 3.
// n = 1 and n = 2 use their closed forms A ln2 / (2 pi) and A / 24.
double one_over_f_se_coefficient(double amplitude, double n);

// Inverse of the above: the amplitude A whose spin-echo attenuation is alpha t^gamma,
// with n = gamma - 1.
double one_over_f_amplitude(double alpha, double gamma);

}  // namespace ftns
