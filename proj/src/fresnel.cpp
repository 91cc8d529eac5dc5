#include "nearfield/fresnel.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace nearfield {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr double kSeriesLimit = 1.5;
constexpr int kMaxIter = 200;

FresnelPair series(double x) {
  // term_n = (-1)^floor(n/2) t^n / n! * x / (2n + 1), t = pi x^2 / 2;
  // even n feed C, odd n feed S.
  const double t = 0.5 * kPi * x * x;
  double power = x;  // t^n / n! * x
  double c = 0.0;
  double s = 0.0;
  for (int n = 0; n < kMaxIter; ++n) {
    const double sign = ((n / 2) % 2 == 0) ? 1.0 : -1.0;
    const double term = sign * power / (2.0 * n + 1.0);
    if (n % 2 == 0) {
      c += term;
    } else {
      s += term;
    }
    if (n > 2 && std::abs(term) < kEps * std::abs(n % 2 == 0 ? c : s)) break;
    power *= t / (n + 1.0);
  }
  return {c, s};
}

FresnelPair continued_fraction(double x) {
  using cplx = std::complex<double>;
  const double pix2 = kPi * x * x;
  cplx b(1.0, -pix2);
  cplx cc(1.0 / kTiny, 0.0);
  cplx d = 1.0 / b;
  cplx h = d;
  int n = -1;
  for (int k = 2; k <= kMaxIter; ++k) {
    n += 2;
    const double a = -static_cast<double>(n) * (n + 1);
    b += 4.0;
    d = 1.0 / (a * d + b);
    cc = b + a / cc;
    const cplx del = cc * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < kEps) break;
  }
  h *= cplx(x, -x);
  const cplx cs = cplx(0.5, 0.5) * (1.0 - std::polar(1.0, 0.5 * pix2) * h);
  return {cs.real(), cs.imag()};
}

}  // namespace

FresnelPair fresnel(double x) {
  if (!(x >= 0.0)) throw std::domain_error("Fresnel integrals are defined here for x >= 0");
  if (x == 0.0) return {0.0, 0.0};
  if (std::isinf(x)) return {0.5, 0.5};
  return x < kSeriesLimit ? series(x) : continued_fraction(x);
}

double fresnel_c(double x) { return fresnel(x).c; }
double fresnel_s(double x) { return fresnel(x).s; }

double g_magnitude(double beta) {
  if (!(beta >= 0.0)) throw std::domain_error("beta must be non-negative");
  if (beta == 0.0) return 1.0;
  const FresnelPair f = fresnel(beta);
  return std::hypot(f.c, f.s) / beta;
}

}  // namespace nearfield
