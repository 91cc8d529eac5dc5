#pragma once

namespace nearfield {

// Fresnel integrals C(x) = int_0^x cos(pi t^2 / 2) dt and S(x) likewise with sin.
// Power series below x = 1.5, Lentz continued fraction above; ~1e-15 absolute.
double fresnel_c(double x);
double fresnel_s(double x);

struct FresnelPair {
  double c;
  double s;
};
FresnelPair fresnel(double x);

// |G(beta)| = |C(beta) + j S(beta)| / beta with the limit 1 at beta = 0.
double g_magnitude(double beta);

}  // namespace nearfield
