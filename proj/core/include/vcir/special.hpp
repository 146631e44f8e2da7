#ifndef VCIR_SPECIAL_HPP
#define VCIR_SPECIAL_HPP

namespace vcir {

// 1/Gamma(x) on the whole real line; returns 0 at the poles x = 0, -1, -2, ...
double rgamma(double x);

// Two-parameter Mittag-Leffler function E_{a,b}(z) for a in (0,1], b > 0,
// real z, to ~1e-10 relative accuracy. Taylor series for |z| <= 5, the
// Gorenflo-Loutchko-Luchko integral representation for z < -5, and an
// exponential-plus-algebraic expansion for z > 5. Throws numerical_error
// when no representation converges (very large positive z).
double mittag_leffler(double a, double b, double z);

// C_alpha = (1/pi) * Int_0^inf du / (1 + 2 u^alpha cos(pi alpha/2) + u^{2 alpha})
// for alpha in (1/2, 1], by quadrature with the tail mapped onto [0,1].
double c_alpha(double alpha);

} // namespace vcir

#endif
