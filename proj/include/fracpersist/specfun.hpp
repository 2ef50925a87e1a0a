#pragma once

#include "fracpersist/hurst.hpp"

namespace fracpersist {

/// log Gamma(x) for x > 0. Relative error below 1e-13 on [1e-3, 1e3].
double ln_gamma(double x);

/// Digamma Psi(x) = Gamma'(x)/Gamma(x) for x > 0.
double digamma(double x);

/// 2F1(1, 1/2 - H; 3/2 + H; x) for 0 <= x < 1.
///
/// Sums the hypergeometric series for x <= 0.5. Above that it integrates
///     int_0^1 (1 - x + x w^{1/(H+1/2)})^{H-1/2} dw,
/// which is Euler's integral for 2F1(1/2 - H, 1; 3/2 + H; x) after the
/// substitution t = 1 - w^{1/(H+1/2)}. It is valid on the whole interval H in (0,1).
double hyp2f1_special(double hurst, double x);

/// Series branch only; converges for x < 1 but slowly near 1.
double hyp2f1_special_series(double hurst, double x);
/// Integral branch only.
double hyp2f1_special_integral(double hurst, double x);

struct SigmaConstants {
    /// sigma_H^2, the Mandelbrot-van Ness normalisation.
    double sigma_sq;
    /// sigma~^2(H) = 2 H sigma_H^2.
    double sigma_tilde_sq;
    /// sigma~^2(H) - 1, computed without cancellation near H = 1/2.
    double sigma_tilde_sq_minus_one;
    /// Var M_1^H = sigma_H^2 - 1/(2H).
    double var_m1;
};

SigmaConstants sigma_constants(const Hurst& hurst);

/// sigma~^2(H) = pi^{-1/2} 2^{1-2H} Gamma(H + 1/2) Gamma(1 - H), any H in (0,1).
double sigma_tilde_sq(double hurst);

}  // namespace fracpersist
