#pragma once

#include "fracpersist/hurst.hpp"
#include "fracpersist/quadrature.hpp"
#include "fracpersist/specfun.hpp"

#include <memory>
#include <optional>
#include <string>

namespace fracpersist {

/*
 * Kernels of the moving-average representation
 *     M_t^H = int_0^inf k_t^H(s) dB_s,   k_t^H(s) = (t+s)^{H-1/2} - s^{H-1/2},
 * and of its Lamperti transform, K_tau^H(s) = e^{-H tau} k_{e^tau}^H(s).
 * Both are evaluated as s^{H-1/2} expm1((H-1/2) log1p(t/s)), which stays
 * accurate for s >> t where the two powers nearly cancel.
 */
double kernel_k(double hurst, double t, double s);
double kernel_K(double hurst, double tau, double s);
/// Kernel of M^{*,1/2}: log(1 + t/s).
double kernel_log(double t, double s);

/// Lamperti correlation of fractional Brownian motion.
double corr_ch(double hurst, double tau);
/// Lamperti correlation of the Riemann-Liouville process.
double corr_rh(double hurst, double tau);
/// Lamperti correlation of M^H from the closed form in c_H and r_H.
double corr_gh_closed(const Hurst& hurst, double tau);

struct GhQuadrature {
    double value;
    /// int_0^inf K_0 K_tau, and its error estimate.
    double numerator;
    double numerator_error;
    /// int_0^inf K_0^2 = Var M_1^H, and its error estimate.
    double normalizer;
    double normalizer_error;
};

/// Lamperti correlation of M^H from the kernel integrals.
GhQuadrature corr_gh_quad_detail(const Hurst& hurst, double tau, const QuadratureSpec& q = {});
double corr_gh_quad(const Hurst& hurst, double tau, const QuadratureSpec& q = {});

/// int_0^inf K_0^H(s) K_tau^H(s) ds for any H in (0,1), including the
/// degenerate band (where it is O((H-1/2)^2)).
QuadResult kernel_product_integral(double hurst, double tau, const QuadratureSpec& q = {});

/// int_0^inf log(1 + e^{a}/u) log(1 + e^{b}/u) du.
QuadResult log_kernel_product_integral(double a, double b, const QuadratureSpec& q = {});

/// Limit correlation at H = 1/2.
double corr_gstar_half(double tau, const QuadratureSpec& q = {});

enum class CorrelationKind { CH, RH, GHClosed, GHQuad, GStarHalf, Exponential, Rescaled };

/// Immutable correlation evaluator tau -> rho(tau). Cheap to copy and safe to
/// share across threads.
class CorrelationFn {
public:
    static CorrelationFn ch(const Hurst& hurst);
    static CorrelationFn rh(const Hurst& hurst);
    /// Closed-form g_H. Inside the degenerate band this routes to g_{*,1/2}
    /// and records a warning.
    static CorrelationFn gh_closed(const Hurst& hurst);
    static CorrelationFn gh_quad(const Hurst& hurst, const QuadratureSpec& q = {});
    static CorrelationFn gstar_half(const QuadratureSpec& q = {});
    static CorrelationFn exponential(double rate);
    /// tau -> base(tau / kappa).
    static CorrelationFn rescaled(const CorrelationFn& base, double kappa);

    double operator()(double tau) const;
    /// Evaluate on a uniform grid 0, step, ..., (n-1) step.
    Vector tabulate(double step, Index n) const;

    CorrelationKind kind() const noexcept { return kind_; }
    const std::optional<Hurst>& hurst() const noexcept { return hurst_; }
    double rate() const noexcept { return rate_; }
    double kappa() const noexcept { return kappa_; }
    const CorrelationFn* base() const noexcept { return base_.get(); }
    const std::string& warning() const noexcept { return warning_; }

    /// Stable, human-readable identity, e.g. "gh_closed(H=0.3)".
    std::string descriptor() const;

private:
    CorrelationFn() = default;

    CorrelationKind kind_ = CorrelationKind::Exponential;
    std::optional<Hurst> hurst_;
    double rate_ = 1.0;
    double kappa_ = 1.0;
    QuadratureSpec quad_;
    std::shared_ptr<const CorrelationFn> base_;
    std::string warning_;
    // Cached sigma~^2 and sigma~^2 - 1 for the closed form.
    double st_ = 0.0;
    double st_minus_one_ = 0.0;
};

}  // namespace fracpersist
