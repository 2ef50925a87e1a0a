#include "fracpersist/corrlib.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fracpersist {

namespace {

void require_tau(double tau, const char* who)
{
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        std::ostringstream os;
        os << who << ": tau must be finite and nonnegative, got " << tau;
        throw DomainError(os.str());
    }
}

void require_open_unit(double hurst, const char* who)
{
    if (!(hurst > 0.0 && hurst < 1.0)) {
        std::ostringstream os;
        os << who << ": H must lie in (0,1), got " << hurst;
        throw DomainError(os.str());
    }
}

// log(1 - e^{-tau}) for tau > 0.
double log_one_minus_exp(double tau)
{
    return tau < constants::ln2 ? std::log(-std::expm1(-tau)) : std::log1p(-std::exp(-tau));
}

}  // namespace

double kernel_k(double hurst, double t, double s)
{
    if (!(s > 0.0)) throw DomainError("kernel_k: s must be positive");
    if (!(t >= 0.0)) throw DomainError("kernel_k: t must be nonnegative");
    const double p = hurst - 0.5;
    return std::pow(s, p) * std::expm1(p * std::log1p(t / s));
}

double kernel_K(double hurst, double tau, double s)
{
    if (!(s > 0.0)) throw DomainError("kernel_K: s must be positive");
    require_tau(tau, "kernel_K");
    const double p = hurst - 0.5;
    // log1p(e^tau / s) without overflowing e^tau.
    const double lt = tau - std::log(s);
    const double l = lt > 30.0 ? lt + std::log1p(std::exp(-lt)) : std::log1p(std::exp(lt));
    return std::exp(-hurst * tau) * std::pow(s, p) * std::expm1(p * l);
}

double kernel_log(double t, double s)
{
    if (!(s > 0.0)) throw DomainError("kernel_log: s must be positive");
    return std::log1p(t / s);
}

double corr_ch(double hurst, double tau)
{
    require_open_unit(hurst, "corr_ch");
    require_tau(tau, "corr_ch");
    if (tau == 0.0) return 1.0;
    // 2 c_H = e^{-tau H} + e^{tau H} (1 - (1 - e^{-tau})^{2H})
    const double gap = -std::expm1(2.0 * hurst * log_one_minus_exp(tau));
    const double second = std::exp(tau * hurst + std::log(gap));
    return 0.5 * (std::exp(-tau * hurst) + second);
}

double corr_rh(double hurst, double tau)
{
    require_open_unit(hurst, "corr_rh");
    require_tau(tau, "corr_rh");
    if (tau == 0.0) return 1.0;
    if (hurst == 0.5) return std::exp(-0.5 * tau);
    return 4.0 * hurst / (1.0 + 2.0 * hurst) * std::exp(-0.5 * tau) * hyp2f1_special(hurst, std::exp(-tau));
}

namespace {

double gh_closed_impl(double hurst, double st, double st_minus_one, double tau)
{
    if (tau == 0.0) return 1.0;
    return (st * corr_ch(hurst, tau) - corr_rh(hurst, tau)) / st_minus_one;
}

void require_nondegenerate(const Hurst& hurst, const char* who)
{
    if (hurst.degenerate()) {
        std::ostringstream os;
        os << who << ": H = " << hurst.value() << " lies in the degenerate band |H - 1/2| < " << hurst.half_band()
           << "; use the g_{*,1/2} correlation or the kernel quadrature instead";
        throw DegenerateHurst(os.str());
    }
}

}  // namespace

double corr_gh_closed(const Hurst& hurst, double tau)
{
    require_nondegenerate(hurst, "corr_gh_closed");
    require_tau(tau, "corr_gh_closed");
    const auto sc = sigma_constants(hurst);
    return gh_closed_impl(hurst.value(), sc.sigma_tilde_sq, sc.sigma_tilde_sq_minus_one, tau);
}

QuadResult kernel_product_integral(double hurst, double tau, const QuadratureSpec& q)
{
    require_open_unit(hurst, "kernel_product_integral");
    require_tau(tau, "kernel_product_integral");
    QuadResult total;
    if (hurst == 0.5) return total;
    const double p = hurst - 0.5;
    // Integrands are O(p^2); scale them to O(1) so that absolute tolerances
    // remain meaningful near H = 1/2.
    const double scale = 1.0 / (p * p);
    const double damp = std::exp(-hurst * tau);
    auto product = [=](double s) { return scale * kernel_k(hurst, 1.0, s) * kernel_K(hurst, tau, s); };

    auto accumulate = [&total](const QuadResult& r) {
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
        total.panels += r.panels;
    };

    QuadratureSpec piece = q;
    piece.split_points.clear();

    // (0,1]: for H < 1/2 the product behaves like s^{2H-1}; s = w^{1/(2H)}
    // turns that into a bounded integrand.
    if (hurst < 0.5) {
        const double m = 1.0 / (2.0 * hurst);
        auto head = [=](double w) {
            const double s = std::pow(w, m);
            if (s < 1e-290) return scale * damp * m;
            return product(s) * m * std::pow(w, m - 1.0);
        };
        accumulate(integrate(head, 0.0, 1.0, piece));
    } else {
        auto head = [=](double s) { return s > 0.0 ? product(s) : scale * damp; };
        accumulate(integrate(head, 0.0, 1.0, piece));
    }
    // (1, e^tau] with s = e^v.
    if (tau > 0.0) {
        auto middle = [=](double v) {
            const double s = std::exp(v);
            return product(s) * s;
        };
        accumulate(integrate(middle, 0.0, tau, piece));
    }
    // (e^tau, inf) with s = 1/w.
    // The product decays like s^{2H-3}.
    accumulate(integrate_to_infinity(product, std::exp(tau), piece, 3.0 - 2.0 * hurst));

    total.value /= scale;
    total.error /= scale;
    return total;
}

GhQuadrature corr_gh_quad_detail(const Hurst& hurst, double tau, const QuadratureSpec& q)
{
    require_nondegenerate(hurst, "corr_gh_quad");
    require_tau(tau, "corr_gh_quad");
    const auto den = kernel_product_integral(hurst.value(), 0.0, q);
    const auto sc = sigma_constants(hurst);
    if (std::abs(den.value - sc.var_m1) > 1e-8 * std::max(1.0, sc.var_m1) + 10.0 * den.error) {
        std::ostringstream os;
        os << std::setprecision(17) << "corr_gh_quad: normaliser " << den.value << " disagrees with Var M_1 = "
           << sc.var_m1 << " at H = " << hurst.value();
        throw QuadratureFailure(os.str(), den.value, den.error);
    }
    GhQuadrature out{};
    out.normalizer = den.value;
    out.normalizer_error = den.error;
    if (tau == 0.0) {
        out.numerator = den.value;
        out.numerator_error = den.error;
        out.value = 1.0;
        return out;
    }
    const auto num = kernel_product_integral(hurst.value(), tau, q);
    out.numerator = num.value;
    out.numerator_error = num.error;
    out.value = num.value / den.value;
    return out;
}

double corr_gh_quad(const Hurst& hurst, double tau, const QuadratureSpec& q)
{
    return corr_gh_quad_detail(hurst, tau, q).value;
}

QuadResult log_kernel_product_integral(double a, double b, const QuadratureSpec& q)
{
    if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("log_kernel_product_integral: finite shifts required");
    if (a > b) std::swap(a, b);
    // log1p(e^x) without overflow.
    auto softplus = [](double x) { return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
    QuadResult total;
    auto accumulate = [&total](const QuadResult& r) {
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
        total.panels += r.panels;
    };
    QuadratureSpec piece = q;
    piece.split_points.clear();

    // (0, 1] with u = e^{-v}; the integrand is below 1e-25 beyond v = 80 + b.
    const double v_max = 80.0 + std::max(0.0, b);
    auto head = [=](double v) { return softplus(a + v) * softplus(b + v) * std::exp(-v); };
    accumulate(integrate(head, 0.0, v_max, piece));
    // (1, e^b] with u = e^v; on this piece both factors are smooth.
    if (b > 0.0) {
        auto middle = [=](double v) {
            const double u = std::exp(v);
            return softplus(a - v) * softplus(b - v) * u;
        };
        QuadratureSpec mid = piece;
        if (a > 0.0 && a < b) mid.split_points = {a};
        accumulate(integrate(middle, 0.0, b, mid));
    }
    // (max(1,e^b), inf) with u = 1/w.
    const double ea = std::exp(a);
    const double eb = std::exp(b);
    auto tail = [=](double u) { return std::log1p(ea / u) * std::log1p(eb / u); };
    accumulate(integrate_to_infinity(tail, std::max(1.0, eb), piece));
    return total;
}

double corr_gstar_half(double tau, const QuadratureSpec& q)
{
    require_tau(tau, "corr_gstar_half");
    if (tau == 0.0) return 1.0;
    const auto r = log_kernel_product_integral(0.0, tau, q);
    return std::exp(-0.5 * tau) * r.value / constants::log_kernel_norm;
}

// CorrelationFn ------------------------------------------------------------

CorrelationFn CorrelationFn::ch(const Hurst& hurst)
{
    CorrelationFn f;
    f.kind_ = CorrelationKind::CH;
    f.hurst_ = hurst;
    return f;
}

CorrelationFn CorrelationFn::rh(const Hurst& hurst)
{
    CorrelationFn f;
    f.kind_ = CorrelationKind::RH;
    f.hurst_ = hurst;
    return f;
}

CorrelationFn CorrelationFn::gh_closed(const Hurst& hurst)
{
    if (hurst.degenerate()) {
        auto f = gstar_half();
        std::ostringstream os;
        os << "H = " << hurst.value() << " is in the degenerate band; using g_{*,1/2}";
        f.warning_ = os.str();
        return f;
    }
    CorrelationFn f;
    f.kind_ = CorrelationKind::GHClosed;
    f.hurst_ = hurst;
    const auto sc = sigma_constants(hurst);
    f.st_ = sc.sigma_tilde_sq;
    f.st_minus_one_ = sc.sigma_tilde_sq_minus_one;
    return f;
}

CorrelationFn CorrelationFn::gh_quad(const Hurst& hurst, const QuadratureSpec& q)
{
    q.validate();
    if (hurst.degenerate()) {
        auto f = gstar_half(q);
        std::ostringstream os;
        os << "H = " << hurst.value() << " is in the degenerate band; using g_{*,1/2}";
        f.warning_ = os.str();
        return f;
    }
    CorrelationFn f;
    f.kind_ = CorrelationKind::GHQuad;
    f.hurst_ = hurst;
    f.quad_ = q;
    return f;
}

CorrelationFn CorrelationFn::gstar_half(const QuadratureSpec& q)
{
    q.validate();
    CorrelationFn f;
    f.kind_ = CorrelationKind::GStarHalf;
    f.quad_ = q;
    return f;
}

CorrelationFn CorrelationFn::exponential(double rate)
{
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential correlation: rate must be positive");
    CorrelationFn f;
    f.kind_ = CorrelationKind::Exponential;
    f.rate_ = rate;
    return f;
}

CorrelationFn CorrelationFn::rescaled(const CorrelationFn& base, double kappa)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("rescaled correlation: kappa must be positive");
    CorrelationFn f;
    f.kind_ = CorrelationKind::Rescaled;
    f.kappa_ = kappa;
    f.base_ = std::make_shared<const CorrelationFn>(base);
    f.warning_ = base.warning_;
    return f;
}

double CorrelationFn::operator()(double tau) const
{
    require_tau(tau, "correlation");
    switch (kind_) {
    case CorrelationKind::CH:
        return corr_ch(hurst_->value(), tau);
    case CorrelationKind::RH:
        return corr_rh(hurst_->value(), tau);
    case CorrelationKind::GHClosed:
        return gh_closed_impl(hurst_->value(), st_, st_minus_one_, tau);
    case CorrelationKind::GHQuad:
        return corr_gh_quad(*hurst_, tau, quad_);
    case CorrelationKind::GStarHalf:
        return corr_gstar_half(tau, quad_);
    case CorrelationKind::Exponential:
        return std::exp(-rate_ * tau);
    case CorrelationKind::Rescaled:
        return (*base_)(tau / kappa_);
    }
    return 0.0;
}

Vector CorrelationFn::tabulate(double step, Index n) const
{
    if (!(step > 0.0)) throw DomainError("tabulate: step must be positive");
    Vector out(n);
    for (Index i = 0; i < n; ++i) out[i] = (*this)(step * static_cast<double>(i));
    return out;
}

std::string CorrelationFn::descriptor() const
{
    std::ostringstream os;
    os << std::setprecision(17);
    switch (kind_) {
    case CorrelationKind::CH:
        os << "ch(H=" << hurst_->value() << ")";
        break;
    case CorrelationKind::RH:
        os << "rh(H=" << hurst_->value() << ")";
        break;
    case CorrelationKind::GHClosed:
        os << "gh_closed(H=" << hurst_->value() << ")";
        break;
    case CorrelationKind::GHQuad:
        os << "gh_quad(H=" << hurst_->value() << ")";
        break;
    case CorrelationKind::GStarHalf:
        os << "gstar_half";
        break;
    case CorrelationKind::Exponential:
        os << "exp(rate=" << rate_ << ")";
        break;
    case CorrelationKind::Rescaled:
        os << "rescaled(" << base_->descriptor() << ",kappa=" << kappa_ << ")";
        break;
    }
    return os.str();
}

}  // namespace fracpersist
