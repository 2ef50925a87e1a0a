#include "fracpersist/specfun.hpp"

#include "fracpersist/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace fracpersist {

namespace {

// Lanczos approximation, g = 7, n = 9.
constexpr double lanczos_g = 7.0;
constexpr std::array<double, 9> lanczos_coefficients = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

double ln_gamma_lanczos(double x)
{
    const double z = x - 1.0;
    double series = lanczos_coefficients[0];
    for (int k = 1; k < 9; ++k) series += lanczos_coefficients[k] / (z + k);
    const double t = z + lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * constants::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

// zeta(k) - 1 for k = 2..kZetaTerms+1 by Euler-Maclaurin with N = 20.
constexpr int kZetaTerms = 40;

const std::array<double, kZetaTerms + 2>& zeta_minus_one_table()
{
    static const auto table = [] {
        std::array<double, kZetaTerms + 2> z{};
        constexpr int N = 20;
        constexpr std::array<double, 5> bernoulli = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0};
        for (int k = 2; k < kZetaTerms + 2; ++k) {
            double head = 0.0;
            for (int n = N - 1; n >= 2; --n) head += std::pow(static_cast<double>(n), -k);
            double tail = std::pow(static_cast<double>(N), 1 - k) / (k - 1) + 0.5 * std::pow(static_cast<double>(N), -k);
            double rising = k;  // k (k+1) ... (k+2j-2)
            double factorial = 2.0;
            for (int j = 1; j <= 5; ++j) {
                tail += bernoulli[j - 1] / factorial * rising * std::pow(static_cast<double>(N), -k - 2 * j + 1);
                rising *= (k + 2 * j - 1) * (k + 2 * j);
                factorial *= (2 * j + 1) * (2 * j + 2);
            }
            z[k] = head + tail;
        }
        return z;
    }();
    return table;
}

// log Gamma(1 + z) for |z| <= 0.5.
double ln_gamma_1p(double z)
{
    const auto& zeta = zeta_minus_one_table();
    double sum = 0.0;
    double power = z * z;
    for (int k = 2; k < kZetaTerms + 2; ++k) {
        const double term = zeta[k] * power / k;
        sum += (k % 2 == 0) ? term : -term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        power *= z;
    }
    return -std::log1p(z) + z * (1.0 - constants::euler_gamma) + sum;
}

}  // namespace

double ln_gamma(double x)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        std::ostringstream os;
        os << "ln_gamma: argument must be positive and finite, got " << x;
        throw DomainError(os.str());
    }
    if (x < 0.5) {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return std::log(constants::pi / std::sin(constants::pi * x)) - ln_gamma(1.0 - x);
    }
    if (x < 1.5) return ln_gamma_1p(x - 1.0);
    if (x < 2.5) return ln_gamma_1p(x - 2.0) + std::log1p(x - 2.0);
    return ln_gamma_lanczos(x);
}

double digamma(double x)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        std::ostringstream os;
        os << "digamma: argument must be positive and finite, got " << x;
        throw DomainError(os.str());
    }
    double shift = 0.0;
    while (x < 10.0) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    const double inv2 = 1.0 / (x * x);
    // Asymptotic series with Bernoulli numbers B_2..B_14.
    const double tail =
        inv2 * (1.0 / 12.0 -
                inv2 * (1.0 / 120.0 -
                        inv2 * (1.0 / 252.0 -
                                inv2 * (1.0 / 240.0 -
                                        inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    return shift + std::log(x) - 0.5 / x - tail;
}

namespace {

void check_hyp_args(double hurst, double x)
{
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hyp2f1_special: H must lie in (0,1)");
    if (!(x >= 0.0 && x < 1.0)) {
        std::ostringstream os;
        os << "hyp2f1_special: argument must lie in [0,1), got " << x;
        throw DomainError(os.str());
    }
}

}  // namespace

double hyp2f1_special_series(double hurst, double x)
{
    check_hyp_args(hurst, x);
    const double b = 0.5 - hurst;
    const double c = 1.5 + hurst;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < 100000; ++n) {
        term *= (b + n) / (c + n) * x;
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double hyp2f1_special_integral(double hurst, double x)
{
    check_hyp_args(hurst, x);
    const double expo = hurst - 0.5;
    const double p = 1.0 / (hurst + 0.5);
    const double gap = 1.0 - x;
    auto integrand = [=](double w) { return std::pow(gap + x * std::pow(w, p), expo); };
    QuadratureSpec spec;
    spec.rel_tol = 5e-14;
    spec.abs_tol = 1e-300;
    spec.max_depth = 60;
    if (x > 0.0) {
        const double knee = std::pow(gap / x, 1.0 / p);
        if (knee < 1.0) spec.split_points = {knee};
    }
    return integrate(integrand, 0.0, 1.0, spec).value;
}

double hyp2f1_special(double hurst, double x)
{
    check_hyp_args(hurst, x);
    if (hurst == 0.5 || x == 0.0) return 1.0;
    if (x <= 0.5) return hyp2f1_special_series(hurst, x);
    return hyp2f1_special_integral(hurst, x);
}

namespace {

double log_sigma_tilde_sq(double hurst)
{
    if (hurst == 0.5) return 0.0;
    return -0.5 * std::log(constants::pi) + (1.0 - 2.0 * hurst) * constants::ln2 + ln_gamma(hurst + 0.5) +
           ln_gamma(1.0 - hurst);
}

}  // namespace

double sigma_tilde_sq(double hurst)
{
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("sigma_tilde_sq: H must lie in (0,1)");
    return std::exp(log_sigma_tilde_sq(hurst));
}

SigmaConstants sigma_constants(const Hurst& hurst)
{
    const double h = hurst.value();
    const double log_st = log_sigma_tilde_sq(h);
    SigmaConstants out{};
    out.sigma_tilde_sq = std::exp(log_st);
    out.sigma_tilde_sq_minus_one = std::max(0.0, std::expm1(log_st));
    out.sigma_sq = out.sigma_tilde_sq / (2.0 * h);
    out.var_m1 = out.sigma_tilde_sq_minus_one / (2.0 * h);
    return out;
}

}  // namespace fracpersist
