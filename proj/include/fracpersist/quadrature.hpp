#pragma once

#include "fracpersist/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

namespace fracpersist {

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    /// Maximum bisection depth of any panel.
    int max_depth = 50;
    /// Hard cap on integrand evaluations.
    long max_evaluations = 2'000'000;
    /// Interior break points; points outside (a,b) are ignored.
    std::vector<double> split_points;

    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    int panels = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kronrod_nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kronrod_weights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980843523, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod nodes 1,3,5,7,9.
inline constexpr std::array<double, 5> gauss_weights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    int depth;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel gauss_kronrod_21(F& f, double a, double b, int depth)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kronrod_weights[10];
    double gauss = 0.0;
    std::array<double, 10> f1{};
    std::array<double, 10> f2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kronrod_nodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double pair = f1[j] + f2[j];
        kronrod += kronrod_weights[j] * pair;
        if (j % 2 == 1) gauss += gauss_weights[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double resasc = kronrod_weights[10] * std::abs(fc - mean);
    double resabs = kronrod_weights[10] * std::abs(fc);
    for (int j = 0; j < 10; ++j) {
        resasc += kronrod_weights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
        resabs += kronrod_weights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    }
    const double value = kronrod * half;
    resasc *= std::abs(half);
    resabs *= std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {a, b, value, err, depth};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (10/21) quadrature of f over [a,b].
/// Throws QuadratureFailure carrying the achieved estimate when the
/// tolerance cannot be met within spec.max_depth bisections.
template <typename F>
QuadResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {})
{
    spec.validate();
    if (!(std::isfinite(a) && std::isfinite(b))) throw DomainError("integrate: finite limits required");
    QuadResult out;
    if (a == b) return out;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }

    std::vector<double> cuts{a};
    for (double p : spec.split_points) {
        if (p > a && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto counted = [&f, &out](double x) {
        ++out.evaluations;
        return f(x);
    };

    std::priority_queue<detail::Panel> active;
    double total = 0.0;
    double total_err = 0.0;
    double frozen_value = 0.0;
    double frozen_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto p = detail::gauss_kronrod_21(counted, cuts[i], cuts[i + 1], 0);
        total += p.value;
        total_err += p.error;
        active.push(p);
    }

    auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
    while (total_err > target()) {
        if (out.evaluations > spec.max_evaluations) {
            std::ostringstream os;
            os << "quadrature evaluation budget " << spec.max_evaluations << " exhausted: estimate " << total
               << ", error " << total_err;
            throw QuadratureFailure(os.str(), sign * total, total_err);
        }
        if (active.empty()) {
            std::ostringstream os;
            os << "quadrature tolerance not reached at max depth " << spec.max_depth << ": estimate " << total
               << ", error " << total_err;
            throw QuadratureFailure(os.str(), sign * total, total_err);
        }
        auto worst = active.top();
        active.pop();
        if (worst.depth >= spec.max_depth || !(worst.b - worst.a > 4.0 * std::numeric_limits<double>::min())) {
            frozen_value += worst.value;
            frozen_err += worst.error;
            continue;
        }
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gauss_kronrod_21(counted, worst.a, mid, worst.depth + 1);
        auto right = detail::gauss_kronrod_21(counted, mid, worst.b, worst.depth + 1);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        active.push(left);
        active.push(right);
        // Re-sum occasionally to keep the running totals from drifting.
        if (active.size() % 64 == 0) {
            total = frozen_value;
            total_err = frozen_err;
            auto copy = active;
            while (!copy.empty()) {
                total += copy.top().value;
                total_err += copy.top().error;
                copy.pop();
            }
        }
    }
    out.value = sign * total;
    out.error = total_err;
    out.panels = static_cast<int>(active.size());
    return out;
}

/// int_a^inf f(u) du for a > 0.
///
/// With `decay` d > 1 describing f(u) ~ u^{-d}, the substitution
/// u = a w^{-q}, q = 1/(d-1), maps the tail onto w in (0,1] with a bounded
/// integrand. The default d = 2 is the familiar u = a/w.
template <typename F>
QuadResult integrate_to_infinity(F&& f, double a, const QuadratureSpec& spec = {}, double decay = 2.0)
{
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("integrate_to_infinity: lower limit must be positive");
    if (!(decay > 1.0)) throw DomainError("integrate_to_infinity: decay exponent must exceed 1");
    const double q = 1.0 / (decay - 1.0);
    QuadratureSpec inner = spec;
    inner.split_points.clear();
    for (double p : spec.split_points) {
        if (p > a) inner.split_points.push_back(std::pow(a / p, 1.0 / q));
    }
    auto g = [&f, a, q](double w) {
        const double u = a * std::pow(w, -q);
        if (!std::isfinite(u)) return 0.0;
        return f(u) * q * u / w;
    };
    return integrate(g, 0.0, 1.0, inner);
}

inline void QuadratureSpec::validate() const
{
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
    if (max_depth < 10) throw DomainError("quadrature max_depth must be at least 10");
    if (max_evaluations < 21) throw DomainError("quadrature max_evaluations must allow one panel");
}

}  // namespace fracpersist
