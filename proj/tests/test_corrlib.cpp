#include "fracpersist/corrlib.hpp"

#include <doctest.h>

#include <cmath>

using namespace fracpersist;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST_CASE("kernels")
{
    SUBCASE("k_t vanishes at t = 0 and matches the direct difference away from cancellation")
    {
        CHECK(kernel_k(0.3, 0.0, 2.0) == 0.0);
        const double direct = std::pow(1.7 + 0.4, -0.2) - std::pow(0.4, -0.2);
        CHECK(kernel_k(0.3, 1.7, 0.4) == doctest::Approx(direct).epsilon(1e-14));
    }
    SUBCASE("k_t keeps relative accuracy for s >> t")
    {
        // (t+s)^p - s^p ~ p t s^{p-1} for large s.
        const double s = 1e12;
        CHECK(rel(kernel_k(0.8, 1.0, s), 0.3 * std::pow(s, -0.7)) < 1e-10);
    }
    SUBCASE("Lamperti kernel scaling K_tau(u) = e^{-tau/2} K_0(u e^{-tau})")
    {
        for (double h : {0.15, 0.7}) {
            for (double tau : {0.3, 2.0, 9.0}) {
                for (double u : {1e-3, 0.5, 4.0, 300.0}) {
                    CHECK(rel(kernel_K(h, tau, u), std::exp(-tau / 2) * kernel_K(h, 0.0, u * std::exp(-tau))) < 1e-12);
                }
            }
        }
    }
    SUBCASE("log kernel")
    {
        CHECK(kernel_log(2.0, 1.0) == doctest::Approx(std::log(3.0)));
        CHECK_THROWS_AS(kernel_log(1.0, 0.0), DomainError);
    }
}

TEST_CASE("c_H and r_H")
{
    CHECK(rel(corr_ch(0.25, 1.0), 0.52097441330999733832) < 1e-14);
    CHECK(rel(corr_rh(0.25, 1.0), 0.43021512376383603511) < 1e-13);
    CHECK(rel(corr_rh(0.7, 0.3), 0.91693588225436660767) < 1e-13);
    CHECK(rel(corr_rh(0.1, 2.0), 0.1271080801602522168) < 1e-13);
    CHECK(corr_ch(0.5, 1.3) == doctest::Approx(std::exp(-0.65)).epsilon(1e-15));
    CHECK(corr_rh(0.5, 1.3) == doctest::Approx(std::exp(-0.65)).epsilon(1e-15));
    CHECK(corr_ch(0.3, 0.0) == 1.0);
    CHECK(corr_rh(0.3, 0.0) == 1.0);

    SUBCASE("c_H factored form agrees with the textbook form where that is stable")
    {
        for (double h : {0.1, 0.4, 0.8}) {
            for (double tau : {0.01, 0.5, 3.0}) {
                const double naive = std::cosh(h * tau) - 0.5 * std::pow(2.0 * std::sinh(tau / 2.0), 2.0 * h);
                CHECK(corr_ch(h, tau) == doctest::Approx(naive).epsilon(1e-12));
            }
        }
    }
    SUBCASE("c_H large-tau asymptotics")
    {
        // c_H ~ e^{-tau H}/2 + H e^{-tau(1-H)} for large tau.
        const double h = 0.9;
        const double tau = 60.0;
        const double lead = 0.5 * std::exp(-tau * h) + h * std::exp(-tau * (1.0 - h));
        CHECK(rel(corr_ch(h, tau), lead) < 1e-6);
    }
    CHECK_THROWS_AS(corr_ch(0.3, -1.0), DomainError);
    CHECK_THROWS_AS(corr_rh(1.2, 1.0), DomainError);
}

TEST_CASE("g_H closed form matches references")
{
    CHECK(rel(corr_gh_closed(Hurst(0.7), 2.0), 0.91550370637637089262) < 1e-12);
    CHECK(rel(corr_gh_closed(Hurst(0.3), 5.0), 0.59268841812585409316) < 1e-12);
    CHECK(rel(corr_gh_closed(Hurst(0.45), 1.0), 0.97359179382626461295) < 1e-11);
    CHECK(rel(corr_gh_closed(Hurst(0.1), 10.0), 0.50655856985650132998) < 1e-12);
    CHECK(rel(corr_gh_closed(Hurst(0.9), 0.5), 0.99752480363545931225) < 1e-12);
    CHECK(rel(corr_gh_closed(Hurst(0.499, 1e-4), 1.0), 0.97350056068683172752) < 1e-8);
    CHECK(corr_gh_closed(Hurst(0.3), 0.0) == 1.0);
    CHECK_THROWS_AS(corr_gh_closed(Hurst(0.5), 1.0), DegenerateHurst);
    CHECK_THROWS_AS(corr_gh_closed(Hurst(0.5004), 1.0), DegenerateHurst);
}

TEST_CASE("g_H quadrature agrees with the closed form")
{
    for (double h : {0.05, 0.2, 0.45, 0.499, 0.501, 0.6, 0.9, 0.97}) {
        const Hurst hh(h, 1e-4);
        for (double tau : {0.1, 1.0, 4.0, 12.0}) {
            INFO("H = " << h << ", tau = " << tau);
            const auto q = corr_gh_quad_detail(hh, tau);
            CHECK(std::abs(q.value - corr_gh_closed(hh, tau)) < 1e-9);
        }
    }
}

TEST_CASE("g_{*,1/2}")
{
    CHECK(corr_gstar_half(0.0) == 1.0);
    CHECK(rel(corr_gstar_half(1.0), 0.97350346569907399987) < 1e-11);
    CHECK(rel(corr_gstar_half(2.0), 0.89947374085524048387) < 1e-11);
    CHECK(rel(corr_gstar_half(5.0), 0.54312819361982229467) < 1e-11);
    CHECK(rel(corr_gstar_half(6.0), 0.42798264431878896362) < 1e-11);
    // The log kernel has squared norm pi^2/3.
    CHECK(rel(log_kernel_product_integral(0.0, 0.0).value, constants::log_kernel_norm) < 1e-12);
    // And g_H -> g_* as H -> 1/2.
    CHECK(std::abs(corr_gh_closed(Hurst(0.499, 1e-4), 1.0) - corr_gstar_half(1.0)) < 1e-5);
}

TEST_CASE("CorrelationFn")
{
    const auto gh = CorrelationFn::gh_closed(Hurst(0.3));
    CHECK(gh.kind() == CorrelationKind::GHClosed);
    CHECK(gh(5.0) == doctest::Approx(0.59268841812585409316).epsilon(1e-12));
    CHECK(gh.descriptor() == "gh_closed(H=0.29999999999999999)");
    CHECK(gh.warning().empty());

    const auto routed = CorrelationFn::gh_closed(Hurst(0.5));
    CHECK(routed.kind() == CorrelationKind::GStarHalf);
    CHECK_FALSE(routed.warning().empty());

    const auto ex = CorrelationFn::exponential(2.0);
    CHECK(ex(0.5) == doctest::Approx(std::exp(-1.0)));
    const auto rs = CorrelationFn::rescaled(gh, 0.3);
    CHECK(rs(1.5) == doctest::Approx(gh(5.0)).epsilon(1e-14));
    CHECK(rs.descriptor() == "rescaled(gh_closed(H=0.29999999999999999),kappa=0.29999999999999999)");

    const Vector tab = CorrelationFn::ch(Hurst(0.25)).tabulate(0.5, 4);
    REQUIRE(tab.size() == 4);
    CHECK(tab[0] == 1.0);
    CHECK(tab[2] == doctest::Approx(0.52097441330999733832).epsilon(1e-14));

    CHECK_THROWS_AS(CorrelationFn::exponential(0.0), DomainError);
    CHECK_THROWS_AS(CorrelationFn::rescaled(gh, -1.0), DomainError);
}
