#include "fracpersist/verify.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>

using namespace fracpersist;

namespace {

std::string without_runtime(const std::string& text)
{
    auto j = nlohmann::json::parse(text);
    for (auto& r : j["reports"]) r["runtime_ms"] = 0;
    return j.dump();
}

}  // namespace

TEST_CASE("report bookkeeping")
{
    BoundReport r;
    r.check_le(0.3, 1.0, 1.0, 2.0, "slack");
    CHECK(r.passed);
    CHECK(r.worst_margin == 1.0);
    r.check_le(0.3, 2.0, 1.0, 1.0 - 5e-11, "inside tolerance");
    CHECK(r.passed);
    CHECK(r.worst_margin == doctest::Approx(-5e-11));
    r.check_ge(0.4, 3.0, 1.0, 3.0, "violated");
    CHECK_FALSE(r.passed);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].hurst == 0.4);
    CHECK(r.violations[0].lhs == 3.0);
    CHECK(r.violations[0].rhs == 1.0);
    CHECK(r.worst_margin == -2.0);
    CHECK(r.worst.label == "violated");
    CHECK(r.points == 3);
}

TEST_CASE("the full suite passes and is auditable")
{
    const auto reports = run_verification_suite(1);
    CHECK(suite_passed(reports));
    for (const auto& r : reports) {
        INFO(r.lemma_id << ": " << r.worst.label);
        CHECK(r.points > 0);
        CHECK(std::isfinite(r.worst_margin));
        CHECK(r.passed == r.violations.empty());
        CHECK(r.passed == (r.worst_margin >= -r.tolerance));
        CHECK(r.manifest_version == default_manifest().version);
    }
    // Every statement listed for the suite is present.
    for (const char* id : {"3.1", "3.2", "3.3a", "3.3b", "3.4", "4.1", "4.3", "4.4", "5.3", "2.5", "2.4", "2.1", "5.1"}) {
        INFO(id);
        CHECK(std::any_of(reports.begin(), reports.end(), [&](const BoundReport& r) { return r.lemma_id == id; }));
    }
}

TEST_CASE("suite output does not depend on the thread count")
{
    const auto one = to_json(run_verification_suite(1));
    const auto three = to_json(run_verification_suite(3));
    CHECK(without_runtime(one) == without_runtime(three));
}

TEST_CASE("a tightened tolerance produces a listed violation")
{
    VerifyManifest m;
    m.lhopital_tolerance = 1e-14;
    const auto r = check_half_limit(m);
    CHECK_FALSE(r.passed);
    REQUIRE_FALSE(r.violations.empty());
    CHECK(r.violations.front().lhs > r.violations.front().rhs);
    CHECK(r.worst_margin < -r.tolerance);
}

TEST_CASE("sigma~^2 shape anchors")
{
    CHECK(sigma_tilde_sq(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sigma_tilde_sq(0.01) > 1.9);
    CHECK(sigma_tilde_sq(0.01) < 2.0);
    CHECK((1.0 - 0.9999) * sigma_tilde_sq(0.9999) == doctest::Approx(0.25).epsilon(4e-3));
    CHECK(check_sigma_shape().passed);
}

TEST_CASE("instantiated constants")
{
    // tests/oracles/oracles.py: sigma~^2(0.375) - 1 and sigma~^2(0.625) - 1.
    CHECK(gh_bound_delta(0.25) == doctest::Approx(0.048761616155964015).epsilon(1e-11));
    CHECK(gh_bound_delta(0.75) == doctest::Approx(0.059078361973931594).epsilon(1e-11));
    CHECK(gh_bound_delta(0.05) < 1.0);
    CHECK_THROWS_AS(gh_bound_delta(0.5), DomainError);
    // young_C in tests/oracles/oracles.py.
    CHECK(gstar_bound_constant() == doctest::Approx(3.2478740924619151).epsilon(1e-10));

    const auto r = check_gstar_bound();
    REQUIRE(r.constants.size() == 1);
    CHECK(r.constants[0].first == "C");
}

TEST_CASE("hypergeometric bounds anchor at x = 0")
{
    const auto r = check_hyp2f1_bounds();
    CHECK(r.passed);
    // At x = 0 the lower bound is attained: 1 <= 1.
    CHECK(r.worst_margin == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& [name, value] : r.constants) {
        if (name != "prefactor(H=0.20000000000000001)") continue;
        CHECK(value == doctest::Approx(std::tgamma(1.7) / (std::tgamma(1.3) * std::tgamma(1.4))).epsilon(1e-12));
    }
    // prefactor(0.25) in tests/oracles/oracles.py.
    const double pref = 1.1441396452527198;
    CHECK(hyp2f1_special(0.25, 0.0) == 1.0);
    CHECK(hyp2f1_special(0.25, 0.0) <= pref);
    CHECK(hyp2f1_special(0.25, 0.5) <= pref / 0.5);
}

TEST_CASE("phi constructions")
{
    CHECK(phi_lower_half(0.3, 1.0) == 1.0);
    CHECK(phi_log_kernel(1.0) == 1.0);
    // Oracles from tests/oracles/oracles.py.
    CHECK(phi_upper_half(0.75, 10.0) == doctest::Approx(11.809106114967297).epsilon(1e-9));
    CHECK(phi_lower_half(0.3, 10.0) == doctest::Approx(1.7673426274443676).epsilon(1e-9));
    for (double t : {2.0, 10.0, 100.0}) {
        CHECK(phi_lower_half(0.25, t) >= 1.0);
        CHECK(phi_upper_half(0.6, t) >= 2.0 * std::pow(t, 0.2) - std::pow(t, -0.8));
        CHECK(phi_log_kernel(t) >= 1.0);
    }
    // For H < 1/2 the construction equals t^H g_H(log t).
    CHECK(phi_lower_half(0.25, 10.0) ==
          doctest::Approx(std::pow(10.0, 0.25) * corr_gh_closed(Hurst(0.25), std::log(10.0))).epsilon(1e-9));
    CHECK(check_phi_constructions().passed);
}

TEST_CASE("Hoelder increments")
{
    CHECK(increment_variance(0.3, 0.5, 0.5) == 0.0);
    // holder(0.3; 0.7, 0.3) in tests/oracles/oracles.py.
    CHECK(increment_variance(0.3, 0.7, 0.3) == doctest::Approx(0.012833918615583112).epsilon(1e-9));
    for (double H : {0.1, 0.3, 0.7, 0.9}) {
        const double var = sigma_constants(Hurst(H)).var_m1;
        CHECK(std::abs(increment_variance(H, 1.0, 0.0) - var) <= 1e-8 * var);
        CHECK(increment_variance(H, 0.0, 1.0) == doctest::Approx(increment_variance(H, 1.0, 0.0)).epsilon(1e-12));
        CHECK(check_holder(H).passed);
    }
}

TEST_CASE("continuity conditions")
{
    const auto ou = CorrelationFn::exponential(1.0);
    for (double ell : {1.0, 3.0}) {
        for (int L : {1, 5, 20}) {
            const double exact = std::exp(-L / ell) / -std::expm1(-1.0 / ell);
            CHECK(correlation_tail_sum(ou, ell, L) == doctest::Approx(exact).epsilon(1e-12));
            CHECK(correlation_tail_sum(ou, ell, L) <= std::exp(-(L - 1) / ell) / -std::expm1(-1.0 / ell));
        }
    }
    CHECK(check_continuity_conditions(ou, 2.0, 20).passed);

    // g_{0.3}: tail sums below the instantiated exponential-sum bound.
    const double delta = gh_bound_delta(0.3);
    const auto g = CorrelationFn::gh_closed(Hurst(0.3));
    for (int L : {1, 10, 30}) {
        CHECK(correlation_tail_sum(g, 2.0, L) <= 4.0 * 2.0 / (delta * 0.21) * std::exp(-(L - 1) * 0.21 / 2.0));
    }
    const auto r = check_continuity_conditions(0.3, 2.0, 30);
    CHECK(r.passed);
    CHECK(r.lemma_id == "2.1");

    CHECK(check_continuity_conditions(CorrelationFn::gstar_half(), 1.0, 10).passed);
    CHECK(check_continuity_conditions(CorrelationFn::rescaled(g, 0.3), 1.0, 10).passed);
    CHECK_THROWS_AS(check_continuity_conditions(CorrelationFn::rh(Hurst(0.3)), 1.0, 10), DomainError);
    CHECK_THROWS_AS(check_continuity_conditions(ou, 0.0, 10), DomainError);
}

TEST_CASE("limit at H = 1/2")
{
    const auto r = check_half_limit();
    CHECK(r.passed);
    CHECK(r.points == 6);
    const auto g49 = CorrelationFn::gh_quad(Hurst(0.49));
    CHECK(sup_distance(g49, CorrelationFn::gstar_half(), 10.0, 0.1) <= 0.01);
}

TEST_CASE("monotone decay is exploratory")
{
    const auto r = check_monotone_decay();
    CHECK(r.exploratory);
    std::vector<BoundReport> only{r};
    only[0].passed = false;
    CHECK(suite_passed(only));
}

TEST_CASE("json schema")
{
    const auto r = check_gh_lower_bound();
    const auto j = nlohmann::json::parse(to_json(r));
    for (const char* key : {"lemma_id", "grid", "worst_margin", "violations", "passed", "runtime_ms"}) {
        INFO(key);
        CHECK(j.contains(key));
    }
    CHECK(j["lemma_id"] == "3.4");
    CHECK(j["passed"] == true);
    CHECK(j["violations"].empty());
    const auto m = nlohmann::json::parse(default_manifest().to_json());
    CHECK(m["version"] == default_manifest().version);
    CHECK(m["hurst_grid"].size() == 8);
}

TEST_CASE("scans")
{
    ScanSettings s = default_scan_settings(ScanKind::HToHalf);
    CHECK(s.hurst.size() == 7);
    s.hurst = {0.45, 0.5};
    s.mc.n_paths = 4000;
    s.mc.horizon = 4.0;
    s.mc.groups = 10;
    s.distance_step = 0.1;
    const auto rows = run_scan(ScanKind::HToHalf, s);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].sup_distance == 0.0);
    CHECK(rows[0].sup_distance > 0.0);
    CHECK(rows[0].sup_distance < 0.05);
    CHECK(rows[1].note.find("degenerate band") != std::string::npos);
    for (const auto& row : rows) {
        CHECK(row.kappa == 1.0);
        CHECK(row.theta_hat > 0.0);
        CHECK(row.base_theta == doctest::Approx(row.theta_hat));
    }
    const auto csv = scan_csv(rows);
    CHECK(csv.rfind("H,kappa,theta_hat,stderr,base_theta,sup_distance,sampler,note\n", 0) == 0);

    ScanSettings z = default_scan_settings(ScanKind::HToZero);
    z.hurst = {0.1};
    z.mc = s.mc;
    const auto zr = run_scan(ScanKind::HToZero, z);
    CHECK(zr[0].kappa == 0.1);
    CHECK(zr[0].base_theta == doctest::Approx(0.1 * zr[0].theta_hat));
    CHECK(zr[0].sup_distance == doctest::Approx(sup_distance(CorrelationFn::rescaled(CorrelationFn::gh_closed(Hurst(0.1)), 0.1),
                                                             CorrelationFn::exponential(1.0), 10.0, 0.01)));

    ScanSettings bad = s;
    bad.hurst.clear();
    CHECK_THROWS_AS(run_scan(ScanKind::HToOne, bad), DomainError);
}
