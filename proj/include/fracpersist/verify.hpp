#pragma once

#include "fracpersist/corrlib.hpp"
#include "fracpersist/persistence.hpp"

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace fracpersist {

/// A grid point where a checked inequality lhs <= rhs failed by more than
/// the tolerance. `x` is the second coordinate (tau, x or t, by check).
struct BoundViolation {
    double hurst = 0.0;
    double x = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string label;
};

/// Outcome of checking one analytic statement on a fixed grid.
struct BoundReport {
    std::string lemma_id;
    std::string grid;
    std::string manifest_version;
    double tolerance = 1e-10;
    /// min over the grid of rhs - lhs; negative beyond -tolerance means a violation.
    double worst_margin = std::numeric_limits<double>::infinity();
    BoundViolation worst;
    std::vector<BoundViolation> violations;
    long points = 0;
    long violation_count = 0;
    bool passed = true;
    /// Exploratory checks record findings; they never fail a suite.
    bool exploratory = false;
    double runtime_ms = 0.0;
    /// Named constants used to instantiate the statement (e.g. Delta, C).
    std::vector<std::pair<std::string, double>> constants;
    std::vector<std::string> notes;

    /// Records the inequality lhs <= rhs at (hurst, x).
    void check_le(double hurst, double x, double lhs, double rhs, const std::string& label);
    void check_ge(double hurst, double x, double lhs, double rhs, const std::string& label)
    {
        check_le(hurst, x, rhs, lhs, label);
    }
    void add_constant(std::string name, double value) { constants.emplace_back(std::move(name), value); }
};

/// Grid resolutions of every check. The version is bumped whenever a grid changes.
struct VerifyManifest {
    std::string version = "1";
    /// Absolute violation tolerance of the analytic inequalities.
    double tolerance = 1e-10;
    std::vector<double> hurst_grid = {0.1, 0.25, 0.4, 0.49, 0.51, 0.6, 0.75, 0.9};
    std::vector<double> tau_grid = {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0};
    /// Fine H grid for the sigma~^2 shape checks: 0.01, 0.02, ..., 0.99.
    double fine_hurst_step = 0.01;
    std::vector<double> lower_hurst = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.49};
    std::vector<double> x_grid = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999};
    std::vector<double> near_one = {0.9, 0.95, 0.99};
    double tau_step = 0.1;
    double near_one_tau_max = 20.0;
    double gstar_tau_max = 40.0;
    double gstar_tau_step = 0.5;
    std::vector<double> phi_times = {1.0, 2.0, 10.0, 100.0};
    std::vector<double> phi_lower = {0.1, 0.25, 0.4, 0.45};
    std::vector<double> phi_upper = {0.55, 0.6, 0.75, 0.9};
    std::vector<double> holder_hurst = {0.1, 0.3, 0.7, 0.9};
    std::vector<double> holder_times = {0.0, 0.1, 0.3, 0.5, 0.7, 1.0};
    std::vector<double> continuity_hurst = {0.1, 0.25, 0.4, 0.6, 0.75, 0.9};
    std::vector<double> continuity_ell = {1.0, 4.0};
    int continuity_l_max = 40;
    std::vector<double> lhopital_tau = {0.0, 1.0, 2.0, 5.0};
    double lhopital_step = 1e-4;
    double lhopital_tolerance = 1e-4;

    std::string to_json() const;
};

const VerifyManifest& default_manifest();

/// Instantiated constant of the exponential bound on g_H near H0: the
/// minimum of sigma~^2 - 1 over (H0 - d, H0 + d), d = min(H0, 1-H0, |H0-1/2|)/2,
/// capped below 1.
double gh_bound_delta(double hurst0);

/// Constant C of the bound g_{*,1/2}(tau) <= C e^{-tau/6}:
/// (3/pi^2)(int log(1+1/u)^{3/2} du + int log(1+1/v)^3 dv).
double gstar_bound_constant();

/// Sum over integers tau >= L of corr(tau / ell). The series is cut off where
/// the known exponential bound for the kind makes the remainder negligible,
/// and that remainder bound is added to the result.
double correlation_tail_sum(const CorrelationFn& corr, double ell, int L);

/// phi(t) = int k_t k_1 / int k_1^2 for H < 1/2.
double phi_lower_half(double hurst, double t);
/// phi(t) = int k_t f / Var M_1 with f(u) = (2H-1) u^{H-3/2} on u > Var M_1 / 2, for H > 1/2.
double phi_upper_half(double hurst, double t);
/// phi(t) = int log(1+t/u) log(1+1/u) du / int log(1+1/u)^2 du.
double phi_log_kernel(double t);

/// E|M_t - M_t'|^2 = int_0^inf ((t+s)^{H-1/2} - (t'+s)^{H-1/2})^2 ds by quadrature.
double increment_variance(double hurst, double t, double t_prime);

BoundReport check_sigma_shape(const VerifyManifest& m = default_manifest());
BoundReport check_ch_bound(const VerifyManifest& m = default_manifest());
BoundReport check_gh_exponential_bound(const VerifyManifest& m = default_manifest());
BoundReport check_gh_tail_sum_bound(const VerifyManifest& m = default_manifest());
BoundReport check_gh_lower_bound(const VerifyManifest& m = default_manifest());
BoundReport check_hyp2f1_bounds(const VerifyManifest& m = default_manifest());
BoundReport check_variance_near_one(const VerifyManifest& m = default_manifest());
BoundReport check_gh_lower_bound_near_one(const VerifyManifest& m = default_manifest());
BoundReport check_gstar_bound(const VerifyManifest& m = default_manifest());
BoundReport check_phi_constructions(const VerifyManifest& m = default_manifest());
BoundReport check_holder(double hurst, const VerifyManifest& m = default_manifest());
/// Tail sums, modulus of continuity at 0 and decay rate of A = corr, in the
/// time scale tau -> A(tau / ell).
BoundReport check_continuity_conditions(const CorrelationFn& corr, double ell, int l_max,
                                        const VerifyManifest& m = default_manifest());
BoundReport check_continuity_conditions(double hurst0, double ell, int l_max,
                                        const VerifyManifest& m = default_manifest());
/// Second H-derivatives of the kernel integrals at H = 1/2 against g_{*,1/2}.
BoundReport check_half_limit(const VerifyManifest& m = default_manifest());
/// Exploratory: is tau -> g_H(tau) nonincreasing on the grid?
BoundReport check_monotone_decay(const VerifyManifest& m = default_manifest());

/// Runs every check; reports come back in a fixed order.
std::vector<BoundReport> run_verification_suite(unsigned threads = 0, const VerifyManifest& m = default_manifest());

/// True when every non-exploratory report passed.
bool suite_passed(const std::vector<BoundReport>& reports);

std::string to_json(const BoundReport& report);
std::string to_json(const std::vector<BoundReport>& reports, const VerifyManifest& m = default_manifest());

/// One row of a limit scan.
struct ScanRow {
    double hurst = 0.0;
    double kappa = 1.0;
    /// Exponent of the (rescaled) process and its standard error.
    double theta_hat = 0.0;
    double std_error = 0.0;
    /// Exponent of the unscaled process, kappa theta_hat.
    double base_theta = 0.0;
    /// sup over the distance grid of |A_H(tau) - A_limit(tau)|.
    double sup_distance = 0.0;
    std::string descriptor;
    std::string note;
};

enum class ScanKind { HToZero, HToOne, HToHalf };

std::string to_string(ScanKind kind);

struct ScanSettings {
    std::vector<double> hurst;
    MonteCarloSettings mc;
    /// Distances are taken on 0, step, ..., tau_max.
    double distance_tau_max = 10.0;
    double distance_step = 0.01;
};

/// Default H values: {0.02, 0.05, 0.1, 0.2}, {0.8, 0.9, 0.95, 0.98} and
/// {0.4, 0.45, 0.49, 0.5, 0.51, 0.55, 0.6}.
ScanSettings default_scan_settings(ScanKind kind);

/*
 * h_to_zero: tau -> g_H(tau / H), limit e^{-tau}, ratio theta_hat -> 1.
 * h_to_one:  tau -> g_H(tau / (1 - H)), limit e^{-tau}.
 * h_to_half: g_H itself (g_{*,1/2} inside the degenerate band), limit g_{*,1/2}.
 */
std::vector<ScanRow> run_scan(ScanKind kind, const ScanSettings& settings);
std::vector<ScanRow> scan_h_to_zero(const MonteCarloSettings& mc);
std::vector<ScanRow> scan_h_to_one(const MonteCarloSettings& mc);
std::vector<ScanRow> scan_h_to_half(const MonteCarloSettings& mc);

/// sup_{tau in [0, tau_max]} |a(tau) - b(tau)| on a uniform grid.
double sup_distance(const CorrelationFn& a, const CorrelationFn& b, double tau_max, double step);

std::string scan_csv(const std::vector<ScanRow>& rows);

}  // namespace fracpersist
