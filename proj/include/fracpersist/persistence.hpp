#pragma once

#include "fracpersist/sampler.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fracpersist {

/// Survival counts of a batch of paths below a fixed level.
struct SurvivalCurve {
    Vector horizons;
    std::vector<std::int64_t> survivors;
    std::int64_t n_paths = 0;
    double level = 0.0;
    Vector p_hat;
    /// 95% Wilson score interval.
    Vector ci_low;
    Vector ci_high;

    Index size() const noexcept { return horizons.size(); }

    /// Fills p_hat and the Wilson bounds from the counts.
    static SurvivalCurve from_counts(Vector horizons, std::vector<std::int64_t> survivors, std::int64_t n_paths,
                                     double level);
};

/// 95% Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n);

/// For each path, the index of the first grid point among 0, stride,
/// 2 stride, ... where the value is >= level; values.cols() if there is none.
std::vector<std::int32_t> first_exit_indices(const Eigen::Ref<const RowMatrix>& values, double level, Index stride = 1);

struct SurvivalOptions {
    /// Only every stride-th grid point is monitored (sub-grid monitoring).
    Index stride = 1;
    unsigned threads = 0;
};

/// Survival of a stationary batch below 0: a path survives to T when its
/// values at every monitored grid point in [0, T] are strictly negative.
/// Horizons must be monitored grid points, otherwise OffGridHorizon.
SurvivalCurve survival_curve_gsp(const PathBatch& batch, const Vector& horizons, const SurvivalOptions& opt = {});

/// Survival of a self-similar batch observed at geometric times e^{tau_0 + k step}
/// below `level`. Horizons are algebraic times and must be grid points.
SurvivalCurve survival_curve_selfsimilar(const PathBatch& batch, const Vector& horizons, double level = 1.0,
                                         const SurvivalOptions& opt = {});

enum class FitMode {
    /// -log p = theta T + c
    StationaryLogT,
    /// -log p = theta log T + c
    SelfSimilarLogLog,
};

std::string to_string(FitMode mode);

struct FitWindow {
    double lo;
    double hi;
};

/// Default window: drops the first 30% of the horizons.
FitWindow default_window(const SurvivalCurve& curve, double drop_fraction = 0.3);

struct ExponentEstimate {
    double theta_hat = 0.0;
    double std_error = 0.0;
    FitWindow window{0.0, 0.0};
    double r_squared = 0.0;
    FitMode mode = FitMode::StationaryLogT;
    double intercept = 0.0;
    /// Slope between the first and last fitted horizons; a large gap to
    /// theta_hat points at curvature (pre-asymptotic bias) in the window.
    double two_point_slope = 0.0;
    Index n_fit = 0;
    /// Horizons in the window left out because no path survived.
    Index n_excluded = 0;
};

/*
 * Weighted least squares of -log p_hat against T or log T over the window,
 * with weights n p / (1 - p) from the binomial variance of log p_hat. The
 * survival indicators at different horizons are nested, so the standard
 * error uses the full delta-method covariance
 *     Cov(log p_i, log p_j) = (1 - p_i) / (n p_i),  T_i <= T_j,
 * in a sandwich around the WLS estimator. Horizons with p_hat = 0 are
 * dropped; fewer than two usable horizons raise InsufficientSurvivors.
 */
ExponentEstimate fit_exponent(const SurvivalCurve& curve, FitMode mode, std::optional<FitWindow> window = {});

enum class SamplerChoice { Auto, Cholesky, Circulant };

std::string to_string(SamplerChoice choice);

struct MonteCarloSettings {
    /// Grid step in log-time; at most 0.25.
    double step = 0.05;
    /// Largest horizon (in log-time for self-similar runs).
    double horizon = 10.0;
    /// Spacing of the fitted horizons; a multiple of 2 step.
    double horizon_spacing = 0.5;
    Index n_paths = 200'000;
    std::uint64_t seed = 1;
    SamplerChoice method = SamplerChoice::Auto;
    unsigned threads = 0;
    /// Paths generated per work unit.
    Index chunk = 1024;
    /// Extrapolate the grid-monitoring bias away using the step-2 sub-grid.
    bool richardson = true;
    /// Path groups for the delete-one-group jackknife standard error.
    Index groups = 20;
    double drop_fraction = 0.3;
    std::optional<FitWindow> window;
    /// First log-time of the geometric grid for self-similar runs.
    double log_time_origin = -5.0;

    void validate() const;
};

struct PersistenceRun {
    /// Survival on the full grid and on every second grid point.
    SurvivalCurve curve;
    SurvivalCurve coarse_curve;
    ExponentEstimate fine;
    ExponentEstimate coarse;
    /// Reported estimate: extrapolated (when enabled) with a jackknife standard error.
    ExponentEstimate estimate;
    /// alpha in 1 - rho(tau) ~ tau^alpha, estimated from rho(step), rho(2 step).
    double roughness = 2.0;
    SamplingMethod method = SamplingMethod::Cholesky;
    std::string descriptor;
    /// Set when the requested sampler was replaced (e.g. circulant -> Cholesky).
    std::string note;
    /// Time rescaling: the run estimates the exponent of tau -> Z_{tau/kappa},
    /// and base_theta = kappa theta_hat is the implied exponent of Z.
    double kappa = 1.0;
    double base_theta = 0.0;
    double base_std_error = 0.0;
};

/// Local roughness alpha = log2((1 - rho(2 step)) / (1 - rho(step))), clamped to [0.1, 2].
double roughness_exponent(const CorrelationFn& corr, double step);

/// Stationary persistence below 0 of the GSP with correlation `corr`.
PersistenceRun estimate_exponent(const CorrelationFn& corr, const MonteCarloSettings& settings);

/// Exponent of tau -> Z_{tau/kappa} for the GSP Z with correlation `base`.
PersistenceRun rescaled_exponent(const CorrelationFn& base, double kappa, const MonteCarloSettings& settings);

/// Self-similar persistence of M^H below 1 from direct kernel paths on
/// t = e^{tau}, tau in [log_time_origin, horizon], fitted in log T.
PersistenceRun estimate_exponent_mh(const Hurst& hurst, const MonteCarloSettings& settings,
                                    const DirectKernelOptions& kernel = {});
/// Same for M^{*,1/2}.
PersistenceRun estimate_exponent_mstar(const MonteCarloSettings& settings, const DirectKernelOptions& kernel = {});

/// Rows (T, survivors, n, p_hat, ci_low, ci_high), then a fit table
/// (mode, T_lo, T_hi, theta_hat, stderr, r2) with one row per estimate.
std::string survival_csv(const SurvivalCurve& curve, const std::vector<ExponentEstimate>& fits);

}  // namespace fracpersist
