#pragma once

#include "fracpersist/corrlib.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace fracpersist {

/// Uniform grid 0, step, ..., (n_points-1) step.
struct TimeGrid {
    double step = 0.05;
    Index n_points = 201;

    double horizon() const noexcept { return step * static_cast<double>(n_points - 1); }
    Vector points() const;
    /// Grid covering [0, horizon] with the given step; the horizon must be a
    /// multiple of the step up to rounding.
    static TimeGrid covering(double horizon, double step);
    void validate() const;
};

enum class SamplingMethod { Cholesky, CirculantEmbedding, DirectKernel };

std::string to_string(SamplingMethod method);

/// Simulated paths, one per row. For stationary samplers `times` is the
/// log-time grid tau; for direct kernel samplers it holds the algebraic times t.
struct PathBatch {
    Vector times;
    RowMatrix values;
    std::uint64_t seed = 0;
    SamplingMethod method = SamplingMethod::Cholesky;
    std::string descriptor;
    /// Diagonal regularisation used by the Cholesky sampler.
    double jitter = 0.0;
    /// Relative variance error of the kernel discretisation (direct samplers).
    double discretization_budget = 0.0;

    Index n_paths() const noexcept { return values.rows(); }
    Index n_points() const noexcept { return values.cols(); }
};

struct SamplerOptions {
    /// Worker threads; 0 defers to resolve_threads().
    unsigned threads = 0;
    /// Paths per work unit. Results do not depend on the thread count
    /// because work units are fixed by this size alone.
    Index block_size = 512;
};

struct DirectKernelDesign;

/*
 * A sampler with its one-off setup (factorisation, embedding spectrum or
 * kernel design) already done. Path j is always generated from substream j
 * of the seed, so any range of paths can be produced on its own, in any
 * order, and matches the corresponding rows of a full batch.
 */
class PathGenerator {
public:
    /// Lower factor L with covariance L L^T.
    static PathGenerator cholesky(Matrix lower, Vector times, double jitter);
    /// Scaled square roots sqrt(lambda_k / m) of a circulant embedding.
    static PathGenerator circulant(Vector scale, Vector times);
    static PathGenerator direct(const DirectKernelDesign& design, Vector times);

    SamplingMethod method() const noexcept { return method_; }
    const Vector& times() const noexcept { return times_; }
    Index n_points() const noexcept { return times_.size(); }
    double jitter() const noexcept { return jitter_; }
    double discretization_budget() const noexcept { return budget_; }
    const std::string& descriptor() const noexcept { return descriptor_; }
    void set_descriptor(std::string d) { descriptor_ = std::move(d); }

    /// Writes paths first_path, first_path + 1, ... into the rows of `out`.
    void generate(std::uint64_t seed, Index first_path, Eigen::Ref<RowMatrix> out) const;
    PathBatch sample(Index n_paths, std::uint64_t seed, const SamplerOptions& opt = {}) const;

private:
    PathGenerator() = default;

    SamplingMethod method_ = SamplingMethod::Cholesky;
    Vector times_;
    Matrix coefficients_;
    Vector scale_;
    double jitter_ = 0.0;
    double budget_ = 0.0;
    std::string descriptor_;
};

/// Toeplitz matrix rho(|i-j| step), evaluating rho once per lag.
Matrix build_covariance(const CorrelationFn& corr, const TimeGrid& grid);
Matrix build_covariance(const Vector& first_row);

/// Lower Cholesky factor of a covariance, regularised by the smallest entry of
/// the ladder {0, 1e-12, 1e-10, 1e-8} that makes it factorisable.
struct CholeskyFactor {
    Matrix lower;
    double jitter = 0.0;
};
CholeskyFactor cholesky_with_jitter(const Matrix& cov);

PathGenerator cholesky_generator(const Matrix& cov, const TimeGrid& grid);
PathGenerator cholesky_generator(const CorrelationFn& corr, const TimeGrid& grid);

PathBatch sample_cholesky(const Matrix& cov, const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                          const SamplerOptions& opt = {});
PathBatch sample_cholesky(const CorrelationFn& corr, const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                          const SamplerOptions& opt = {});

/// Eigenvalues of the minimal circulant embedding (size 2(n-1)) of a
/// Toeplitz first row.
Vector circulant_spectrum(const Vector& first_row);

/// Exact sampling by circulant embedding. Throws EmbeddingNotNonnegative when
/// the embedding has an eigenvalue below -1e-10 times the largest one;
/// eigenvalues inside that roundoff band are set to zero.
PathGenerator circulant_generator(const Vector& first_row, const TimeGrid& grid);
PathGenerator circulant_generator(const CorrelationFn& corr, const TimeGrid& grid);

PathBatch sample_circulant(const Vector& first_row, const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                           const SamplerOptions& opt = {});
PathBatch sample_circulant(const CorrelationFn& corr, const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                           const SamplerOptions& opt = {});

/// Settings for the direct discretisation of int_0^inf k_t(s) dB_s.
struct DirectKernelOptions {
    /// Graded partition of [s_min, s_max] with s_min = s_min_factor * min(t)
    /// and s_max = s_max_factor * max(t).
    double s_min_factor = 1e-6;
    double s_max_factor = 1e3;
    Index n_quad = 4096;
    /// Largest admissible tail representation error, relative to Var X_t.
    double tail_budget = 1e-4;
    QuadratureSpec quad{};
};

/// M^H at the given times (t >= 0) by a discretised stochastic integral.
PathBatch sample_direct_mh(const Hurst& hurst, const Vector& times, Index n_paths, std::uint64_t seed,
                           const DirectKernelOptions& kernel = {}, const SamplerOptions& opt = {});
/// M^{*,1/2}, kernel log(1 + t/s), at the given times.
PathBatch sample_direct_mstar(const Vector& times, Index n_paths, std::uint64_t seed,
                              const DirectKernelOptions& kernel = {}, const SamplerOptions& opt = {});

/// Coefficient matrix of a direct sampler: row i maps the independent
/// standard normals onto X_{t_i}. Exposed for diagnostics and tests.
struct DirectKernelDesign {
    Matrix coefficients;
    /// Exact Var X_{t_i} and its discretised counterpart.
    Vector exact_variance;
    Vector discrete_variance;
    /// Largest tail representation error relative to Var X_t.
    double tail_residual = 0.0;
    double budget = 0.0;
};
PathGenerator direct_mh_generator(const Hurst& hurst, const Vector& times, const DirectKernelOptions& kernel = {});
PathGenerator direct_mstar_generator(const Vector& times, const DirectKernelOptions& kernel = {});

DirectKernelDesign direct_mh_design(const Hurst& hurst, const Vector& times, const DirectKernelOptions& kernel = {});
DirectKernelDesign direct_mstar_design(const Vector& times, const DirectKernelOptions& kernel = {});

/// Lamperti transform of a batch observed at times t_i = e^{tau_i} on a
/// uniform tau grid: Y_tau = e^{-exponent tau} X_{e^tau} / sqrt(variance).
PathBatch lamperti(const PathBatch& batch, double exponent, double variance);
/// Lamperti transform of M^H paths, normalised by Var M_1^H.
PathBatch lamperti(const PathBatch& batch, const Hurst& hurst);
/// Lamperti transform of M^{*,1/2} paths (exponent 1/2, variance pi^2/3).
PathBatch lamperti_mstar(const PathBatch& batch);

/// Geometric time grid t_i = e^{tau_0 + i step}.
Vector geometric_times(double tau0, double step, Index n_points);

enum class DumpFormat { Csv, Binary };

/*
 * Path dump.
 *
 * CSV: '#'-prefixed header lines (seed, method, descriptor, n_paths,
 * n_points, jitter, budget), then a column row "path,<t_0>,...,<t_{n-1}>",
 * then one row per path: its index followed by its values in time order.
 *
 * Binary (little-endian): magic "FPPATHS1", u64 seed, u32 method,
 * u64 n_paths, u64 n_points, u32 descriptor length, descriptor bytes,
 * n_points f64 times, then n_paths*n_points f64 values row-major.
 */
void dump_paths(const PathBatch& batch, const std::filesystem::path& path, DumpFormat format);
std::string paths_to_csv(const PathBatch& batch);

}  // namespace fracpersist
