#include "fracpersist/sampler.hpp"

#include "fracpersist/io.hpp"
#include "fracpersist/parallel.hpp"
#include "fracpersist/rng.hpp"

#include <Eigen/Cholesky>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <vector>

namespace fracpersist {

Vector TimeGrid::points() const
{
    Vector out(n_points);
    for (Index i = 0; i < n_points; ++i) out[i] = step * static_cast<double>(i);
    return out;
}

TimeGrid TimeGrid::covering(double horizon, double step)
{
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("time grid step must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("time grid horizon must be positive");
    const double cells = horizon / step;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
        std::ostringstream os;
        os << "horizon " << horizon << " is not a multiple of the step " << step;
        throw ValidationError(os.str());
    }
    TimeGrid g{step, static_cast<Index>(rounded) + 1};
    g.validate();
    return g;
}

void TimeGrid::validate() const
{
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("time grid step must be positive");
    if (n_points < 2) throw ValidationError("time grid needs at least two points");
}

std::string to_string(SamplingMethod method)
{
    switch (method) {
    case SamplingMethod::Cholesky:
        return "cholesky";
    case SamplingMethod::CirculantEmbedding:
        return "circulant";
    case SamplingMethod::DirectKernel:
        return "direct";
    }
    return "unknown";
}

Matrix build_covariance(const Vector& first_row)
{
    const Index n = first_row.size();
    Matrix cov(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) cov(i, j) = first_row[std::abs(i - j)];
    }
    return cov;
}

Matrix build_covariance(const CorrelationFn& corr, const TimeGrid& grid)
{
    grid.validate();
    return build_covariance(corr.tabulate(grid.step, grid.n_points));
}

CholeskyFactor cholesky_with_jitter(const Matrix& cov)
{
    if (cov.rows() != cov.cols() || cov.rows() == 0) throw ValidationError("covariance must be a nonempty square matrix");
    for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
        Matrix shifted = cov;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() != Eigen::Success) continue;
        Matrix lower = llt.matrixL();
        if (!lower.allFinite() || !(lower.diagonal().minCoeff() > 0.0)) continue;
        return {std::move(lower), jitter};
    }
    Eigen::LDLT<Matrix> ldlt(cov);
    const double pivot = ldlt.vectorD().minCoeff();
    std::ostringstream os;
    os << "covariance is not positive definite even with diagonal jitter 1e-8; smallest LDLT pivot " << pivot;
    throw NotPositiveDefinite(os.str(), pivot);
}

namespace {

void require_paths(Index n_paths)
{
    if (n_paths < 1) throw ValidationError("number of paths must be at least 1");
}

std::size_t block_count(Index n_paths, Index block)
{
    if (block < 1) throw ValidationError("sampler block size must be positive");
    return static_cast<std::size_t>((n_paths + block - 1) / block);
}

}  // namespace

PathGenerator PathGenerator::cholesky(Matrix lower, Vector times, double jitter)
{
    if (lower.rows() != lower.cols() || lower.rows() != times.size()) {
        throw ValidationError("Cholesky factor size does not match the time grid");
    }
    PathGenerator g;
    g.method_ = SamplingMethod::Cholesky;
    g.coefficients_ = std::move(lower);
    g.times_ = std::move(times);
    g.jitter_ = jitter;
    return g;
}

PathGenerator PathGenerator::circulant(Vector scale, Vector times)
{
    if (scale.size() != 2 * (times.size() - 1)) throw ValidationError("circulant spectrum size does not match the grid");
    PathGenerator g;
    g.method_ = SamplingMethod::CirculantEmbedding;
    g.scale_ = std::move(scale);
    g.times_ = std::move(times);
    return g;
}

PathGenerator PathGenerator::direct(const DirectKernelDesign& design, Vector times)
{
    if (design.coefficients.rows() != times.size()) throw ValidationError("kernel design does not match the times");
    PathGenerator g;
    g.method_ = SamplingMethod::DirectKernel;
    g.coefficients_ = design.coefficients;
    g.times_ = std::move(times);
    g.budget_ = design.budget;
    return g;
}

void PathGenerator::generate(std::uint64_t seed, Index first_path, Eigen::Ref<RowMatrix> out) const
{
    const Index n = n_points();
    if (out.cols() != n) throw ValidationError("output block has the wrong number of columns");
    if (first_path < 0) throw ValidationError("path index must be nonnegative");
    const Index rows = out.rows();
    if (rows == 0) return;

    if (method_ != SamplingMethod::CirculantEmbedding) {
        const Index k = coefficients_.cols();
        RowMatrix z(rows, k);
        for (Index r = 0; r < rows; ++r) {
            NormalStream stream(seed, static_cast<std::uint64_t>(first_path + r));
            stream.fill(z.row(r).data(), z.row(r).data() + k);
        }
        if (method_ == SamplingMethod::Cholesky) {
            out.noalias() = z * coefficients_.transpose().triangularView<Eigen::Upper>();
        } else {
            out.noalias() = z * coefficients_.transpose();
        }
        return;
    }

    // Paths 2q and 2q+1 are the real and imaginary parts of one complex FFT,
    // with standard normals from substreams 2q and 2q+1.
    const Index m = scale_.size();
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> xi(static_cast<std::size_t>(m));
    std::vector<std::complex<double>> y;
    std::vector<double> re(static_cast<std::size_t>(m));
    std::vector<double> im(static_cast<std::size_t>(m));
    const Index last = first_path + rows;
    for (Index pair = first_path - first_path % 2; pair < last; pair += 2) {
        NormalStream s_re(seed, static_cast<std::uint64_t>(pair));
        NormalStream s_im(seed, static_cast<std::uint64_t>(pair + 1));
        s_re.fill(re.begin(), re.end());
        s_im.fill(im.begin(), im.end());
        for (Index j = 0; j < m; ++j) {
            const auto u = static_cast<std::size_t>(j);
            xi[u] = std::complex<double>(re[u], im[u]) * scale_[j];
        }
        fft.fwd(y, xi);
        if (pair >= first_path) {
            for (Index i = 0; i < n; ++i) out(pair - first_path, i) = y[static_cast<std::size_t>(i)].real();
        }
        if (pair + 1 < last) {
            for (Index i = 0; i < n; ++i) out(pair + 1 - first_path, i) = y[static_cast<std::size_t>(i)].imag();
        }
    }
}

PathBatch PathGenerator::sample(Index n_paths, std::uint64_t seed, const SamplerOptions& opt) const
{
    require_paths(n_paths);
    PathBatch batch;
    batch.times = times_;
    batch.values.resize(n_paths, n_points());
    batch.seed = seed;
    batch.method = method_;
    batch.descriptor = descriptor_;
    batch.jitter = jitter_;
    batch.discretization_budget = budget_;
    const Index block = opt.block_size;
    parallel_for(block_count(n_paths, block), resolve_threads(opt.threads), [&](std::size_t b) {
        const Index r0 = static_cast<Index>(b) * block;
        const Index rows = std::min(block, n_paths - r0);
        generate(seed, r0, batch.values.middleRows(r0, rows));
    });
    return batch;
}

PathGenerator cholesky_generator(const Matrix& cov, const TimeGrid& grid)
{
    grid.validate();
    if (cov.rows() != grid.n_points) throw ValidationError("covariance size does not match the time grid");
    auto factor = cholesky_with_jitter(cov);
    return PathGenerator::cholesky(std::move(factor.lower), grid.points(), factor.jitter);
}

PathGenerator cholesky_generator(const CorrelationFn& corr, const TimeGrid& grid)
{
    auto g = cholesky_generator(build_covariance(corr, grid), grid);
    g.set_descriptor(corr.descriptor());
    return g;
}

PathBatch sample_cholesky(const Matrix& cov, const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                          const SamplerOptions& opt)
{
    require_paths(n_paths);
    return cholesky_generator(cov, grid).sample(n_paths, seed, opt);
}

PathBatch sample_cholesky(const CorrelationFn& corr, const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                          const SamplerOptions& opt)
{
    require_paths(n_paths);
    return cholesky_generator(corr, grid).sample(n_paths, seed, opt);
}

Vector circulant_spectrum(const Vector& first_row)
{
    const Index n = first_row.size();
    if (n < 2) throw ValidationError("circulant embedding needs at least two points");
    const Index m = 2 * (n - 1);
    std::vector<std::complex<double>> c(static_cast<std::size_t>(m));
    for (Index i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = first_row[i];
    for (Index i = n; i < m; ++i) c[static_cast<std::size_t>(i)] = first_row[m - i];
    std::vector<std::complex<double>> spec;
    Eigen::FFT<double> fft;
    fft.fwd(spec, c);
    Vector out(m);
    for (Index i = 0; i < m; ++i) out[i] = spec[static_cast<std::size_t>(i)].real();
    return out;
}

PathGenerator circulant_generator(const Vector& first_row, const TimeGrid& grid)
{
    grid.validate();
    if (first_row.size() != grid.n_points) throw ValidationError("correlation row size does not match the time grid");
    const Vector lambda = circulant_spectrum(first_row);
    const double top = lambda.maxCoeff();
    const double low = lambda.minCoeff();
    if (low < -1e-10 * top) {
        std::ostringstream os;
        os << "minimal circulant embedding has a negative eigenvalue " << low << " (largest " << top << ")";
        throw EmbeddingNotNonnegative(os.str(), low);
    }
    Vector scale = (lambda.array().max(0.0) / static_cast<double>(lambda.size())).sqrt();
    return PathGenerator::circulant(std::move(scale), grid.points());
}

PathGenerator circulant_generator(const CorrelationFn& corr, const TimeGrid& grid)
{
    grid.validate();
    auto g = circulant_generator(corr.tabulate(grid.step, grid.n_points), grid);
    g.set_descriptor(corr.descriptor());
    return g;
}

PathBatch sample_circulant(const Vector& first_row, const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                           const SamplerOptions& opt)
{
    require_paths(n_paths);
    return circulant_generator(first_row, grid).sample(n_paths, seed, opt);
}

PathBatch sample_circulant(const CorrelationFn& corr, const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                           const SamplerOptions& opt)
{
    require_paths(n_paths);
    return circulant_generator(corr, grid).sample(n_paths, seed, opt);
}

// Direct kernel samplers ---------------------------------------------------

namespace {

/*
 * A kernel k_t(s) on (0, inf) together with what the discretisation needs:
 *  - near s = 0, k_t(s) ~ lead(t) - shape(s), with the Gram matrix of
 *    {1, shape} on (0, a] in closed form;
 *  - for large s, k_t(s) ~ c(t) psi(s) with psi(s) = s^{-decay/2};
 *  - the exact variance int_0^inf k_t^2.
 */
struct KernelModel {
    std::function<double(double, double)> k;
    std::function<double(double)> lead;
    std::function<Eigen::Matrix2d(double)> head_gram;
    std::function<double(double, double)> head_residual;
    std::function<double(double)> psi;
    std::function<double(double)> psi_norm_sq;
    /// k_t(s) k_t'(s) decays like s^{-tail_decay}.
    double tail_decay;
    std::function<double(double)> exact_variance;
};

void require_times(const Vector& times)
{
    if (times.size() < 1) throw ValidationError("direct sampler needs at least one time");
    bool any_positive = false;
    for (Index i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
            throw ValidationError("direct sampler times must be nonnegative and finite");
        }
        any_positive = any_positive || times[i] > 0.0;
    }
    if (!any_positive) throw ValidationError("direct sampler needs at least one positive time");
}

DirectKernelDesign build_design(const KernelModel& model, const Vector& times, const DirectKernelOptions& o)
{
    require_times(times);
    if (!(o.s_min_factor > 0.0) || !(o.s_max_factor > 0.0) || o.n_quad < 1) {
        throw ValidationError("direct sampler partition settings must be positive");
    }
    if (!(o.tail_budget > 0.0)) throw ValidationError("tail budget must be positive");
    o.quad.validate();

    double t_min = times.maxCoeff();
    for (Index i = 0; i < times.size(); ++i) {
        if (times[i] > 0.0) t_min = std::min(t_min, times[i]);
    }
    const double a = o.s_min_factor * t_min;
    const double b = o.s_max_factor * times.maxCoeff();
    if (!(a < b)) throw ValidationError("direct sampler partition is empty; widen s_max_factor or s_min_factor");
    const Index n = times.size();
    const Index cells = o.n_quad;
    DirectKernelDesign d;
    d.coefficients.resize(n, cells + 3);
    d.exact_variance.resize(n);
    d.discrete_variance.resize(n);

    const Eigen::Matrix2d gram = model.head_gram(a);
    const Eigen::Matrix2d gram_lower = Eigen::LLT<Eigen::Matrix2d>(gram).matrixL();

    std::vector<double> node(static_cast<std::size_t>(cells));
    std::vector<double> root_weight(static_cast<std::size_t>(cells));
    const double log_ratio = std::log(b / a);
    for (Index j = 0; j < cells; ++j) {
        const double lo = a * std::exp(log_ratio * static_cast<double>(j) / static_cast<double>(cells));
        const double hi = a * std::exp(log_ratio * static_cast<double>(j + 1) / static_cast<double>(cells));
        node[static_cast<std::size_t>(j)] = std::sqrt(lo * hi);
        root_weight[static_cast<std::size_t>(j)] = std::sqrt(hi - lo);
    }

    const double psi_sq = model.psi_norm_sq(b);
    for (Index i = 0; i < n; ++i) {
        const double t = times[i];
        if (t == 0.0) {
            // Every kernel vanishes at t = 0.
            d.coefficients.row(i).setZero();
            d.exact_variance[i] = 0.0;
            d.discrete_variance[i] = 0.0;
            continue;
        }
        const Eigen::RowVector2d head = Eigen::RowVector2d(model.lead(t), -1.0) * gram_lower;
        d.coefficients(i, 0) = head(0);
        d.coefficients(i, 1) = head(1);
        for (Index j = 0; j < cells; ++j) {
            const auto u = static_cast<std::size_t>(j);
            d.coefficients(i, 2 + j) = model.k(t, node[u]) * root_weight[u];
        }
        // Tail: best L^2 multiple of psi on [b, inf).
        const auto cross = integrate_to_infinity([&](double s) { return model.k(t, s) * model.psi(s); }, b, o.quad,
                                                 model.tail_decay);
        const double c = cross.value / psi_sq;
        d.coefficients(i, cells + 2) = c * std::sqrt(psi_sq);
        const auto resid = integrate_to_infinity(
            [&](double s) {
                const double r = model.k(t, s) - c * model.psi(s);
                return r * r;
            },
            b, o.quad, model.tail_decay);

        d.exact_variance[i] = model.exact_variance(t);
        d.discrete_variance[i] = d.coefficients.row(i).squaredNorm();
        const double tail_rel = resid.value / d.exact_variance[i];
        d.tail_residual = std::max(d.tail_residual, tail_rel);
        if (tail_rel > o.tail_budget) {
            std::ostringstream os;
            os << "tail representation error " << tail_rel << " at t = " << t << " exceeds the budget " << o.tail_budget
               << "; increase s_max_factor";
            throw TailBudgetExceeded(os.str());
        }
        const double rel =
            std::abs(d.discrete_variance[i] - d.exact_variance[i]) / d.exact_variance[i] + model.head_residual(t, a) / d.exact_variance[i];
        d.budget = std::max(d.budget, rel);
    }
    return d;
}

KernelModel mh_model(const Hurst& hurst)
{
    const double h = hurst.value();
    const double p = h - 0.5;
    const double var_m1 = sigma_constants(hurst).var_m1;
    KernelModel m;
    m.k = [h](double t, double s) { return kernel_k(h, t, s); };
    m.lead = [p](double t) { return std::pow(t, p); };
    m.head_gram = [p](double a) {
        Eigen::Matrix2d g;
        g(0, 0) = a;
        g(0, 1) = g(1, 0) = std::pow(a, p + 1.0) / (p + 1.0);
        g(1, 1) = std::pow(a, 2.0 * p + 1.0) / (2.0 * p + 1.0);
        return g;
    };
    // int_0^a ((t+s)^p - t^p)^2 ds ~ p^2 t^{2p-2} a^3 / 3
    m.head_residual = [p](double t, double a) { return p * p * std::pow(t, 2.0 * p - 2.0) * a * a * a / 3.0; };
    m.psi = [p](double s) { return std::pow(s, p - 1.0); };
    m.psi_norm_sq = [p](double b) { return std::pow(b, 2.0 * p - 1.0) / (1.0 - 2.0 * p); };
    m.tail_decay = 2.0 - 2.0 * p;
    m.exact_variance = [h, var_m1](double t) { return var_m1 * std::pow(t, 2.0 * h); };
    return m;
}

KernelModel mstar_model()
{
    KernelModel m;
    m.k = [](double t, double s) { return std::log1p(t / s); };
    m.lead = [](double t) { return std::log(t); };
    m.head_gram = [](double a) {
        const double la = std::log(a);
        Eigen::Matrix2d g;
        g(0, 0) = a;
        g(0, 1) = g(1, 0) = a * (la - 1.0);
        g(1, 1) = a * (la * la - 2.0 * la + 2.0);
        return g;
    };
    // int_0^a log(1 + s/t)^2 ds ~ a^3 / (3 t^2)
    m.head_residual = [](double t, double a) { return a * a * a / (3.0 * t * t); };
    m.psi = [](double s) { return 1.0 / s; };
    m.psi_norm_sq = [](double b) { return 1.0 / b; };
    m.tail_decay = 2.0;
    m.exact_variance = [](double t) { return constants::log_kernel_norm * t; };
    return m;
}

}  // namespace

DirectKernelDesign direct_mh_design(const Hurst& hurst, const Vector& times, const DirectKernelOptions& kernel)
{
    if (hurst.degenerate()) {
        throw DegenerateHurst("direct M^H sampling is undefined in the degenerate band (the process vanishes)");
    }
    return build_design(mh_model(hurst), times, kernel);
}

DirectKernelDesign direct_mstar_design(const Vector& times, const DirectKernelOptions& kernel)
{
    return build_design(mstar_model(), times, kernel);
}

PathGenerator direct_mh_generator(const Hurst& hurst, const Vector& times, const DirectKernelOptions& kernel)
{
    auto g = PathGenerator::direct(direct_mh_design(hurst, times, kernel), times);
    std::ostringstream os;
    os << std::setprecision(17) << "mh(H=" << hurst.value() << ")";
    g.set_descriptor(os.str());
    return g;
}

PathGenerator direct_mstar_generator(const Vector& times, const DirectKernelOptions& kernel)
{
    auto g = PathGenerator::direct(direct_mstar_design(times, kernel), times);
    g.set_descriptor("mstar_half");
    return g;
}

PathBatch sample_direct_mh(const Hurst& hurst, const Vector& times, Index n_paths, std::uint64_t seed,
                           const DirectKernelOptions& kernel, const SamplerOptions& opt)
{
    require_paths(n_paths);
    return direct_mh_generator(hurst, times, kernel).sample(n_paths, seed, opt);
}

PathBatch sample_direct_mstar(const Vector& times, Index n_paths, std::uint64_t seed, const DirectKernelOptions& kernel,
                              const SamplerOptions& opt)
{
    require_paths(n_paths);
    return direct_mstar_generator(times, kernel).sample(n_paths, seed, opt);
}

Vector geometric_times(double tau0, double step, Index n_points)
{
    if (!(step > 0.0) || n_points < 1) throw ValidationError("geometric grid needs a positive step and points");
    Vector t(n_points);
    for (Index i = 0; i < n_points; ++i) t[i] = std::exp(tau0 + step * static_cast<double>(i));
    return t;
}

PathBatch lamperti(const PathBatch& batch, double exponent, double variance)
{
    if (!(variance > 0.0)) throw ValidationError("Lamperti transform needs a positive variance");
    const Index n = batch.n_points();
    if (batch.times.size() != n || n < 2) throw ValidationError("Lamperti transform needs at least two time points");
    Vector tau(n);
    for (Index i = 0; i < n; ++i) {
        if (!(batch.times[i] > 0.0)) throw ValidationError("Lamperti transform needs positive times");
        tau[i] = std::log(batch.times[i]);
    }
    const double step = tau[1] - tau[0];
    for (Index i = 0; i < n; ++i) {
        const double expect = tau[0] + step * static_cast<double>(i);
        if (!(step > 0.0) || std::abs(tau[i] - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
            throw ValidationError("Lamperti transform needs times e^{tau} on a uniform tau grid");
        }
    }
    PathBatch out = batch;
    out.times = tau;
    Eigen::RowVectorXd factor(n);
    for (Index i = 0; i < n; ++i) factor[i] = std::exp(-exponent * tau[i]) / std::sqrt(variance);
    out.values = batch.values.array().rowwise() * factor.array();
    out.descriptor = "lamperti(" + batch.descriptor + ")";
    return out;
}

PathBatch lamperti(const PathBatch& batch, const Hurst& hurst)
{
    if (hurst.degenerate()) throw DegenerateHurst("Lamperti normalisation Var M_1^H vanishes in the degenerate band");
    return lamperti(batch, hurst.value(), sigma_constants(hurst).var_m1);
}

PathBatch lamperti_mstar(const PathBatch& batch) { return lamperti(batch, 0.5, constants::log_kernel_norm); }

// Dumps ---------------------------------------------------------------------

std::string paths_to_csv(const PathBatch& batch)
{
    std::string out;
    out.reserve(static_cast<std::size_t>(batch.values.size()) * 24 + 256);
    out += "# seed=" + std::to_string(batch.seed) + "\n";
    out += "# method=" + to_string(batch.method) + "\n";
    out += "# descriptor=" + batch.descriptor + "\n";
    out += "# n_paths=" + std::to_string(batch.n_paths()) + "\n";
    out += "# n_points=" + std::to_string(batch.n_points()) + "\n";
    out += "# jitter=" + format_double(batch.jitter) + "\n";
    out += "# discretization_budget=" + format_double(batch.discretization_budget) + "\n";
    out += "path";
    for (Index i = 0; i < batch.times.size(); ++i) out += "," + format_double(batch.times[i]);
    out += "\n";
    for (Index r = 0; r < batch.n_paths(); ++r) {
        out += std::to_string(r);
        for (Index i = 0; i < batch.n_points(); ++i) {
            out += ',';
            out += format_double(batch.values(r, i));
        }
        out += '\n';
    }
    return out;
}

namespace {

template <typename T>
void put(std::string& buf, T value)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
}

}  // namespace

void dump_paths(const PathBatch& batch, const std::filesystem::path& path, DumpFormat format)
{
    if (format == DumpFormat::Csv) {
        write_file_atomic(path, paths_to_csv(batch));
        return;
    }
    static_assert(sizeof(double) == 8);
    std::string buf = "FPPATHS1";
    put<std::uint64_t>(buf, batch.seed);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(batch.method));
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(batch.n_paths()));
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(batch.n_points()));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(batch.descriptor.size()));
    buf += batch.descriptor;
    for (Index i = 0; i < batch.times.size(); ++i) put<double>(buf, batch.times[i]);
    buf.append(reinterpret_cast<const char*>(batch.values.data()),
               static_cast<std::size_t>(batch.values.size()) * sizeof(double));
    write_file_atomic(path, buf);
}

}  // namespace fracpersist
