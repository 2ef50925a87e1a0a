#include "fracpersist/persistence.hpp"

#include "fracpersist/io.hpp"
#include "fracpersist/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace fracpersist {

namespace {

constexpr double wilson_z = 1.959963984540054;
constexpr double max_monitor_step = 0.25;

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

// Checks that `coords` is uniform and returns its step.
double uniform_step(const Vector& coords, const char* what)
{
    const Index n = coords.size();
    if (n < 2) throw ValidationError(std::string(what) + ": at least two grid points are required");
    const double step = coords[1] - coords[0];
    if (!(step > 0.0)) throw ValidationError(std::string(what) + ": grid must be increasing");
    for (Index i = 2; i < n; ++i) {
        if (!near(coords[i], coords[0] + step * static_cast<double>(i))) {
            throw ValidationError(std::string(what) + ": grid is not uniform");
        }
    }
    return step;
}

void guard_monitor_step(double step, Index stride)
{
    if (stride < 1) throw ValidationError("monitoring stride must be at least 1");
    if (step * static_cast<double>(stride) > max_monitor_step * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "monitoring step " << step * static_cast<double>(stride) << " exceeds " << max_monitor_step
           << "; the discrete supremum would be too biased";
        throw ValidationError(os.str());
    }
}

std::vector<Index> horizon_indices(const Vector& coords, const Vector& horizons, Index stride)
{
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(horizons.size()));
    for (Index k = 0; k < horizons.size(); ++k) {
        const double h = horizons[k];
        const auto it = std::lower_bound(coords.data(), coords.data() + coords.size(), h - 1e-9 * std::max(1.0, std::abs(h)));
        const Index i = it - coords.data();
        if (i >= coords.size() || !near(coords[i], h) || i % stride != 0) {
            std::ostringstream os;
            os << "horizon " << h << " is not a monitored grid point";
            throw OffGridHorizon(os.str());
        }
        if (!idx.empty() && i <= idx.back()) throw ValidationError("horizons must be strictly increasing");
        idx.push_back(i);
    }
    return idx;
}

std::vector<std::int64_t> count_survivors(const std::vector<std::int32_t>& exits, const std::vector<Index>& idx)
{
    std::vector<std::int64_t> out(idx.size(), 0);
    for (auto e : exits) {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (e > idx[k]) ++out[k];
        }
    }
    return out;
}

std::vector<std::int32_t> exits_parallel(const RowMatrix& values, double level, Index stride, unsigned threads)
{
    std::vector<std::int32_t> exits(static_cast<std::size_t>(values.rows()));
    const Index block = 4096;
    const auto blocks = static_cast<std::size_t>((values.rows() + block - 1) / block);
    parallel_for(blocks, resolve_threads(threads), [&](std::size_t b) {
        const Index r0 = static_cast<Index>(b) * block;
        const Index rows = std::min(block, values.rows() - r0);
        const auto e = first_exit_indices(values.middleRows(r0, rows), level, stride);
        std::copy(e.begin(), e.end(), exits.begin() + r0);
    });
    return exits;
}

}  // namespace

std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n)
{
    if (n < 1 || k < 0 || k > n) throw ValidationError("Wilson interval needs 0 <= k <= n and n >= 1");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = wilson_z * wilson_z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = wilson_z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

SurvivalCurve SurvivalCurve::from_counts(Vector horizons, std::vector<std::int64_t> survivors, std::int64_t n_paths,
                                         double level)
{
    if (static_cast<std::size_t>(horizons.size()) != survivors.size()) {
        throw ValidationError("survival curve: horizons and counts differ in length");
    }
    if (n_paths < 1) throw ValidationError("survival curve: n_paths must be positive");
    SurvivalCurve c;
    c.horizons = std::move(horizons);
    c.survivors = std::move(survivors);
    c.n_paths = n_paths;
    c.level = level;
    const Index k = c.horizons.size();
    c.p_hat.resize(k);
    c.ci_low.resize(k);
    c.ci_high.resize(k);
    for (Index i = 0; i < k; ++i) {
        const auto s = c.survivors[static_cast<std::size_t>(i)];
        if (s < 0 || s > n_paths) throw ValidationError("survival curve: counts must lie in [0, n_paths]");
        if (i > 0 && (c.survivors[static_cast<std::size_t>(i - 1)] < s || !(c.horizons[i - 1] < c.horizons[i]))) {
            throw ValidationError("survival curve: horizons must increase and counts must not");
        }
        c.p_hat[i] = static_cast<double>(s) / static_cast<double>(n_paths);
        std::tie(c.ci_low[i], c.ci_high[i]) = wilson_interval(s, n_paths);
    }
    return c;
}

std::vector<std::int32_t> first_exit_indices(const Eigen::Ref<const RowMatrix>& values, double level, Index stride)
{
    if (stride < 1) throw ValidationError("monitoring stride must be at least 1");
    const Index n = values.cols();
    std::vector<std::int32_t> exits(static_cast<std::size_t>(values.rows()), static_cast<std::int32_t>(n));
    for (Index r = 0; r < values.rows(); ++r) {
        const double* row = values.row(r).data();
        for (Index i = 0; i < n; i += stride) {
            if (!(row[i] < level)) {
                exits[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(i);
                break;
            }
        }
    }
    return exits;
}

SurvivalCurve survival_curve_gsp(const PathBatch& batch, const Vector& horizons, const SurvivalOptions& opt)
{
    if (batch.times.size() != batch.n_points()) throw ValidationError("path batch times do not match its values");
    guard_monitor_step(uniform_step(batch.times, "stationary survival"), opt.stride);
    const auto idx = horizon_indices(batch.times, horizons, opt.stride);
    const auto exits = exits_parallel(batch.values, 0.0, opt.stride, opt.threads);
    return SurvivalCurve::from_counts(horizons, count_survivors(exits, idx), batch.n_paths(), 0.0);
}

SurvivalCurve survival_curve_selfsimilar(const PathBatch& batch, const Vector& horizons, double level,
                                         const SurvivalOptions& opt)
{
    if (batch.times.size() != batch.n_points()) throw ValidationError("path batch times do not match its values");
    if (!(batch.times.array() > 0.0).all()) throw ValidationError("self-similar survival needs positive times");
    const Vector log_t = batch.times.array().log();
    guard_monitor_step(uniform_step(log_t, "self-similar survival (geometric grid)"), opt.stride);
    const auto idx = horizon_indices(batch.times, horizons, opt.stride);
    const auto exits = exits_parallel(batch.values, level, opt.stride, opt.threads);
    return SurvivalCurve::from_counts(horizons, count_survivors(exits, idx), batch.n_paths(), level);
}

std::string to_string(FitMode mode)
{
    return mode == FitMode::StationaryLogT ? "stationary_log_t" : "self_similar_log_log";
}

std::string to_string(SamplerChoice choice)
{
    switch (choice) {
    case SamplerChoice::Auto:
        return "auto";
    case SamplerChoice::Cholesky:
        return "cholesky";
    case SamplerChoice::Circulant:
        return "circulant";
    }
    return "unknown";
}

FitWindow default_window(const SurvivalCurve& curve, double drop_fraction)
{
    const Index k = curve.size();
    if (k < 2) throw InsufficientSurvivors("survival curve has fewer than two horizons");
    if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) throw ValidationError("drop fraction must lie in [0, 1)");
    Index first = static_cast<Index>(std::floor(drop_fraction * static_cast<double>(k) + 1e-9));
    first = std::min(first, k - 2);
    return {curve.horizons[first], curve.horizons[k - 1]};
}

ExponentEstimate fit_exponent(const SurvivalCurve& curve, FitMode mode, std::optional<FitWindow> window)
{
    const FitWindow w = window ? *window : default_window(curve);
    if (!(w.lo < w.hi)) throw ValidationError("fit window must satisfy lo < hi");

    std::vector<Index> use;
    Index excluded = 0;
    for (Index i = 0; i < curve.size(); ++i) {
        const double h = curve.horizons[i];
        if (h < w.lo * (1.0 - 1e-12) || h > w.hi * (1.0 + 1e-12)) continue;
        if (curve.survivors[static_cast<std::size_t>(i)] == 0) {
            ++excluded;
            continue;
        }
        use.push_back(i);
    }
    if (use.size() < 2) {
        std::ostringstream os;
        os << "only " << use.size() << " horizon(s) in [" << w.lo << ", " << w.hi << "] have survivors";
        throw InsufficientSurvivors(os.str());
    }
    if (mode == FitMode::SelfSimilarLogLog && !(curve.horizons[use.front()] > 0.0)) {
        throw ValidationError("log-log fit needs positive horizons");
    }

    const auto m = static_cast<Index>(use.size());
    const double n = static_cast<double>(curve.n_paths);
    Matrix x(m, 2);
    Vector y(m);
    Vector v(m);
    for (Index k = 0; k < m; ++k) {
        const Index i = use[static_cast<std::size_t>(k)];
        const double p = curve.p_hat[i];
        x(k, 0) = 1.0;
        x(k, 1) = mode == FitMode::StationaryLogT ? curve.horizons[i] : std::log(curve.horizons[i]);
        y[k] = -std::log(p);
        // Floored so that p_hat = 1 keeps a finite weight.
        v[k] = (1.0 - p + 1.0 / n) / (n * p);
    }
    const Vector wts = v.cwiseInverse();
    const Matrix xtw = x.transpose() * wts.asDiagonal();
    const Eigen::Matrix2d bread = (xtw * x).inverse();
    const Vector beta = bread * (xtw * y);

    Matrix cov_y(m, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < m; ++i) cov_y(i, j) = v[std::min(i, j)];
    }
    const Matrix a = bread * xtw;
    const Matrix cov_beta = a * cov_y * a.transpose();

    const Vector resid = y - x * beta;
    const double ybar = wts.dot(y) / wts.sum();
    const double sst = (wts.array() * (y.array() - ybar).square()).sum();
    const double ssr = (wts.array() * resid.array().square()).sum();

    ExponentEstimate e;
    e.theta_hat = beta[1];
    e.intercept = beta[0];
    e.std_error = std::sqrt(std::max(0.0, cov_beta(1, 1)));
    e.window = w;
    e.mode = mode;
    e.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;
    e.two_point_slope = (y[m - 1] - y[0]) / (x(m - 1, 1) - x(0, 1));
    e.n_fit = m;
    e.n_excluded = excluded;
    return e;
}

void MonteCarloSettings::validate() const
{
    if (!(step > 0.0) || step > max_monitor_step) {
        throw ValidationError("Monte Carlo step must lie in (0, 0.25]");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("Monte Carlo horizon must be positive");
    const double cells = horizon_spacing / (2.0 * step);
    if (!(horizon_spacing > 0.0) || !near(cells, std::round(cells)) || std::round(cells) < 1.0) {
        throw ValidationError("horizon spacing must be a positive multiple of twice the step");
    }
    const double count = horizon / horizon_spacing;
    if (!near(count, std::round(count)) || std::round(count) < 2.0) {
        throw ValidationError("horizon must be a multiple of the horizon spacing, at least two of them");
    }
    if (groups < 2) throw ValidationError("jackknife needs at least two groups");
    if (n_paths < groups) throw ValidationError("number of paths must be at least the number of jackknife groups");
    if (chunk < 1) throw ValidationError("chunk size must be positive");
    if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) throw ValidationError("drop fraction must lie in [0, 1)");
    if (window && !(window->lo < window->hi)) throw ValidationError("fit window must satisfy lo < hi");
    const double origin_cells = log_time_origin / (2.0 * step);
    if (!(log_time_origin <= 0.0) || !near(origin_cells, std::round(origin_cells))) {
        throw ValidationError("log-time origin must be a nonpositive multiple of twice the step");
    }
}

double roughness_exponent(const CorrelationFn& corr, double step)
{
    if (!(step > 0.0)) throw ValidationError("roughness needs a positive step");
    const double d1 = 1.0 - corr(step);
    const double d2 = 1.0 - corr(2.0 * step);
    if (!(d1 > 0.0) || !(d2 > 0.0)) return 2.0;
    return std::clamp(std::log2(d2 / d1), 0.1, 2.0);
}

namespace {

struct Layout {
    /// Grid indices of the fitted horizons (all even) and their values.
    std::vector<Index> idx;
    Vector horizons;
    FitMode mode;
    double level;
};

PersistenceRun run_pipeline(const PathGenerator& gen, const Layout& layout, double roughness,
                            const MonteCarloSettings& s)
{
    const Index n = s.n_paths;
    const Index np = gen.n_points();
    std::vector<std::int32_t> fine_exit(static_cast<std::size_t>(n));
    std::vector<std::int32_t> coarse_exit(static_cast<std::size_t>(n));
    const auto chunks = static_cast<std::size_t>((n + s.chunk - 1) / s.chunk);
    parallel_for(chunks, resolve_threads(s.threads), [&](std::size_t c) {
        const Index r0 = static_cast<Index>(c) * s.chunk;
        const Index rows = std::min(s.chunk, n - r0);
        RowMatrix block(rows, np);
        gen.generate(s.seed, r0, block);
        const auto f = first_exit_indices(block, layout.level, 1);
        const auto g = first_exit_indices(block, layout.level, 2);
        std::copy(f.begin(), f.end(), fine_exit.begin() + r0);
        std::copy(g.begin(), g.end(), coarse_exit.begin() + r0);
    });

    // Survivor counts per jackknife group; group q holds paths [q n / G, (q+1) n / G).
    const Index groups = s.groups;
    const std::size_t nh = layout.idx.size();
    std::vector<std::vector<std::int64_t>> fine_g(static_cast<std::size_t>(groups), std::vector<std::int64_t>(nh, 0));
    auto coarse_g = fine_g;
    std::vector<std::int64_t> group_size(static_cast<std::size_t>(groups), 0);
    for (Index q = 0; q < groups; ++q) {
        const Index lo = q * n / groups;
        const Index hi = (q + 1) * n / groups;
        group_size[static_cast<std::size_t>(q)] = hi - lo;
        for (Index p = lo; p < hi; ++p) {
            const auto fe = fine_exit[static_cast<std::size_t>(p)];
            const auto ce = coarse_exit[static_cast<std::size_t>(p)];
            for (std::size_t k = 0; k < nh; ++k) {
                fine_g[static_cast<std::size_t>(q)][k] += fe > layout.idx[k];
                coarse_g[static_cast<std::size_t>(q)][k] += ce > layout.idx[k];
            }
        }
    }
    std::vector<std::int64_t> fine_total(nh, 0);
    std::vector<std::int64_t> coarse_total(nh, 0);
    for (Index q = 0; q < groups; ++q) {
        for (std::size_t k = 0; k < nh; ++k) {
            fine_total[k] += fine_g[static_cast<std::size_t>(q)][k];
            coarse_total[k] += coarse_g[static_cast<std::size_t>(q)][k];
        }
    }

    PersistenceRun run;
    run.method = gen.method();
    run.descriptor = gen.descriptor();
    run.roughness = roughness;
    run.curve = SurvivalCurve::from_counts(layout.horizons, fine_total, n, layout.level);
    run.coarse_curve = SurvivalCurve::from_counts(layout.horizons, coarse_total, n, layout.level);
    const FitWindow window = s.window ? *s.window : default_window(run.curve, s.drop_fraction);
    run.fine = fit_exponent(run.curve, layout.mode, window);
    run.coarse = fit_exponent(run.coarse_curve, layout.mode, window);

    const double factor = s.richardson ? 1.0 / (std::pow(2.0, roughness / 2.0) - 1.0) : 0.0;
    auto combine = [factor](double fine, double coarse) { return fine + (fine - coarse) * factor; };

    std::vector<double> replicate(static_cast<std::size_t>(groups));
    for (Index q = 0; q < groups; ++q) {
        auto f = fine_total;
        auto c = coarse_total;
        for (std::size_t k = 0; k < nh; ++k) {
            f[k] -= fine_g[static_cast<std::size_t>(q)][k];
            c[k] -= coarse_g[static_cast<std::size_t>(q)][k];
        }
        const auto m = n - group_size[static_cast<std::size_t>(q)];
        const auto ef = fit_exponent(SurvivalCurve::from_counts(layout.horizons, f, m, layout.level), layout.mode, window);
        const auto ec = fit_exponent(SurvivalCurve::from_counts(layout.horizons, c, m, layout.level), layout.mode, window);
        replicate[static_cast<std::size_t>(q)] = combine(ef.theta_hat, ec.theta_hat);
    }
    double mean = 0.0;
    for (double r : replicate) mean += r;
    mean /= static_cast<double>(groups);
    double ss = 0.0;
    for (double r : replicate) ss += (r - mean) * (r - mean);

    run.estimate = run.fine;
    run.estimate.theta_hat = combine(run.fine.theta_hat, run.coarse.theta_hat);
    run.estimate.two_point_slope = combine(run.fine.two_point_slope, run.coarse.two_point_slope);
    run.estimate.std_error = std::sqrt(ss * static_cast<double>(groups - 1) / static_cast<double>(groups));
    run.base_theta = run.estimate.theta_hat;
    run.base_std_error = run.estimate.std_error;
    return run;
}

Layout stationary_layout(const TimeGrid& grid, const MonteCarloSettings& s)
{
    Layout l;
    l.mode = FitMode::StationaryLogT;
    l.level = 0.0;
    const auto every = static_cast<Index>(std::llround(s.horizon_spacing / s.step));
    const auto count = static_cast<Index>(std::llround(s.horizon / s.horizon_spacing));
    l.horizons.resize(count);
    for (Index j = 1; j <= count; ++j) {
        l.idx.push_back(j * every);
        l.horizons[j - 1] = grid.step * static_cast<double>(j * every);
    }
    return l;
}

}  // namespace

PersistenceRun estimate_exponent(const CorrelationFn& corr, const MonteCarloSettings& settings)
{
    settings.validate();
    const auto grid = TimeGrid::covering(settings.horizon, settings.step);
    std::string note;
    std::optional<PathGenerator> gen;
    if (settings.method != SamplerChoice::Cholesky) {
        try {
            gen = circulant_generator(corr, grid);
        } catch (const EmbeddingNotNonnegative& e) {
            if (settings.method == SamplerChoice::Circulant) throw;
            note = std::string("circulant embedding rejected (") + e.what() + "); sampled by Cholesky instead";
        }
    }
    if (!gen) gen = cholesky_generator(corr, grid);
    auto run = run_pipeline(*gen, stationary_layout(grid, settings), roughness_exponent(corr, settings.step), settings);
    run.note = note;
    if (!corr.warning().empty()) run.note += (run.note.empty() ? "" : "; ") + corr.warning();
    return run;
}

PersistenceRun rescaled_exponent(const CorrelationFn& base, double kappa, const MonteCarloSettings& settings)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("rescaling factor kappa must be positive");
    auto run = estimate_exponent(CorrelationFn::rescaled(base, kappa), settings);
    run.kappa = kappa;
    run.base_theta = kappa * run.estimate.theta_hat;
    run.base_std_error = kappa * run.estimate.std_error;
    return run;
}

namespace {

PersistenceRun selfsimilar_run(const PathGenerator& gen, const CorrelationFn& lamperti_corr,
                               const MonteCarloSettings& s)
{
    const Index offset = static_cast<Index>(std::llround(-s.log_time_origin / s.step));
    const auto every = static_cast<Index>(std::llround(s.horizon_spacing / s.step));
    const auto count = static_cast<Index>(std::llround(s.horizon / s.horizon_spacing));
    Layout l;
    l.mode = FitMode::SelfSimilarLogLog;
    l.level = 1.0;
    l.horizons.resize(count);
    for (Index j = 1; j <= count; ++j) {
        const Index i = offset + j * every;
        l.idx.push_back(i);
        l.horizons[j - 1] = gen.times()[i];
    }
    return run_pipeline(gen, l, roughness_exponent(lamperti_corr, s.step), s);
}

Vector selfsimilar_times(const MonteCarloSettings& s)
{
    const auto n = static_cast<Index>(std::llround((s.horizon - s.log_time_origin) / s.step)) + 1;
    return geometric_times(s.log_time_origin, s.step, n);
}

}  // namespace

PersistenceRun estimate_exponent_mh(const Hurst& hurst, const MonteCarloSettings& settings,
                                    const DirectKernelOptions& kernel)
{
    settings.validate();
    const auto gen = direct_mh_generator(hurst, selfsimilar_times(settings), kernel);
    return selfsimilar_run(gen, CorrelationFn::gh_closed(hurst), settings);
}

PersistenceRun estimate_exponent_mstar(const MonteCarloSettings& settings, const DirectKernelOptions& kernel)
{
    settings.validate();
    const auto gen = direct_mstar_generator(selfsimilar_times(settings), kernel);
    return selfsimilar_run(gen, CorrelationFn::gstar_half(), settings);
}

std::string survival_csv(const SurvivalCurve& curve, const std::vector<ExponentEstimate>& fits)
{
    std::string out = "T,survivors,n,p_hat,ci_low,ci_high\n";
    for (Index i = 0; i < curve.size(); ++i) {
        out += format_double(curve.horizons[i]) + ',' + std::to_string(curve.survivors[static_cast<std::size_t>(i)]) +
               ',' + std::to_string(curve.n_paths) + ',' + format_double(curve.p_hat[i]) + ',' +
               format_double(curve.ci_low[i]) + ',' + format_double(curve.ci_high[i]) + '\n';
    }
    if (!fits.empty()) {
        out += "\nmode,T_lo,T_hi,theta_hat,stderr,r2\n";
        for (const auto& f : fits) {
            out += to_string(f.mode) + ',' + format_double(f.window.lo) + ',' + format_double(f.window.hi) + ',' +
                   format_double(f.theta_hat) + ',' + format_double(f.std_error) + ',' + format_double(f.r_squared) +
                   '\n';
        }
    }
    return out;
}

}  // namespace fracpersist
