#include "cli.hpp"

#include "fracpersist/corrlib.hpp"
#include "fracpersist/io.hpp"
#include "fracpersist/parallel.hpp"
#include "fracpersist/persistence.hpp"
#include "fracpersist/sampler.hpp"
#include "fracpersist/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace fracpersist::cli {

namespace {

using json = nlohmann::json;

constexpr double unset = std::numeric_limits<double>::quiet_NaN();

struct Common {
    unsigned threads = 0;
    bool dry_run = false;
    std::string output;
};

struct CorrArgs {
    std::string kind = "gh";
    double hurst = unset;
    double rate = 1.0;
    double kappa = 1.0;
    double half_band = Hurst::default_half_band;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

struct GridArgs {
    double tau_max = 10.0;
    double step = 0.1;
};

struct McArgs {
    double horizon = 10.0;
    double step = 0.05;
    double spacing = 0.5;
    long long paths = 200'000;
    std::uint64_t seed = 1;
    std::string method = "auto";
    long long chunk = 1024;
    long long groups = 20;
    bool no_richardson = false;
    double drop = 0.3;
    double window_lo = unset;
    double window_hi = unset;
    double log_origin = -5.0;
    long long n_quad = 4096;
};

struct SampleArgs {
    double horizon = 10.0;
    double step = 0.05;
    long long paths = 1000;
    std::uint64_t seed = 1;
    std::string method = "auto";
    double log_origin = -5.0;
    long long n_quad = 4096;
    std::string format = "csv";
};

struct ScanArgs {
    std::string kind = "h_to_half";
    std::vector<double> hurst;
    double distance_tau_max = 10.0;
    double distance_step = 0.01;
};

struct VerifyArgs {
    std::string lemma = "all";
    std::vector<double> hurst;
    std::vector<double> ell;
    int l_max = 0;
    double tolerance = 1e-10;
    double lhopital_tolerance = 1e-4;
    bool manifest = false;
};

const std::vector<std::string> stationary_kinds = {"ch", "rh", "gh", "gh_quad", "gstar", "exp"};

std::vector<std::string> with_direct(std::vector<std::string> kinds)
{
    kinds.push_back("mh");
    kinds.push_back("mstar");
    return kinds;
}

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--threads", c.threads, "Worker threads (0: FRACPERSIST_THREADS, else 1)")
        ->envname("FRACPERSIST_THREADS")
        ->capture_default_str();
    sub->add_flag("--dry-run", c.dry_run, "Print the resolved configuration and exit")->configurable(false);
    sub->add_option("-o,--output", c.output, "Write the result here instead of standard output");
}

void add_corr(CLI::App* sub, CorrArgs& a, const std::vector<std::string>& kinds, const std::string& flag)
{
    sub->add_option(flag, a.kind, "Correlation or process")->check(CLI::IsMember(kinds))->capture_default_str();
    sub->add_option("--hurst", a.hurst, "Hurst index H in (0,1)");
    sub->add_option("--rate", a.rate, "Rate of the exponential correlation")->capture_default_str();
    sub->add_option("--kappa", a.kappa, "Time rescaling: tau -> rho(tau / kappa)")->capture_default_str();
    sub->add_option("--half-band", a.half_band, "Half-width of the degenerate band around H = 1/2")
        ->capture_default_str();
    sub->add_option("--rel-tol", a.rel_tol, "Quadrature relative tolerance")->capture_default_str();
    sub->add_option("--abs-tol", a.abs_tol, "Quadrature absolute tolerance")->capture_default_str();
}

void add_mc(CLI::App* sub, McArgs& a)
{
    sub->add_option("--T,--horizon", a.horizon, "Largest horizon (log-time for mh/mstar)")->capture_default_str();
    sub->add_option("--step", a.step, "Grid step")->capture_default_str();
    sub->add_option("--spacing", a.spacing, "Spacing of the fitted horizons")->capture_default_str();
    sub->add_option("--paths", a.paths, "Number of paths")->capture_default_str();
    sub->add_option("--seed", a.seed, "Random seed")->capture_default_str();
    sub->add_option("--method", a.method, "Stationary sampler")
        ->check(CLI::IsMember({"auto", "cholesky", "circulant"}))
        ->capture_default_str();
    sub->add_option("--chunk", a.chunk, "Paths per work unit")->capture_default_str();
    sub->add_option("--groups", a.groups, "Jackknife groups")->capture_default_str();
    sub->add_flag("--no-richardson", a.no_richardson, "Fit the full grid only, without step extrapolation");
    sub->add_option("--drop", a.drop, "Fraction of early horizons left out of the default window")
        ->capture_default_str();
    sub->add_option("--window-lo", a.window_lo, "Fit window start");
    sub->add_option("--window-hi", a.window_hi, "Fit window end");
    sub->add_option("--log-origin", a.log_origin, "First log-time of the geometric grid (mh/mstar)")
        ->capture_default_str();
    sub->add_option("--n-quad", a.n_quad, "Kernel cells of the direct sampler (mh/mstar)")->capture_default_str();
}

QuadratureSpec quad_from(const CorrArgs& a)
{
    QuadratureSpec q;
    q.rel_tol = a.rel_tol;
    q.abs_tol = a.abs_tol;
    q.validate();
    return q;
}

Hurst hurst_from(const CorrArgs& a)
{
    if (std::isnan(a.hurst)) throw ValidationError("--hurst is required for '" + a.kind + "'");
    return Hurst(a.hurst, a.half_band);
}

CorrelationFn corr_from(const CorrArgs& a)
{
    const auto q = quad_from(a);
    std::optional<CorrelationFn> f;
    if (a.kind == "exp") f = CorrelationFn::exponential(a.rate);
    else if (a.kind == "gstar") f = CorrelationFn::gstar_half(q);
    else if (a.kind == "ch") f = CorrelationFn::ch(hurst_from(a));
    else if (a.kind == "rh") f = CorrelationFn::rh(hurst_from(a));
    else if (a.kind == "gh") f = CorrelationFn::gh_closed(hurst_from(a));
    else if (a.kind == "gh_quad") f = CorrelationFn::gh_quad(hurst_from(a), q);
    else throw ValidationError("'" + a.kind + "' is not a stationary correlation");
    if (a.kappa != 1.0) return CorrelationFn::rescaled(*f, a.kappa);
    return *f;
}

DirectKernelOptions kernel_from(long long n_quad, const CorrArgs& a)
{
    DirectKernelOptions k;
    if (n_quad < 2) throw ValidationError("--n-quad must be at least 2");
    k.n_quad = static_cast<Index>(n_quad);
    k.quad = quad_from(a);
    return k;
}

SamplerChoice choice_from(const std::string& s)
{
    if (s == "cholesky") return SamplerChoice::Cholesky;
    if (s == "circulant") return SamplerChoice::Circulant;
    return SamplerChoice::Auto;
}

MonteCarloSettings settings_from(const McArgs& a, unsigned threads)
{
    MonteCarloSettings s;
    s.horizon = a.horizon;
    s.step = a.step;
    s.horizon_spacing = a.spacing;
    if (a.paths < 1 || a.chunk < 1 || a.groups < 1) throw ValidationError("--paths, --chunk and --groups must be positive");
    s.n_paths = static_cast<Index>(a.paths);
    s.seed = a.seed;
    s.method = choice_from(a.method);
    s.threads = threads;
    s.chunk = static_cast<Index>(a.chunk);
    s.groups = static_cast<Index>(a.groups);
    s.richardson = !a.no_richardson;
    s.drop_fraction = a.drop;
    if (std::isnan(a.window_lo) != std::isnan(a.window_hi)) {
        throw ValidationError("--window-lo and --window-hi must be given together");
    }
    if (!std::isnan(a.window_lo)) s.window = FitWindow{a.window_lo, a.window_hi};
    s.log_time_origin = a.log_origin;
    s.validate();
    return s;
}

void emit(const Common& c, const std::string& text, std::ostream& out)
{
    if (c.output.empty()) {
        out << text;
        out.flush();
    } else {
        write_file_atomic(c.output, text);
    }
}

json estimate_json(const ExponentEstimate& e)
{
    return json{{"mode", to_string(e.mode)},
                {"theta_hat", e.theta_hat},
                {"stderr", e.std_error},
                {"T_lo", e.window.lo},
                {"T_hi", e.window.hi},
                {"r2", e.r_squared},
                {"intercept", e.intercept},
                {"two_point_slope", e.two_point_slope},
                {"n_fit", e.n_fit},
                {"n_excluded", e.n_excluded}};
}

json curve_json(const SurvivalCurve& c)
{
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return json{{"T", vec(c.horizons)}, {"survivors", c.survivors}, {"n", c.n_paths},     {"level", c.level},
                {"p_hat", vec(c.p_hat)}, {"ci_low", vec(c.ci_low)}, {"ci_high", vec(c.ci_high)}};
}

// Subcommands -----------------------------------------------------------------

std::string run_corr(const CorrArgs& a, const GridArgs& g, std::ostream& err)
{
    if (!(g.step > 0.0) || !(g.tau_max >= 0.0)) throw ValidationError("--step must be positive and --tau-max nonnegative");
    const auto f = corr_from(a);
    if (!f.warning().empty()) err << "warning: " << f.warning() << '\n';
    const auto n = static_cast<long>(std::floor(g.tau_max / g.step + 1e-9));
    std::string text = "tau,value\n";
    for (long i = 0; i <= n; ++i) {
        const double tau = static_cast<double>(i) * g.step;
        text += format_double(tau) + ',' + format_double(f(tau)) + '\n';
    }
    return text;
}

std::string run_sample(const CorrArgs& a, const SampleArgs& s, const Common& c, std::ostream& err)
{
    if (s.paths < 1) throw ValidationError("--paths must be positive");
    if (s.format == "binary" && c.output.empty()) throw ValidationError("binary output needs --output");
    SamplerOptions opt;
    opt.threads = c.threads;
    const auto n_paths = static_cast<Index>(s.paths);
    PathBatch batch;
    if (a.kind == "mh" || a.kind == "mstar") {
        const auto grid = TimeGrid::covering(s.horizon - s.log_origin, s.step);
        const Vector times = geometric_times(s.log_origin, s.step, grid.n_points);
        const auto kernel = kernel_from(s.n_quad, a);
        batch = a.kind == "mh" ? sample_direct_mh(hurst_from(a), times, n_paths, s.seed, kernel, opt)
                               : sample_direct_mstar(times, n_paths, s.seed, kernel, opt);
    } else {
        const auto f = corr_from(a);
        if (!f.warning().empty()) err << "warning: " << f.warning() << '\n';
        const auto grid = TimeGrid::covering(s.horizon, s.step);
        if (s.method == "cholesky") {
            batch = sample_cholesky(f, grid, n_paths, s.seed, opt);
        } else if (s.method == "circulant") {
            batch = sample_circulant(f, grid, n_paths, s.seed, opt);
        } else {
            try {
                batch = sample_circulant(f, grid, n_paths, s.seed, opt);
            } catch (const EmbeddingNotNonnegative& e) {
                err << "note: circulant embedding rejected (" << e.what() << "); using Cholesky\n";
                batch = sample_cholesky(f, grid, n_paths, s.seed, opt);
            }
        }
    }
    if (s.format == "binary") {
        dump_paths(batch, c.output, DumpFormat::Binary);
        return {};
    }
    return paths_to_csv(batch);
}

std::string run_persist(const CorrArgs& a, const McArgs& m, const Common& c, const std::string& format,
                        std::ostream& err)
{
    const auto settings = settings_from(m, c.threads);
    PersistenceRun run;
    if (a.kind == "mh") {
        run = estimate_exponent_mh(hurst_from(a), settings, kernel_from(m.n_quad, a));
    } else if (a.kind == "mstar") {
        run = estimate_exponent_mstar(settings, kernel_from(m.n_quad, a));
    } else {
        CorrArgs base = a;
        base.kappa = 1.0;
        const auto f = corr_from(base);
        run = a.kappa == 1.0 ? estimate_exponent(f, settings) : rescaled_exponent(f, a.kappa, settings);
    }
    if (!run.note.empty()) err << "note: " << run.note << '\n';
    if (format == "csv") return survival_csv(run.curve, {run.estimate});

    json j;
    j["process"] = run.descriptor;
    j["sampler"] = to_string(run.method);
    j["note"] = run.note;
    j["kappa"] = run.kappa;
    j["roughness"] = run.roughness;
    j["estimate"] = estimate_json(run.estimate);
    j["fine"] = estimate_json(run.fine);
    j["coarse"] = estimate_json(run.coarse);
    j["base_theta"] = run.base_theta;
    j["base_stderr"] = run.base_std_error;
    j["curve"] = curve_json(run.curve);
    j["seed"] = settings.seed;
    j["n_paths"] = settings.n_paths;
    return j.dump(2) + "\n";
}

std::string run_scan_cmd(const ScanArgs& s, const McArgs& m, const Common& c, const std::string& format)
{
    ScanKind kind = ScanKind::HToHalf;
    if (s.kind == "h_to_zero") kind = ScanKind::HToZero;
    if (s.kind == "h_to_one") kind = ScanKind::HToOne;
    auto settings = default_scan_settings(kind);
    if (!s.hurst.empty()) settings.hurst = s.hurst;
    settings.mc = settings_from(m, c.threads);
    settings.distance_tau_max = s.distance_tau_max;
    settings.distance_step = s.distance_step;
    const auto rows = run_scan(kind, settings);
    if (format == "csv") return scan_csv(rows);
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back(json{{"H", r.hurst},
                           {"kappa", r.kappa},
                           {"theta_hat", r.theta_hat},
                           {"stderr", r.std_error},
                           {"base_theta", r.base_theta},
                           {"sup_distance", r.sup_distance},
                           {"sampler", r.descriptor},
                           {"note", r.note}});
    }
    return json{{"scan", to_string(kind)}, {"rows", arr}}.dump(2) + "\n";
}

std::vector<BoundReport> run_verify_cmd(const VerifyArgs& v, const Common& c)
{
    if (!(v.tolerance >= 0.0) || !(v.lhopital_tolerance >= 0.0)) throw ValidationError("tolerances must be nonnegative");
    VerifyManifest m = default_manifest();
    m.tolerance = v.tolerance;
    m.lhopital_tolerance = v.lhopital_tolerance;
    const auto hs = [&](const std::vector<double>& fallback) { return v.hurst.empty() ? fallback : v.hurst; };
    const auto ells = v.ell.empty() ? m.continuity_ell : v.ell;
    const int l_max = v.l_max > 0 ? v.l_max : m.continuity_l_max;
    for (double e : ells) {
        if (!(e > 0.0)) throw ValidationError("--ell values must be positive");
    }

    using Check = std::function<BoundReport()>;
    std::vector<Check> checks;
    const std::string& id = v.lemma;
    if (id == "all") return run_verification_suite(c.threads, m);
    if (id == "3.1") checks.push_back([&] { return check_sigma_shape(m); });
    if (id == "3.2") checks.push_back([&] { return check_ch_bound(m); });
    if (id == "3.3" || id == "3.3a") checks.push_back([&] { return check_gh_exponential_bound(m); });
    if (id == "3.3" || id == "3.3b") checks.push_back([&] { return check_gh_tail_sum_bound(m); });
    if (id == "3.4") checks.push_back([&] { return check_gh_lower_bound(m); });
    if (id == "4.1") checks.push_back([&] { return check_hyp2f1_bounds(m); });
    if (id == "4.3") checks.push_back([&] { return check_variance_near_one(m); });
    if (id == "4.4") checks.push_back([&] { return check_gh_lower_bound_near_one(m); });
    if (id == "5.3") checks.push_back([&] { return check_gstar_bound(m); });
    if (id == "2.5" || id == "phi") checks.push_back([&] { return check_phi_constructions(m); });
    if (id == "5.1" || id == "half") checks.push_back([&] { return check_half_limit(m); });
    if (id == "monotone") checks.push_back([&] { return check_monotone_decay(m); });
    if (id == "2.4" || id == "holder") {
        for (double H : hs(m.holder_hurst)) {
            if (!(H > 0.0 && H < 1.0)) throw ValidationError("--hurst values must lie in (0,1)");
            checks.push_back([&m, H] { return check_holder(H, m); });
        }
    }
    if (id == "2.1" || id == "continuity") {
        for (double H : hs(m.continuity_hurst)) {
            if (!(H > 0.0 && H < 1.0) || H == 0.5) throw ValidationError("--hurst values must lie in (0,1/2) or (1/2,1)");
            for (double e : ells) checks.push_back([&m, H, e, l_max] { return check_continuity_conditions(H, e, l_max, m); });
        }
    }
    if (checks.empty()) throw ValidationError("unknown --lemma '" + id + "'");
    std::vector<BoundReport> out(checks.size());
    parallel_for(checks.size(), resolve_threads(c.threads), [&](std::size_t i) { out[i] = checks[i](); });
    return out;
}

void print_config(const CLI::App* sub, std::ostream& out)
{
    out << '[' << sub->get_name() << "]\n" << sub->config_to_str(true, false);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Persistence exponents of fractional Gaussian processes"};
    app.set_config("--config", "", "INI file with one [section] per subcommand; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    // Each subcommand binds its own copies so that config sections never leak
    // between subcommands.
    Common corr_common, sample_common, persist_common, scan_common, verify_common;
    CorrArgs corr_args, sample_corr, persist_corr;
    GridArgs grid_args;
    McArgs persist_mc, scan_mc;
    SampleArgs sample_args;
    ScanArgs scan_args;
    VerifyArgs verify_args;
    std::string persist_format = "csv";
    std::string scan_format = "csv";

    auto* corr = app.add_subcommand("corr", "Tabulate a correlation function on a uniform tau grid");
    add_common(corr, corr_common);
    add_corr(corr, corr_args, stationary_kinds, "--kind");
    corr->add_option("--tau-max", grid_args.tau_max, "Largest tau")->capture_default_str();
    corr->add_option("--step", grid_args.step, "Grid step")->capture_default_str();

    auto* sample = app.add_subcommand("sample", "Simulate sample paths");
    add_common(sample, sample_common);
    add_corr(sample, sample_corr, with_direct(stationary_kinds), "--corr");
    sample->add_option("--T,--horizon", sample_args.horizon, "Largest time (log-time for mh/mstar)")
        ->capture_default_str();
    sample->add_option("--step", sample_args.step, "Grid step")->capture_default_str();
    sample->add_option("--paths", sample_args.paths, "Number of paths")->capture_default_str();
    sample->add_option("--seed", sample_args.seed, "Random seed")->capture_default_str();
    sample->add_option("--method", sample_args.method, "Stationary sampler")
        ->check(CLI::IsMember({"auto", "cholesky", "circulant"}))
        ->capture_default_str();
    sample->add_option("--log-origin", sample_args.log_origin, "First log-time of the geometric grid (mh/mstar)")
        ->capture_default_str();
    sample->add_option("--n-quad", sample_args.n_quad, "Kernel cells of the direct sampler")->capture_default_str();
    sample->add_option("--format", sample_args.format, "Path dump format")
        ->check(CLI::IsMember({"csv", "binary"}))
        ->capture_default_str();

    auto* persist = app.add_subcommand("persist", "Survival curve and persistence exponent");
    add_common(persist, persist_common);
    add_corr(persist, persist_corr, with_direct(stationary_kinds), "--corr");
    add_mc(persist, persist_mc);
    persist->add_option("--format", persist_format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    auto* scan = app.add_subcommand("scan", "Exponent and correlation ladders towards H = 0, 1 or 1/2");
    add_common(scan, scan_common);
    scan->add_option("--kind", scan_args.kind, "Which limit")
        ->check(CLI::IsMember({"h_to_zero", "h_to_one", "h_to_half"}))
        ->capture_default_str();
    scan->add_option("--hurst", scan_args.hurst, "H ladder (default depends on --kind)");
    scan->add_option("--distance-tau-max", scan_args.distance_tau_max, "Range of the correlation distance")
        ->capture_default_str();
    scan->add_option("--distance-step", scan_args.distance_step, "Step of the correlation distance grid")
        ->capture_default_str();
    add_mc(scan, scan_mc);
    scan->add_option("--format", scan_format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    auto* verify = app.add_subcommand("verify", "Numerical checks of the analytic bounds");
    add_common(verify, verify_common);
    verify->add_option("--lemma", verify_args.lemma,
                       "all, 2.1, 2.4, 2.5, 3.1, 3.2, 3.3, 3.3a, 3.3b, 3.4, 4.1, 4.3, 4.4, 5.1, 5.3 or monotone")
        ->capture_default_str();
    verify->add_option("--hurst", verify_args.hurst, "H values for 2.1 and 2.4");
    verify->add_option("--ell", verify_args.ell, "Time scales for 2.1");
    verify->add_option("--l-max", verify_args.l_max, "Largest L for the tail sums of 2.1");
    verify->add_option("--tolerance", verify_args.tolerance, "Violation tolerance of the inequalities")
        ->capture_default_str();
    verify->add_option("--lhopital-tolerance", verify_args.lhopital_tolerance,
                       "Allowed gap between the second-difference ratio and g* at H = 1/2")
        ->capture_default_str();
    verify->add_flag("--manifest", verify_args.manifest, "Print the grid manifest and exit")->configurable(false);

    for (auto* sub : {corr, sample, persist, scan, verify}) sub->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ExitCode::ok : ExitCode::invalid_input;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::map<const CLI::App*, const Common*> commons = {{corr, &corr_common},
                                                              {sample, &sample_common},
                                                              {persist, &persist_common},
                                                              {scan, &scan_common},
                                                              {verify, &verify_common}};
    const Common& common = *commons.at(chosen);
    if (common.dry_run) {
        print_config(chosen, out);
        return ExitCode::ok;
    }

    try {
        if (chosen == corr) {
            emit(common, run_corr(corr_args, grid_args, err), out);
        } else if (chosen == sample) {
            const auto text = run_sample(sample_corr, sample_args, common, err);
            if (sample_args.format == "csv") emit(common, text, out);
        } else if (chosen == persist) {
            emit(common, run_persist(persist_corr, persist_mc, common, persist_format, err), out);
        } else if (chosen == scan) {
            emit(common, run_scan_cmd(scan_args, scan_mc, common, scan_format), out);
        } else if (chosen == verify) {
            if (verify_args.manifest) {
                emit(common, default_manifest().to_json() + "\n", out);
                return ExitCode::ok;
            }
            const auto reports = run_verify_cmd(verify_args, common);
            emit(common, reports.size() == 1 ? to_json(reports.front()) : to_json(reports), out);
            if (!suite_passed(reports)) {
                for (const auto& r : reports) {
                    if (r.passed || r.exploratory) continue;
                    err << "verify: " << r.lemma_id << " failed at " << r.violation_count << " point(s); worst margin "
                        << format_double(r.worst_margin) << " (" << r.worst.label << ")\n";
                }
                return ExitCode::verification_failed;
            }
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::invalid_input;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return ExitCode::numerical_failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::failure;
    }
    return ExitCode::ok;
}

}  // namespace fracpersist::cli
