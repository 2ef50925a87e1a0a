#include "fracpersist/rng.hpp"
#include "fracpersist/sampler.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace fracpersist;

namespace {

double sample_cov(const RowMatrix& x, Index i, Index j)
{
    const double mi = x.col(i).mean();
    const double mj = x.col(j).mean();
    return ((x.col(i).array() - mi) * (x.col(j).array() - mj)).sum() / static_cast<double>(x.rows() - 1);
}

double sample_corr(const RowMatrix& x, Index i, Index j)
{
    return sample_cov(x, i, j) / std::sqrt(sample_cov(x, i, i) * sample_cov(x, j, j));
}

// Large-sample standard error of a Gaussian sample correlation.
double corr_se(double rho, Index n) { return (1.0 - rho * rho) / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    // Reference outputs from the Random123 distribution (kat_vectors).
    auto zero = Philox4x32::round_trip({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(zero == Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto ones = Philox4x32::round_trip({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(ones == Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto pi = Philox4x32::round_trip({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(pi == Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal streams have unit moments and independent substreams")
{
    constexpr int n = 400000;
    NormalStream a(42, 0);
    NormalStream b(42, 1);
    double s1 = 0, s2 = 0, s4 = 0, cross = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a();
        const double y = b();
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
        cross += x * y;
    }
    const double se = 1.0 / std::sqrt(n);
    CHECK(std::abs(s1 / n) < 5 * se);
    CHECK(std::abs(s2 / n - 1.0) < 5 * std::sqrt(2.0) * se);
    CHECK(std::abs(s4 / n - 3.0) < 5 * std::sqrt(96.0) * se);
    CHECK(std::abs(cross / n) < 5 * se);

    NormalStream c(42, 0);
    NormalStream d(42, 0);
    for (int i = 0; i < 100; ++i) CHECK(c() == d());
}

TEST_CASE("build_covariance")
{
    const Matrix cov = build_covariance(CorrelationFn::exponential(1.0), TimeGrid{1.0, 3});
    CHECK(cov(0, 0) == 1.0);
    CHECK(cov(0, 1) == doctest::Approx(std::exp(-1.0)));
    CHECK(cov(0, 2) == doctest::Approx(std::exp(-2.0)));
    CHECK(cov(2, 0) == cov(0, 2));
    const Matrix g = build_covariance(CorrelationFn::gh_closed(Hurst(0.3)), TimeGrid{0.5, 2});
    CHECK(g(0, 1) == doctest::Approx(corr_gh_closed(Hurst(0.3), 0.5)).epsilon(1e-15));
    CHECK(g.diagonal().isOnes());
}

TEST_CASE("TimeGrid")
{
    const auto g = TimeGrid::covering(10.0, 0.05);
    CHECK(g.n_points == 201);
    CHECK(g.horizon() == doctest::Approx(10.0));
    CHECK_THROWS_AS(TimeGrid::covering(10.0, 0.3), ValidationError);
    CHECK_THROWS_AS((TimeGrid{0.0, 10}.validate()), ValidationError);
    CHECK_THROWS_AS((TimeGrid{0.1, 1}.validate()), ValidationError);
}

TEST_CASE("Cholesky sampler")
{
    SUBCASE("identity covariance gives uncorrelated coordinates")
    {
        const Index n = 100000;
        const auto batch = sample_cholesky(Matrix::Identity(4, 4), TimeGrid{1.0, 4}, n, 11);
        for (Index i = 0; i < 4; ++i) {
            for (Index j = i + 1; j < 4; ++j) CHECK(std::abs(sample_corr(batch.values, i, j)) < 4.0 / std::sqrt(n));
        }
    }
    SUBCASE("exponential and g_H lag correlations")
    {
        const Index n = 100000;
        const TimeGrid grid{0.25, 21};
        for (const auto& corr : {CorrelationFn::exponential(1.0), CorrelationFn::gh_closed(Hurst(0.3))}) {
            const auto batch = sample_cholesky(corr, grid, n, 5);
            CHECK(batch.descriptor == corr.descriptor());
            for (Index k = 1; k < grid.n_points; k += 4) {
                const double want = corr(k * grid.step);
                INFO(corr.descriptor() << " lag " << k);
                CHECK(std::abs(sample_corr(batch.values, 0, k) - want) < 4.0 * corr_se(want, n));
            }
        }
    }
    SUBCASE("an indefinite matrix reports its smallest pivot")
    {
        Matrix bad(2, 2);
        bad << 1.0, 2.0, 2.0, 1.0;
        try {
            (void)cholesky_with_jitter(bad);
            FAIL("expected NotPositiveDefinite");
        } catch (const NotPositiveDefinite& e) {
            CHECK(e.smallest_pivot() < 0.0);
        }
    }
    SUBCASE("a singular matrix is rescued by the jitter ladder")
    {
        const auto f = cholesky_with_jitter(Matrix::Ones(3, 3));
        CHECK(f.jitter > 0.0);
        CHECK(f.jitter <= 1e-8);
    }
}

TEST_CASE("circulant embedding sampler")
{
    SUBCASE("exponential correlation embeds and reproduces the covariance")
    {
        const TimeGrid grid{0.1, 64};
        const auto corr = CorrelationFn::exponential(1.0);
        const Vector lambda = circulant_spectrum(corr.tabulate(grid.step, grid.n_points));
        CHECK(lambda.minCoeff() > 0.0);
        const Index n = 100001;  // odd: the last path uses only a real part
        const auto batch = sample_circulant(corr, grid, n, 3);
        CHECK(batch.method == SamplingMethod::CirculantEmbedding);
        for (Index k : {0, 1, 5, 20, 63}) {
            const double want = corr(k * grid.step);
            INFO("lag " << k);
            if (k == 0) {
                CHECK(std::abs(sample_cov(batch.values, 7, 7) - 1.0) < 4.0 * std::sqrt(2.0 / n));
            } else {
                CHECK(std::abs(sample_corr(batch.values, 0, k) - want) < 4.0 * corr_se(want, n));
            }
        }
    }
    SUBCASE("a row without a nonnegative embedding is refused")
    {
        Vector row(3);
        row << 1.0, 0.99, 0.0;
        CHECK_THROWS_AS(sample_circulant(row, TimeGrid{1.0, 3}, 10, 1), EmbeddingNotNonnegative);
    }
}

TEST_CASE("samplers are reproducible and independent of the thread count")
{
    const TimeGrid grid{0.05, 101};
    const auto corr = CorrelationFn::ch(Hurst(0.5));
    SamplerOptions one{1, 64};
    SamplerOptions four{4, 64};
    const auto a = sample_circulant(corr, grid, 1000, 99, one);
    const auto b = sample_circulant(corr, grid, 1000, 99, four);
    CHECK((a.values.array() == b.values.array()).all());
    const auto c = sample_cholesky(corr, grid, 1000, 99, one);
    const auto d = sample_cholesky(corr, grid, 1000, 99, four);
    CHECK((c.values.array() == d.values.array()).all());
    const auto e = sample_cholesky(corr, grid, 1000, 100, one);
    CHECK_FALSE((c.values.array() == e.values.array()).all());
}

TEST_CASE("direct M^H sampler")
{
    const Hurst h(0.3);
    const Vector times = geometric_times(0.0, 0.5, 3);
    const Index n = 40000;
    DirectKernelOptions coarse;
    coarse.n_quad = 1024;
    const auto batch = sample_direct_mh(h, times, n, 17, coarse);
    CHECK(batch.method == SamplingMethod::DirectKernel);
    CHECK(batch.discretization_budget < 1e-4);
    const double var_m1 = sigma_constants(h).var_m1;
    const double budget = batch.discretization_budget;
    // Var M_1 = var_m1
    const double v = sample_cov(batch.values, 0, 0);
    CHECK(std::abs(v - var_m1) < 4.0 * var_m1 * std::sqrt(2.0 / n) + budget * var_m1);
    // Stationary covariance after the Lamperti transform.
    const auto lam = lamperti(batch, h);
    CHECK(lam.times[1] == doctest::Approx(0.5));
    for (Index k : {1, 2}) {
        const double want = corr_gh_closed(h, 0.5 * k);
        const double got = sample_cov(lam.values, 0, k);
        CHECK(std::abs(got - want) < 4.0 * std::sqrt((1.0 + want * want) / n) + budget);
    }
    SUBCASE("paths shrink like sqrt(var_m1) near the degenerate point")
    {
        const Hurst near(0.501, 1e-4);
        const auto small = sample_direct_mh(near, times, 20000, 3, coarse);
        const double vn = sigma_constants(near).var_m1;
        CHECK(vn < 1e-5);
        CHECK(sample_cov(small.values, 0, 0) / vn == doctest::Approx(1.0).epsilon(0.05));
    }
    CHECK_THROWS_AS(sample_direct_mh(Hurst(0.5), times, 10, 1), DegenerateHurst);
}

TEST_CASE("direct M^{*,1/2} sampler")
{
    Vector times(4);
    times << 0.0, 1.0, std::exp(1.0), std::exp(2.0);
    const Index n = 40000;
    DirectKernelOptions coarse;
    coarse.n_quad = 1024;
    const auto batch = sample_direct_mstar(times, n, 23, coarse);
    CHECK(batch.values.col(0).isZero());
    const double var = sample_cov(batch.values, 1, 1);
    const double want = constants::log_kernel_norm;
    CHECK(std::abs(var - want) < 4.0 * want * std::sqrt(2.0 / n) + batch.discretization_budget * want);

    RowMatrix tail = batch.values.rightCols(3);
    PathBatch positive = batch;
    positive.values = tail;
    positive.times = times.tail(3);
    const auto lam = lamperti_mstar(positive);
    for (Index k : {1, 2}) {
        const double g = corr_gstar_half(static_cast<double>(k));
        CHECK(std::abs(sample_cov(lam.values, 0, k) - g) < 4.0 * std::sqrt((1.0 + g * g) / n) + batch.discretization_budget);
    }
}

TEST_CASE("Lamperti transform of constant paths")
{
    PathBatch b;
    b.times = geometric_times(0.0, 1.0, 2);
    b.values = RowMatrix::Constant(1, 2, 3.0);
    const auto out = lamperti(b, 0.3, 4.0);
    CHECK(out.values(0, 0) == doctest::Approx(1.5));
    CHECK(out.values(0, 1) == doctest::Approx(1.5 * std::exp(-0.3)));
    PathBatch uneven;
    uneven.times = Vector::LinSpaced(3, 1.0, 3.0);
    uneven.values = RowMatrix::Ones(1, 3);
    CHECK_THROWS_AS(lamperti(uneven, 0.3, 1.0), ValidationError);
}

TEST_CASE("path dumps")
{
    const auto batch = sample_cholesky(CorrelationFn::exponential(1.0), TimeGrid{0.5, 3}, 4, 8);
    const auto dir = std::filesystem::temp_directory_path() / "fracpersist_dump_test";
    std::filesystem::create_directories(dir);
    dump_paths(batch, dir / "p.csv", DumpFormat::Csv);
    std::ifstream in(dir / "p.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "# seed=8");
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("path,", 0) == 0) CHECK(line == "path,0,0.5,1");
        if (!line.empty() && line[0] != '#') ++rows;
    }
    CHECK(rows == 5);
    dump_paths(batch, dir / "p.bin", DumpFormat::Binary);
    const auto size = std::filesystem::file_size(dir / "p.bin");
    CHECK(size == 8 + 8 + 4 + 8 + 8 + 4 + batch.descriptor.size() + 3 * 8 + 12 * 8);
    std::filesystem::remove_all(dir);
}
