#include "cli.hpp"

#include "fracpersist/corrlib.hpp"
#include "fracpersist/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using fracpersist::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "fracpersist");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> v;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "fracpersist_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("corr tabulates with g(0) = 1")
{
    const auto r = invoke({"corr", "--kind", "gh", "--hurst", "0.3", "--tau-max", "10", "--step", "0.1"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 102);
    CHECK(l[0] == "tau,value");
    CHECK(l[1] == "0,1");
    CHECK(l.back().rfind("10,", 0) == 0);
    // 17 significant digits.
    CHECK(l[2] == "0.10000000000000001," + fracpersist::format_double(
                      fracpersist::corr_gh_closed(fracpersist::Hurst(0.3), 0.1)));
}

TEST_CASE("degenerate band warns and substitutes")
{
    const auto r = invoke({"corr", "--kind", "gh", "--hurst", "0.5", "--tau-max", "1", "--step", "1"});
    CHECK(r.code == 0);
    CHECK(r.err.find("degenerate band") != std::string::npos);
}

TEST_CASE("exit code 2 for invalid input")
{
    CHECK(invoke({"corr", "--kind", "gh"}).code == 2);
    CHECK(invoke({"corr", "--kind", "gh", "--hurst", "1.5"}).code == 2);
    CHECK(invoke({"corr", "--kind", "nope"}).code == 2);
    CHECK(invoke({"corr", "--kind", "exp", "--step", "-1"}).code == 2);
    CHECK(invoke({"persist", "--corr", "exp", "--step", "0.5"}).code == 2);
    CHECK(invoke({"persist", "--corr", "exp", "--window-lo", "1"}).code == 2);
    CHECK(invoke({"verify", "--lemma", "9.9"}).code == 2);
    CHECK(invoke({"sample", "--corr", "exp", "--format", "binary"}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("exit code 3 for numerical failure")
{
    const auto r = invoke({"sample", "--corr", "gh", "--hurst", "0.3", "--method", "circulant", "--T", "10",
                           "--paths", "10"});
    CHECK(r.code == 3);
    CHECK(r.err.find("numerical failure") != std::string::npos);
    // Auto falls back instead.
    CHECK(invoke({"sample", "--corr", "gh", "--hurst", "0.3", "--T", "2", "--paths", "4"}).code == 0);
}

TEST_CASE("verify")
{
    const auto r = invoke({"verify", "--lemma", "3.4"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["passed"] == true);
    CHECK(j["lemma_id"] == "3.4");

    const auto both = invoke({"verify", "--lemma", "3.3"});
    CHECK(both.code == 0);
    CHECK(nlohmann::json::parse(both.out)["reports"].size() == 2);

    const auto holder = invoke({"verify", "--lemma", "holder", "--hurst", "0.2", "0.8"});
    CHECK(holder.code == 0);
    CHECK(nlohmann::json::parse(holder.out)["reports"].size() == 2);

    const auto failed = invoke({"verify", "--lemma", "5.1", "--lhopital-tolerance", "1e-14"});
    CHECK(failed.code == 4);
    CHECK(nlohmann::json::parse(failed.out)["passed"] == false);
    CHECK(failed.err.find("5.1") != std::string::npos);

    const auto manifest = invoke({"verify", "--manifest"});
    CHECK(manifest.code == 0);
    CHECK(nlohmann::json::parse(manifest.out).contains("version"));
}

TEST_CASE("dry run prints the resolved configuration")
{
    const auto r = invoke({"persist", "--dry-run", "--corr", "exp", "--paths", "123"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("[persist]\n", 0) == 0);
    CHECK(r.out.find("paths=123") != std::string::npos);
    CHECK(r.out.find("step=0.05") != std::string::npos);
    CHECK(r.out.find("survivors") == std::string::npos);
}

TEST_CASE("config file with flag overrides")
{
    const auto ini = scratch("run.ini");
    {
        std::ofstream f(ini);
        f << "[corr]\nkind=exp\nrate=2\ntau-max=1\nstep=0.5\n\n[persist]\nseed=9\n";
    }
    auto r = invoke({"--config", ini.string(), "corr"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out)[3] == "1,0.1353352832366127");
    r = invoke({"--config", ini.string(), "corr", "--rate", "1"});
    CHECK(lines(r.out)[3] == "1,0.36787944117144233");

    // The dry-run output reads back as a config file.
    const auto dumped = scratch("dumped.ini");
    {
        std::ofstream f(dumped);
        f << invoke({"--config", ini.string(), "corr", "--dry-run"}).out;
    }
    CHECK(invoke({"--config", dumped.string(), "corr"}).out == invoke({"--config", ini.string(), "corr"}).out);

    const auto bad = scratch("bad.ini");
    {
        std::ofstream f(bad);
        f << "[corr]\nbogus=1\n";
    }
    CHECK(invoke({"--config", bad.string(), "corr"}).code == 2);
}

TEST_CASE("atomic file output")
{
    const auto path = scratch("corr.csv");
    fs::remove(path);
    const auto r = invoke({"corr", "--kind", "exp", "--tau-max", "1", "--step", "0.5", "-o", path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(slurp(path) == "tau,value\n0,1\n0.5,0.60653065971263342\n1,0.36787944117144233\n");
    for (const auto& e : fs::directory_iterator(path.parent_path())) {
        CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
    }

    const auto bin = scratch("paths.bin");
    CHECK(invoke({"sample", "--corr", "exp", "--T", "1", "--paths", "3", "--format", "binary", "-o", bin.string()})
              .code == 0);
    CHECK(slurp(bin).rfind("FPPATHS1", 0) == 0);
}

TEST_CASE("outputs do not depend on --threads")
{
    const std::vector<std::string> persist = {"persist", "--corr", "exp", "--T", "4", "--paths", "4000",
                                              "--seed", "3", "--groups", "10", "--format", "json"};
    auto with = [](std::vector<std::string> a, const char* t) {
        a.push_back("--threads");
        a.push_back(t);
        return a;
    };
    const auto p1 = invoke(with(persist, "1"));
    REQUIRE(p1.code == 0);
    CHECK(invoke(with(persist, "4")).out == p1.out);
    CHECK(invoke(with(persist, "8")).out == p1.out);

    const std::vector<std::string> sample = {"sample", "--corr", "gh", "--hurst", "0.7", "--T", "3", "--paths", "50"};
    const auto s1 = invoke(with(sample, "1"));
    REQUIRE(s1.code == 0);
    CHECK(invoke(with(sample, "3")).out == s1.out);

    ::setenv("FRACPERSIST_THREADS", "4", 1);
    CHECK(invoke(persist).out == p1.out);
    CHECK(invoke({"corr", "--dry-run"}).out.find("threads=4") != std::string::npos);
    ::unsetenv("FRACPERSIST_THREADS");
}

TEST_CASE("persist on the Ornstein-Uhlenbeck process")
{
    const auto r = invoke({"persist", "--corr", "exp", "--rate", "1", "--T", "10", "--paths", "200000", "--seed", "7"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() >= 3);
    CHECK(l[0] == "T,survivors,n,p_hat,ci_low,ci_high");
    const auto& fit = l.back();
    CHECK(fit.rfind("stationary_log_t,", 0) == 0);
    std::vector<std::string> cols;
    std::istringstream is(fit);
    for (std::string c; std::getline(is, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 6);
    const double theta = std::stod(cols[3]);
    CHECK(theta >= 0.85);
    CHECK(theta <= 1.15);
}

TEST_CASE("scan")
{
    const auto r = invoke({"scan", "--kind", "h_to_one", "--hurst", "0.9", "--paths", "3000", "--T", "4",
                           "--groups", "5", "--distance-step", "0.1"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 2);
    CHECK(l[0] == "H,kappa,theta_hat,stderr,base_theta,sup_distance,sampler,note");
    CHECK(l[1].rfind("0.90000000000000002,0.099999999999999978,", 0) == 0);
}
