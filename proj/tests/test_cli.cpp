#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsii/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace dsii;
namespace fs = std::filesystem;

namespace {

const fs::path root = fs::temp_directory_path() / "dsii_cli";

int run(const std::string& args)
{
    std::string cmd = std::string(DSII_BIN) + " " + args + " > " + (root / "last.log").string() + " 2>&1";
    int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct Setup {
    Setup()
    {
        fs::remove_all(root);
        fs::create_directories(root);
        std::ofstream(root / "small.cfg") << "grid.n = 32\ngrid.extent = 5\nkgrid.n = 16\nkgrid.extent = 5\n";
    }
};

const Setup& setup()
{
    static Setup s;
    return s;
}

std::string cfg() { return "-c " + (root / "small.cfg").string(); }

}  // namespace

TEST_CASE("forward on the zero field writes all-zero data")
{
    setup();
    auto out = root / "zero";
    REQUIRE(run(cfg() + " -o " + out.string() + " forward gaussian:0") == 0);
    auto d = read_data_dir(out.string());
    for (int e = 0; e < 4; ++e)
        for (auto v : d.diag[e]) CHECK(v == cplx{0, 0});
    auto m = read_kv((out / "manifest.txt").string());
    CHECK(m.at("fingerprint") == load_config((root / "small.cfg").string()).fingerprint());
    CHECK(read_kv((out / "meta.txt").string()).at("fingerprint") == m.at("fingerprint"));
}

TEST_CASE("roundtrip of a small Gaussian passes")
{
    setup();
    auto out = root / "rt";
    CHECK(run(cfg() + " -o " + out.string() + " roundtrip gaussian:0.1") == 0);
    CHECK(std::stod(read_kv((out / "manifest.txt").string()).at("rel_l2")) <= 5e-3);
    // an impossible tolerance is a validation failure
    CHECK(run(cfg() + " -o " + (root / "rt2").string() + " roundtrip gaussian:0.1 --tol 1e-12") == 2);
}

TEST_CASE("outputs are byte identical across runs")
{
    setup();
    auto a = root / "ba", b = root / "bb";
    REQUIRE(run(cfg() + " -o " + a.string() + " forward gaussian:0.3:0.8") == 0);
    REQUIRE(run(cfg() + " -o " + b.string() + " forward gaussian:0.3:0.8") == 0);
    for (const char* f : {"h11.cfld", "h12.cfld", "meta.txt", "manifest.txt"}) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("validate flags corrupted symmetry")
{
    setup();
    auto out = root / "sym";
    REQUIRE(run(cfg() + " -o " + out.string() + " forward gaussian:0.2") == 0);
    CHECK(run(cfg() + " -o " + (root / "v1").string() + " validate " + out.string()) == 0);
    // flip the sign of h12
    auto f = read_field((out / "h12.cfld").string());
    for (auto& v : f.values) v = -v;
    write_field((out / "h12.cfld").string(), f);
    CHECK(run(cfg() + " -o " + (root / "v2").string() + " validate " + out.string()) == 2);
    CHECK(slurp(root / "v2" / "verdicts.txt").find("symmetry") != std::string::npos);
}

TEST_CASE("malformed input exits with 1 and a line number")
{
    setup();
    std::ofstream(root / "bad.cfg") << "grid.n = 32\nkgrid.n = 12\n";
    CHECK(run("-c " + (root / "bad.cfg").string() + " forward gaussian:1") == 1);
    CHECK(slurp(root / "last.log").find("bad.cfg:2") != std::string::npos);
    CHECK(run(cfg() + " forward gaussian:x") == 1);
    CHECK(run(cfg() + " forward " + (root / "nothing.cfld").string()) == 1);
    CHECK(run("frobnicate") == 1);
}

TEST_CASE("evolve, invert, simulate and compare chain")
{
    setup();
    auto fw = root / "chain";
    REQUIRE(run(cfg() + " -o " + fw.string() + " forward gaussian:0.1") == 0);
    REQUIRE(run(cfg() + " -o " + (root / "ev").string() + " evolve " + fw.string() + " --t 0.25") == 0);
    CHECK(read_data_dir((root / "ev").string()).time == 0.25);
    REQUIRE(run(cfg() + " -o " + (root / "inv").string() + " invert " + (root / "ev").string() + " --t 0.25") == 0);
    CHECK(fs::exists(root / "inv" / "phi.cfld"));
    CHECK(fs::exists(root / "inv" / "reports.csv"));
    REQUIRE(run(cfg() + " -o " + (root / "sim").string() + " simulate gaussian:0.1 --t-end 0.5 --dt 0.01") == 0);
    CHECK(fs::exists(root / "sim" / "frame_0001.cfld"));
    CHECK(run(cfg() + " -o " + (root / "cmp").string() + " compare " + (root / "inv" / "q.cfld").string() + " " +
              (fw / "potential.cfld").string()) == 0);
}
