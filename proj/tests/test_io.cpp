#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsii/io.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace dsii;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("dsii_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ComplexField sample(int n)
{
    auto f = make_field(make_grid(3, n));
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = {std::sin(0.37 * i) / 3, std::cos(1.1 * i) * 1e-7};
    return f;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing and diagnostics")
{
    auto c = parse_config("# comment\ngrid.n = 128  # trailing\nsolver.mode = dense\nsweep.a_list = 0.1, 0.2\n"
                          "disk.k0_policy = fixed\nio.format = csv\n");
    CHECK(c.grid_n == 128);
    CHECK(c.solver_mode == SolverMode::Dense);
    CHECK(c.sweep_a_list.size() == 2);
    CHECK(c.k0_policy == K0Policy::FixedPoint);
    CHECK(c.format == FieldFormat::Csv);

    auto line_of = [](const std::string& text) {
        try {
            parse_config(text, "t.cfg");
        } catch (const FormatError& e) {
            return e.line;
        }
        return -1;
    };
    CHECK(line_of("grid.n = 64\n\ngrid.n = 48\n") == 3);
    CHECK(line_of("grid.extent = abc\n") == 1);
    CHECK(line_of("x\n") == 1);
    CHECK(line_of("nope = 1\n") == 1);
    CHECK(line_of("disk.radius = 10\nevolve.T_max = 4\n") == 2);
    CHECK(line_of("solver.tol = -1\n") == 1);
    CHECK(line_of("disk.radius = 0\n") == -1);
}

TEST_CASE("fingerprint tracks the canonical config")
{
    RunConfig a, b;
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint().size() == 16);
    b.solver_tol = 1e-9;
    CHECK(a.fingerprint() != b.fingerprint());
    b = a;
    b.threads = 4;
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(parse_config(a.canonical()).fingerprint() == a.fingerprint());
}

TEST_CASE("CFLD round trip is bit exact")
{
    auto dir = scratch("cfld");
    auto f = sample(16);
    auto p = (dir / "f.cfld").string();
    write_field(p, f);
    CHECK(fs::file_size(p) == 8 + 4 + 4 + 8 + 16 * 16 * 16);
    auto bytes = slurp(p);
    CHECK(bytes.substr(0, 8) == "CFLD0001");
    CHECK(static_cast<unsigned char>(bytes[8]) == 16);
    auto g = read_field(p);
    CHECK(g.grid.n == 16);
    CHECK(g.grid.extent == f.grid.extent);
    CHECK(g.values == f.values);
    // rewriting gives identical bytes
    write_field((dir / "g.cfld").string(), g);
    CHECK(slurp(dir / "g.cfld") == bytes);
}

TEST_CASE("CSV round trip is exact")
{
    auto dir = scratch("csv");
    auto f = sample(8);
    auto p = (dir / "f.csv").string();
    write_field(p, f);
    auto g = read_field(p);
    CHECK(g.grid.n == 8);
    CHECK(g.grid.extent == doctest::Approx(3).epsilon(1e-14));
    CHECK(g.values == f.values);
}

TEST_CASE("malformed field files")
{
    auto dir = scratch("bad");
    {
        std::ofstream os(dir / "a.cfld", std::ios::binary);
        os << "CFLD0002 and more";
    }
    CHECK_THROWS_AS(read_field((dir / "a.cfld").string()), FormatError);
    write_field((dir / "b.cfld").string(), sample(8));
    fs::resize_file(dir / "b.cfld", fs::file_size(dir / "b.cfld") - 3);
    CHECK_THROWS_AS(read_field((dir / "b.cfld").string()), FormatError);
    {
        std::ofstream os(dir / "c.csv");
        os << "x,y,re,im\n0,0,1\n";
    }
    try {
        read_field((dir / "c.csv").string());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(read_field((dir / "missing.cfld").string()), FormatError);
}

TEST_CASE("data directory keeps invalid nodes and the boundary block")
{
    auto dir = scratch("data");
    ScatteringData d;
    d.kgrid = make_grid(4, 8);
    d.valid.assign(d.kgrid.size(), 1);
    d.valid[5] = 0;
    for (int e = 0; e < 4; ++e) {
        d.diag[e].resize(d.kgrid.size());
        for (std::size_t i = 0; i < d.kgrid.size(); ++i) d.diag[e][i] = {0.1 * e + i, -1.0 * i};
        d.diag[e][5] = 0;
    }
    d.radius = 0.75;
    d.n_boundary = 4;
    for (int e = 0; e < 4; ++e) {
        d.boundary[e].resize(16);
        for (int i = 0; i < 16; ++i) d.boundary[e][i] = {double(e), 0.5 * i};
    }
    d.time = 0.25;
    d.amplitude = 0.5;
    write_data_dir(dir.string(), d, "abc", FieldFormat::Cfld);
    auto h11 = read_field((dir / "h11.cfld").string());
    CHECK(std::isnan(h11.values[5].real()));
    auto r = read_data_dir(dir.string());
    CHECK(r.time == d.time);
    CHECK(r.amplitude == d.amplitude);
    CHECK(r.radius == d.radius);
    CHECK(r.valid == d.valid);
    for (int e = 0; e < 4; ++e) {
        CHECK(r.diag[e] == d.diag[e]);
        CHECK(r.boundary[e] == d.boundary[e]);
    }
    CHECK(read_kv((dir / "meta.txt").string()).at("fingerprint") == "abc");
    auto sdat = slurp(dir / "boundary.sdat");
    CHECK(sdat.size() == 8 + 4 + 8 + 8 + 4 * 16 * 16);
}
