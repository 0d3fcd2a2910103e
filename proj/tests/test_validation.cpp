#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsii/evolution.hpp"
#include "dsii/splitstep.hpp"
#include "dsii/validation.hpp"

#include <cmath>

using namespace dsii;

namespace {

ComplexField gaussian(double a, double L, int n)
{
    auto f = make_field(make_grid(L, n));
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = a * std::exp(-std::norm(f.grid.node(i)));
    return f;
}

double rel_l2(const CVec& a, const CVec& b)
{
    double s = 0, n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::norm(a[i] - b[i]);
        n += std::norm(b[i]);
    }
    return std::sqrt(s / n);
}

// a = 0.1 Gaussian data without disk, shared by several cases
struct Fixture {
    ComplexField q = gaussian(0.1, 5, 32);
    ScatteringData data = scattering_diag(q, make_grid(6, 32), 0.0);
};

const Fixture& fixture()
{
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("residual of the zero solution is zero")
{
    auto z = make_field(make_grid(4, 16));
    auto r = dsii_residual(z, z, z, z, 1e-3);
    CHECK(r.evolution == 0.0);
    CHECK(r.constraint == 0.0);
}

TEST_CASE("linear residual of an exact plane wave")
{
    auto g = make_grid(8, 32);
    const double x1 = 2 * pi / (2 * g.extent), x2 = -2 * pi / (2 * g.extent);
    const double dt = 1e-3;
    auto wave = [&](double t) {
        auto f = make_field(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            cplx z = g.node(i);
            f.values[i] = std::polar(1.0, x1 * z.real() + x2 * z.imag() - 2 * x1 * x2 * t);
        }
        return f;
    };
    auto r = dsii_residual(wave(-dt), wave(0), wave(dt), make_field(g), dt, false);
    CHECK(r.evolution <= 1e-8);
}

TEST_CASE("split-step residual is second order in dt")
{
    auto q = gaussian(0.1, 5, 32);
    auto residual = [&](double dt) {
        auto tr = simulate(q, 0.1 + dt, dt, {}, 1);
        std::size_t m = tr.frames.size() - 2;
        return dsii_residual(tr.frames[m - 1], tr.frames[m], tr.frames[m + 1], phi_from_q(tr.frames[m]), dt).evolution;
    };
    double r1 = residual(0.02), r2 = residual(0.01);
    CHECK(r1 / r2 == doctest::Approx(4).epsilon(0.25));
}

TEST_CASE("symmetry relations of the data")
{
    ForwardOptions full;
    full.full_matrix = true;
    auto q = gaussian(0.1, 5, 32);
    auto d = scattering_diag(q, make_grid(4, 8), 0.0, full);
    CHECK(symmetry_check(d) <= 1e-10);
    auto z = scattering_diag(make_field(make_grid(4, 16)), make_grid(4, 8), 0.0);
    CHECK(symmetry_check(z) == 0.0);
}

TEST_CASE("reconstructed phi matches a free-space oracle")
{
    const auto& f = fixture();
    auto zg = f.q.grid;
    auto r = reconstruct(f.data, zg, 0, DiskSpec{});
    const auto& qs = f.q;
    CVec mod(zg.size());
    for (std::size_t i = 0; i < mod.size(); ++i) mod[i] = std::norm(qs.values[i]);
    auto g = dbar(zg, mod);
    for (auto& x : g) x = std::conj(x);
    auto oracle = cauchy_apply(zg, g);
    for (auto& x : oracle) x = std::conj(x);
    CHECK(rel_l2(r.phi.values, oracle) <= 1e-3);
    CHECK(rel_l2(r.q.values, qs.values) <= 1e-4);
    // duality at t = 0 on the same reconstruction
    ForwardOptions fo;
    fo.decay_tol = 1e-3;
    auto d0 = duality_check(r.q, f.data, fo, 3);
    CHECK(d0.samples > 50);
    CHECK(d0.diag <= 1e-3);
}

TEST_CASE("duality at t = 0.5")
{
    const auto& f = fixture();
    ForwardOptions fo;
    fo.decay_tol = 1e-3;
    // a wider box for the evolved field
    auto wide = make_grid(7, 32);
    auto ev = evolve_h(f.data, 0.5);
    auto rt = reconstruct(ev, wide, 0.5, DiskSpec{});
    auto dt = duality_check(rt.q, ev, fo, 5);
    CHECK(dt.diag <= 1e-2);
}

TEST_CASE("dbar equation residual improves with spacing")
{
    auto q = gaussian(0.1, 5, 32);
    auto coarse = scattering_diag(q, make_grid(1.6, 16), 0.0);
    auto fine = scattering_diag(q, make_grid(1.6, 32), 0.0);
    auto rc = dbar_equation_residual(coarse, cplx(0.4, -0.2), 0.2, DiskSpec{});
    auto rf = dbar_equation_residual(fine, cplx(0.4, -0.2), 0.2, DiskSpec{});
    CHECK(rc.spacing == doctest::Approx(0.2));
    CHECK(rc.stencils > 50);
    CHECK(rf.relative <= 5e-2);
    CHECK(rf.relative < rc.relative);
}

TEST_CASE("small data blow-up scan is empty")
{
    auto q = gaussian(0.02, 5, 32);
    auto data = scattering_diag(q, make_grid(5, 16), 0.0);
    BlowupBox box;
    box.z_extent = 2;
    box.nz = 3;
    box.nt = 2;
    auto map = blowup_scan(data, box, DiskSpec{});
    CHECK(map.flag_count() == 0);
    CHECK_FALSE(map.inconclusive);
    for (double s : map.sigma) CHECK(s > 0.5);
}

TEST_CASE("blow-up scan labels components and detects boundary contact")
{
    // zero data with a threshold above every sigma flags everything
    auto data = scattering_diag(make_field(make_grid(4, 16)), make_grid(4, 8), 0.0);
    BlowupBox box;
    box.nz = 4;
    box.nt = 1;
    auto map = blowup_scan(data, box, DiskSpec{}, 2.0);
    CHECK(map.flag_count() == 16);
    CHECK(map.components[0] == 1);
    CHECK(map.inconclusive);
}
