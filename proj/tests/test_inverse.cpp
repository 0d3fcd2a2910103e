#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsii/inverse.hpp"
#include "dsii/solvers.hpp"

#include <cmath>
#include <random>

using namespace dsii;

namespace {

ComplexField gaussian(double a, double L, int n)
{
    auto f = make_field(make_grid(L, n));
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = a * std::exp(-std::norm(f.grid.node(i)));
    return f;
}

// a=0.1 Gaussian data on a coarse k-grid, with and without the disk; built once
struct Fixture {
    ComplexField q = gaussian(0.1, 6, 32);
    DiskSpec disk = make_disk(1.0, 16, K0Policy::FixedPoint);
    ScatteringData with_disk, without;
    Fixture()
    {
        auto kg = make_grid(6, 32);
        with_disk = scattering_diag(q, kg, disk.radius);
        scattering_boundary(q, disk, with_disk);
        without = scattering_diag(q, kg, 0.0);
    }
};

const Fixture& fixture()
{
    static Fixture f;
    return f;
}

BElement random_element(const BLayout& L, unsigned seed)
{
    auto v = random_cvec(packed_dim(L) / 2, seed);
    return unpack_complex(L, v);
}

double rel_diff(const BLayout& L, const BElement& a, const BElement& b)
{
    auto va = pack_complex(L, a), vb = pack_complex(L, b);
    double d = 0, n = 0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        d += std::norm(va[i] - vb[i]);
        n += std::norm(vb[i]);
    }
    return std::sqrt(d / n);
}

const std::vector<cplx> probes{{0.3, 0.2}, {1.0, -0.5}, {-0.7, 0.4}};

}  // namespace

TEST_CASE("zero data gives zero operator and zero reconstruction")
{
    auto q = make_field(make_grid(4, 16));
    auto disk = make_disk(1.0, 8, K0Policy::FixedPoint);
    auto data = scattering_diag(q, make_grid(6, 16), disk.radius);
    scattering_boundary(q, disk, data);
    auto ctx = make_context(data, 0.3, disk);
    auto T = build_T(ctx, cplx(0.5, 0.1));
    auto y = pack_complex(T.layout(), T.apply(random_element(T.layout(), 3)));
    CHECK(max_abs(y) == 0.0);
    auto r = reconstruct(data, make_grid(2, 8), 0.3, disk);
    CHECK(max_abs(r.q.values) == 0.0);
    CHECK(max_abs(r.phi.values) == 0.0);
}

TEST_CASE("T is real-linear but not complex-linear")
{
    const auto& f = fixture();
    auto ctx = make_context(f.with_disk, 0, f.disk);
    auto T = build_T(ctx, cplx(0.4, -0.3));
    const auto& L = T.layout();
    auto x = pack_complex(L, random_element(L, 1)), y = pack_complex(L, random_element(L, 2));
    CVec c(x.size()), ix(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        c[i] = 0.7 * x[i] - 1.3 * y[i];
        ix[i] = I * x[i];
    }
    auto Tx = pack_complex(L, T.apply(unpack_complex(L, x)));
    auto Ty = pack_complex(L, T.apply(unpack_complex(L, y)));
    auto Tc = pack_complex(L, T.apply(unpack_complex(L, c)));
    auto Tix = pack_complex(L, T.apply(unpack_complex(L, ix)));
    double err = 0, cl = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        err = std::max(err, std::abs(Tc[i] - (0.7 * Tx[i] - 1.3 * Ty[i])));
        cl = std::max(cl, std::abs(Tix[i] - I * Tx[i]));
    }
    CHECK(err <= 1e-12 * (1 + max_abs(Tx)));
    CHECK(cl > 1e-3 * max_abs(Tx));
}

TEST_CASE("arc and log boundary forms agree")
{
    const auto& f = fixture();
    InverseOptions log_opt;
    log_opt.form = BoundaryForm::Log;
    auto Ta = build_T(make_context(f.with_disk, 0.1, f.disk), cplx(0.5, 0.5));
    auto Tl = build_T(make_context(f.with_disk, 0.1, f.disk, log_opt), cplx(0.5, 0.5));
    for (unsigned s = 0; s < 5; ++s) {
        auto e = random_element(Ta.layout(), 10 + s);
        CHECK(rel_diff(Ta.layout(), Tl.apply(e), Ta.apply(e)) <= 1e-6);
    }
}

TEST_CASE("Neumann series matches the direct solve at small amplitude")
{
    const auto& f = fixture();
    auto T = build_T(make_context(f.with_disk, 0, f.disk), cplx(0.2, 0.1));
    auto [w, rep] = solve_w(T, 1e-13);
    auto wn = neumann_w(T, 12);
    CHECK(rel_diff(T.layout(), wn, w) <= 1e-8);
    CHECK(rep.sigma_min_estimate > 0.5);
    CHECK_FALSE(rep.condition_flag);
}

TEST_CASE("dense and Krylov solves agree")
{
    const auto& f = fixture();
    InverseOptions dense, krylov;
    dense.mode = SolverMode::Dense;
    krylov.mode = SolverMode::Krylov;
    dense.want_sigma = krylov.want_sigma = true;
    auto Td = build_T(make_context(f.with_disk, 0, f.disk, dense), cplx(-0.3, 0.6));
    auto Tk = build_T(make_context(f.with_disk, 0, f.disk, krylov), cplx(-0.3, 0.6));
    auto [wd, rd] = solve_w(Td, 1e-12);
    auto [wk, rk] = solve_w(Tk, 1e-12);
    CHECK(rel_diff(Td.layout(), wk, wd) <= 1e-9);
    CHECK(std::abs(rd.sigma_min_estimate - rk.sigma_min_estimate) <= 1e-3);
}

TEST_CASE("round trip without disk recovers the Gaussian")
{
    const auto& f = fixture();
    auto pv = reconstruct_points(f.without, probes, 0, DiskSpec{});
    for (std::size_t i = 0; i < probes.size(); ++i) {
        cplx ex = 0.1 * std::exp(-std::norm(probes[i]));
        CHECK(std::abs(pv[i].q - ex) <= 1e-4 * 0.1);
    }
}

TEST_CASE("reconstruction does not depend on k0")
{
    const auto& f = fixture();
    auto other = make_disk(1.0, 16, K0Policy::FixedPoint, 1.0);
    auto p1 = reconstruct_points(f.with_disk, probes, 0, f.disk);
    auto p2 = reconstruct_points(f.with_disk, probes, 0, other);
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(std::abs(p1[i].q - p2[i].q) <= 1e-5 * 0.1);
    // the opposite diagonal sign in the reconstruction alone breaks this
    InverseOptions flipped;
    flipped.recon_diag_sign = -1;
    auto f1 = reconstruct_points(f.with_disk, probes, 0, f.disk, flipped);
    auto f2 = reconstruct_points(f.with_disk, probes, 0, other, flipped);
    double spread = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) spread = std::max(spread, std::abs(f1[i].q - f2[i].q));
    CHECK(spread > 1e-6);
}

TEST_CASE("disk and empty-disk reconstructions agree up to k-grid error")
{
    const auto& f = fixture();
    auto pd = reconstruct_points(f.with_disk, probes, 0, f.disk);
    auto pe = reconstruct_points(f.without, probes, 0, DiskSpec{});
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(std::abs(pd[i].q - pe[i].q) <= 2e-2 * 0.1);
}

TEST_CASE("full-matrix mode gives the symmetric second row")
{
    const auto& f = fixture();
    InverseOptions opt;
    opt.full_matrix = true;
    auto pv = reconstruct_points(f.with_disk, {cplx(0.3, -0.2)}, 0, f.disk, opt);
    CHECK(std::abs(pv[0].q_row2 + pv[0].q) <= 1e-10 * std::abs(pv[0].q));
    CHECK(std::abs(pv[0].m_diag_row2 - pv[0].m_diag) <= 1e-10 * (1 + std::abs(pv[0].m_diag)));
}

TEST_CASE("missing boundary block is reported")
{
    const auto& f = fixture();
    CHECK_THROWS_AS(make_context(f.without, 0, f.disk), MissingBoundaryBlock);
}
