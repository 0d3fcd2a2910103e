#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsii/forward.hpp"

#include <cmath>

using namespace dsii;

namespace {

ComplexField gaussian(double a, double L, int n, double width = 1.0)
{
    auto f = make_field(make_grid(L, n));
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = a * std::exp(-width * std::norm(f.grid.node(i)));
    return f;
}

// linear Fourier integral of q by direct quadrature
cplx born_h12(const ComplexField& q, cplx k)
{
    cplx s{0, 0};
    for (std::size_t i = 0; i < q.values.size(); ++i)
        s += std::polar(1.0, -(std::conj(k) * q.grid.node(i)).real()) * q.values[i];
    return s * q.grid.cell_area() / (4 * pi * pi);
}

}  // namespace

TEST_CASE("zero potential gives identity and zero data")
{
    auto q = make_field(make_grid(4, 32));
    auto wf = solve_mu(q, cplx(1, 1));
    CHECK(wf.residual == 0.0);
    for (std::size_t i = 0; i < q.values.size(); ++i) {
        CHECK(wf.mu[E11][i] == cplx(1, 0));
        CHECK(wf.mu[E21][i] == cplx(0, 0));
    }
    auto d = scattering_diag(q, make_grid(4, 8), 0.0);
    for (auto& c : d.diag) CHECK(max_abs(c) == 0.0);
    ScatteringData b;
    scattering_boundary(q, make_disk(1.0, 8), b);
    for (auto& c : b.boundary) CHECK(max_abs(c) == 0.0);
}

TEST_CASE("mu11 is close to one at small amplitude, two-term Neumann oracle")
{
    auto q = gaussian(0.1, 5, 32);
    ForwardOptions opt;
    opt.tol = 1e-12;
    auto wf = solve_mu(q, 1.0, opt);
    // independent oracle: punctured direct-sum Cauchy, two Neumann terms
    const auto& g = q.grid;
    const std::size_t N = g.size();
    CVec e(N);
    for (std::size_t i = 0; i < N; ++i) e[i] = std::polar(1.0, -(g.node(i)).real()) * q.values[i];
    auto direct = [&](const CVec& f) {
        CVec out(N);
        for (std::size_t i = 0; i < N; ++i) {
            cplx s{0, 0};
            for (std::size_t j = 0; j < N; ++j)
                if (j != i) s += f[j] / (g.node(i) - g.node(j));
            out[i] = s * g.cell_area() / pi;
        }
        return out;
    };
    auto m21 = direct(e);
    CVec dens(N);
    for (std::size_t i = 0; i < N; ++i) dens[i] = -e[i] * std::conj(m21[i]);
    auto nu = direct(dens);
    double dev = 0, size = 0;
    for (std::size_t i = 0; i < N; ++i) {
        size = std::max(size, std::abs(wf.mu[E11][i] - 1.0));
        dev = std::max(dev, std::abs(wf.mu[E11][i] - 1.0 - nu[i]));
    }
    MESSAGE("||mu11-1|| = " << size << "  oracle deviation " << dev);
    CHECK(size <= 0.02);
    CHECK(dev <= 0.15 * size);
}

TEST_CASE("real-linear and iterated paths agree")
{
    auto q = gaussian(0.2, 5, 32);
    ForwardOptions a, b;
    a.tol = b.tol = 1e-11;
    a.mode = b.mode = SolverMode::Krylov;
    b.path = SolvePath::Iterated;
    auto wa = solve_mu(q, cplx(1, 1), a);
    auto wb = solve_mu(q, cplx(1, 1), b);
    double d = 0;
    for (int e = 0; e < 4; ++e)
        for (std::size_t i = 0; i < q.values.size(); ++i) d = std::max(d, std::abs(wa.mu[e][i] - wb.mu[e][i]));
    CHECK(d <= 10 * a.tol);
    ForwardOptions c = a;
    c.mode = SolverMode::Dense;
    auto q8 = gaussian(0.2, 4.5, 8);
    auto wc = solve_mu(q8, cplx(1, 1), c);
    auto wd = solve_mu(q8, cplx(1, 1), a);
    double dd = 0;
    for (std::size_t i = 0; i < q8.values.size(); ++i) dd = std::max(dd, std::abs(wc.mu[E11][i] - wd.mu[E11][i]));
    CHECK(dd <= 10 * a.tol);
}

TEST_CASE("Born approximation of h12")
{
    std::vector<cplx> ks{0.5, cplx(1, 1), cplx(2, -1), cplx(0, 0.3)};
    ForwardOptions opt;
    opt.tol = 1e-12;
    for (double a : {0.05, 0.025}) {
        auto q = gaussian(a, 6, 64);
        auto h = scattering_at(q, ks, opt);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            cplx analytic = a / (4 * pi) * std::exp(-std::norm(ks[i]) / 4);
            CHECK(std::abs(born_h12(q, ks[i]) - analytic) < 1e-14);
            CHECK(std::abs(h[i][E12] - analytic) <= 10 * a * a * a);
        }
    }
}

TEST_CASE("symmetry of data in full-matrix mode")
{
    auto q = gaussian(0.1, 5, 32);
    ForwardOptions opt;
    opt.tol = 1e-13;
    opt.full_matrix = true;
    auto d = scattering_diag(q, make_grid(3, 4), 0.0, opt);
    CHECK(symmetry_deviation(d) <= 1e-10);
}

TEST_CASE("boundary block consistent with the diagonal")
{
    auto q = gaussian(0.05, 5, 32);
    auto disk = make_disk(1.0, 8);
    ForwardOptions opt;
    opt.tol = 1e-12;
    ScatteringData d;
    scattering_boundary(q, disk, d, opt);
    auto s = disk.boundary_nodes();
    auto h = scattering_at(q, s, opt);
    for (int j = 0; j < 8; ++j)
        for (int e = 0; e < 4; ++e) CHECK(std::abs(d.boundary[e][j * 8 + j] - h[j][e]) <= 1e-12);
    // Born level off the diagonal: linear integral with phase e^{-i(conj(s')z + s conj z)/2}
    for (int j : {0, 2, 5, 7}) {
        int i = (j + 3) % 8;
        cplx born{0, 0};
        for (std::size_t p = 0; p < q.values.size(); ++p) {
            cplx z = q.grid.node(p);
            born += std::exp(-I * (std::conj(s[i]) * z + s[j] * std::conj(z)) / 2.0) * q.values[p];
        }
        born *= q.grid.cell_area() / (4 * pi * pi);
        CHECK(std::abs(d.boundary[E12][i * 8 + j] - born) <= 10 * 0.05 * 0.05 * 0.05);
    }
}

TEST_CASE("contour formula agrees with the volume formula")
{
    auto q = gaussian(0.1, 8, 64);
    ForwardOptions opt;
    opt.tol = 1e-12;
    cplx k(0.7, -0.4);
    auto wf = solve_mu(q, k, opt);
    auto contour = square_contour(6.0, 64);
    auto psi = psi_on_contour(q, wf, contour, opt);
    auto hb = scattering_from_boundary_data(contour, psi, {k}, &q);
    auto hv = scattering_from_mu(q, wf);
    for (int e = 0; e < 4; ++e) {
        double rel = std::abs(hb[0][e] - hv[e]) / std::abs(hv[E12]);
        CHECK(rel <= 1e-4);
    }
    // free field: psi analytic in z, closed contour integral vanishes
    auto zero = make_field(q.grid);
    auto wf0 = solve_mu(zero, k, opt);
    auto h0 = scattering_from_boundary_data(contour, psi_on_contour(zero, wf0, contour, opt), {k, cplx(1, 2)});
    for (auto& row : h0)
        for (auto& v : row) CHECK(std::abs(v) < 1e-12);
    // linear scaling at small amplitude
    auto q1 = gaussian(0.02, 8, 64), q2 = gaussian(0.01, 8, 64);
    auto w1 = solve_mu(q1, k, opt), w2 = solve_mu(q2, k, opt);
    auto a1 = scattering_from_boundary_data(contour, psi_on_contour(q1, w1, contour, opt), {k});
    auto a2 = scattering_from_boundary_data(contour, psi_on_contour(q2, w2, contour, opt), {k});
    CHECK(std::abs(a1[0][E12] / a2[0][E12] - 2.0) <= 0.04);
    CHECK_THROWS_AS(scattering_from_boundary_data(square_contour(1.0, 16), psi, {k}, &q), ContourTooSmall);
}

TEST_CASE("exceptional scan in the small-data regime")
{
    auto zero = make_field(make_grid(3, 8));
    auto s0 = exceptional_scan(zero, k_region(3, 3), 1e-3);
    for (double s : s0.sigma_min) CHECK(std::abs(s - 1.0) < 1e-12);
    CHECK(s0.flagged.empty());
    auto q = gaussian(0.05, 3, 8);
    auto s1 = exceptional_scan(q, k_region(4, 4));
    CHECK(s1.flagged.empty());
    for (double s : s1.sigma_min) CHECK(s > 0.5);
}

TEST_CASE("grid too small is reported")
{
    auto q = gaussian(0.1, 1.0, 16);
    CHECK_THROWS_AS(solve_mu(q, 1.0), GridTooSmall);
}
