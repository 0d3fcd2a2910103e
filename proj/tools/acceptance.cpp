// Property-based acceptance suite; one line per criterion.
#include "dsii/evolution.hpp"
#include "dsii/inverse.hpp"
#include "dsii/solvers.hpp"
#include "dsii/splitstep.hpp"
#include "dsii/validation.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace dsii;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

ComplexField gaussian(double a, double L, int n, double width = 1)
{
    auto f = make_field(make_grid(L, n));
    for (std::size_t i = 0; i < f.values.size(); ++i)
        f.values[i] = a * std::exp(-std::norm(f.grid.node(i)) / (width * width));
    return f;
}

double rel_l2(const CVec& a, const CVec& b)
{
    double s = 0, n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::norm(a[i] - b[i]);
        n += std::norm(b[i]);
    }
    return n > 0 ? std::sqrt(s / n) : std::sqrt(s);
}

double rel_max(const CVec& a, const CVec& b)
{
    double d = 0, m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        m = std::max(m, std::abs(b[i]));
    }
    return m > 0 ? d / m : d;
}

int threads = 1;

ForwardOptions fwd_opt(double tol = 1e-12)
{
    ForwardOptions o;
    o.tol = tol;
    o.threads = threads;
    return o;
}

InverseOptions inv_opt(double tol = 1e-10)
{
    InverseOptions o;
    o.tol = tol;
    o.threads = threads;
    return o;
}

ScatteringData with_boundary(const ComplexField& q, const ComplexGrid& kg, const DiskSpec& disk, const ForwardOptions& o)
{
    auto d = scattering_diag(q, kg, disk.radius, o);
    scattering_boundary(q, disk, d, o);
    return d;
}

// 1. zero data
Outcome zero_data()
{
    auto q = make_field(make_grid(4, 32));
    auto disk = make_disk(1.0, 8, K0Policy::FixedPoint);
    auto d = with_boundary(q, make_grid(4, 16), disk, fwd_opt());
    double h = 0;
    for (int e = 0; e < 4; ++e) h = std::max({h, max_abs(d.diag[e]), max_abs(d.boundary[e])});
    auto T = build_T(make_context(d, 0.3, disk, inv_opt()), cplx(0.4, -0.2));
    auto x = unpack_complex(T.layout(), random_cvec(packed_dim(T.layout()) / 2, 7));
    double t = max_abs(pack_complex(T.layout(), T.apply(x)));
    auto r = reconstruct(d, make_grid(3, 16), 0.3, disk, inv_opt());
    double rec = std::max(max_abs(r.q.values), max_abs(r.phi.values));
    double worst = std::max({h, t, rec});
    return {worst <= 1e-12, "max|h| " + sci(h) + ", max|T x| " + sci(t) + ", max|q,phi| " + sci(rec) + " <= 1e-12"};
}

// 2. Born scaling of h12
Outcome born_scaling()
{
    auto ks = k_region(1.5, 4);
    double err[2];
    double closed = 0;
    int j = 0;
    for (double a : {0.05, 0.025}) {
        auto q = gaussian(a, 6, 64);
        auto h = scattering_at(q, ks, fwd_opt(1e-13));
        double e = 0;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            // linear Fourier integral by direct quadrature
            cplx s{0, 0};
            for (std::size_t p = 0; p < q.values.size(); ++p)
                s += std::polar(1.0, -(std::conj(ks[i]) * q.grid.node(p)).real()) * q.values[p];
            s *= q.grid.cell_area() / (4 * pi * pi);
            closed = std::max(closed, std::abs(s - a / (4 * pi) * std::exp(-std::norm(ks[i]) / 4)));
            e = std::max(e, std::abs(h[i][E12] - s));
        }
        err[j++] = e;
    }
    double ratio = err[0] / err[1];
    bool pass = ratio >= 3 && ratio <= 5;
    return {pass, "err(0.05) " + sci(err[0]) + ", err(0.025) " + sci(err[1]) + ", ratio " + sci(ratio) +
                      " in [3,5]; quadrature vs closed form " + sci(closed)};
}

// 3. round trip at t = 0 without a disk
Outcome round_trip()
{
    double err[2];
    std::string detail;
    int j = 0;
    for (int n : {128, 256}) {
        auto q = gaussian(0.1, 8, n);
        auto kg = make_grid(8, n / 4);
        auto d = scattering_diag(q, kg, 0.0, fwd_opt(1e-11));
        // stride-2 sublattice of the potential grid
        std::vector<cplx> zs;
        CVec exact;
        for (int row = 0; row < n; row += 2)
            for (int col = 0; col < n; col += 2) {
                std::size_t i = static_cast<std::size_t>(row) * n + col;
                zs.push_back(q.grid.node(i));
                exact.push_back(q.values[i]);
            }
        auto pv = reconstruct_points(d, zs, 0, DiskSpec{}, inv_opt());
        CVec got(pv.size());
        for (std::size_t i = 0; i < pv.size(); ++i) got[i] = pv[i].q;
        err[j] = rel_l2(got, exact);
        detail += "n=" + std::to_string(n) + " " + sci(err[j]) + (j ? "" : ", ");
        ++j;
    }
    bool pass = err[0] <= 5e-3 && err[1] < err[0];
    return {pass, "rel_l2 " + detail + " (<= 5e-3, decreasing)"};
}

// 4. duality at t = 0.5
Outcome duality()
{
    double dev[2];
    std::string detail;
    int j = 0;
    for (int n : {32, 64}) {
        auto q = gaussian(0.05, 6, n);
        auto d = scattering_diag(q, make_grid(6, n), 0.0, fwd_opt());
        auto ev = evolve_h(d, 0.5);
        auto rec = reconstruct(ev, make_grid(7, n), 0.5, DiskSpec{}, inv_opt());
        auto fo = fwd_opt();
        fo.decay_tol = 1e-3;
        auto r = duality_check(rec.q, ev, fo, n / 16);
        dev[j] = r.diag;
        detail += "n=" + std::to_string(n) + " " + sci(r.diag) + " (" + std::to_string(r.samples) + " k)" + (j ? "" : ", ");
        ++j;
    }
    return {dev[0] <= 1e-2 && dev[1] < dev[0], "max relative deviation " + detail + " (<= 1e-2, shrinking)"};
}

// 5. IST against the split-step trajectory
Outcome cross_method()
{
    auto q = gaussian(0.1, 8, 64);
    auto tr = simulate(q, 0.5, 1e-3);
    auto d = scattering_diag(q, make_grid(6, 32), 0.0, fwd_opt());
    auto rec = reconstruct(d, q.grid, 0.5, DiskSpec{}, inv_opt());
    double e = rel_l2(rec.q.values, tr.frames.back().values);
    return {e <= 1e-2, "rel_l2 IST vs split-step at t=0.5 " + sci(e) + " <= 1e-2"};
}

// 6. evolution invariants
Outcome evolution_invariants()
{
    auto q = gaussian(0.1, 6, 32);
    auto disk = make_disk(1.0, 16);
    auto d = with_boundary(q, make_grid(6, 32), disk, fwd_opt());
    auto e = evolve_h(d, 0.5);
    double diag = 0, mod = 0, scale = 0;
    for (std::size_t i = 0; i < d.diag[E11].size(); ++i) {
        if (!d.valid[i]) continue;
        diag = std::max({diag, std::abs(e.diag[E11][i] - d.diag[E11][i]), std::abs(e.diag[E22][i] - d.diag[E22][i])});
        mod = std::max({mod, std::abs(std::abs(e.diag[E12][i]) - std::abs(d.diag[E12][i])),
                        std::abs(std::abs(e.diag[E21][i]) - std::abs(d.diag[E21][i]))});
        for (int c = 0; c < 4; ++c) scale = std::max(scale, std::abs(d.diag[c][i]));
    }
    diag /= scale;
    mod /= scale;
    auto two = evolve_h(evolve_h(d, 0.2), 0.3);
    double group = 0;
    for (int c = 0; c < 4; ++c) group = std::max({group, rel_max(two.diag[c], e.diag[c]), rel_max(two.boundary[c], e.boundary[c])});
    bool pass = diag <= 1e-14 && mod <= 1e-14 && group <= 1e-13;
    return {pass, "diagonal " + sci(diag) + ", |h12| " + sci(mod) + " (<= 1e-14), group " + sci(group) + " (<= 1e-13)"};
}

// 7. symmetry relations of h and v
Outcome symmetry()
{
    auto q = gaussian(0.1, 5, 32);
    auto disk = make_disk(1.0, 8, K0Policy::FixedPoint);
    auto fo = fwd_opt(1e-13);
    fo.full_matrix = true;
    auto d = with_boundary(q, make_grid(5, 16), disk, fo);
    double hs = symmetry_check(d);
    auto io = inv_opt(1e-12);
    io.full_matrix = true;
    std::vector<cplx> zs{{0.3, 0.2}, {-0.5, 0.1}, {0.0, -0.8}, {1.2, 0.7}, {-1.0, -1.0}};
    double vs = 0;
    for (double t : {0.0, 0.4})
        for (const auto& p : reconstruct_points(d, zs, t, disk, io)) vs = std::max(vs, symmetry_check(p));
    return {std::max(hs, vs) <= 1e-10, "h relations " + sci(hs) + ", v relations " + sci(vs) + " <= 1e-10"};
}

// 8. arc against log boundary operator
Outcome arc_vs_log()
{
    auto q = gaussian(0.1, 5, 32);
    auto disk = make_disk(1.0, 256, K0Policy::FixedPoint);
    auto d = with_boundary(q, make_grid(5, 16), disk, fwd_opt());
    auto lo = inv_opt();
    lo.form = BoundaryForm::Log;
    const cplx z(0.5, -0.3);
    auto Ta = build_T(make_context(d, 0.1, disk, inv_opt()), z);
    auto Tl = build_T(make_context(d, 0.1, disk, lo), z);
    double worst = 0;
    for (unsigned s = 0; s < 20; ++s) {
        auto x = unpack_complex(Ta.layout(), random_cvec(packed_dim(Ta.layout()) / 2, 100 + s));
        worst = std::max(worst, rel_l2(pack_complex(Ta.layout(), Tl.apply(x)), pack_complex(Ta.layout(), Ta.apply(x))));
    }
    return {worst <= 1e-6, "max relative difference over 20 elements " + sci(worst) + " <= 1e-6"};
}

// 9. independence of k0
Outcome k0_independence()
{
    auto q = gaussian(0.1, 6, 32);
    auto kg = make_grid(6, 32);
    auto d = with_boundary(q, kg, make_disk(1.0, 16), fwd_opt());
    std::vector<cplx> zs;
    for (int i = 0; i < 10; ++i) zs.push_back(std::polar(0.15 + 0.18 * i, 2.4 * i));
    auto a = reconstruct_points(d, zs, 0.2, make_disk(1.0, 16, K0Policy::FixedPoint, -pi / 2), inv_opt());
    auto b = reconstruct_points(d, zs, 0.2, make_disk(1.0, 16, K0Policy::FixedPoint, 3 * pi / 4), inv_opt());
    CVec qa, qb;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        qa.push_back(a[i].q);
        qb.push_back(b[i].q);
    }
    double e = rel_max(qa, qb);
    return {e <= 1e-3, "max relative difference at 10 probes " + sci(e) + " <= 1e-3"};
}

// 10. dbar equation residual
Outcome dbar_residual()
{
    auto q = gaussian(0.1, 5, 32);
    double r[2], h[2];
    int j = 0;
    for (int n : {32, 64}) {
        auto d = scattering_diag(q, make_grid(1.6, n), 0.0, fwd_opt());
        auto res = dbar_equation_residual(d, cplx(0.4, -0.2), 0.2, DiskSpec{}, inv_opt());
        r[j] = res.relative;
        h[j] = res.spacing;
        ++j;
    }
    return {r[0] <= 5e-2 && r[1] < r[0], "spacing " + sci(h[0]) + ": " + sci(r[0]) + " (<= 5e-2), spacing " + sci(h[1]) +
                                             ": " + sci(r[1]) + " (improving)"};
}

// 11. far-field invertibility
Outcome far_field()
{
    // e^{i Re(conj(k) z)} must be resolved at |z| = 32 on the k-grid and on the boundary
    auto q = gaussian(0.1, 6, 32);
    auto disk = make_disk(1.0, 256, K0Policy::RaySelected);
    auto d = with_boundary(q, make_grid(4, 128), disk, fwd_opt());
    auto io = inv_opt();
    io.want_sigma = true;
    auto ctx = make_context(d, 0.3, disk, io);
    double prev = 0;
    bool mono = true, flags = false;
    std::string detail;
    for (double R : {8.0, 16.0, 32.0}) {
        double smin = 1e300;
        for (int a = 0; a < 8; ++a) {
            auto rep = solve_w(build_T(ctx, std::polar(R, 2 * pi * a / 8 + 0.1)), io.tol).second;
            smin = std::min(smin, rep.sigma_min_estimate);
            if (R == 32.0) flags = flags || rep.condition_flag;
        }
        mono = mono && smin >= prev;
        prev = smin;
        char sv[24];
        std::snprintf(sv, sizeof sv, "%.6f", smin);
        detail += "|z|=" + std::to_string(int(R)) + " " + sv + (R < 32 ? ", " : "");
    }
    return {mono && !flags, "min sigma " + detail + (mono ? " nondecreasing" : " NOT nondecreasing") +
                                (flags ? ", outer ring flagged" : ", outer ring clear")};
}

// 12. blow-up scan
Outcome blowup()
{
    auto small = gaussian(0.02, 5, 32);
    auto ds = scattering_diag(small, make_grid(5, 16), 0.0, fwd_opt());
    BlowupBox box;
    auto ms = blowup_scan(ds, box, DiskSpec{}, 1e-2, inv_opt());
    bool small_ok = ms.flag_count() == 0 && !ms.inconclusive;

    // steep Gaussian e^{-4|z|^2}; a disk covers any failed forward solves
    auto steep = gaussian(1.0, 4, 64, 0.5);
    auto kg = make_grid(12, 32);
    DiagReport rep;
    auto dl = scattering_diag(steep, kg, 0.0, fwd_opt(1e-11), &rep);
    DiskSpec disk;
    if (rep.failed) {
        double A = 0;
        for (std::size_t i = 0; i < kg.size(); ++i)
            if (!dl.valid[i]) A = std::max(A, std::abs(kg.node(i)));
        disk = make_disk(A + 2 * kg.spacing, 32);
        dl = with_boundary(steep, kg, disk, fwd_opt(1e-11));
    }
    auto ml = blowup_scan(dl, box, disk, 1e-2, inv_opt());
    // independent edge-contact check
    bool touches = false;
    const std::size_t per = static_cast<std::size_t>(box.nz) * box.nz;
    for (std::size_t c = 0; c < ml.flagged.size(); ++c) {
        if (!ml.flagged[c]) continue;
        int ix = static_cast<int>((c % per) % box.nz), iy = static_cast<int>((c % per) / box.nz);
        touches = touches || ix == 0 || iy == 0 || ix == box.nz - 1 || iy == box.nz - 1;
    }
    bool large_ok = touches == ml.inconclusive;
    std::string status = ml.inconclusive ? "Inconclusive" : (ml.flag_count() ? "flags strictly inside" : "no flags");
    return {small_ok && large_ok, "a=0.02: " + std::to_string(ms.flag_count()) + " flags" +
                                      (ms.inconclusive ? " (inconclusive)" : "") + "; steep a=1: " +
                                      std::to_string(ml.flag_count()) + " flags, " + status +
                                      (disk.empty() ? "" : ", disk A=" + sci(disk.radius))};
}

// 13. split-step oracle
Outcome splitstep()
{
    auto g = make_grid(3, 32);
    const double x1 = 2 * pi * 3 / (2 * g.extent), x2 = -2 * pi * 5 / (2 * g.extent);
    auto w = make_field(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx z = g.node(i);
        w.values[i] = std::polar(1.0, x1 * z.real() + x2 * z.imag());
    }
    SplitStepOptions lin;
    lin.nonlinear = false;
    auto tw = simulate(w, 0.5, 0.01, lin);
    double plane = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        plane = std::max(plane, std::abs(tw.frames.back().values[i] - w.values[i] * std::polar(1.0, -2 * x1 * x2 * 0.5)));

    auto q = gaussian(0.1, 6, 64);
    auto tq = simulate(q, 0.5, 1e-3);
    double n0 = norm2(q.values), n1 = norm2(tq.frames.back().values);
    double l2 = std::abs(n1 - n0) / n0;

    auto q1 = gaussian(1.0, 5, 32);
    auto ref = simulate(q1, 0.2, 0.2 / 320).frames.back();
    auto diff = [&](int steps) {
        auto f = simulate(q1, 0.2, 0.2 / steps).frames.back();
        CVec d(f.values.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = f.values[i] - ref.values[i];
        return norm2(d);
    };
    double ratio = diff(10) / diff(20);
    bool pass = plane <= 1e-12 && l2 <= 1e-10 && std::abs(ratio - 4) <= 1;
    return {pass, "plane wave " + sci(plane) + " (<= 1e-12), L2 drift " + sci(l2) + " (<= 1e-10), dt ratio " + sci(ratio) +
                      " (4 +- 25%)"};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, 13));
    CLI11_PARSE(app, argc, argv);
    threads = thread_count();

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"zero-data identities", zero_data},
        {"Born scaling", born_scaling},
        {"round trip at t=0", round_trip},
        {"duality at t=0.5", duality},
        {"IST vs split-step", cross_method},
        {"evolution invariants", evolution_invariants},
        {"symmetry relations", symmetry},
        {"arc vs log boundary form", arc_vs_log},
        {"k0 independence", k0_independence},
        {"dbar-equation residual", dbar_residual},
        {"far-field invertibility", far_field},
        {"blow-up scan", blowup},
        {"split-step oracle", splitstep},
    };
    std::set<int> pick(only.begin(), only.end());
    int failed = 0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        int id = static_cast<int>(c) + 1;
        if (!pick.empty() && !pick.count(id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[c].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        char head[80];
        std::snprintf(head, sizeof head, "[%s] %2d %s: ", o.pass ? "PASS" : "FAIL", id, criteria[c].first.c_str());
        std::cout << head << o.detail << " [" << std::lround(secs) << " s]" << std::endl;
    }
    return failed ? 1 : 0;
}
