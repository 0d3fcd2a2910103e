#include "dsii/forward.hpp"
#include "dsii/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace dsii {

namespace {

struct ColumnSystem {
    const ComplexGrid* grid;
    CVec g;  // E q
};

CVec phase_density(const ComplexField& q, cplx k, PhaseConvention pc)
{
    const double sgn = pc == PhaseConvention::Derived ? -1.0 : 1.0;
    CVec g(q.values.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx z = q.grid.node(i);
        g[i] = std::polar(1.0, sgn * (std::conj(k) * z).real()) * q.values[i];
    }
    return g;
}

CVec times_conj(const CVec& g, const cplx* x, std::size_t n)
{
    CVec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = g[i] * std::conj(x[i]);
    return out;
}

// x = [x1, x2]: (x1 - C[g conj x2], x2 + C[g conj x1])
RealLinearOp column_operator(const ComplexGrid& grid, const CVec& g)
{
    const std::size_t N = grid.size();
    return [&grid, &g, N](const CVec& x, CVec& y) {
        y.resize(2 * N);
        auto c2 = cauchy_apply(grid, times_conj(g, x.data() + N, N));
        auto c1 = cauchy_apply(grid, times_conj(g, x.data(), N));
        for (std::size_t i = 0; i < N; ++i) {
            y[i] = x[i] - c2[i];
            y[N + i] = x[N + i] + c1[i];
        }
    };
}

// K x = C[g conj(C[g conj x])], complex-linear
CVec iterated_kernel(const ComplexGrid& grid, const CVec& g, const CVec& x)
{
    const std::size_t N = grid.size();
    auto inner = cauchy_apply(grid, times_conj(g, x.data(), N));
    return cauchy_apply(grid, times_conj(g, inner.data(), N));
}

struct ColumnSolution {
    CVec x1, x2;
    double residual = 0;
    int iterations = 0;
    double sigma = -1;
};

ColumnSolution solve_column(const ComplexGrid& grid, const CVec& g, int col, const ForwardOptions& opt)
{
    const std::size_t N = grid.size();
    const cplx d1 = col == 0 ? 1.0 : 0.0, d2 = col == 0 ? 0.0 : 1.0;
    CVec cg = cauchy_apply(grid, g);
    CVec b(2 * N);
    for (std::size_t i = 0; i < N; ++i) {
        b[i] = cg[i] * std::conj(d2);
        b[N + i] = -cg[i] * std::conj(d1);
    }
    ColumnSolution out;
    if (max_abs(g) == 0.0) {
        // zero potential: the operator is the identity
        out.x1.assign(N, cplx{0, 0});
        out.x2.assign(N, cplx{0, 0});
        out.sigma = 1;
        return out;
    }
    auto A = column_operator(grid, g);
    bool dense = opt.mode == SolverMode::Dense || (opt.mode == SolverMode::Auto && 4 * N <= opt.dense_limit);
    if (dense) {
        auto M = assemble_dense(A, 2 * N);
        auto ds = dense_solve(M, b);
        out.x1.assign(ds.x.begin(), ds.x.begin() + N);
        out.x2.assign(ds.x.begin() + N, ds.x.end());
        out.residual = ds.residual;
        out.sigma = ds.sigma_min;
        return out;
    }
    if (opt.path == SolvePath::Iterated) {
        CVec ones(N, d1);
        CVec kd = iterated_kernel(grid, g, ones);
        CVec rhs(N);
        for (std::size_t i = 0; i < N; ++i) rhs[i] = cg[i] * std::conj(d2) - kd[i];
        RealLinearOp Ki = [&](const CVec& x, CVec& y) {
            y = iterated_kernel(grid, g, x);
            for (std::size_t i = 0; i < N; ++i) y[i] += x[i];
        };
        auto r = gmres(Ki, N, rhs, opt.tol * 0.1, 60, 600);
        out.x1 = r.x;
        CVec s(N);
        for (std::size_t i = 0; i < N; ++i) s[i] = g[i] * std::conj(d1 + out.x1[i]);
        auto cs = cauchy_apply(grid, s);
        out.x2.resize(N);
        for (std::size_t i = 0; i < N; ++i) out.x2[i] = -cs[i];
        out.iterations = r.iterations;
    } else {
        auto r = gmres(A, 2 * N, b, opt.tol, 60, 600);
        out.x1.assign(r.x.begin(), r.x.begin() + N);
        out.x2.assign(r.x.begin() + N, r.x.end());
        out.iterations = r.iterations;
    }
    CVec x(2 * N), y;
    std::copy(out.x1.begin(), out.x1.end(), x.begin());
    std::copy(out.x2.begin(), out.x2.end(), x.begin() + N);
    A(x, y);
    double rn = 0;
    for (std::size_t i = 0; i < 2 * N; ++i) rn += std::norm(y[i] - b[i]);
    double bn = norm2(b);
    out.residual = bn > 0 ? std::sqrt(rn) / bn : std::sqrt(rn);
    if (opt.want_sigma) out.sigma = estimate_sigma(A, 2 * N).sigma_min;
    return out;
}

void check_decay(const ComplexField& q, const WaveFunction& wf, double tol)
{
    const int n = q.grid.n;
    double mx = 0, edge = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            std::size_t i = static_cast<std::size_t>(r) * n + c;
            double v = std::abs(q.values[i]) * std::max(std::abs(wf.mu[E11][i]), std::abs(wf.mu[E21][i]));
            mx = std::max(mx, v);
            if (r == 0 || c == 0 || r == n - 1 || c == n - 1) edge = std::max(edge, v);
        }
    if (mx > 0 && edge > tol * mx) throw GridTooSmall("potential density does not decay inside the grid");
}

}  // namespace

WaveFunction solve_mu(const ComplexField& q, cplx k, const ForwardOptions& opt)
{
    const std::size_t N = q.grid.size();
    WaveFunction wf;
    wf.k = k;
    CVec g = phase_density(q, k, opt.phase);
    auto c1 = solve_column(q.grid, g, 0, opt);
    wf.mu[E11] = c1.x1;
    for (auto& v : wf.mu[E11]) v += 1.0;
    wf.mu[E21] = c1.x2;
    wf.residual = c1.residual;
    wf.iterations = c1.iterations;
    wf.sigma_min = c1.sigma;
    if (opt.full_matrix) {
        auto c2 = solve_column(q.grid, g, 1, opt);
        wf.mu[E12] = c2.x1;
        wf.mu[E22] = c2.x2;
        for (auto& v : wf.mu[E22]) v += 1.0;
        wf.residual = std::max(wf.residual, c2.residual);
        wf.iterations += c2.iterations;
    } else {
        wf.mu[E22] = wf.mu[E11];
        wf.mu[E12].resize(N);
        for (std::size_t i = 0; i < N; ++i) wf.mu[E12][i] = -wf.mu[E21][i];
    }
    if (!(wf.residual <= opt.tol) || !std::isfinite(wf.residual))
        throw NoConvergence("Lippmann-Schwinger solve did not converge", wf.residual);
    check_decay(q, wf, opt.decay_tol);
    return wf;
}

std::array<cplx, 4> scattering_from_mu(const ComplexField& q, const WaveFunction& wf)
{
    std::array<cplx, 4> h{};
    const double w = q.grid.cell_area() / (4 * pi * pi);
    for (std::size_t i = 0; i < q.values.size(); ++i) {
        cplx z = q.grid.node(i);
        cplx eq = std::polar(1.0, -(std::conj(wf.k) * z).real()) * q.values[i];
        h[E11] += eq * std::conj(wf.mu[E21][i]);
        h[E12] += eq * std::conj(wf.mu[E22][i]);
        h[E21] -= eq * std::conj(wf.mu[E11][i]);
        h[E22] -= eq * std::conj(wf.mu[E12][i]);
    }
    for (auto& v : h) v *= w;
    return h;
}

ScatteringData scattering_diag(const ComplexField& q, const ComplexGrid& kgrid, double A, const ForwardOptions& opt,
                               DiagReport* report)
{
    ScatteringData d;
    d.kgrid = kgrid;
    d.radius = A;
    const std::size_t M = kgrid.size();
    for (auto& c : d.diag) c.assign(M, cplx{0, 0});
    d.valid.assign(M, 0);
    std::vector<double> res(M, 0.0);
    ForwardOptions o = opt;
    o.want_sigma = false;
    parallel_for(M, thread_count(opt.threads), [&](std::size_t i) {
        cplx k = kgrid.node(i);
        if (A > 0 && std::abs(k) <= A) return;
        try {
            auto wf = solve_mu(q, k, o);
            auto h = scattering_from_mu(q, wf);
            for (int e = 0; e < 4; ++e) d.diag[e][i] = h[e];
            d.valid[i] = 1;
            res[i] = wf.residual;
        } catch (const NoConvergence& ex) {
            res[i] = ex.residual;
            d.valid[i] = 0;
        }
    });
    if (report) {
        report->failed = 0;
        report->max_residual = 0;
        for (std::size_t i = 0; i < M; ++i) {
            cplx k = kgrid.node(i);
            if (A > 0 && std::abs(k) <= A) continue;
            if (!d.valid[i]) ++report->failed;
            report->max_residual = std::max(report->max_residual, res[i]);
        }
    }
    return d;
}

std::vector<std::array<cplx, 4>> scattering_at(const ComplexField& q, const std::vector<cplx>& ks,
                                               const ForwardOptions& opt)
{
    std::vector<std::array<cplx, 4>> out(ks.size());
    parallel_for(ks.size(), thread_count(opt.threads), [&](std::size_t i) {
        out[i] = scattering_from_mu(q, solve_mu(q, ks[i], opt));
    });
    return out;
}

void scattering_boundary(const ComplexField& q, const DiskSpec& disk, ScatteringData& data, const ForwardOptions& opt,
                         double tau_exc)
{
    const int nb = disk.n_boundary;
    const std::size_t N = q.grid.size();
    auto s = disk.boundary_nodes();
    data.radius = disk.radius;
    data.n_boundary = nb;
    for (auto& b : data.boundary) b.assign(static_cast<std::size_t>(nb) * nb, cplx{0, 0});
    if (nb == 0) return;
    const double w = q.grid.cell_area() / (4 * pi * pi);
    Eigen::MatrixXcd Amat(nb, N);
    for (int i = 0; i < nb; ++i)
        for (std::size_t p = 0; p < N; ++p) Amat(i, p) = std::exp(-I * std::conj(s[i]) * q.grid.node(p) / 2.0);
    std::array<Eigen::MatrixXcd, 4> V;
    for (auto& v : V) v.resize(N, nb);
    ForwardOptions o = opt;
    o.want_sigma = tau_exc > 0;
    parallel_for(nb, thread_count(opt.threads), [&](std::size_t j) {
        WaveFunction wf;
        try {
            wf = solve_mu(q, s[j], o);
        } catch (const NoConvergence&) {
            throw ExceptionalOnBoundary("boundary solve failed; enlarge the disk");
        }
        if (tau_exc > 0 && wf.sigma_min < tau_exc) throw ExceptionalOnBoundary("boundary node is near-exceptional");
        for (std::size_t p = 0; p < N; ++p) {
            cplx z = q.grid.node(p);
            cplx bq = std::exp(-I * s[j] * std::conj(z) / 2.0) * q.values[p];
            V[E11](p, j) = bq * std::conj(wf.mu[E21][p]);
            V[E12](p, j) = bq * std::conj(wf.mu[E22][p]);
            V[E21](p, j) = -bq * std::conj(wf.mu[E11][p]);
            V[E22](p, j) = -bq * std::conj(wf.mu[E12][p]);
        }
    });
    for (int e = 0; e < 4; ++e) {
        Eigen::MatrixXcd H = Amat * V[e];
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) data.boundary[e][static_cast<std::size_t>(i) * nb + j] = H(i, j) * w;
    }
}

std::vector<ContourNode> square_contour(double c, int per_side)
{
    auto [x, w] = gauss_legendre(per_side);
    const cplx corners[4] = {{-c, -c}, {c, -c}, {c, c}, {-c, c}};
    std::vector<ContourNode> out;
    for (int side = 0; side < 4; ++side) {
        cplx a = corners[side], b = corners[(side + 1) % 4];
        for (int i = 0; i < per_side; ++i) out.push_back({(a + b) / 2.0 + (b - a) / 2.0 * x[i], (b - a) / 2.0 * w[i]});
    }
    return out;
}

Matrix4 psi_on_contour(const ComplexField& q, const WaveFunction& wf, const std::vector<ContourNode>& contour,
                       const ForwardOptions& opt)
{
    CVec g = phase_density(q, wf.k, opt.phase);
    const std::size_t N = q.grid.size();
    Matrix4 dens;
    for (auto& d : dens) d.resize(N);
    for (std::size_t p = 0; p < N; ++p) {
        dens[E11][p] = g[p] * std::conj(wf.mu[E21][p]);
        dens[E12][p] = g[p] * std::conj(wf.mu[E22][p]);
        dens[E21][p] = -g[p] * std::conj(wf.mu[E11][p]);
        dens[E22][p] = -g[p] * std::conj(wf.mu[E12][p]);
    }
    Matrix4 psi;
    for (auto& c : psi) c.assign(contour.size(), cplx{0, 0});
    const double scale = q.grid.cell_area() / pi;
    for (std::size_t c = 0; c < contour.size(); ++c) {
        cplx z = contour[c].z;
        std::array<cplx, 4> acc{};
        for (std::size_t p = 0; p < N; ++p) {
            cplx kern = 1.0 / (z - q.grid.node(p));
            for (int e = 0; e < 4; ++e) acc[e] += dens[e][p] * kern;
        }
        cplx ph = std::exp(I * std::conj(wf.k) * z / 2.0);
        for (int e = 0; e < 4; ++e) {
            cplx delta = (e == E11 || e == E22) ? 1.0 : 0.0;
            psi[e][c] = (delta + acc[e] * scale) * ph;
        }
    }
    return psi;
}

std::vector<std::array<cplx, 4>> scattering_from_boundary_data(const std::vector<ContourNode>& contour, const Matrix4& psi,
                                                               const std::vector<cplx>& s_list, const ComplexField* q)
{
    if (q) {
        double c = 0;
        for (auto& n : contour) c = std::max({c, std::abs(n.z.real()), std::abs(n.z.imag())});
        double mx = max_abs(q->values), out = 0;
        for (std::size_t p = 0; p < q->values.size(); ++p) {
            cplx z = q->grid.node(p);
            if (std::abs(z.real()) >= c || std::abs(z.imag()) >= c) out = std::max(out, std::abs(q->values[p]));
        }
        if (mx > 0 && out > 1e-8 * mx) throw ContourTooSmall("contour does not enclose the support of q");
    }
    std::vector<std::array<cplx, 4>> h(s_list.size());
    const cplx pref = -I / (8 * pi * pi);
    for (std::size_t t = 0; t < s_list.size(); ++t) {
        std::array<cplx, 4> acc{};
        for (std::size_t c = 0; c < contour.size(); ++c) {
            cplx f = std::exp(-I * std::conj(s_list[t]) * contour[c].z / 2.0) * contour[c].dz;
            for (int e = 0; e < 4; ++e) acc[e] += f * psi[e][c];
        }
        for (int e = 0; e < 4; ++e) h[t][e] = pref * acc[e];
    }
    return h;
}

std::vector<cplx> k_region(double R, int per_side)
{
    std::vector<cplx> ks;
    double step = 2 * R / per_side;
    for (int r = 0; r < per_side; ++r)
        for (int c = 0; c < per_side; ++c) ks.emplace_back(-R + (c + 0.5) * step, -R + (r + 0.5) * step);
    return ks;
}

ExceptionalScan exceptional_scan(const ComplexField& q, const std::vector<cplx>& ks, double tau_exc,
                                 const ForwardOptions& opt)
{
    ExceptionalScan scan;
    scan.k_samples = ks;
    scan.sigma_min.assign(ks.size(), 0.0);
    const std::size_t N = q.grid.size();
    parallel_for(ks.size(), thread_count(opt.threads), [&](std::size_t i) {
        CVec g = phase_density(q, ks[i], opt.phase);
        auto A = column_operator(q.grid, g);
        bool dense = opt.mode == SolverMode::Dense || (opt.mode == SolverMode::Auto && 4 * N <= opt.dense_limit);
        if (dense) {
            auto M = assemble_dense(A, 2 * N);
            scan.sigma_min[i] = dense_solve(M, CVec(2 * N, cplx{0, 0})).sigma_min;
        } else {
            scan.sigma_min[i] = estimate_sigma(A, 2 * N).sigma_min;
        }
    });
    if (tau_exc <= 0 && !ks.empty()) {
        auto s = scan.sigma_min;
        std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
        tau_exc = 1e-3 * s[s.size() / 2];
    }
    scan.tau = tau_exc;
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (scan.sigma_min[i] < tau_exc) {
            scan.flagged.push_back(i);
            scan.radius = std::max(scan.radius, std::abs(ks[i]));
        }
    return scan;
}

double symmetry_deviation(const ScatteringData& d)
{
    double mx = 0, dev = 0;
    auto visit = [&](const Matrix4& m, std::size_t i) {
        for (int e = 0; e < 4; ++e) mx = std::max(mx, std::abs(m[e][i]));
        dev = std::max({dev, std::abs(m[E11][i] - m[E22][i]), std::abs(m[E12][i] + m[E21][i])});
    };
    for (std::size_t i = 0; i < d.diag[0].size(); ++i)
        if (d.valid.empty() || d.valid[i]) visit(d.diag, i);
    if (d.has_boundary())
        for (std::size_t i = 0; i < d.boundary[0].size(); ++i) visit(d.boundary, i);
    return mx > 0 ? dev / mx : 0.0;
}

}  // namespace dsii
