#include "dsii/inverse.hpp"
#include "dsii/evolution.hpp"
#include "dsii/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace dsii {

namespace {

// entry indices (off-diagonal u, diagonal u, off-diagonal w, diagonal w) per row
struct RowEntries {
    int uo, ud, wo, wd;
};

RowEntries row_entries(int row)
{
    if (row == 0) return {E21, E11, E12, E22};
    return {E12, E22, E21, E11};
}

// DFT with 1/n: F[j] = (1/n) sum v_i e^{-2 pi i ij/n}
CVec dft(const CVec& v)
{
    const std::size_t n = v.size();
    CVec F(n, cplx{0, 0});
    for (std::size_t j = 0; j < n; ++j) {
        cplx s{0, 0};
        for (std::size_t i = 0; i < n; ++i) s += v[i] * std::polar(1.0, -2.0 * pi * double((i * j) % n) / double(n));
        F[j] = s / double(n);
    }
    return F;
}

cplx eval_anti(const CVec& d, cplx sp)
{
    cplx w = std::conj(sp), s{0, 0};
    for (std::size_t m = d.size(); m-- > 0;) s = s * w + d[m];
    return s;
}

struct ArcPoint {
    cplx sp;
    double w;   // d theta weight
    cplx ln{0, 0};  // log factor (log form only)
};

// nodes on the full circle split at k0 and s, graded towards both split points
std::vector<ArcPoint> log_form_nodes(double A, double th_k0, double th_s, int per_arc)
{
    std::vector<ArcPoint> out;
    double span = std::fmod(th_s - th_k0, 2 * pi);
    if (span < 0) span += 2 * pi;
    if (span < 1e-14 || span > 2 * pi - 1e-14) return out;
    auto [gx, gw] = gauss_legendre(per_arc);
    const double p = 3.0;
    auto add_arc = [&](double a, double b) {
        for (int i = 0; i < per_arc; ++i) {
            double s = (gx[i] + 1) / 2, ws = gw[i] / 2;
            double sp = std::pow(s, p), cp = std::pow(1 - s, p);
            double v = sp / (sp + cp);
            double dv = p * std::pow(s, p - 1) * std::pow(1 - s, p - 1) / ((sp + cp) * (sp + cp));
            out.push_back({std::polar(A, a + (b - a) * v), (b - a) * dv * ws});
        }
    };
    add_arc(th_k0, th_k0 + span);
    add_arc(th_k0 + span, th_k0 + 2 * pi);
    return out;
}

}  // namespace

std::shared_ptr<const InverseContext> make_context(const ScatteringData& data, double t, const DiskSpec& disk,
                                                   const InverseOptions& opt)
{
    auto ctx = std::make_shared<InverseContext>();
    ctx->data = &data;
    ctx->t = t;
    ctx->disk = disk;
    ctx->opt = opt;
    const double A = disk.empty() ? 0.0 : disk.radius;
    const int N = disk.empty() ? 0 : (opt.modes >= 0 ? opt.modes : disk.n_boundary / 2 - 1);
    ctx->layout = make_layout(data.kgrid, A, N);
    const auto& L = ctx->layout;
    const double dt = t - data.time;
    for (int e = 0; e < 4; ++e) ctx->H[e].resize(L.ext.size());
    for (std::size_t p = 0; p < L.ext.size(); ++p) {
        std::size_t i = L.ext[p];
        if (!data.valid.empty() && !data.valid[i]) throw Error("scattering data missing at an exterior node");
        cplx k = data.kgrid.node(i);
        cplx fo = offdiag_factor(k, k, dt), fd = diag_factor(k, k, dt);
        ctx->H[E11][p] = data.diag[E11][i] * fd;
        ctx->H[E22][p] = data.diag[E22][i] * fd;
        ctx->H[E12][p] = data.diag[E12][i] * fo;
        ctx->H[E21][p] = data.diag[E21][i] * fo;
    }
    if (!disk.empty()) {
        if (!data.has_boundary() || data.n_boundary != disk.n_boundary || std::abs(data.radius - disk.radius) > 1e-12)
            throw MissingBoundaryBlock("boundary block absent or inconsistent with the disk");
        const int nb = disk.n_boundary;
        ctx->anti.resize(nb);
        for (int j = 0; j < nb; ++j) {
            for (int e = 0; e < 4; ++e) {
                CVec col(nb);
                for (int i = 0; i < nb; ++i) col[i] = data.boundary[e][static_cast<std::size_t>(i) * nb + j];
                CVec F = dft(col);
                CVec d(nb / 2);
                double am = 1;
                for (int m = 0; m < nb / 2; ++m) {
                    d[m] = F[(nb - m) % nb] / am;
                    am *= A;
                }
                ctx->anti[j][e] = d;
            }
        }
        ctx->moments.resize(N + 1, L.ext.size());
        const double da = data.kgrid.cell_area();
        for (std::size_t p = 0; p < L.ext.size(); ++p) {
            cplx k = data.kgrid.node(L.ext[p]);
            cplx ik = 1.0 / k, pw = ik;
            for (int n = 0; n <= N; ++n) {
                ctx->moments(n, p) = pw * da / pi;
                pw *= ik;
            }
        }
    }
    return ctx;
}

TOperator build_T(std::shared_ptr<const InverseContext> ctx, cplx z, int row)
{
    TOperator T;
    T.ctx = ctx;
    T.z = z;
    T.t = ctx->t;
    T.row = row;
    const auto& L = ctx->layout;
    const auto& g = L.kgrid;
    auto ent = row_entries(row);
    T.du.assign(g.size(), cplx{0, 0});
    T.dw.assign(g.size(), cplx{0, 0});
    // e_z(k) = exp(i Re(conj(k) z)) = exp(i (kx x + ky y)), separable on the grid
    CVec ex(g.n), ey(g.n);
    for (int j = 0; j < g.n; ++j) {
        ex[j] = std::polar(1.0, g.coord(j) * z.real());
        ey[j] = std::polar(1.0, g.coord(j) * z.imag());
    }
    for (std::size_t p = 0; p < L.ext.size(); ++p) {
        std::size_t i = L.ext[p];
        cplx e = ex[i % g.n] * ey[i / g.n] * L.weight[p];
        T.du[i] = -kappa * e * ctx->H[ent.uo][p];
        T.dw[i] = -kappa * e * ctx->H[ent.wo][p];
    }
    if (ctx->disk.empty()) return T;

    auto choice = select_k0(ctx->disk, z);
    T.k0 = choice.k0;
    T.k0_fallback = choice.fallback;
    const int nb = ctx->disk.n_boundary, N = L.modes;
    const double A = ctx->disk.radius;
    const double dt = ctx->t - ctx->data->time;
    auto s = ctx->disk.boundary_nodes();
    for (int c = 0; c < 2; ++c) {
        T.Ka[c] = Eigen::MatrixXcd::Zero(nb, N + 1);
        T.Kb[c] = Eigen::MatrixXcd::Zero(nb, N + 1);
    }
    const int eo[2] = {ent.uo, ent.wo}, ed[2] = {ent.ud, ent.wd};
    std::vector<double> th, w;
    for (int j = 0; j < nb; ++j) {
        std::vector<ArcPoint> pts;
        if (ctx->opt.form == BoundaryForm::Arc) {
            arc_angles(std::arg(T.k0), std::arg(s[j]), nb, th, w);
            for (std::size_t a = 0; a < th.size(); ++a) pts.push_back({std::polar(A, th[a]), w[a]});
        } else {
            pts = log_form_nodes(A, std::arg(T.k0), std::arg(s[j]), std::max(128, 8 * nb));
            for (auto& p : pts) {
                cplx den = std::conj(p.sp) - std::conj(T.k0), num = std::conj(p.sp) - std::conj(s[j]);
                // graded nodes can collapse onto a split point; the weight there is zero
                p.ln = (std::abs(den) > 0 && std::abs(num) > 0) ? std::log(num / den) : cplx{0, 0};
            }
        }
        for (const auto& p : pts) {
            cplx sp = p.sp, csp = std::conj(sp);
            cplx dsp = I * sp * p.w;
            cplx eA = std::exp(I * (s[j] * std::conj(z) + csp * z) / 2.0);
            cplx eB = std::exp(I * (s[j] - sp) * std::conj(z) / 2.0);
            cplx fo = offdiag_factor(sp, s[j], dt), fd = diag_factor(sp, s[j], dt);
            for (int c = 0; c < 2; ++c) {
                cplx ho = eval_anti(ctx->anti[j][eo[c]], sp) * fo;
                cplx hd = eval_anti(ctx->anti[j][ed[c]], sp) * fd;
                cplx a, b;
                if (ctx->opt.form == BoundaryForm::Arc) {
                    a = kappa * eA * ho * std::conj(dsp);
                    b = kappa * eB * std::conj(hd) * dsp;
                } else {
                    // (1/2 pi i) kappa = 1; printed + sign on the diagonal term
                    a = eA * ho * p.ln * std::conj(dsp);
                    b = -eB * std::conj(hd) * std::conj(p.ln) * dsp;
                }
                cplx pa{1, 0}, pb{1, 0};
                for (int n = 0; n <= N; ++n) {
                    T.Ka[c](j, n) += a * pa;
                    T.Kb[c](j, n) += b * pb;
                    pa *= csp;
                    pb *= sp;
                }
            }
        }
    }
    return T;
}

TOperator build_T(const ScatteringData& data, cplx z, double t, const DiskSpec& disk, const InverseOptions& opt)
{
    return build_T(make_context(data, t, disk, opt), z, 0);
}

std::array<CVec, 2> TOperator::jumps(const CVec& cu, const CVec& cw) const
{
    std::array<CVec, 2> J;
    const int nb = ctx->disk.n_boundary;
    if (ctx->disk.empty()) return J;
    Eigen::Map<const Eigen::VectorXcd> u(cu.data(), cu.size()), w(cw.data(), cw.size());
    Eigen::VectorXcd ju = Ka[0] * w.conjugate() - Kb[0] * u;
    Eigen::VectorXcd jw = Ka[1] * u.conjugate() - Kb[1] * w;
    J[0].assign(ju.data(), ju.data() + nb);
    J[1].assign(jw.data(), jw.data() + nb);
    return J;
}

BElement TOperator::apply(const BElement& in) const
{
    const auto& L = ctx->layout;
    const auto& g = L.kgrid;
    const std::size_t ne = L.ext.size();
    CVec fu = exterior_values(L, in.ch[0]), fw = exterior_values(L, in.ch[1]);
    CVec Xu(g.size(), cplx{0, 0}), Xw(g.size(), cplx{0, 0});
    for (std::size_t p = 0; p < ne; ++p) {
        std::size_t i = L.ext[p];
        Xu[i] = du[i] * std::conj(fw[p]);
        Xw[i] = dw[i] * std::conj(fu[p]);
    }
    CVec cu = cauchy_apply(g, Xu), cw = cauchy_apply(g, Xw);
    std::array<CVec, 2> ext{CVec(ne), CVec(ne)};
    for (std::size_t p = 0; p < ne; ++p) {
        ext[0][p] = cu[L.ext[p]];
        ext[1][p] = cw[L.ext[p]];
    }
    std::array<CVec, 2> interior;
    if (!ctx->disk.empty()) {
        const int nb = ctx->disk.n_boundary, N = L.modes;
        const double A = ctx->disk.radius;
        const CVec* X[2] = {&Xu, &Xw};
        auto J = jumps(in.ch[0].interior, in.ch[1].interior);
        for (int c = 0; c < 2; ++c) {
            Eigen::VectorXcd xe(ne);
            for (std::size_t p = 0; p < ne; ++p) xe[p] = (*X[c])[L.ext[p]];
            Eigen::VectorXcd ic = -(ctx->moments * xe);
            CVec F = dft(J[c]);
            double an = 1;
            interior[c].resize(N + 1);
            for (int n = 0; n <= N; ++n) {
                interior[c][n] = ic[n] + F[n] / an;
                an *= A;
            }
            for (std::size_t p = 0; p < ne; ++p) {
                cplx k = g.node(L.ext[p]);
                cplx r = A / k, rm = r, s{0, 0};
                for (int m = 1; m < nb / 2; ++m) {
                    s += rm * F[nb - m];
                    rm *= r;
                }
                ext[c][p] -= s;
            }
        }
    }
    BElement out;
    for (int c = 0; c < 2; ++c) out.ch[c] = split_tail(L, ext[c], interior[c]);
    return out;
}

BElement TOperator::apply_identity() const
{
    BElement one = zero_element(ctx->layout);
    one.ch[0].exterior.assign(ctx->layout.ext.size(), cplx{1, 0});
    if (!one.ch[0].interior.empty()) one.ch[0].interior[0] = 1.0;
    return apply(one);
}

std::pair<BElement, SolveReport> solve_w(const TOperator& T, double tol)
{
    const auto& L = T.layout();
    const std::size_t m = packed_dim(L) / 2;
    RealLinearOp op = [&](const CVec& x, CVec& y) {
        y = pack_complex(L, T.apply(unpack_complex(L, x)));
        for (std::size_t i = 0; i < m; ++i) y[i] += x[i];
    };
    CVec b = pack_complex(L, T.apply_identity());
    for (auto& v : b) v = -v;
    SolveReport rep;
    rep.policy_fallback = T.k0_fallback;
    bool zero_op = max_abs(T.du) == 0.0 && max_abs(T.dw) == 0.0;
    for (int c = 0; c < 2 && zero_op; ++c)
        zero_op = T.Ka[c].size() == 0 || (T.Ka[c].cwiseAbs().maxCoeff() == 0.0 && T.Kb[c].cwiseAbs().maxCoeff() == 0.0);
    if (zero_op) {
        rep.sigma_min_estimate = 1;
        rep.norm_estimate = 1;
        return {unpack_complex(L, CVec(m, cplx{0, 0})), rep};
    }
    const auto& opt = T.ctx->opt;
    bool dense = opt.mode == SolverMode::Dense || (opt.mode == SolverMode::Auto && 2 * m <= opt.dense_limit);
    CVec x;
    if (dense) {
        auto M = assemble_dense(op, m);
        auto ds = dense_solve(M, b);
        x = ds.x;
        rep.residual = ds.residual;
        rep.sigma_min_estimate = ds.sigma_min;
        rep.norm_estimate = ds.norm_est;
    } else {
        auto r = gmres(op, m, b, tol, 80, 800);
        x = r.x;
        rep.residual = r.residual;
        rep.iterations = r.iterations;
        rep.sigma_min_estimate = r.sigma_hess;
        if (opt.want_sigma) {
            auto se = estimate_sigma(op, m, 3, std::max(tol, 1e-8));
            rep.sigma_min_estimate = se.sigma_min;
            rep.norm_estimate = se.norm_est;
        } else {
            CVec p = random_cvec(m, 7), y;
            double nrm = 0;
            for (int it = 0; it < 4; ++it) {
                double np = norm2(p);
                for (auto& v : p) v /= np;
                op(p, y);
                nrm = std::max(nrm, norm2(y));
                p = y;
            }
            rep.norm_estimate = nrm;
        }
        if (!r.converged) rep.condition_flag = true;
    }
    if (rep.sigma_min_estimate >= 0 && rep.sigma_min_estimate <= opt.near_singular * std::max(rep.norm_estimate, 1.0))
        rep.condition_flag = true;
    if (!(rep.residual <= std::max(tol, 1e-14) * 10) && !dense) rep.condition_flag = true;
    return {unpack_complex(L, x), rep};
}

BElement neumann_w(const TOperator& T, int terms)
{
    const auto& L = T.layout();
    BElement term = T.apply_identity();
    auto neg = [&](BElement& e) {
        auto v = pack_complex(L, e);
        for (auto& x : v) x = -x;
        e = unpack_complex(L, v);
    };
    neg(term);
    auto sum = pack_complex(L, term);
    for (int m = 1; m <= terms; ++m) {
        term = T.apply(term);
        neg(term);
        auto v = pack_complex(L, term);
        for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
    }
    return unpack_complex(L, sum);
}

namespace {

struct RowValue {
    cplx off, diag;
    SolveReport rep;
    BElement v;
};

RowValue solve_row(std::shared_ptr<const InverseContext> ctx, cplx z, int row)
{
    auto T = build_T(ctx, z, row);
    auto [w, rep] = solve_w(T, ctx->opt.tol);
    const auto& L = ctx->layout;
    w.ch[0].exterior = exterior_values(L, w.ch[0]);
    w.ch[0].tail = 0;
    for (auto& x : w.ch[0].exterior) x += 1.0;
    if (!w.ch[0].interior.empty()) w.ch[0].interior[0] += 1.0;
    CVec fu = w.ch[0].exterior, fw = exterior_values(L, w.ch[1]);
    const double da = L.kgrid.cell_area();
    cplx mw{0, 0}, mu{0, 0};
    for (std::size_t p = 0; p < L.ext.size(); ++p) {
        std::size_t i = L.ext[p];
        mw -= T.dw[i] * std::conj(fu[p]);
        mu -= T.du[i] * std::conj(fw[p]);
    }
    mw *= da / pi;
    mu *= da / pi;
    if (!ctx->disk.empty()) {
        auto s = ctx->disk.boundary_nodes();
        const auto& cu = w.ch[0].interior;
        const auto& cw = w.ch[1].interior;
        Eigen::Map<const Eigen::VectorXcd> u(cu.data(), cu.size()), wv(cw.data(), cw.size());
        const double sg = ctx->opt.recon_diag_sign;
        Eigen::VectorXcd ju = T.Ka[0] * wv.conjugate() - sg * (T.Kb[0] * u);
        Eigen::VectorXcd jw = T.Ka[1] * u.conjugate() - sg * (T.Kb[1] * wv);
        cplx su{0, 0}, sw{0, 0};
        const int nb = ctx->disk.n_boundary;
        for (int j = 0; j < nb; ++j) {
            su += ju[j] * s[j];
            sw += jw[j] * s[j];
        }
        mu += su / double(nb);
        mw += sw / double(nb);
        // resolution diagnostic: spectral energy of J near the Nyquist band
        CVec F = dft(CVec(jw.data(), jw.data() + nb));
        double tot = 0, hi = 0;
        for (int m = 0; m < nb; ++m) {
            int mm = m <= nb / 2 ? m : nb - m;
            tot += std::norm(F[m]);
            if (mm >= nb / 2 - 1) hi += std::norm(F[m]);
        }
        rep.negative_mode_energy = tot > 0 ? hi / tot : 0;
    }
    return {mw, mu, rep, std::move(w)};
}

}  // namespace

PointValue reconstruct_point(std::shared_ptr<const InverseContext> ctx, cplx z)
{
    PointValue pv;
    auto r0 = solve_row(ctx, z, 0);
    pv.q = -I / 2.0 * r0.off;
    pv.m_diag = r0.diag;
    pv.report = r0.rep;
    pv.v = std::move(r0.v);
    if (ctx->opt.full_matrix) {
        auto r1 = solve_row(ctx, z, 1);
        pv.q_row2 = -I / 2.0 * r1.off;
        pv.m_diag_row2 = r1.diag;
        pv.report.condition_flag = pv.report.condition_flag || r1.rep.condition_flag;
        pv.report.residual = std::max(pv.report.residual, r1.rep.residual);
    }
    return pv;
}

std::vector<PointValue> reconstruct_points(const ScatteringData& data, const std::vector<cplx>& zs, double t,
                                           const DiskSpec& disk, const InverseOptions& opt)
{
    auto ctx = make_context(data, t, disk, opt);
    std::vector<PointValue> out(zs.size());
    parallel_for(zs.size(), thread_count(opt.threads), [&](std::size_t i) { out[i] = reconstruct_point(ctx, zs[i]); });
    return out;
}

Reconstruction reconstruct(const ScatteringData& data, const ComplexGrid& zgrid, double t, const DiskSpec& disk,
                           const InverseOptions& opt)
{
    auto ctx = make_context(data, t, disk, opt);
    Reconstruction r;
    r.q = make_field(zgrid);
    r.phi = make_field(zgrid);
    r.mask.assign(zgrid.size(), 0);
    r.reports.resize(zgrid.size());
    CVec md(zgrid.size());
    parallel_for(zgrid.size(), thread_count(opt.threads), [&](std::size_t i) {
        auto pv = reconstruct_point(ctx, zgrid.node(i));
        r.q.values[i] = pv.q;
        md[i] = pv.m_diag;
        r.reports[i] = pv.report;
        r.mask[i] = pv.report.condition_flag ? 1 : 0;
    });
    r.m_diag = {zgrid, md};
    // the field tends to c/conj(z); that tail is removed with a smooth profile before
    // the spectral dbar and its derivative is added back in closed form
    const int n = zgrid.n;
    cplx c{0, 0};
    int ring = 0;
    for (int row = 0; row < n; ++row)
        for (int col = 0; col < n; ++col) {
            if (row != 0 && col != 0 && row != n - 1 && col != n - 1) continue;
            std::size_t i = static_cast<std::size_t>(row) * n + col;
            if (r.mask[i]) continue;
            c += md[i] * std::conj(zgrid.node(i));
            ++ring;
        }
    if (ring > 0) c /= double(ring);
    const double rho2 = std::pow(zgrid.extent / 4, 2);
    CVec rem(md.size()), dg(md.size());
    for (std::size_t i = 0; i < md.size(); ++i) {
        cplx z = zgrid.node(i);
        double e = std::exp(-std::norm(z) / rho2);
        rem[i] = md[i] - c * (1 - e) / std::conj(z);
        dg[i] = z * e / (rho2 * std::conj(z)) - (1 - e) / (std::conj(z) * std::conj(z));
    }
    auto d = dbar(zgrid, rem);
    for (std::size_t i = 0; i < d.size(); ++i) r.phi.values[i] = I / 2.0 * (d[i] + c * dg[i]);
    return r;
}

std::vector<SweepEntry> amplitude_sweep(const ComplexField& q0, const std::vector<double>& a_list, cplx z, double t,
                                        const ComplexGrid& kgrid, const DiskSpec& disk, const ForwardOptions& fopt,
                                        const InverseOptions& iopt)
{
    std::vector<SweepEntry> out;
    for (double a : a_list) {
        if (!(a > 0 && a <= 1)) throw std::invalid_argument("amplitude_sweep: a must lie in (0,1]");
        ComplexField q = q0;
        for (auto& v : q.values) v *= a;
        auto data = scattering_diag(q, kgrid, disk.empty() ? 0.0 : disk.radius, fopt);
        if (!disk.empty()) scattering_boundary(q, disk, data, fopt);
        data.amplitude = a;
        InverseOptions o = iopt;
        o.want_sigma = true;
        auto ctx = make_context(data, t, disk, o);
        auto T = build_T(ctx, z, 0);
        out.push_back({a, solve_w(T, o.tol).second});
    }
    return out;
}

}  // namespace dsii
