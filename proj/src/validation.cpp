#include "dsii/validation.hpp"
#include "dsii/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsii {

DsiiResidual dsii_residual(const ComplexField& q_prev, const ComplexField& q_mid, const ComplexField& q_next,
                           const ComplexField& phi_mid, double dt, bool nonlinear)
{
    const auto& g = q_mid.grid;
    const int n = g.n;
    // q_xy = -i (dbar^2 - del^2) q
    auto dd = dbar(g, dbar(g, q_mid.values));
    auto ee = del(g, del(g, q_mid.values));
    CVec mod(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) mod[i] = std::norm(q_mid.values[i]);
    auto dmod = dbar(g, mod);
    auto dphi = del(g, phi_mid.values);
    DsiiResidual r;
    const int m = n / 8;
    for (int row = m; row < n - m; ++row)
        for (int col = m; col < n - m; ++col) {
            std::size_t i = static_cast<std::size_t>(row) * n + col;
            cplx qt = (q_next.values[i] - q_prev.values[i]) / (2 * dt);
            cplx qxy = -I * (dd[i] - ee[i]);
            cplx res = qt - 2.0 * I * qxy;
            if (nonlinear) {
                cplx p = phi_mid.values[i];
                res += 4.0 * q_mid.values[i] * (std::conj(p) - p);
                r.constraint = std::max(r.constraint, std::abs(dphi[i] - dmod[i]));
            }
            r.evolution = std::max(r.evolution, std::abs(res));
            r.scale = std::max(r.scale, std::abs(qt));
        }
    return r;
}

DualityResult duality_check(const ComplexField& q_t, const ScatteringData& data_t, const ForwardOptions& opt, int stride)
{
    DualityResult r;
    std::vector<cplx> ks;
    std::vector<std::size_t> idx;
    double hmax = 0;
    const auto& g = data_t.kgrid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool ok = data_t.valid.empty() || data_t.valid[i];
        if (!ok) continue;
        for (int e = 0; e < 4; ++e) hmax = std::max(hmax, std::abs(data_t.diag[e][i]));
        int row = static_cast<int>(i) / g.n, col = static_cast<int>(i) % g.n;
        if (row % stride || col % stride) continue;
        ks.push_back(g.node(i));
        idx.push_back(i);
    }
    auto hh = scattering_at(q_t, ks, opt);
    double dev = 0;
    for (std::size_t p = 0; p < ks.size(); ++p)
        for (int e = 0; e < 4; ++e) dev = std::max(dev, std::abs(hh[p][e] - data_t.diag[e][idx[p]]));
    r.samples = ks.size();
    r.diag = hmax > 0 ? dev / hmax : dev;
    if (data_t.has_boundary()) {
        ScatteringData b;
        auto disk = make_disk(data_t.radius, data_t.n_boundary);
        scattering_boundary(q_t, disk, b, opt);
        double bmax = 0, bdev = 0;
        for (int e = 0; e < 4; ++e)
            for (std::size_t i = 0; i < b.boundary[e].size(); ++i) {
                bmax = std::max(bmax, std::abs(data_t.boundary[e][i]));
                bdev = std::max(bdev, std::abs(b.boundary[e][i] - data_t.boundary[e][i]));
            }
        r.boundary = bmax > 0 ? bdev / bmax : bdev;
    }
    return r;
}

double symmetry_check(const ScatteringData& d)
{
    double dev = 0, mx = 0;
    auto scan = [&](const Matrix4& h, const std::vector<std::uint8_t>* valid) {
        for (std::size_t i = 0; i < h[E11].size(); ++i) {
            if (valid && !valid->empty() && !(*valid)[i]) continue;
            dev = std::max({dev, std::abs(h[E11][i] - h[E22][i]), std::abs(h[E12][i] + h[E21][i])});
            for (int e = 0; e < 4; ++e) mx = std::max(mx, std::abs(h[e][i]));
        }
    };
    scan(d.diag, &d.valid);
    if (d.has_boundary()) scan(d.boundary, nullptr);
    return mx > 0 ? dev / mx : dev;
}

double symmetry_check(const PointValue& p)
{
    double s = std::max(std::abs(p.q), std::abs(p.m_diag));
    double dev = std::max(std::abs(p.q_row2 + p.q), std::abs(p.m_diag_row2 - p.m_diag));
    return s > 0 ? dev / s : dev;
}

DbarResidual dbar_equation_residual(const ScatteringData& data, cplx z, double t, const DiskSpec& disk,
                                    const InverseOptions& opt)
{
    auto ctx = make_context(data, t, disk, opt);
    auto pv = reconstruct_point(ctx, z);
    const auto& L = ctx->layout;
    const auto& g = L.kgrid;
    const int n = g.n;
    const double h = g.spacing;
    // full-grid views of v11, v12 and the evolved off-diagonal data
    CVec v11(g.size(), cplx{0, 0}), v12(g.size(), cplx{0, 0}), h12(g.size()), h21(g.size());
    std::vector<std::uint8_t> interior(g.size(), 0);
    auto vals12 = exterior_values(L, pv.v.ch[1]);
    for (std::size_t p = 0; p < L.ext.size(); ++p) {
        std::size_t i = L.ext[p];
        v11[i] = pv.v.ch[0].exterior[p];
        v12[i] = vals12[p];
        h12[i] = ctx->H[E12][p];
        h21[i] = ctx->H[E21][p];
        interior[i] = L.weight[p] == 1.0;
    }
    DbarResidual r;
    r.spacing = h;
    double dev = 0, mx = 0;
    const double keep = disk.empty() ? 0.0 : disk.radius + 2 * h;
    for (int row = 2; row < n - 2; ++row)
        for (int col = 2; col < n - 2; ++col) {
            std::size_t i = static_cast<std::size_t>(row) * n + col;
            cplx k = g.node(i);
            if (std::abs(k) <= keep) continue;
            std::size_t nb[4] = {i - 1, i + 1, i - n, i + n};
            bool ok = interior[i] != 0;
            for (auto j : nb) ok = ok && interior[j] != 0;
            if (!ok) continue;
            auto fd = [&](const CVec& f) {
                cplx dx = (f[i + 1] - f[i - 1]) / (2 * h), dy = (f[i + n] - f[i - n]) / (2 * h);
                return (dx + I * dy) / 2.0;
            };
            cplx e = std::polar(1.0, (std::conj(k) * z).real());
            cplx r12 = kappa * e * h12[i] * std::conj(v11[i]);
            cplx r11 = kappa * e * h21[i] * std::conj(v12[i]);
            dev = std::max({dev, std::abs(fd(v12) - r12), std::abs(fd(v11) - r11)});
            mx = std::max({mx, std::abs(r12), std::abs(r11)});
            ++r.stencils;
        }
    r.relative = mx > 0 ? dev / mx : dev;
    return r;
}

std::size_t BlowupMap::flag_count() const
{
    return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), std::uint8_t{1}));
}

double BlowupMap::time(int it) const
{
    return box.nt > 1 ? box.t_min + (box.t_max - box.t_min) * it / (box.nt - 1) : box.t_min;
}

cplx BlowupMap::node(int ix, int iy) const
{
    double s = box.nz > 1 ? 2 * box.z_extent / (box.nz - 1) : 0;
    return {-box.z_extent + ix * s, -box.z_extent + iy * s};
}

BlowupMap blowup_scan(const ScatteringData& data, const BlowupBox& box, const DiskSpec& disk, double tau,
                      const InverseOptions& opt)
{
    if (box.nz < 1 || box.nt < 1) throw std::invalid_argument("blowup_scan: empty box");
    BlowupMap map;
    map.box = box;
    map.tau = tau;
    const std::size_t per = static_cast<std::size_t>(box.nz) * box.nz;
    map.sigma.assign(per * box.nt, 0);
    map.flagged.assign(per * box.nt, 0);
    map.components.assign(box.nt, 0);
    InverseOptions o = opt;
    o.want_sigma = true;
    for (int it = 0; it < box.nt; ++it) {
        auto ctx = make_context(data, map.time(it), disk, o);
        parallel_for(per, thread_count(o.threads), [&](std::size_t c) {
            int ix = static_cast<int>(c % box.nz), iy = static_cast<int>(c / box.nz);
            auto T = build_T(ctx, map.node(ix, iy), 0);
            SolveReport rep;
            try {
                rep = solve_w(T, o.tol).second;
            } catch (const Error&) {
                rep.condition_flag = true;
            }
            double s = rep.norm_estimate > 0 ? rep.sigma_min_estimate / rep.norm_estimate : 0;
            map.sigma[it * per + c] = s;
            map.flagged[it * per + c] = (rep.condition_flag || s <= tau) ? 1 : 0;
        });
        // 4-neighbour labelling on the slice
        std::vector<int> label(per, 0);
        int count = 0;
        for (std::size_t c = 0; c < per; ++c) {
            if (!map.flagged[it * per + c] || label[c]) continue;
            ++count;
            std::vector<std::size_t> stack{c};
            label[c] = count;
            while (!stack.empty()) {
                std::size_t u = stack.back();
                stack.pop_back();
                int ux = static_cast<int>(u % box.nz), uy = static_cast<int>(u / box.nz);
                if (ux == 0 || uy == 0 || ux == box.nz - 1 || uy == box.nz - 1) map.inconclusive = true;
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int vx = ux + dx[d], vy = uy + dy[d];
                    if (vx < 0 || vy < 0 || vx >= box.nz || vy >= box.nz) continue;
                    std::size_t v = static_cast<std::size_t>(vy) * box.nz + vx;
                    if (map.flagged[it * per + v] && !label[v]) {
                        label[v] = count;
                        stack.push_back(v);
                    }
                }
            }
        }
        map.components[it] = count;
    }
    return map;
}

}  // namespace dsii
