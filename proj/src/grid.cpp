#include "dsii/grid.hpp"
#include "dsii/fft.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace dsii {

ComplexGrid make_grid(double extent, int n)
{
    if (!(extent > 0) || !std::isfinite(extent)) throw std::invalid_argument("grid extent must be positive");
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("grid size must be a power of two >= 2");
    ComplexGrid g;
    g.n = n;
    g.extent = extent;
    g.spacing = 2.0 * extent / n;
    return g;
}

ComplexField make_field(const ComplexGrid& g)
{
    return {g, CVec(g.size(), cplx{0, 0})};
}

namespace {

// spectrum of the truncated kernel 1/(pi z), |z| < Lambda, on the 2n padded grid
struct CauchyKernel {
    CVec khat;
};

std::unique_ptr<CauchyKernel> build_kernel(const ComplexGrid& g)
{
    const int n = g.n, n4 = 4 * n, n2 = 2 * n;
    const double h = g.spacing;
    const double lam = 2.0 * std::sqrt(2.0) * g.extent;
    CVec big(static_cast<std::size_t>(n4) * n4);
    for (int r = 0; r < n4; ++r) {
        double x2 = fft_freq(r, n4, h);
        for (int c = 0; c < n4; ++c) {
            double x1 = fft_freq(c, n4, h);
            double rho = std::hypot(x1, x2);
            cplx v{0, 0};
            if (rho > 0) v = 2.0 * (1.0 - std::cyl_bessel_j(0.0, lam * rho)) / cplx(-x2, x1);
            big[static_cast<std::size_t>(r) * n4 + c] = v;
        }
    }
    fft2_for(n4).backward(big.data());
    const double inv = 1.0 / (static_cast<double>(n4) * n4);
    auto kernel = std::make_unique<CauchyKernel>();
    kernel->khat.assign(static_cast<std::size_t>(n2) * n2, cplx{0, 0});
    auto wrap = [&](int a) { return a < n ? a : a + 2 * n; };
    for (int r = 0; r < n2; ++r)
        for (int c = 0; c < n2; ++c)
            kernel->khat[static_cast<std::size_t>(r) * n2 + c] =
                big[static_cast<std::size_t>(wrap(r)) * n4 + wrap(c)] * inv;
    fft2_for(n2).forward(kernel->khat.data());
    return kernel;
}

const CauchyKernel& kernel_for(const ComplexGrid& g)
{
    static std::map<std::pair<int, double>, std::unique_ptr<CauchyKernel>> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lk(m);
    auto key = std::make_pair(g.n, g.extent);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_kernel(g)).first;
    return *it->second;
}

CVec spectral_multiply(const ComplexGrid& g, const CVec& f, double s1, double s2, bool second_order)
{
    const int n = g.n;
    CVec w = f;
    const auto& fft = fft2_for(n);
    fft.forward(w.data());
    const double inv = 1.0 / static_cast<double>(g.size());
    for (int r = 0; r < n; ++r) {
        double x2 = fft_freq(r, n, g.spacing);
        for (int c = 0; c < n; ++c) {
            double x1 = fft_freq(c, n, g.spacing);
            cplx m;
            if (r == n / 2 || c == n / 2)
                m = 0;
            else if (second_order)
                m = -(x1 * x1 + x2 * x2);
            else
                m = 0.5 * cplx(-s2 * x2, s1 * x1);
            w[static_cast<std::size_t>(r) * n + c] *= m * inv;
        }
    }
    fft.backward(w.data());
    return w;
}

}  // namespace

CVec cauchy_apply(const ComplexGrid& g, const CVec& f)
{
    if (f.size() != g.size()) throw std::invalid_argument("cauchy_apply: shape mismatch");
    const int n = g.n, n2 = 2 * n;
    const auto& k = kernel_for(g);
    CVec pad(static_cast<std::size_t>(n2) * n2, cplx{0, 0});
    for (int r = 0; r < n; ++r)
        std::copy(f.begin() + static_cast<std::ptrdiff_t>(r) * n, f.begin() + static_cast<std::ptrdiff_t>(r + 1) * n,
                  pad.begin() + static_cast<std::ptrdiff_t>(r) * n2);
    const auto& fft = fft2_for(n2);
    fft.forward(pad.data());
    const double inv = 1.0 / (static_cast<double>(n2) * n2);
    for (std::size_t i = 0; i < pad.size(); ++i) pad[i] *= k.khat[i] * inv;
    fft.backward(pad.data());
    CVec out(g.size());
    for (int r = 0; r < n; ++r)
        std::copy(pad.begin() + static_cast<std::ptrdiff_t>(r) * n2, pad.begin() + static_cast<std::ptrdiff_t>(r) * n2 + n,
                  out.begin() + static_cast<std::ptrdiff_t>(r) * n);
    return out;
}

ComplexField cauchy_apply(const ComplexField& f) { return {f.grid, cauchy_apply(f.grid, f.values)}; }

// (i xi1 - xi2)/2 -> s1 = 1, s2 = 1; (i xi1 + xi2)/2 -> s1 = 1, s2 = -1
CVec dbar(const ComplexGrid& g, const CVec& f) { return spectral_multiply(g, f, 1.0, 1.0, false); }
CVec del(const ComplexGrid& g, const CVec& f) { return spectral_multiply(g, f, 1.0, -1.0, false); }
CVec laplacian(const ComplexGrid& g, const CVec& f) { return spectral_multiply(g, f, 0, 0, true); }
ComplexField dbar(const ComplexField& f) { return {f.grid, dbar(f.grid, f.values)}; }
ComplexField del(const ComplexField& f) { return {f.grid, del(f.grid, f.values)}; }

std::vector<cplx> DiskSpec::boundary_nodes() const
{
    std::vector<cplx> s(static_cast<std::size_t>(std::max(0, n_boundary)));
    for (int j = 0; j < n_boundary; ++j) s[j] = std::polar(radius, 2.0 * pi * j / n_boundary);
    return s;
}

DiskSpec make_disk(double radius, int n_boundary, K0Policy policy, double k0_angle)
{
    if (radius < 0) throw std::invalid_argument("disk radius must be nonnegative");
    if (radius > 0 && (n_boundary < 4 || n_boundary % 2)) throw std::invalid_argument("n_boundary must be even and >= 4");
    DiskSpec d;
    d.radius = radius;
    d.n_boundary = radius > 0 ? n_boundary : 0;
    d.policy = policy;
    d.k0_fixed = std::polar(radius, k0_angle);
    return d;
}

K0Choice select_k0(const DiskSpec& disk, cplx z)
{
    if (disk.policy == K0Policy::FixedPoint) return {disk.k0_fixed, false};
    if (z == cplx{0, 0}) return {cplx{0, -disk.radius}, true};
    return {cplx{0, -disk.radius} * std::polar(1.0, std::arg(z)), false};
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m)
{
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    std::vector<double> x(m), w(m);
    for (int i = 0; i < m; ++i) {
        double t = std::cos(pi * (i + 0.75) / (m + 0.5));
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1, p1 = t;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = m * (t * p1 - p0) / (t * t - 1);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) {
                p0 = 1, p1 = t;
                for (int k = 2; k <= m; ++k) {
                    double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m * (t * p1 - p0) / (t * t - 1);
                x[m - 1 - i] = t;
                w[m - 1 - i] = 2.0 / ((1 - t * t) * dp * dp);
                break;
            }
        }
    }
    cache[m] = {x, w};
    return {x, w};
}

void arc_angles(double th0, double th1, int n_boundary, std::vector<double>& th, std::vector<double>& w)
{
    th.clear();
    w.clear();
    double span = std::fmod(th1 - th0, 2 * pi);
    if (span < 0) span += 2 * pi;
    if (span < 1e-14 || span > 2 * pi - 1e-14) return;
    int m = std::max(8, static_cast<int>(std::ceil(2.0 * n_boundary * span / (2 * pi) - 1e-9)));
    auto [gx, gw] = gauss_legendre(m);
    th.resize(m);
    w.resize(m);
    for (int i = 0; i < m; ++i) {
        th[i] = th0 + span * (gx[i] + 1) / 2;
        w[i] = gw[i] * span / 2;
    }
}

std::vector<ArcNode> arc_quadrature(const DiskSpec& disk, cplx k0, cplx s)
{
    std::vector<double> th, w;
    arc_angles(std::arg(k0), std::arg(s), disk.n_boundary, th, w);
    std::vector<ArcNode> out(th.size());
    for (std::size_t i = 0; i < th.size(); ++i) {
        cplx sp = std::polar(disk.radius, th[i]);
        // d conj(s') = -i conj(s') d theta
        out[i] = {sp, -I * std::conj(sp) * w[i]};
    }
    return out;
}

namespace {

// moments of ((x-xc)/h)^a ((y-yc)/h)^b over cell ∩ {|k|<A}, in units of h^2
std::vector<double> disk_cell_moments(double xc, double yc, double h, double A,
                                      const std::vector<std::pair<int, int>>& pw)
{
    static const auto gl = gauss_legendre(24);
    double x0 = xc - h / 2, x1 = xc + h / 2, y0 = yc - h / 2, y1 = yc + h / 2;
    std::vector<double> out(pw.size(), 0.0);
    double lo = std::max(x0, -A), hi = std::min(x1, A);
    if (lo >= hi) return out;
    std::vector<double> bps{lo, hi};
    for (double yy : {y0, y1}) {
        if (std::abs(yy) < A) {
            double xb = std::sqrt(A * A - yy * yy);
            for (double c : {-xb, xb})
                if (c > lo && c < hi) bps.push_back(c);
        }
    }
    std::sort(bps.begin(), bps.end());
    for (std::size_t s = 0; s + 1 < bps.size(); ++s) {
        double u0 = std::asin(std::clamp(bps[s] / A, -1.0, 1.0));
        double u1 = std::asin(std::clamp(bps[s + 1] / A, -1.0, 1.0));
        for (std::size_t g = 0; g < gl.first.size(); ++g) {
            double u = (u0 + u1) / 2 + (u1 - u0) / 2 * gl.first[g];
            double wu = gl.second[g] * (u1 - u0) / 2;
            double x = A * std::sin(u), c = A * std::cos(u);
            double ylo = std::max(y0, -c), yhi = std::min(y1, c);
            if (yhi <= ylo) continue;
            double X = (x - xc) / h, Ylo = (ylo - yc) / h, Yhi = (yhi - yc) / h;
            for (std::size_t t = 0; t < pw.size(); ++t) {
                auto [a, b] = pw[t];
                double iy = (std::pow(Yhi, b + 1) - std::pow(Ylo, b + 1)) / (b + 1);
                out[t] += std::pow(X, a) * iy * c * wu / h;
            }
        }
    }
    return out;
}

}  // namespace

std::vector<double> exterior_weights(const ComplexGrid& g, double A)
{
    const std::size_t N = g.size();
    std::vector<double> w(N, 1.0);
    if (A <= 0) return w;
    const double h = g.spacing;
    std::vector<std::size_t> ext;
    for (std::size_t i = 0; i < N; ++i) {
        if (std::abs(g.node(i)) > A)
            ext.push_back(i);
        else
            w[i] = 0.0;
    }
    std::vector<std::pair<int, int>> pw;
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; b <= 2 - a; ++b) pw.emplace_back(a, b);
    auto cellmom = [](int p) { return (std::pow(0.5, p + 1) - std::pow(-0.5, p + 1)) / (p + 1); };
    const int nfit = 12;
    for (std::size_t i = 0; i < N; ++i) {
        cplx K = g.node(i);
        if (std::abs(std::abs(K) - A) >= 0.75 * h) continue;
        auto dm = disk_cell_moments(K.real(), K.imag(), h, A, pw);
        std::vector<double> mom(pw.size());
        for (std::size_t t = 0; t < pw.size(); ++t) mom[t] = cellmom(pw[t].first) * cellmom(pw[t].second) - dm[t];
        if (std::abs(K) > A) w[i] -= 1.0;
        if (std::abs(mom[0]) < 1e-15) continue;
        std::vector<std::size_t> idx(ext.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + nfit, idx.end(), [&](std::size_t a, std::size_t b) {
            double da = std::abs(g.node(ext[a]) - K), db = std::abs(g.node(ext[b]) - K);
            return da < db || (da == db && ext[a] < ext[b]);
        });
        Eigen::MatrixXd V(pw.size(), nfit);
        for (int c = 0; c < nfit; ++c) {
            cplx d = (g.node(ext[idx[c]]) - K) / h;
            for (std::size_t t = 0; t < pw.size(); ++t)
                V(t, c) = std::pow(d.real(), pw[t].first) * std::pow(d.imag(), pw[t].second);
        }
        Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(mom.data(), mom.size());
        Eigen::VectorXd alpha = V.transpose() * (V * V.transpose()).ldlt().solve(m);
        for (int c = 0; c < nfit; ++c) w[ext[idx[c]]] += alpha[c];
    }
    return w;
}

}  // namespace dsii
