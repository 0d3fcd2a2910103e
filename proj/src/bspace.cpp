#include "dsii/bspace.hpp"

#include <algorithm>
#include <cmath>

namespace dsii {

namespace {
double bump(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace

double beta(cplx k, double A)
{
    if (A <= 0) A = 1.0;
    double t = (std::abs(k) - 1.5 * A) / A;
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    double a = bump(t), b = bump(1 - t);
    return a / (a + b);
}

BLayout make_layout(const ComplexGrid& kgrid, double A, int modes)
{
    BLayout L;
    L.kgrid = kgrid;
    L.radius = A;
    L.modes = A > 0 ? modes : 0;
    auto w = exterior_weights(kgrid, A);
    const double edge = kgrid.extent - 2 * kgrid.spacing;
    for (std::size_t i = 0; i < kgrid.size(); ++i) {
        cplx k = kgrid.node(i);
        if (A > 0 && std::abs(k) <= A) continue;
        if (std::max(std::abs(k.real()), std::abs(k.imag())) > edge) L.annulus.push_back(L.ext.size());
        L.ext.push_back(i);
        L.weight.push_back(w[i]);
        double b = beta(k, A) / std::abs(k);
        L.tail_norm2 += b * b * kgrid.cell_area();
    }
    return L;
}

BElement zero_element(const BLayout& L)
{
    BElement e;
    for (auto& c : e.ch) {
        c.exterior.assign(L.ext.size(), cplx{0, 0});
        c.interior.assign(L.with_interior() ? L.modes + 1 : 0, cplx{0, 0});
        c.tail = 0;
    }
    return e;
}

std::size_t packed_dim(const BLayout& L)
{
    std::size_t per = L.ext.size() + (L.with_interior() ? L.modes + 1 : 0) + 1;
    return 2 * 2 * per;
}

CVec pack_complex(const BLayout& L, const BElement& e)
{
    CVec v;
    v.reserve(packed_dim(L) / 2);
    for (auto& c : e.ch) {
        if (c.exterior.size() != L.ext.size()) throw std::invalid_argument("pack: exterior size mismatch");
        v.insert(v.end(), c.exterior.begin(), c.exterior.end());
        v.insert(v.end(), c.interior.begin(), c.interior.end());
        v.push_back(c.tail);
    }
    if (2 * v.size() != packed_dim(L)) throw std::invalid_argument("pack: interior size mismatch");
    return v;
}

BElement unpack_complex(const BLayout& L, const CVec& v)
{
    if (2 * v.size() != packed_dim(L)) throw std::invalid_argument("unpack: dimension mismatch");
    BElement e;
    std::size_t p = 0;
    const std::size_t ni = L.with_interior() ? L.modes + 1 : 0;
    for (auto& c : e.ch) {
        c.exterior.assign(v.begin() + p, v.begin() + p + L.ext.size());
        p += L.ext.size();
        c.interior.assign(v.begin() + p, v.begin() + p + ni);
        p += ni;
        c.tail = v[p++];
    }
    return e;
}

std::vector<double> pack(const BLayout& L, const BElement& e)
{
    auto c = pack_complex(L, e);
    std::vector<double> r(2 * c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        r[2 * i] = c[i].real();
        r[2 * i + 1] = c[i].imag();
    }
    return r;
}

BElement unpack(const BLayout& L, const std::vector<double>& v)
{
    if (v.size() % 2) throw std::invalid_argument("unpack: odd dimension");
    CVec c(v.size() / 2);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = {v[2 * i], v[2 * i + 1]};
    return unpack_complex(L, c);
}

double norm(const BLayout& L, const BElement& e)
{
    double s = 0;
    const double da = L.kgrid.cell_area();
    for (auto& c : e.ch) {
        for (auto& x : c.exterior) s += std::norm(x) * da;
        double an = 1;
        for (auto& x : c.interior) {
            s += an * std::norm(x);
            an *= L.radius * L.radius;
        }
        s += std::norm(c.tail) * L.tail_norm2;
    }
    return std::sqrt(s);
}

CVec exterior_values(const BLayout& L, const BChannel& c)
{
    CVec v = c.exterior;
    if (c.tail != cplx{0, 0})
        for (std::size_t p = 0; p < L.ext.size(); ++p) {
            cplx k = L.kgrid.node(L.ext[p]);
            v[p] += c.tail * beta(k, L.radius) / k;
        }
    return v;
}

BChannel split_tail(const BLayout& L, const CVec& values, CVec interior)
{
    BChannel c;
    cplx num{0, 0};
    double den = 0;
    for (auto p : L.annulus) {
        cplx k = L.kgrid.node(L.ext[p]);
        cplx b = beta(k, L.radius) / k;
        num += std::conj(b) * values[p];
        den += std::norm(b);
    }
    c.tail = den > 0 ? num / den : cplx{0, 0};
    c.exterior = values;
    if (c.tail != cplx{0, 0})
        for (std::size_t p = 0; p < L.ext.size(); ++p) {
            cplx k = L.kgrid.node(L.ext[p]);
            c.exterior[p] -= c.tail * beta(k, L.radius) / k;
        }
    c.interior = std::move(interior);
    return c;
}

cplx eval_interior(const BChannel& c, cplx k)
{
    cplx s{0, 0};
    for (std::size_t n = c.interior.size(); n-- > 0;) s = s * k + c.interior[n];
    return s;
}

}  // namespace dsii
