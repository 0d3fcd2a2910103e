#include "dsii/evolution.hpp"

#include <cmath>

namespace dsii {

namespace {

cplx guarded_exp(cplx e)
{
    if (std::abs(e.real()) > 700) throw OverflowRisk("time factor exponent exceeds 700");
    return std::exp(e);
}

}  // namespace

cplx offdiag_factor(cplx s, cplx k, double t)
{
    return guarded_exp(-t * (k * k - std::conj(s) * std::conj(s)) / 2.0);
}

cplx diag_factor(cplx s, cplx k, double t)
{
    return guarded_exp(-t * (std::conj(k) * std::conj(k) - std::conj(s) * std::conj(s)) / 2.0);
}

ScatteringData evolve_h(const ScatteringData& data, double t)
{
    ScatteringData out = data;
    out.time = data.time + t;
    if (t == 0) return out;
    for (std::size_t i = 0; i < data.diag[0].size(); ++i) {
        cplx k = data.kgrid.node(i);
        cplx fo = offdiag_factor(k, k, t), fd = diag_factor(k, k, t);
        out.diag[E11][i] *= fd;
        out.diag[E22][i] *= fd;
        out.diag[E12][i] *= fo;
        out.diag[E21][i] *= fo;
    }
    if (data.has_boundary()) {
        const int nb = data.n_boundary;
        for (int i = 0; i < nb; ++i) {
            cplx sp = std::polar(data.radius, 2.0 * pi * i / nb);
            for (int j = 0; j < nb; ++j) {
                cplx s = std::polar(data.radius, 2.0 * pi * j / nb);
                std::size_t idx = static_cast<std::size_t>(i) * nb + j;
                cplx fo = offdiag_factor(sp, s, t), fd = diag_factor(sp, s, t);
                out.boundary[E11][idx] *= fd;
                out.boundary[E22][idx] *= fd;
                out.boundary[E12][idx] *= fo;
                out.boundary[E21][idx] *= fo;
            }
        }
    }
    return out;
}

}  // namespace dsii
