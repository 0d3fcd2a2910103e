#include "dsii/splitstep.hpp"
#include "dsii/fft.hpp"

#include <cmath>

namespace dsii {

namespace {

// pointwise unimodular factor exp(-4 (conj(phi) - phi) tau)
void nonlinear_substep(ComplexField& q, double tau)
{
    auto phi = phi_from_q(q);
    for (std::size_t i = 0; i < q.values.size(); ++i) {
        double im = phi.values[i].imag();
        // conj(phi) - phi = -2i Im(phi)
        q.values[i] *= std::polar(1.0, 8.0 * im * tau);
    }
}

void linear_substep(ComplexField& q, double dt)
{
    const auto& g = q.grid;
    const int n = g.n;
    const auto& fft = fft2_for(n);
    fft.forward(q.values.data());
    const double inv = 1.0 / static_cast<double>(g.size());
    for (int r = 0; r < n; ++r) {
        double x2 = fft_freq(r, n, g.spacing);
        for (int c = 0; c < n; ++c) {
            double x1 = fft_freq(c, n, g.spacing);
            q.values[static_cast<std::size_t>(r) * n + c] *= std::polar(inv, -2.0 * x1 * x2 * dt);
        }
    }
    fft.backward(q.values.data());
}

}  // namespace

ComplexField phi_from_q(const ComplexField& q)
{
    const auto& g = q.grid;
    const int n = g.n;
    ComplexField phi = make_field(g);
    for (std::size_t i = 0; i < g.size(); ++i) phi.values[i] = std::norm(q.values[i]);
    const auto& fft = fft2_for(n);
    fft.forward(phi.values.data());
    const double inv = 1.0 / static_cast<double>(g.size());
    for (int r = 0; r < n; ++r) {
        double x2 = fft_freq(r, n, g.spacing);
        for (int c = 0; c < n; ++c) {
            double x1 = fft_freq(c, n, g.spacing);
            auto& v = phi.values[static_cast<std::size_t>(r) * n + c];
            if (r == 0 && c == 0)
                v = 0;
            else
                v *= cplx(-x2, x1) / cplx(x2, x1) * inv;
        }
    }
    fft.backward(phi.values.data());
    return phi;
}

ComplexField step(const ComplexField& q, double dt, const SplitStepOptions& opt)
{
    ComplexField out = q;
    if (opt.nonlinear) nonlinear_substep(out, dt / 2);
    linear_substep(out, dt);
    if (opt.nonlinear) nonlinear_substep(out, dt / 2);
    double m = max_abs(out.values);
    if (!(m <= opt.cap)) throw BlowupDetected("split-step amplitude exceeded the cap");
    return out;
}

Trajectory simulate(const ComplexField& q0, double t_end, double dt, const SplitStepOptions& opt, int every)
{
    if (!(dt > 0) || !(t_end >= 0)) throw std::invalid_argument("simulate: need dt > 0 and t_end >= 0");
    const long steps = std::lround(t_end / dt);
    if (std::abs(steps * dt - t_end) > 1e-9 * std::max(1.0, t_end))
        throw std::invalid_argument("simulate: t_end must be a multiple of dt");
    Trajectory tr;
    tr.times.push_back(0);
    tr.frames.push_back(q0);
    ComplexField q = q0;
    for (long s = 1; s <= steps; ++s) {
        q = step(q, dt, opt);
        if ((every > 0 && s % every == 0) || s == steps) {
            if (tr.times.back() == s * dt) continue;
            tr.times.push_back(s * dt);
            tr.frames.push_back(q);
        }
    }
    return tr;
}

}  // namespace dsii
