#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsii/splitstep.hpp"

#include <cmath>

using namespace dsii;

namespace {

ComplexField gaussian(double a, double L, int n)
{
    auto f = make_field(make_grid(L, n));
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = a * std::exp(-std::norm(f.grid.node(i)));
    return f;
}

double l2(const CVec& v)
{
    double s = 0;
    for (auto x : v) s += std::norm(x);
    return std::sqrt(s);
}

double l2_diff(const CVec& a, const CVec& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("phi of zero is zero")
{
    auto q = make_field(make_grid(4, 16));
    CHECK(max_abs(phi_from_q(q).values) == 0.0);
}

TEST_CASE("phi has the norm of the mean-free modulus and solves its equation")
{
    auto q = gaussian(0.7, 6, 64);
    auto phi = phi_from_q(q);
    const auto& g = q.grid;
    CVec mod(g.size());
    double mean = 0;
    for (std::size_t i = 0; i < g.size(); ++i) mean += std::norm(q.values[i]) / g.size();
    for (std::size_t i = 0; i < g.size(); ++i) mod[i] = std::norm(q.values[i]) - mean;
    CHECK(std::abs(l2(phi.values) - l2(mod)) <= 1e-12 * l2(mod));
    auto lhs = del(g, phi.values);
    auto rhs = dbar(g, mod);
    double err = 0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lhs[i] - rhs[i]));
    CHECK(err <= 1e-10);
}

TEST_CASE("linear propagation of a plane wave is exact")
{
    auto g = make_grid(3, 32);
    // grid frequencies
    const double x1 = 2 * pi * 3 / (2 * g.extent), x2 = -2 * pi * 5 / (2 * g.extent);
    auto q = make_field(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx z = g.node(i);
        q.values[i] = std::polar(1.0, x1 * z.real() + x2 * z.imag());
    }
    SplitStepOptions opt;
    opt.nonlinear = false;
    const double dt = 0.01;
    auto tr = simulate(q, 50 * dt, dt, opt);
    double err = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(tr.frames.back().values[i] - q.values[i] * std::polar(1.0, -2 * x1 * x2 * 50 * dt)));
    CHECK(err <= 1e-12);
}

TEST_CASE("L2 norm is conserved over 500 steps")
{
    auto q = gaussian(0.1, 6, 64);
    auto tr = simulate(q, 0.5, 1e-3);
    CHECK(tr.frames.size() == 2);
    CHECK(std::abs(l2(tr.frames.back().values) - l2(q.values)) <= 1e-10 * l2(q.values));
}

TEST_CASE("second order in dt")
{
    auto q = gaussian(1.0, 5, 32);
    const double T = 0.2;
    auto ref = simulate(q, T, 0.2 / 320).frames.back();
    double e1 = l2_diff(simulate(q, T, 0.2 / 10).frames.back().values, ref.values);
    double e2 = l2_diff(simulate(q, T, 0.2 / 20).frames.back().values, ref.values);
    CHECK(e1 / e2 == doctest::Approx(4).epsilon(0.25));
}

TEST_CASE("amplitude cap")
{
    auto q = gaussian(2.0, 4, 16);
    SplitStepOptions opt;
    opt.cap = 1.0;
    CHECK_THROWS_AS(step(q, 1e-3, opt), BlowupDetected);
    CHECK_THROWS_AS(simulate(q, 0.1, 0.03), std::invalid_argument);
}
