#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsii/bspace.hpp"

#include <cmath>
#include <random>

using namespace dsii;

namespace {

BElement random_element(const BLayout& L, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    auto e = zero_element(L);
    for (auto& c : e.ch) {
        for (auto& x : c.exterior) x = {nd(rng), nd(rng)};
        for (auto& x : c.interior) x = {nd(rng), nd(rng)};
        c.tail = {nd(rng), nd(rng)};
    }
    return e;
}

}  // namespace

TEST_CASE("beta cutoff")
{
    const double A = 1.3;
    CHECK(beta(A, A) == 0.0);
    CHECK(beta(cplx(0, 1.5 * A), A) == 0.0);
    CHECK(beta(3 * A, A) == 1.0);
    CHECK(beta(cplx(-2.5 * A, 0), A) == 1.0);
    double prev = 0;
    bool monotone = true;
    for (int i = 0; i < 1000; ++i) {
        double b = beta(4 * A * i / 999.0, A);
        monotone = monotone && b >= prev;
        prev = b;
    }
    CHECK(monotone);
    // radial
    CHECK(beta(std::polar(2 * A, 0.3), A) == doctest::Approx(beta(2 * A, A)).epsilon(1e-15));
}

TEST_CASE("pack and unpack are inverse and sized as specified")
{
    auto L = make_layout(make_grid(5, 16), 1.0, 7);
    CHECK(packed_dim(L) == 2 * 2 * (L.ext.size() + 8 + 1));
    auto z = pack(L, zero_element(L));
    CHECK(std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; }));
    auto e = random_element(L, 1);
    auto v = pack(L, e);
    CHECK(pack(L, unpack(L, v)) == v);
    std::vector<double> bad(v.size() + 2);
    CHECK_THROWS_AS(unpack(L, bad), std::invalid_argument);
    // without a disk the interior block is absent
    auto L0 = make_layout(make_grid(5, 16), 0.0, 7);
    CHECK(packed_dim(L0) == 2 * 2 * (L0.ext.size() + 1));
    CHECK(L0.ext.size() == 256);
}

TEST_CASE("norm matches direct summation")
{
    const double A = 1.2;
    auto g = make_grid(5, 16);
    auto L = make_layout(g, A, 5);
    auto e = random_element(L, 2);
    double s = 0, tail = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx k = g.node(i);
        if (std::abs(k) > A) tail += std::pow(beta(k, A) / std::abs(k), 2) * g.cell_area();
    }
    for (auto& c : e.ch) {
        for (auto& x : c.exterior) s += std::norm(x) * g.cell_area();
        for (std::size_t n = 0; n < c.interior.size(); ++n) s += std::pow(A, 2.0 * n) * std::norm(c.interior[n]);
        s += std::norm(c.tail) * tail;
    }
    CHECK(std::abs(norm(L, e) - std::sqrt(s)) <= 1e-13 * std::sqrt(s));
    CHECK(norm(L, unpack(L, pack(L, e))) == norm(L, e));
}

TEST_CASE("tail split reproduces values and recovers a pure tail")
{
    auto L = make_layout(make_grid(8, 32), 1.0, 3);
    auto e = random_element(L, 3);
    auto vals = exterior_values(L, e.ch[0]);
    auto c = split_tail(L, vals, e.ch[0].interior);
    auto back = exterior_values(L, c);
    double m = 0;
    for (std::size_t p = 0; p < vals.size(); ++p) m = std::max(m, std::abs(back[p] - vals[p]));
    CHECK(m <= 1e-13);
    BChannel pure;
    pure.exterior.assign(L.ext.size(), cplx{0, 0});
    pure.tail = cplx(0.4, -1.1);
    auto pc = split_tail(L, exterior_values(L, pure), {});
    CHECK(std::abs(pc.tail - pure.tail) <= 1e-13);
}

TEST_CASE("interior evaluation and boundary trace modes")
{
    BChannel c;
    c.interior = {cplx(1, 0), cplx(0, 2), cplx(-0.5, 0.25)};
    cplx k(0.3, -0.7);
    CHECK(std::abs(eval_interior(c, k) - (c.interior[0] + c.interior[1] * k + c.interior[2] * k * k)) <= 1e-15);
    // trace on a circle has no negative Fourier modes
    const int nb = 16;
    const double A = 0.8;
    cplx neg{0, 0};
    for (int j = 0; j < nb; ++j) {
        double th = 2 * pi * j / nb;
        neg += eval_interior(c, std::polar(A, th)) * std::polar(1.0, th);
    }
    CHECK(std::abs(neg) / nb <= 1e-14);
}
