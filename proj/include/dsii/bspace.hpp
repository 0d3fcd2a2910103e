#pragma once

#include "dsii/grid.hpp"

#include <array>

namespace dsii {

// smooth radial cutoff: 0 for |k| <= 1.5A, 1 for |k| >= 2.5A
double beta(cplx k, double A);

// Discrete B^2: exterior k-grid nodes, Taylor coefficients inside D, far-field tail c beta(k)/k
struct BLayout {
    ComplexGrid kgrid;
    double radius = 0;
    int modes = 0;                  // N; coefficients c_0..c_N
    std::vector<std::size_t> ext;   // node indices with |k| > A
    std::vector<double> weight;     // quadrature weight per ext node (cell-area units)
    std::vector<std::size_t> annulus;  // positions in ext used for the tail fit
    double tail_norm2 = 0;          // ||beta/k||^2 on the truncated grid
    bool with_interior() const { return radius > 0; }
};

BLayout make_layout(const ComplexGrid& kgrid, double A, int modes);

struct BChannel {
    CVec exterior;  // size ext
    CVec interior;  // size N+1 (empty when D is empty)
    cplx tail{0, 0};
};

struct BElement {
    std::array<BChannel, 2> ch;
};

BElement zero_element(const BLayout& L);
std::size_t packed_dim(const BLayout& L);  // real dimension

std::vector<double> pack(const BLayout& L, const BElement& e);
BElement unpack(const BLayout& L, const std::vector<double>& v);

// the same data viewed as a complex vector (Re, Im pairs)
CVec pack_complex(const BLayout& L, const BElement& e);
BElement unpack_complex(const BLayout& L, const CVec& v);

double norm(const BLayout& L, const BElement& e);

// function values on exterior nodes: exterior + tail beta/k
CVec exterior_values(const BLayout& L, const BChannel& c);

// split exterior values into remainder + tail by least squares on the outer annulus
BChannel split_tail(const BLayout& L, const CVec& values, CVec interior);

// sum c_n k^n
cplx eval_interior(const BChannel& c, cplx k);

}  // namespace dsii
