#pragma once

#include "dsii/common.hpp"

#include <utility>

namespace dsii {

// Cell-centred n x n grid on [-L,L)^2. Row index is y, column index is x.
struct ComplexGrid {
    int n = 0;
    double extent = 0;
    double spacing = 0;

    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    double coord(int i) const { return -extent + (i + 0.5) * spacing; }
    cplx node(int row, int col) const { return {coord(col), coord(row)}; }
    cplx node(std::size_t idx) const { return node(static_cast<int>(idx / n), static_cast<int>(idx % n)); }
    double cell_area() const { return spacing * spacing; }
};

ComplexGrid make_grid(double extent, int n);

struct ComplexField {
    ComplexGrid grid;
    CVec values;
};

ComplexField make_field(const ComplexGrid& g);

// g(z) = (1/pi) sum f(z') / (z - z') h^2, free-space (no periodic images)
CVec cauchy_apply(const ComplexGrid& g, const CVec& f);
ComplexField cauchy_apply(const ComplexField& f);

// spectral (dx + i dy)/2 and (dx - i dy)/2; Nyquist modes dropped
CVec dbar(const ComplexGrid& g, const CVec& f);
CVec del(const ComplexGrid& g, const CVec& f);
CVec laplacian(const ComplexGrid& g, const CVec& f);
ComplexField dbar(const ComplexField& f);
ComplexField del(const ComplexField& f);

enum class K0Policy { FixedPoint, RaySelected };

struct DiskSpec {
    double radius = 0;  // 0 means D is empty
    int n_boundary = 0;
    K0Policy policy = K0Policy::RaySelected;
    cplx k0_fixed{0, 0};

    bool empty() const { return radius <= 0 || n_boundary <= 0; }
    std::vector<cplx> boundary_nodes() const;
};

DiskSpec make_disk(double radius, int n_boundary, K0Policy policy = K0Policy::RaySelected,
                   double k0_angle = -pi / 2);

struct K0Choice {
    cplx k0;
    bool fallback = false;  // RaySelected at z = 0
};

K0Choice select_k0(const DiskSpec& disk, cplx z);

struct ArcNode {
    cplx node;
    cplx weight;  // for d(conj s')
};

// ccw arc from k0 to s on the disk boundary
std::vector<ArcNode> arc_quadrature(const DiskSpec& disk, cplx k0, cplx s);

// theta-parametrised ccw arc: angles and d(theta) weights
void arc_angles(double th0, double th1, int n_boundary, std::vector<double>& th, std::vector<double>& w);

// nodes and weights on [-1,1]
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m);

// area weights (units of cell area) for the region |k| > A on the grid;
// second-order accurate across the circle
std::vector<double> exterior_weights(const ComplexGrid& g, double A);

}  // namespace dsii
