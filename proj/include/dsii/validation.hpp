#pragma once

#include "dsii/inverse.hpp"

namespace dsii {

struct DsiiResidual {
    double evolution = 0;   // max |q_t - 2i q_xy + 4q(conj(phi) - phi)|
    double constraint = 0;  // max |d phi - dbar |q|^2|
    double scale = 0;       // max |q_t| for relative reporting
};

// centered q_t from three slices dt apart; spectral space derivatives; interior nodes only
// (a margin of n/8 cells is dropped on each side)
DsiiResidual dsii_residual(const ComplexField& q_prev, const ComplexField& q_mid, const ComplexField& q_next,
                           const ComplexField& phi_mid, double dt, bool nonlinear = true);

struct DualityResult {
    double diag = 0;      // max |h_hat - h| / max |h| over the checked diagonal samples
    double boundary = 0;  // same over the boundary block (0 if absent)
    std::size_t samples = 0;
};

// forward transform of q_t at every stride-th valid diagonal sample (and the boundary block)
DualityResult duality_check(const ComplexField& q_t, const ScatteringData& data_t, const ForwardOptions& opt = {},
                            int stride = 1);

// max of |h11 - h22| and |h12 + h21|, relative to max |h|
double symmetry_check(const ScatteringData& d);
// second-row reconstruction against the first: |q_row2 + q| and |m22 - m11|
double symmetry_check(const PointValue& p);

struct DbarResidual {
    double relative = 0;
    double spacing = 0;
    std::size_t stencils = 0;
};

// finite-difference dbar_k of v(z, .) on the k-grid against kappa e_z(k) Pi h(k,k,t) conj(v)
DbarResidual dbar_equation_residual(const ScatteringData& data, cplx z, double t, const DiskSpec& disk,
                                    const InverseOptions& opt = {});

struct BlowupBox {
    double z_extent = 2;  // scan [-z_extent, z_extent]^2
    int nz = 9;
    double t_min = 0, t_max = 0.5;
    int nt = 3;
};

struct BlowupMap {
    BlowupBox box;
    double tau = 0;
    std::vector<double> sigma;         // nt * nz * nz, sigma_min / norm estimate
    std::vector<std::uint8_t> flagged;
    std::vector<int> components;       // connected components per slice (4-neighbour)
    bool inconclusive = false;         // flags touch the spatial box boundary
    std::size_t flag_count() const;
    double time(int it) const;
    cplx node(int ix, int iy) const;
};

// sigma_min of I + T on a (z,t) lattice; a cell is flagged when sigma/norm <= tau or the solve fails
BlowupMap blowup_scan(const ScatteringData& data, const BlowupBox& box, const DiskSpec& disk, double tau = 1e-2,
                      const InverseOptions& opt = {});

}  // namespace dsii
