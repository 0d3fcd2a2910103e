#pragma once

#include "dsii/grid.hpp"

#include <array>
#include <cstdint>

namespace dsii {

enum class PhaseConvention { Derived, Printed };
enum class SolvePath { RealLinear, Iterated };
enum class SolverMode { Auto, Dense, Krylov };

// matrix entry order used everywhere: 11, 12, 21, 22
enum Entry { E11 = 0, E12 = 1, E21 = 2, E22 = 3 };

using Matrix4 = std::array<CVec, 4>;

struct ForwardOptions {
    double tol = 1e-10;
    SolvePath path = SolvePath::RealLinear;
    SolverMode mode = SolverMode::Auto;
    PhaseConvention phase = PhaseConvention::Derived;
    bool full_matrix = false;
    bool want_sigma = false;
    int threads = 1;
    double decay_tol = 1e-6;
    std::size_t dense_limit = 256;  // real unknowns; Auto goes dense at or below this
};

struct WaveFunction {
    cplx k;
    Matrix4 mu;
    double residual = 0;
    int iterations = 0;
    double sigma_min = -1;  // only when requested
};

// Lippmann-Schwinger solve for mu(z,k)
WaveFunction solve_mu(const ComplexField& q, cplx k, const ForwardOptions& opt = {});

struct ScatteringData {
    ComplexGrid kgrid;
    Matrix4 diag;                   // h(k,k) on kgrid nodes
    std::vector<std::uint8_t> valid;  // 0 inside D or failed solve
    double radius = 0;
    int n_boundary = 0;
    Matrix4 boundary;               // h(s'_i, s_j), index i*nb + j
    double amplitude = 1;
    double time = 0;

    bool has_boundary() const { return n_boundary > 0 && boundary[0].size() == std::size_t(n_boundary) * n_boundary; }
};

// density q conj(mu) summed against exp(-i Re(conj(k) z)), scaled by h^2/(2pi)^2
std::array<cplx, 4> scattering_from_mu(const ComplexField& q, const WaveFunction& wf);

struct DiagReport {
    std::size_t failed = 0;
    double max_residual = 0;
};

// h(k,k) at every kgrid node with |k| > A (all nodes when A = 0)
ScatteringData scattering_diag(const ComplexField& q, const ComplexGrid& kgrid, double A, const ForwardOptions& opt = {},
                               DiagReport* report = nullptr);

// h at an explicit list of k values
std::vector<std::array<cplx, 4>> scattering_at(const ComplexField& q, const std::vector<cplx>& ks,
                                               const ForwardOptions& opt = {});

// boundary block h(s', s) for s, s' on the disk boundary; fills data.boundary
void scattering_boundary(const ComplexField& q, const DiskSpec& disk, ScatteringData& data, const ForwardOptions& opt = {},
                         double tau_exc = 0);

struct ContourNode {
    cplx z;
    cplx dz;
};

// square contour |x| = c or |y| = c, Gauss-Legendre per side, ccw
std::vector<ContourNode> square_contour(double c, int per_side);

// psi(z,k) = mu(z,k) e^{i conj(k) z/2} off the grid by direct summation
Matrix4 psi_on_contour(const ComplexField& q, const WaveFunction& wf, const std::vector<ContourNode>& contour,
                       const ForwardOptions& opt = {});

// h(s,k) = (-i/8pi^2) contour integral of e^{-i conj(s) z/2} psi dz, one value per s
std::vector<std::array<cplx, 4>> scattering_from_boundary_data(const std::vector<ContourNode>& contour, const Matrix4& psi,
                                                               const std::vector<cplx>& s_list,
                                                               const ComplexField* q = nullptr);

struct ExceptionalScan {
    std::vector<cplx> k_samples;
    std::vector<double> sigma_min;
    std::vector<std::size_t> flagged;
    double tau = 0;
    double radius = 0;  // smallest disk radius covering all flags
};

ExceptionalScan exceptional_scan(const ComplexField& q, const std::vector<cplx>& ks, double tau_exc = 0,
                                 const ForwardOptions& opt = {});

// k samples on a square [-R,R]^2 with the given count per side
std::vector<cplx> k_region(double R, int per_side);

double symmetry_deviation(const ScatteringData& d);

}  // namespace dsii
