#pragma once

#include "dsii/bspace.hpp"
#include "dsii/forward.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>

namespace dsii {

enum class BoundaryForm { Arc, Log };

struct InverseOptions {
    double tol = 1e-10;
    SolverMode mode = SolverMode::Auto;
    std::size_t dense_limit = 512;   // real unknowns; Auto goes dense at or below this
    BoundaryForm form = BoundaryForm::Arc;
    int modes = -1;                  // interior Taylor modes; -1 means n_boundary/2 - 1
    bool full_matrix = false;        // also solve the second row
    bool want_sigma = false;         // full sigma estimate; otherwise the GMRES Hessenberg bound
    double near_singular = 1e-6;     // relative to the operator norm estimate
    double recon_diag_sign = 1.0;    // -1 reproduces the printed reconstruction sign
    int threads = 1;
};

struct SolveReport {
    double sigma_min_estimate = -1;
    double norm_estimate = 0;
    double residual = 0;
    int iterations = 0;
    bool condition_flag = false;
    bool policy_fallback = false;
    double negative_mode_energy = 0;  // boundary projection diagnostic
};

// data shared by every (z) problem at a fixed time
struct InverseContext {
    const ScatteringData* data = nullptr;
    double t = 0;
    DiskSpec disk;
    InverseOptions opt;
    BLayout layout;
    Matrix4 H;                        // diag data evolved to t, on layout.ext
    std::vector<Matrix4> anti;        // per boundary column: anti-analytic coefficients of each entry
    Eigen::MatrixXcd moments;         // (N+1) x ext: k^{-n-1} dA / pi
};

std::shared_ptr<const InverseContext> make_context(const ScatteringData& data, double t, const DiskSpec& disk,
                                                   const InverseOptions& opt = {});

class TOperator {
public:
    cplx z{0, 0};
    double t = 0;
    cplx k0{0, 0};
    bool k0_fallback = false;
    int row = 0;  // 0: (v11, v12); 1: (v22, v21)
    std::shared_ptr<const InverseContext> ctx;

    // raw T applied to an element; channel 0 is the diagonal entry, 1 the off-diagonal
    BElement apply(const BElement& in) const;
    // T applied to the constant identity
    BElement apply_identity() const;
    // boundary functions J_u, J_w on the disk nodes for given interior coefficients
    std::array<CVec, 2> jumps(const CVec& cu, const CVec& cw) const;
    const BLayout& layout() const { return ctx->layout; }

    CVec du, dw;  // exterior densities (full k-grid length, zero inside D)
    std::array<Eigen::MatrixXcd, 2> Ka, Kb;  // per channel, nb x (N+1)
};

TOperator build_T(std::shared_ptr<const InverseContext> ctx, cplx z, int row = 0);
TOperator build_T(const ScatteringData& data, cplx z, double t, const DiskSpec& disk, const InverseOptions& opt = {});

std::pair<BElement, SolveReport> solve_w(const TOperator& T, double tol);

struct PointValue {
    cplx q{0, 0};
    cplx m_diag{0, 0};  // diagonal entry of the bracket; phi = (-i/2) dbar of it
    cplx q_row2{0, 0};  // -q from the second row in full-matrix mode
    cplx m_diag_row2{0, 0};
    SolveReport report;
    BElement v;         // v = w + I (first row)
};

PointValue reconstruct_point(std::shared_ptr<const InverseContext> ctx, cplx z);

struct Reconstruction {
    ComplexField q, phi;
    ComplexField m_diag;  // diagonal bracket entry per node
    std::vector<std::uint8_t> mask;  // 1 where near-singular or unconverged
    std::vector<SolveReport> reports;
};

Reconstruction reconstruct(const ScatteringData& data, const ComplexGrid& zgrid, double t, const DiskSpec& disk,
                           const InverseOptions& opt = {});

// q only at a list of points
std::vector<PointValue> reconstruct_points(const ScatteringData& data, const std::vector<cplx>& zs, double t,
                                           const DiskSpec& disk, const InverseOptions& opt = {});

// Neumann series sum_{m<=M} (-T)^m (-T I)
BElement neumann_w(const TOperator& T, int terms);

struct SweepEntry {
    double a = 0;
    SolveReport report;
};

std::vector<SweepEntry> amplitude_sweep(const ComplexField& q0, const std::vector<double>& a_list, cplx z, double t,
                                        const ComplexGrid& kgrid, const DiskSpec& disk, const ForwardOptions& fopt = {},
                                        const InverseOptions& iopt = {});

}  // namespace dsii
