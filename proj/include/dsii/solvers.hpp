#pragma once

#include "dsii/common.hpp"

#include <Eigen/Dense>

namespace dsii {

// Operator that is linear over the reals only; vectors are complex arrays
// viewed as interleaved (Re, Im) real vectors.
using RealLinearOp = std::function<void(const CVec& x, CVec& y)>;

// real inner product Re sum conj(a) b
double rdot(const CVec& a, const CVec& b);

struct KrylovResult {
    CVec x;
    double residual = 0;  // relative
    int iterations = 0;
    bool converged = false;
    // smallest singular value of the first-cycle Hessenberg matrix; an upper
    // bound for sigma_min of the operator
    double sigma_hess = -1;
};

KrylovResult gmres(const RealLinearOp& A, std::size_t dim, const CVec& b, double tol, int restart = 60,
                   int max_iter = 600, const CVec* x0 = nullptr);

// Dense real matrix of a real-linear operator on C^m (2m x 2m)
Eigen::MatrixXd assemble_dense(const RealLinearOp& A, std::size_t m);

Eigen::VectorXd to_real(const CVec& v);
CVec to_complex(const Eigen::VectorXd& v);

struct DenseSolve {
    CVec x;
    double residual = 0;
    double sigma_min = 0;
    double norm_est = 0;
};

// LU solve plus inverse iteration on M^T M for the smallest singular value
DenseSolve dense_solve(const Eigen::MatrixXd& M, const CVec& b, int sigma_iters = 3, unsigned seed = 12345);

struct SigmaEstimate {
    double sigma_min = 0;
    double norm_est = 0;
    bool converged = true;
};

// matrix-free: inverse iteration through GMRES solves, power iteration for the norm
SigmaEstimate estimate_sigma(const RealLinearOp& A, std::size_t dim, int iters = 3, double tol = 1e-8,
                             unsigned seed = 12345);

CVec random_cvec(std::size_t m, unsigned seed);

}  // namespace dsii
