#include "dsii/solvers.hpp"

#include <cmath>
#include <random>

namespace dsii {

double rdot(const CVec& a, const CVec& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
}

KrylovResult gmres(const RealLinearOp& A, std::size_t dim, const CVec& b, double tol, int restart, int max_iter,
                   const CVec* x0)
{
    KrylovResult res;
    res.x = x0 ? *x0 : CVec(dim, cplx{0, 0});
    const double bnorm = norm2(b);
    if (bnorm == 0) {
        res.x.assign(dim, cplx{0, 0});
        res.converged = true;
        return res;
    }
    CVec r(dim), w(dim);
    auto residual = [&] {
        A(res.x, w);
        for (std::size_t i = 0; i < dim; ++i) r[i] = b[i] - w[i];
        return norm2(r);
    };
    double rn = residual();
    res.residual = rn / bnorm;
    int total = 0;
    bool first_cycle = true;
    while (res.residual > tol && total < max_iter) {
        const int m = restart;
        std::vector<CVec> V;
        V.reserve(m + 1);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
        Eigen::MatrixXd Hraw = Eigen::MatrixXd::Zero(m + 1, m);
        std::vector<double> cs(m), sn(m), g(m + 1, 0.0);
        g[0] = rn;
        V.push_back(r);
        for (auto& v : V[0]) v /= rn;
        int k = 0;
        for (; k < m && total < max_iter; ++k, ++total) {
            A(V[k], w);
            for (int j = 0; j <= k; ++j) {
                double hj = rdot(V[j], w);
                H(j, k) = hj;
                for (std::size_t i = 0; i < dim; ++i) w[i] -= hj * V[j][i];
            }
            // one reorthogonalisation pass
            for (int j = 0; j <= k; ++j) {
                double hj = rdot(V[j], w);
                H(j, k) += hj;
                for (std::size_t i = 0; i < dim; ++i) w[i] -= hj * V[j][i];
            }
            double hn = norm2(w);
            H(k + 1, k) = hn;
            Hraw.col(k) = H.col(k);
            for (int j = 0; j < k; ++j) {
                double t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
                H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
                H(j, k) = t;
            }
            double den = std::hypot(H(k, k), H(k + 1, k));
            cs[k] = den == 0 ? 1 : H(k, k) / den;
            sn[k] = den == 0 ? 0 : H(k + 1, k) / den;
            H(k, k) = den;
            H(k + 1, k) = 0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            bool done = std::abs(g[k + 1]) / bnorm <= tol * 0.5 || hn == 0;
            if (!done) {
                V.push_back(w);
                for (auto& v : V.back()) v /= hn;
            }
            if (done) {
                ++k;
                ++total;
                break;
            }
        }
        if (first_cycle && k > 0) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(Hraw.topLeftCorner(k + 1, k));
            res.sigma_hess = svd.singularValues()(k - 1);
            first_cycle = false;
        }
        // back substitution
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
            y[i] = s / H(i, i);
        }
        for (int j = 0; j < k; ++j)
            for (std::size_t i = 0; i < dim; ++i) res.x[i] += y[j] * V[j][i];
        rn = residual();
        res.residual = rn / bnorm;
    }
    res.iterations = total;
    res.converged = res.residual <= tol;
    return res;
}

Eigen::VectorXd to_real(const CVec& v)
{
    Eigen::VectorXd r(2 * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        r[2 * i] = v[i].real();
        r[2 * i + 1] = v[i].imag();
    }
    return r;
}

CVec to_complex(const Eigen::VectorXd& v)
{
    CVec c(v.size() / 2);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = {v[2 * i], v[2 * i + 1]};
    return c;
}

Eigen::MatrixXd assemble_dense(const RealLinearOp& A, std::size_t m)
{
    Eigen::MatrixXd M(2 * m, 2 * m);
    CVec e(m, cplx{0, 0}), y(m);
    for (std::size_t j = 0; j < m; ++j) {
        for (int part = 0; part < 2; ++part) {
            e[j] = part == 0 ? cplx{1, 0} : cplx{0, 1};
            A(e, y);
            M.col(2 * j + part) = to_real(y);
        }
        e[j] = 0;
    }
    return M;
}

CVec random_cvec(std::size_t m, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CVec v(m);
    for (auto& x : v) x = {nd(rng), nd(rng)};
    return v;
}

DenseSolve dense_solve(const Eigen::MatrixXd& M, const CVec& b, int sigma_iters, unsigned seed)
{
    DenseSolve out;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::VectorXd rb = to_real(b);
    Eigen::VectorXd x = lu.solve(rb);
    double bn = rb.norm();
    out.residual = bn > 0 ? (M * x - rb).norm() / bn : (M * x).norm();
    out.x = to_complex(x);
    Eigen::VectorXd v = to_real(random_cvec(M.rows() / 2, seed));
    v.normalize();
    for (int it = 0; it < sigma_iters; ++it) {
        Eigen::VectorXd u = lu.transpose().solve(v);
        v = lu.solve(u);
        double nv = v.norm();
        if (!(nv > 0) || !std::isfinite(nv)) {
            out.sigma_min = 0;
            return out;
        }
        v /= nv;
    }
    out.sigma_min = (M * v).norm();
    Eigen::VectorXd p = to_real(random_cvec(M.rows() / 2, seed + 1));
    for (int it = 0; it < 6; ++it) {
        p.normalize();
        p = M.transpose() * (M * p);
    }
    out.norm_est = std::sqrt(p.norm());
    return out;
}

SigmaEstimate estimate_sigma(const RealLinearOp& A, std::size_t dim, int iters, double tol, unsigned seed)
{
    SigmaEstimate est;
    CVec x = random_cvec(dim, seed), y(dim);
    double nx = norm2(x);
    for (auto& v : x) v /= nx;
    double sigma = 1e300;
    for (int it = 0; it < iters; ++it) {
        auto r = gmres(A, dim, x, tol, 60, 400);
        if (!r.converged) est.converged = false;
        double ny = norm2(r.x);
        if (!(ny > 0) || !std::isfinite(ny)) {
            sigma = 0;
            break;
        }
        for (auto& v : r.x) v /= ny;
        x = r.x;
        A(x, y);
        sigma = std::min(sigma, norm2(y));
    }
    est.sigma_min = sigma;
    CVec p = random_cvec(dim, seed + 1);
    double nrm = 0;
    for (int it = 0; it < 6; ++it) {
        double np = norm2(p);
        for (auto& v : p) v /= np;
        A(p, y);
        nrm = std::max(nrm, norm2(y));
        p = y;
    }
    est.norm_est = nrm;
    return est;
}

}  // namespace dsii
