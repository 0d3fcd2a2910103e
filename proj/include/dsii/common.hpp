#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsii {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

// 2*pi*i: normalization between h (1/(2pi)^2) and the inverse-side kernel
inline constexpr cplx kappa{0.0, 2.0 * pi};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoConvergence : Error {
    double residual;
    NoConvergence(const std::string& what, double r) : Error(what), residual(r) {}
};

struct GridTooSmall : Error { using Error::Error; };
struct ExceptionalOnBoundary : Error { using Error::Error; };
struct ContourTooSmall : Error { using Error::Error; };
struct OverflowRisk : Error { using Error::Error; };
struct MissingBoundaryBlock : Error { using Error::Error; };
struct BlowupDetected : Error { using Error::Error; };

// worker count: DSII_THREADS overrides the requested value
int thread_count(int requested = 0);

// runs fn(i) for i in [0,n); results must be written to per-index slots
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

double norm2(const CVec& v);
double max_abs(const CVec& v);

}  // namespace dsii
