#pragma once

#include "dsii/forward.hpp"

namespace dsii {

// h(s,k,t) = e^{-t(k^2 - conj(s)^2)/2} offdiag + e^{-t(conj(k)^2 - conj(s)^2)/2} diag.
// Applied relative to data.time; the result carries data.time + t.
ScatteringData evolve_h(const ScatteringData& data, double t);

// off-diagonal and diagonal factors for first argument s, second argument k
cplx offdiag_factor(cplx s, cplx k, double t);
cplx diag_factor(cplx s, cplx k, double t);

}  // namespace dsii
