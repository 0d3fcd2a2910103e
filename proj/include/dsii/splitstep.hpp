#pragma once

#include "dsii/grid.hpp"

namespace dsii {

// phi with d phi = dbar |q|^2, zero mode 0
ComplexField phi_from_q(const ComplexField& q);

struct SplitStepOptions {
    bool nonlinear = true;
    double cap = 10.0;  // BlowupDetected above this max|q|
};

// one Strang step: half nonlinear, full linear, half nonlinear
ComplexField step(const ComplexField& q, double dt, const SplitStepOptions& opt = {});

struct Trajectory {
    std::vector<double> times;
    std::vector<ComplexField> frames;
};

// frames at t = 0 and every `every` steps, plus the final state
Trajectory simulate(const ComplexField& q0, double t_end, double dt, const SplitStepOptions& opt = {}, int every = 0);

}  // namespace dsii
