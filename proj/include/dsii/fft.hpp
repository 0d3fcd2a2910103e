#pragma once

#include "dsii/common.hpp"

#include <fftw3.h>

namespace dsii {

// In-place n x n complex FFT, row-major. Plans are shared and
// executed through the new-array interface, so concurrent use is fine.
class Fft2 {
public:
    explicit Fft2(int n);
    ~Fft2();
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    void forward(cplx* data) const;
    // unnormalized inverse
    void backward(cplx* data) const;
    int size() const { return n_; }

private:
    int n_;
    fftw_plan fwd_{}, bwd_{};
};

const Fft2& fft2_for(int n);

// angular frequency of index j on an n-point grid with spacing h
double fft_freq(int j, int n, double h);

}  // namespace dsii
