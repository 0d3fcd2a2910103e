#include "dsii/fft.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace dsii {

namespace {
std::mutex& plan_mutex()
{
    static std::mutex m;
    return m;
}
}  // namespace

Fft2::Fft2(int n) : n_(n)
{
    std::lock_guard<std::mutex> lk(plan_mutex());
    auto* buf = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
}

Fft2::~Fft2()
{
    std::lock_guard<std::mutex> lk(plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
}

void Fft2::forward(cplx* data) const
{
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(fwd_, p, p);
}

void Fft2::backward(cplx* data) const
{
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(bwd_, p, p);
}

const Fft2& fft2_for(int n)
{
    static std::map<int, std::unique_ptr<Fft2>> cache;
    static std::mutex cache_mutex;
    std::lock_guard<std::mutex> lk(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Fft2>(n)).first;
    return *it->second;
}

double fft_freq(int j, int n, double h)
{
    int m = j < (n + 1) / 2 ? j : j - n;
    return 2.0 * pi * m / (n * h);
}

}  // namespace dsii
