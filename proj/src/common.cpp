#include "dsii/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace dsii {

int thread_count(int requested)
{
    if (const char* env = std::getenv("DSII_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (requested > 0) return requested;
    return 1;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn)
{
    int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next++;
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!err) err = std::current_exception();
                    next = n;
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

double norm2(const CVec& v)
{
    double s = 0;
    for (auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

double max_abs(const CVec& v)
{
    double m = 0;
    for (auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace dsii
