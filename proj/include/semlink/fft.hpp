#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "semlink/error.hpp"

namespace semlink {

using cplx = std::complex<double>;

namespace detail {

/// FFTW plans keyed by (size, direction). Planning is serialized; execution
/// through fftw_execute_dft on caller arrays is thread-safe.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
        auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
        auto plan = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [_, p] : plans_) fftw_destroy_plan(p);
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

inline std::vector<cplx> run_dft(std::span<const cplx> x, int sign) {
    require(!x.empty(), Errc::precondition, "empty transform input");
    const int n = static_cast<int>(x.size());
    std::vector<cplx> in(x.begin(), x.end());
    std::vector<cplx> out(x.size());
    fftw_execute_dft(PlanCache::instance().get(n, sign), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : out) v *= scale;
    return out;
}

} // namespace detail

/// Unitary forward DFT: X[k] = N^{-1/2} sum_n x[n] e^{-j 2 pi k n / N}.
inline std::vector<cplx> fft(std::span<const cplx> x) { return detail::run_dft(x, FFTW_FORWARD); }

/// Unitary inverse DFT.
inline std::vector<cplx> ifft(std::span<const cplx> x) { return detail::run_dft(x, FFTW_BACKWARD); }

} // namespace semlink
