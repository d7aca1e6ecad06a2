#pragma once

#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace snls::detail {

// Cached FFTW plans keyed by (d, N, sign). Plans are built once with
// FFTW_ESTIMATE (deterministic algorithm choice) | FFTW_UNALIGNED and reused
// through the new-array execute interface, which is safe to call concurrently
// on distinct buffers. Plan creation itself is serialized.
class FftPlanCache {
public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan get(int d, int N, int sign) {
    std::scoped_lock lock(mutex_);
    auto key = std::tuple(d, N, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::size_t size = 1;
    for (int i = 0; i < d; ++i) size *= static_cast<std::size_t>(N);
    std::vector<std::complex<double>> in(size), out(size);
    int n[3] = {N, N, N};
    fftw_plan plan = fftw_plan_dft(
        d, n, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// Out-of-place c2c transform; `in` and `out` must be distinct buffers of
// N^d complex values. The input is left untouched.
inline void execute_dft(int d, int N, int sign, const std::complex<double>* in,
                        std::complex<double>* out) {
  fftw_plan plan = FftPlanCache::instance().get(d, N, sign);
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(
                       const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace snls::detail
