#include "twinflow/simd/kernels.hpp"

#include <atomic>
#include <cassert>

namespace twinflow::simd {

#if defined(TWINFLOW_BUILD_AVX2)
double sum_squared_diff_avx2(const double* a, const double* b, std::size_t n);
void shift_scale_avx2(const double* x, double shift, double scale, double* out, std::size_t n);
#endif

double sum_squared_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void shift_scale_scalar(const double* x, double shift, double scale, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] + shift) * scale;
}

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

bool avx2_kernels_built() {
#if defined(TWINFLOW_BUILD_AVX2)
    return true;
#else
    return false;
#endif
}

namespace {

std::atomic<KernelMode> g_mode{KernelMode::automatic};

bool use_avx2() {
    switch (g_mode.load(std::memory_order_relaxed)) {
        case KernelMode::scalar: return false;
        case KernelMode::avx2:
        case KernelMode::automatic: return avx2_kernels_built() && cpu_supports_avx2();
    }
    return false;
}

}  // namespace

void set_kernel_mode(KernelMode mode) { g_mode.store(mode, std::memory_order_relaxed); }

const char* active_kernel_name() { return use_avx2() ? "avx2" : "scalar"; }

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
#if defined(TWINFLOW_BUILD_AVX2)
    if (use_avx2()) return sum_squared_diff_avx2(a.data(), b.data(), a.size());
#endif
    return sum_squared_diff_scalar(a.data(), b.data(), a.size());
}

void shift_scale(std::span<const double> x, double shift, double scale, std::span<double> out) {
    assert(x.size() == out.size());
#if defined(TWINFLOW_BUILD_AVX2)
    if (use_avx2()) {
        shift_scale_avx2(x.data(), shift, scale, out.data(), x.size());
        return;
    }
#endif
    shift_scale_scalar(x.data(), shift, scale, out.data(), x.size());
}

}  // namespace twinflow::simd
