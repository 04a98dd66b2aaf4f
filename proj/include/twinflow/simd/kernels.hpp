#pragma once

#include <cstddef>
#include <span>

namespace twinflow::simd {

enum class KernelMode { automatic, scalar, avx2 };

/// Overrides dispatch (tests pin scalar vs avx2 to cross-check each other).
/// Requesting avx2 when unavailable falls back to scalar; check
/// active_kernel_name() to see what is actually running.
void set_kernel_mode(KernelMode mode);
const char* active_kernel_name();
bool cpu_supports_avx2();
bool avx2_kernels_built();

/// sum over i of (a[i] - b[i])^2; the accumulation feeding every RMSE.
double sum_squared_diff(std::span<const double> a, std::span<const double> b);

/// out[i] = (x[i] + shift) * scale; the KL smoothing/normalization pass.
void shift_scale(std::span<const double> x, double shift, double scale, std::span<double> out);

// scalar reference kernels, always available for equivalence checks
double sum_squared_diff_scalar(const double* a, const double* b, std::size_t n);
void shift_scale_scalar(const double* x, double shift, double scale, double* out, std::size_t n);

}  // namespace twinflow::simd
