#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "twinflow/simd/kernels.hpp"

using namespace twinflow;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

struct KernelModeGuard {
    ~KernelModeGuard() { simd::set_kernel_mode(simd::KernelMode::automatic); }
};

}  // namespace

TEST_CASE("dispatch reports an available kernel and honors overrides") {
    KernelModeGuard guard;
    simd::set_kernel_mode(simd::KernelMode::scalar);
    CHECK(std::string(simd::active_kernel_name()) == "scalar");
    simd::set_kernel_mode(simd::KernelMode::automatic);
    if (simd::avx2_kernels_built() && simd::cpu_supports_avx2())
        CHECK(std::string(simd::active_kernel_name()) == "avx2");
    else
        CHECK(std::string(simd::active_kernel_name()) == "scalar");
}

TEST_CASE("sum_squared_diff: scalar reference and dispatched kernel agree") {
    KernelModeGuard guard;
    std::mt19937_64 rng(17);
    for (const std::size_t n : {0UL, 1UL, 3UL, 4UL, 5UL, 8UL, 17UL, 63UL, 64UL, 1000UL, 4097UL}) {
        const auto a = random_vector(rng, n, 100.0);
        const auto b = random_vector(rng, n, 100.0);
        const double reference = simd::sum_squared_diff_scalar(a.data(), b.data(), n);

        simd::set_kernel_mode(simd::KernelMode::avx2);
        const double dispatched = simd::sum_squared_diff(a, b);
        simd::set_kernel_mode(simd::KernelMode::scalar);
        const double scalar = simd::sum_squared_diff(a, b);

        CAPTURE(n);
        CHECK(scalar == reference);
        const double tolerance = 1e-12 * std::max(1.0, reference);
        CHECK(std::abs(dispatched - reference) <= tolerance);
    }
}

TEST_CASE("sum_squared_diff: exact zero on identical inputs in both kernels") {
    KernelModeGuard guard;
    std::mt19937_64 rng(23);
    const auto a = random_vector(rng, 1001, 50.0);
    for (const auto mode : {simd::KernelMode::scalar, simd::KernelMode::avx2}) {
        simd::set_kernel_mode(mode);
        CHECK(simd::sum_squared_diff(a, a) == 0.0);
    }
}

TEST_CASE("shift_scale: elementwise identical across kernels") {
    KernelModeGuard guard;
    std::mt19937_64 rng(31);
    for (const std::size_t n : {0UL, 1UL, 5UL, 8UL, 2049UL}) {
        const auto x = random_vector(rng, n, 10.0);
        std::vector<double> out_scalar(n), out_simd(n);
        simd::set_kernel_mode(simd::KernelMode::scalar);
        simd::shift_scale(x, 1e-6, 3.25, out_scalar);
        simd::set_kernel_mode(simd::KernelMode::avx2);
        simd::shift_scale(x, 1e-6, 3.25, out_simd);
        CHECK(out_scalar == out_simd);  // same elementwise operations: bitwise equal
    }
}

TEST_CASE("kernels match a high-precision accumulation on adversarial input") {
    KernelModeGuard guard;
    // alternating large/small magnitudes stress the accumulation order
    std::vector<double> a(513), b(513);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = i % 2 == 0 ? 1e8 : 1e-8;
        b[i] = 0.0;
    }
    long double exact = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i)
        exact += static_cast<long double>(a[i]) * a[i];
    for (const auto mode : {simd::KernelMode::scalar, simd::KernelMode::avx2}) {
        simd::set_kernel_mode(mode);
        const double got = simd::sum_squared_diff(a, b);
        CHECK(std::abs(got - static_cast<double>(exact)) <= 1e-10 * static_cast<double>(exact));
    }
}
