#pragma once

#include <cstdint>
#include <string_view>

namespace twinflow::util {

/// SplitMix64 finalizer. Counter-based draws built on it are pure functions of
/// their inputs, which is what makes replay and parallel scheduling
/// order-independent: no draw depends on how many draws happened before it.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t word) {
    return splitmix64(seed ^ splitmix64(word));
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Stateless per-(step, entity, purpose) draw stream owned by the engine.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t step, std::uint64_t entity, std::uint64_t purpose) const {
        return splitmix64(seed_ ^ splitmix64(step) ^ splitmix64(entity * 0x9e3779b97f4a7c15ULL + purpose));
    }

    double unit(std::uint64_t step, std::uint64_t entity, std::uint64_t purpose) const {
        return to_unit(bits(step, entity, purpose));
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

/// Deterministic seed derivation for experiment cells: a pure function of
/// (base, parts...), so cells can run in any order or in parallel.
template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t base, Parts... parts) {
    std::uint64_t s = splitmix64(base);
    ((s = mix(s, static_cast<std::uint64_t>(parts))), ...);
    return s;
}

constexpr std::uint64_t kPurposePriority = 0x11;
constexpr std::uint64_t kPurposeWagner = 0x22;

}  // namespace twinflow::util
