// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ptest {

// SplitMix64 finalizer. Used as the splittable hash for seed derivation:
// derive_seed(parent, stream) is a pure function, so parallel workers can
// reconstruct any sub-stream from (master seed, index) alone.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(parent) ^ (stream * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
}

// Named sub-stream tags so that child seeds never collide by accident.
enum class Stream : std::uint64_t {
    model = 1,
    examples = 2,
    split = 3,
    oracle = 4,
    search = 5,
    time_share = 6,
    trial = 7,
    heldout = 8,
};

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream s) noexcept {
    return derive_seed(parent, static_cast<std::uint64_t>(s));
}

// mt19937_64 has a standardized output sequence; the distributions below are
// written out by hand because the std:: distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1], safe for log().
    double uniform_open0() { return 1.0 - uniform(); }

    // Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t x = engine_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = engine_();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Integer in [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential() { return -std::log(uniform_open0()); }

    // Gamma with integer shape as a sum of exponentials.
    double gamma_int(unsigned shape) {
        double s = 0.0;
        for (unsigned i = 0; i < shape; ++i) s += exponential();
        return s;
    }

    // Beta(a, b) for integer shapes.
    double beta_int(unsigned a, unsigned b) {
        const double x = gamma_int(a);
        const double y = gamma_int(b);
        return x / (x + y);
    }

    // Beta(a, 1) = U^(1/a) for any real a > 0.
    double beta_a1(double a) { return std::pow(uniform_open0(), 1.0 / a); }

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ptest
