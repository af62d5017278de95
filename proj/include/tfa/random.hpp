#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "tfa/linalg.hpp"

namespace tfa {

// Seeded generator for weights and test fixtures. The raw engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// distributions below are written out by hand because the std:: ones are
// implementation-defined and would make fixtures compiler-dependent.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Uniform integer in [0, n) by rejection; n must be positive.
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    // Fisher-Yates.
    Permutation permutation(std::size_t n) {
        std::vector<std::size_t> m(n);
        for (std::size_t i = 0; i < n; ++i) m[i] = i;
        for (std::size_t i = n; i > 1; --i) std::swap(m[i - 1], m[below(i)]);
        return Permutation(std::move(m));
    }

    std::vector<std::size_t> tokens(std::size_t len, std::size_t vocab) {
        std::vector<std::size_t> t(len);
        for (auto& v : t) v = below(vocab);
        return t;
    }

    Matrix matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
        Matrix m(rows, cols);
        for (double& v : m.data()) v = uniform(lo, hi);
        return m;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tfa
