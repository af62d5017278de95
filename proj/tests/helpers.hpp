#pragma once

#include <cstddef>
#include <vector>

#include "tfa/linalg.hpp"

namespace tfa::test {

// Straight triple loop in j-k order, independent of the library kernel.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    return out;
}

// All words over `symbols` letters of exactly `len` symbols, in lexicographic order.
inline std::vector<std::vector<std::size_t>> all_words(std::size_t symbols, std::size_t len) {
    std::vector<std::vector<std::size_t>> words{{}};
    for (std::size_t i = 0; i < len; ++i) {
        std::vector<std::vector<std::size_t>> next;
        for (const auto& w : words)
            for (std::size_t s = 0; s < symbols; ++s) {
                auto e = w;
                e.push_back(s);
                next.push_back(std::move(e));
            }
        words = std::move(next);
    }
    return words;
}

}  // namespace tfa::test
