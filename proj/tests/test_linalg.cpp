#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "tfa/linalg.hpp"
#include "tfa/random.hpp"

using namespace tfa;

TEST_CASE("matmul agrees with a naive triple loop") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        const std::size_t r = 1 + rng.below(7), k = 1 + rng.below(7), c = 1 + rng.below(7);
        const Matrix a = rng.matrix(r, k, -2, 2), b = rng.matrix(k, c, -2, 2);
        CHECK(max_abs_diff(matmul(a, b), test::naive_matmul(a, b)) <= 1e-12);
    }
}

TEST_CASE("matmul small exact example") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
    CHECK(matmul(a, b) == Matrix::from_rows({{19, 22}, {43, 50}}));
    CHECK(matmul(a, Matrix::identity(2)) == a);
    CHECK_THROWS_AS(matmul(a, Matrix(3, 2)), std::invalid_argument);
}

TEST_CASE("transpose, add, scale") {
    const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    const Matrix t = transpose(a);
    CHECK(t.rows() == 3);
    CHECK(t(2, 1) == 6);
    CHECK(transpose(t) == a);
    CHECK(add(a, a) == scale(a, 2.0));
    CHECK_THROWS_AS(add(a, t), std::invalid_argument);
    CHECK(shape_string(a) == "2x3");
}

TEST_CASE("from_rows rejects ragged input") {
    CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), std::invalid_argument);
}

TEST_CASE("permutation validation and inverse") {
    CHECK_THROWS_AS(Permutation({0, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Permutation({0, 3}), std::invalid_argument);
    const Permutation p({2, 0, 1});
    const Permutation inv = p.inverse();
    for (std::size_t i = 0; i < 3; ++i) CHECK(inv[p[i]] == i);
    CHECK(Permutation::identity(4).is_identity());
    CHECK_FALSE(p.is_identity());
}

TEST_CASE("permutation matrix times X equals permute_rows") {
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 1 + rng.below(9);
        const Permutation p = rng.permutation(n);
        const Matrix x = rng.matrix(n, 4, -1, 1);
        CHECK(matmul(permutation_matrix(p), x) == permute_rows(x, p));
        // P is orthogonal.
        CHECK(matmul(permutation_matrix(p), transpose(permutation_matrix(p))) == Matrix::identity(n));
        CHECK(permute_rows(permute_rows(x, p), p.inverse()) == x);
    }
}

TEST_CASE("row_softmax rows sum to one and match the textbook formula") {
    Rng rng(3);
    const Matrix a = rng.matrix(5, 7, -4, 4);
    const Matrix s = row_softmax(a);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double denom = 0.0, sum = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) denom += std::exp(a(i, j));
        for (std::size_t j = 0; j < a.cols(); ++j) {
            CHECK(s(i, j) == doctest::Approx(std::exp(a(i, j)) / denom).epsilon(1e-12));
            sum += s(i, j);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("row_softmax is shift invariant and stable for large inputs") {
    const Matrix a = Matrix::from_rows({{1000, 1001, 1002}});
    const Matrix b = Matrix::from_rows({{0, 1, 2}});
    CHECK(max_abs_diff(row_softmax(a), row_softmax(b)) <= 1e-15);
    CHECK(all_finite(row_softmax(a)));
}

TEST_CASE("row_softmax treats -inf as zero weight") {
    const double ninf = -std::numeric_limits<double>::infinity();
    const Matrix a = Matrix::from_rows({{0.5, ninf, ninf}, {0.0, 0.0, ninf}});
    const Matrix s = row_softmax(a);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 1) == 0.0);
    CHECK(s(1, 0) == doctest::Approx(0.5));
    CHECK(s(1, 2) == 0.0);
    CHECK_THROWS_AS(row_softmax(Matrix::from_rows({{ninf, ninf}})), std::invalid_argument);
}

TEST_CASE("layer_norm gives zero mean and unit variance with unit gain") {
    Rng rng(9);
    const Matrix x = rng.matrix(4, 16, -3, 3);
    const std::vector<double> g(16, 1.0), b(16, 0.0);
    const Matrix y = layer_norm(x, g, b, 1e-5);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        double mean = 0.0, var = 0.0;
        for (double v : y.row(i)) mean += v;
        mean /= 16.0;
        for (double v : y.row(i)) var += (v - mean) * (v - mean);
        var /= 16.0;
        CHECK(std::abs(mean) <= 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
    CHECK_THROWS_AS(layer_norm(x, std::vector<double>(3, 1.0), b, 1e-5), std::invalid_argument);
}

TEST_CASE("layer_norm is row-wise: permuting rows commutes with it") {
    Rng rng(10);
    const Matrix x = rng.matrix(6, 8, -1, 1);
    const std::vector<double> g(8, 1.3), b(8, 0.2);
    const Permutation p = rng.permutation(6);
    CHECK(layer_norm(permute_rows(x, p), g, b, 1e-5) == permute_rows(layer_norm(x, g, b, 1e-5), p));
}

TEST_CASE("gelu exact form") {
    CHECK(gelu(0.0) == 0.0);
    CHECK(gelu(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
    CHECK(gelu(-1.0) == doctest::Approx(-0.15865525393145707).epsilon(1e-13));
    CHECK(gelu(10.0) == doctest::Approx(10.0));
}

TEST_CASE("dot, norm, cosine similarity") {
    const std::vector<double> u{1, 0, 0}, v{0, 2, 0}, w{3, 0, 0};
    CHECK(dot(u, w) == 3.0);
    CHECK(norm(v) == 2.0);
    CHECK(cosine_similarity(u, v) == 0.0);
    CHECK(cosine_similarity(u, w) == 1.0);
    CHECK_THROWS_AS(cosine_similarity(u, std::vector<double>{0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(dot(u, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("top_rows takes a prefix") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    CHECK(a.top_rows(2) == Matrix::from_rows({{1, 2}, {3, 4}}));
    CHECK_THROWS_AS(a.top_rows(4), std::invalid_argument);
}

TEST_CASE("rng is deterministic and permutations are valid") {
    Rng a(42), b(42);
    for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
    Rng c(1);
    for (int i = 0; i < 100; ++i) {
        const double u = c.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(c.below(7) < 7);
    }
    CHECK(c.permutation(10).size() == 10);
}
