// Dense row-major linear algebra used by the transformer kernel and the
// invariance checks. Everything is double precision and deterministic:
// products accumulate strictly left to right so results are bit-reproducible
// within one build.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfa {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    // Convenience for small literals in tests: {{1, 2}, {3, 4}}.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // First n rows as a new matrix.
    Matrix top_rows(std::size_t n) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

// A bijection on 0..n-1. Applied to rows: output row i is input row mapping[i].
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<std::size_t> mapping);

    static Permutation identity(std::size_t n);

    std::size_t size() const { return mapping_.size(); }
    std::size_t operator[](std::size_t i) const { return mapping_[i]; }
    const std::vector<std::size_t>& mapping() const { return mapping_; }

    Permutation inverse() const;
    bool is_identity() const;

    bool operator==(const Permutation&) const = default;

private:
    std::vector<std::size_t> mapping_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double factor);

Matrix permutation_matrix(const Permutation& p);

// Reorders rows directly (equivalent to permutation_matrix(p) * m without the
// O(n^2) product).
Matrix permute_rows(const Matrix& m, const Permutation& p);

// Softmax along each row with per-row max subtraction. Entries equal to
// -infinity are mask sentinels and receive weight exactly 0; a row made only
// of sentinels is rejected.
Matrix row_softmax(const Matrix& m);

Matrix layer_norm(const Matrix& m, std::span<const double> gain, std::span<const double> bias,
                  double eps);

// Exact-erf GELU: x * Phi(x).
double gelu(double x);
Matrix gelu(const Matrix& m);

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Largest |a - b| over all entries; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

}  // namespace tfa
