#include "tfa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tfa {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_,
            "matrix data length " + std::to_string(data_.size()) + " does not match " +
                std::to_string(rows_) + "x" + std::to_string(cols_));
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == cols, "ragged row " + std::to_string(r) + " in matrix literal");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::top_rows(std::size_t n) const {
    require(n <= rows_, "top_rows: requested " + std::to_string(n) + " rows of " + shape_string(*this));
    return Matrix(n, cols_, std::vector<double>(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(n * cols_)));
}

std::string shape_string(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Permutation::Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
    std::vector<bool> seen(mapping_.size(), false);
    for (std::size_t v : mapping_) {
        require(v < mapping_.size() && !seen[v], "permutation mapping is not a bijection on 0.." +
                                                     std::to_string(mapping_.size()) + "-1");
        seen[v] = true;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(mapping_.size());
    for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = i;
    return Permutation(std::move(inv));
}

bool Permutation::is_identity() const {
    for (std::size_t i = 0; i < mapping_.size(); ++i)
        if (mapping_[i] != i) return false;
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(),
            "matmul: dimension mismatch " + shape_string(a) + " * " + shape_string(b));
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            auto b_row = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(),
            "add: shape mismatch " + shape_string(a) + " + " + shape_string(b));
    Matrix out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix scale(const Matrix& m, double factor) {
    Matrix out = m;
    for (double& v : out.data()) v *= factor;
    return out;
}

Matrix permutation_matrix(const Permutation& p) {
    Matrix m(p.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) m(i, p[i]) = 1.0;
    return m;
}

Matrix permute_rows(const Matrix& m, const Permutation& p) {
    require(p.size() == m.rows(), "permute_rows: permutation of size " + std::to_string(p.size()) +
                                      " applied to " + shape_string(m));
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto src = m.row(p[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Matrix row_softmax(const Matrix& m) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto in = m.row(i);
        double peak = neg_inf;
        for (double v : in) peak = std::max(peak, v);
        require(peak != neg_inf, "row_softmax: row " + std::to_string(i) + " is fully masked");
        auto o = out.row(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) {
            o[j] = in[j] == neg_inf ? 0.0 : std::exp(in[j] - peak);
            sum += o[j];
        }
        for (double& v : o) v /= sum;
    }
    return out;
}

Matrix layer_norm(const Matrix& m, std::span<const double> gain, std::span<const double> bias,
                  double eps) {
    require(gain.size() == m.cols() && bias.size() == m.cols(),
            "layer_norm: gain/bias length " + std::to_string(gain.size()) + "/" +
                std::to_string(bias.size()) + " vs " + std::to_string(m.cols()) + " columns");
    require(eps > 0.0, "layer_norm: eps must be positive");
    Matrix out(m.rows(), m.cols());
    const double n = static_cast<double>(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto in = m.row(i);
        double mean = 0.0;
        for (double v : in) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : in) var += (v - mean) * (v - mean);
        var /= n;
        const double inv = 1.0 / std::sqrt(var + eps);
        auto o = out.row(i);
        for (std::size_t j = 0; j < in.size(); ++j) o[j] = (in[j] - mean) * inv * gain[j] + bias[j];
    }
    return out;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Matrix gelu(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.data()) v = gelu(v);
    return out;
}

double dot(std::span<const double> u, std::span<const double> v) {
    require(u.size() == v.size(), "dot: length mismatch " + std::to_string(u.size()) + " vs " +
                                      std::to_string(v.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    require(!u.empty() && u.size() == v.size(), "cosine_similarity: vectors must be nonempty and equal length");
    const double nu = norm(u);
    const double nv = norm(v);
    require(nu > 0.0 && nv > 0.0, "cosine_similarity: zero-norm vector");
    return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(),
            "max_abs_diff: shape mismatch " + shape_string(a) + " vs " + shape_string(b));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

bool all_finite(const Matrix& m) {
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace tfa
