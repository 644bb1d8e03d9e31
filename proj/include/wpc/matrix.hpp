#pragma once

//
// Small dense row-major matrices. Dimensions in this library stay in the
// low hundreds, so plain loops are all that is needed.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace wpc {

using Vector = std::vector<double>;

class Matrix
{
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != rows_ * cols_)
            throw DimensionMismatch("matrix data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_));
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows)
        : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0)
    {
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw DimensionMismatch("ragged matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d)
    {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    Matrix transpose() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator+=(const Matrix& o)
    {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += o.data_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& o)
    {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= o.data_[i];
        return *this;
    }

    Matrix& operator*=(double s)
    {
        for (auto& v : data_)
            v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        if (a.cols_ != b.rows_)
            throw DimensionMismatch("matrix product " + a.shape() + " * " + b.shape());
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            auto crow = c.row(i);
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0)
                    continue;
                auto brow = b.row(k);
                for (std::size_t j = 0; j < b.cols_; ++j)
                    crow[j] += aik * brow[j];
            }
        }
        return c;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

    double max_abs() const
    {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius_norm() const
    {
        double s = 0.0;
        for (double v : data_)
            s += v * v;
        return std::sqrt(s);
    }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    void require_same_shape(const Matrix& o) const
    {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionMismatch("shape mismatch " + shape() + " vs " + o.shape());
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw DimensionMismatch("dot of vectors with lengths " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector operator*(const Matrix& m, std::span<const double> x)
{
    if (m.cols() != x.size())
        throw DimensionMismatch("matrix-vector product " + m.shape() + " * " +
                                std::to_string(x.size()));
    Vector y(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        y[i] = dot(m.row(i), x);
    return y;
}

inline Vector operator*(const Matrix& m, const Vector& x)
{
    return m * std::span<const double>(x);
}

// Bᵀ B for a matrix with rows b_i: the sum of outer products b_i b_iᵀ.
inline Matrix gram_of_rows(const Matrix& b)
{
    Matrix g(b.cols(), b.cols());
    for (std::size_t r = 0; r < b.rows(); ++r) {
        auto br = b.row(r);
        for (std::size_t i = 0; i < b.cols(); ++i) {
            const double bi = br[i];
            if (bi == 0.0)
                continue;
            auto grow = g.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j)
                grow[j] += bi * br[j];
        }
    }
    return g;
}

// A Aᵀ, the Gram matrix of the rows.
inline Matrix outer_gram(const Matrix& a)
{
    Matrix g(a.rows(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.rows(); ++j) {
            const double v = dot(a.row(i), a.row(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

inline double trace_of(const Matrix& m)
{
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i)
        t += m(i, i);
    return t;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

} // namespace wpc
