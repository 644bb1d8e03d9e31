#pragma once

//
// Dense symmetric and positive semidefinite operators: cyclic Jacobi
// eigensolver, projection onto the positive cone, square roots, traces,
// Hilbert-Schmidt norms and Loewner-order comparison.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace wpc {

inline constexpr double default_psd_tol = 1e-10;
inline constexpr int jacobi_sweep_cap = 100;

//
// Square matrix that is exactly symmetric. Construction replaces the input
// by (M + Mᵀ)/2.
//
class SymMatrix
{
public:
    SymMatrix() = default;

    explicit SymMatrix(Matrix m) : m_(std::move(m))
    {
        if (!m_.is_square() || m_.rows() == 0)
            throw DimensionMismatch("symmetric matrix needs a nonempty square input, got " +
                                    m_.shape());
        for (std::size_t i = 0; i < m_.rows(); ++i)
            for (std::size_t j = i + 1; j < m_.cols(); ++j) {
                const double v = 0.5 * (m_(i, j) + m_(j, i));
                m_(i, j) = v;
                m_(j, i) = v;
            }
    }

    static SymMatrix zero(std::size_t n) { return SymMatrix(Matrix(n, n)); }
    static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }

    std::size_t dim() const noexcept { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    const Matrix& matrix() const noexcept { return m_; }

    friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b)
    {
        return SymMatrix(a.m_ + b.m_);
    }
    friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b)
    {
        return SymMatrix(a.m_ - b.m_);
    }
    friend SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(s * a.m_); }

    friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

private:
    Matrix m_;
};

struct EigenSystem
{
    Vector values;  // nonincreasing
    Matrix vectors; // column j belongs to values[j]
};

namespace detail {

// First component of magnitude above this decides the eigenvector sign.
inline constexpr double sign_pivot = 1e-12;

inline void normalize_sign(Matrix& v, std::size_t col)
{
    const std::size_t n = v.rows();
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(v(i, col));
        if (a > sign_pivot) {
            pivot = i;
            best = a;
            break;
        }
        if (a > best) {
            best = a;
            pivot = i;
        }
    }
    if (v(pivot, col) < 0.0)
        for (std::size_t i = 0; i < n; ++i)
            v(i, col) = -v(i, col);
}

} // namespace detail

//
// Full spectral decomposition by cyclic Jacobi rotations. Pairs (p, q) are
// visited in row order on every sweep, so the result is a deterministic
// function of the input. Small rotations are skipped during the first sweeps
// and off-diagonal entries that no longer affect the diagonal are flushed to
// zero, which makes the iteration terminate with an exactly diagonal matrix.
//
inline EigenSystem sym_eigen(const SymMatrix& m, int max_sweeps = jacobi_sweep_cap)
{
    const std::size_t n = m.dim();
    Matrix a = m.matrix();
    Matrix v = Matrix::identity(n);

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += std::abs(a(p, q));
        if (off == 0.0) {
            converged = true;
            break;
        }

        const double threshold = sweep < 3 ? 0.2 * off / double(n * n) : 0.0;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                const double g = 100.0 * std::abs(apq);
                if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
                    std::abs(a(q, q)) + g == std::abs(a(q, q))) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                if (std::abs(apq) <= threshold || apq == 0.0)
                    continue;

                const double h = a(q, q) - a(p, p);
                double t;
                if (std::abs(h) + g == std::abs(h)) {
                    t = apq / h;
                } else {
                    const double theta = 0.5 * h / apq;
                    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                    if (theta < 0.0)
                        t = -t;
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q)
                        continue;
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    const double np = c * akp - s * akq;
                    const double nq = s * akp + c * akq;
                    a(k, p) = np;
                    a(p, k) = np;
                    a(k, q) = nq;
                    a(q, k) = nq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged)
        throw ConvergenceFailure("Jacobi eigensolver did not converge within the cap of " +
                                 std::to_string(max_sweeps) + " sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenSystem es{Vector(n), Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        es.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i)
            es.vectors(i, j) = v(i, order[j]);
        detail::normalize_sign(es.vectors, j);
    }
    return es;
}

// V diag(d) Vᵀ
inline Matrix spectral_synthesis(const Matrix& v, std::span<const double> d)
{
    const std::size_t n = v.rows();
    Matrix out(n, n);
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d[k] == 0.0)
            continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double vik = v(i, k) * d[k];
            if (vik == 0.0)
                continue;
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += vik * v(j, k);
        }
    }
    return out;
}

class PsdOperator;
PsdOperator make_psd(const SymMatrix& m, double tol, double reference_scale);
PsdOperator sqrt_psd(const PsdOperator& r);

//
// Symmetric positive semidefinite matrix together with its validated
// spectral decomposition. Only make_psd and sqrt_psd create instances.
//
class PsdOperator
{
public:
    PsdOperator() = default;

    std::size_t dim() const noexcept { return base_.dim(); }
    const SymMatrix& base() const noexcept { return base_; }
    const Matrix& matrix() const noexcept { return base_.matrix(); }
    const Vector& eigenvalues() const noexcept { return eigenvalues_; }
    const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
    bool clamp_applied() const noexcept { return clamp_applied_; }
    double max_eigenvalue() const { return eigenvalues_.empty() ? 0.0 : eigenvalues_.front(); }

private:
    PsdOperator(SymMatrix base, Vector values, Matrix vectors, bool clamped)
        : base_(std::move(base)), eigenvalues_(std::move(values)),
          eigenvectors_(std::move(vectors)), clamp_applied_(clamped) {}

    friend PsdOperator make_psd(const SymMatrix& m, double tol, double reference_scale);
    friend PsdOperator sqrt_psd(const PsdOperator& r);

    SymMatrix base_;
    Vector eigenvalues_;
    Matrix eigenvectors_;
    bool clamp_applied_ = false;
};

//
// Projects a numerically perturbed PSD matrix onto the positive cone.
// Eigenvalues in [-tol * scale, 0) are set to zero, where scale is the
// larger of the spectral radius and `reference_scale`; anything more negative
// is rejected. A difference like R - D that should be near zero needs the
// scale of R as reference. When a clamp happens the stored matrix is rebuilt
// from the clamped spectrum.
//
inline PsdOperator make_psd(const SymMatrix& m, double tol = default_psd_tol, double reference_scale = 0.0)
{
    if (!(tol >= 0.0))
        throw InvalidConfig("PSD tolerance must be nonnegative");
    for (double x : m.matrix().data())
        if (!std::isfinite(x))
            throw MalformedInput("matrix contains a non-finite entry");

    EigenSystem es = sym_eigen(m);
    double scale = std::abs(reference_scale);
    for (double l : es.values)
        scale = std::max(scale, std::abs(l));

    bool clamped = false;
    for (double& l : es.values) {
        if (l >= 0.0)
            continue;
        if (l < -tol * scale) {
            std::ostringstream msg;
            msg << "matrix is not positive semidefinite: eigenvalue " << std::scientific << l
                << " below -" << tol << " * " << scale;
            throw NotPositive(msg.str(), l);
        }
        l = 0.0;
        clamped = true;
    }

    SymMatrix base = clamped ? SymMatrix(spectral_synthesis(es.vectors, es.values)) : m;
    return PsdOperator(std::move(base), std::move(es.values), std::move(es.vectors), clamped);
}

inline PsdOperator sqrt_psd(const PsdOperator& r)
{
    Vector roots(r.eigenvalues().size());
    for (std::size_t i = 0; i < roots.size(); ++i)
        roots[i] = std::sqrt(std::max(0.0, r.eigenvalues()[i]));
    SymMatrix s(spectral_synthesis(r.eigenvectors(), roots));
    return PsdOperator(std::move(s), std::move(roots), r.eigenvectors(), r.clamp_applied());
}

inline double trace(const SymMatrix& a) { return trace_of(a.matrix()); }
inline double trace(const PsdOperator& a) { return trace(a.base()); }

// Frobenius norm, which is the Schatten-2 norm for symmetric input.
inline double hs_norm(const SymMatrix& a) { return a.matrix().frobenius_norm(); }
inline double hs_norm(const PsdOperator& a) { return hs_norm(a.base()); }

// Largest eigenvalue magnitude (operator norm).
inline double operator_norm(const PsdOperator& a) { return a.max_eigenvalue(); }

inline double min_eigenvalue(const SymMatrix& a)
{
    return sym_eigen(a).values.back();
}

// a <= b in the Loewner order, up to tol * (1 + lambda_max(b)).
inline bool loewner_leq(const PsdOperator& a, const PsdOperator& b, double tol = 1e-8)
{
    if (a.dim() != b.dim())
        throw DimensionMismatch("Loewner comparison of dimensions " + std::to_string(a.dim()) +
                                " and " + std::to_string(b.dim()));
    return min_eigenvalue(b.base() - a.base()) >= -tol * (1.0 + b.max_eigenvalue());
}

} // namespace wpc
