#pragma once

// Generators and brute-force oracles shared by the test binaries. Nothing
// here calls into the library's numerics, so agreement is meaningful.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <wpc/wpc.hpp>

namespace testing_support {

using Dense = std::vector<std::vector<double>>;

struct Gen
{
    explicit Gen(std::uint64_t seed) : eng(seed) {}

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng); }

    std::vector<double> vec(std::size_t n)
    {
        std::vector<double> v(n);
        for (double& x : v)
            x = normal();
        return v;
    }

    // BᵀB with B of size rank x dim
    Dense gram(std::size_t dim, std::size_t rank = 0)
    {
        if (rank == 0)
            rank = dim;
        Dense b(rank, std::vector<double>(dim));
        for (auto& row : b)
            for (double& x : row)
                x = normal();
        Dense g(dim, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                for (std::size_t r = 0; r < rank; ++r)
                    g[i][j] += b[r][i] * b[r][j];
        return g;
    }

    std::mt19937_64 eng;
};

inline wpc::Matrix to_matrix(const Dense& d)
{
    wpc::Matrix m(d.size(), d.empty() ? 0 : d[0].size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d[i].size(); ++j)
            m(i, j) = d[i][j];
    return m;
}

inline Dense to_dense(const wpc::Matrix& m)
{
    Dense d(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            d[i][j] = m(i, j);
    return d;
}

inline wpc::PsdOperator psd(const Dense& d) { return wpc::make_psd(wpc::SymMatrix(to_matrix(d))); }

inline Dense mul(const Dense& a, const Dense& b)
{
    Dense c(a.size(), std::vector<double>(b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < b[0].size(); ++j)
                c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline double frob(const Dense& a)
{
    double s = 0.0;
    for (const auto& r : a)
        for (double x : r)
            s += x * x;
    return std::sqrt(s);
}

inline double frob_diff(const wpc::Matrix& a, const wpc::Matrix& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    return std::sqrt(s);
}

inline double frob_diff(const Dense& a, const Dense& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            s += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
    return std::sqrt(s);
}

inline double tr(const Dense& a)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i][i];
    return s;
}

inline Dense diag(const std::vector<double>& d)
{
    Dense m(d.size(), std::vector<double>(d.size(), 0.0));
    for (std::size_t i = 0; i < d.size(); ++i)
        m[i][i] = d[i];
    return m;
}

// Symbol block sum over I_w straight from the band formula
//   I_w = [-2^{N-1} + m 2^{N-n}, -2^{N-1} + (m+1) 2^{N-n} - 1],
// with the symbol stored at position k + 2^{N-1}.
inline double symbol_block_sum(const std::vector<double>& sym, std::size_t levels, const std::string& word)
{
    long m = 0;
    for (char c : word)
        m = 2 * m + (c == '1');
    const long half = 1L << (levels - 1);
    const long width = 1L << (levels - word.size());
    double s = 0.0;
    for (long k = -half + m * width; k <= -half + (m + 1) * width - 1; ++k)
        s += sym[std::size_t(k + half)];
    return s;
}

// Smallest eigenvalue lower bound via Gershgorin discs, a crude but
// independent positivity sanity check.
inline double gershgorin_min(const wpc::Matrix& a)
{
    double lo = INFINITY;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (j != i)
                r += std::abs(a(i, j));
        lo = std::min(lo, a(i, i) - r);
    }
    return lo;
}

// All built-in tree configurations used by the property tests.
struct TreeCase
{
    std::string label;
    wpc::PacketTree tree;
};

inline std::vector<TreeCase> tree_cases()
{
    using namespace wpc;
    std::vector<TreeCase> out;
    out.push_back({"shannon-3", build_shannon_tree(3, 3)});
    out.push_back({"shannon-4", build_shannon_tree(4, 3)});
    out.push_back({"shannon-5", build_shannon_tree(5, 3)});
    out.push_back({"haar-1d-8", build_filter_tree_1d(haar_filter(), 8, 3)});
    out.push_back({"haar-1d-16", build_filter_tree_1d(haar_filter(), 16, 3)});
    out.push_back({"d4-1d-16", build_filter_tree_1d(d4_filter(), 16, 3)});
    out.push_back({"d4-1d-32", build_filter_tree_1d(d4_filter(), 32, 3)});
    out.push_back({"haar-2d-4", build_filter_tree_2d(haar_filter(), 4, 2)});
    out.push_back({"d4-2d-4", build_filter_tree_2d(d4_filter(), 4, 1)});
    return out;
}

} // namespace testing_support
