#pragma once

//
// Seeded random instances: Gram operators, symbols, vectors and
// block-diagonal operators adapted to a packet slice.
//

#include <cstddef>
#include <cstdint>
#include <random>

#include "matrix.hpp"
#include "packet_tree.hpp"
#include "psd.hpp"

namespace wpc {

using Rng = std::mt19937_64;

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (double& v : m.data())
        v = normal(rng);
    return m;
}

inline Vector random_vector(Rng& rng, std::size_t n)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    for (double& x : v)
        x = normal(rng);
    return v;
}

// BᵀB for a Gaussian B with `rank` rows (rank 0 picks dim).
inline SymMatrix random_gram(Rng& rng, std::size_t dim, std::size_t rank = 0)
{
    return SymMatrix(gram_of_rows(random_matrix(rng, rank ? rank : dim, dim)));
}

inline Vector random_symbol(Rng& rng, std::size_t n, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(0.0, scale);
    Vector s(n);
    for (double& x : s)
        x = u(rng);
    return s;
}

// sum_w B_wᵀ G_w B_w over the depth-n slice, G_w random Gram blocks.
inline SymMatrix random_block_diagonal(Rng& rng, const PacketTree& tree, std::size_t n)
{
    Matrix acc(tree.ambient_dim(), tree.ambient_dim());
    for (std::size_t i : tree.depth_indices(n)) {
        const Matrix& b = tree.basis(i);
        const Matrix g = gram_of_rows(random_matrix(rng, b.rows(), b.rows()));
        acc += b.transpose() * g * b;
    }
    return SymMatrix(std::move(acc));
}

} // namespace wpc
