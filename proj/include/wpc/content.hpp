#pragma once

//
// Content operators C_w(R) = R^{1/2} P_w R^{1/2}, their depth slices, the
// cylinder masses mu_R([w]) = tr C_w(R) and the vector energies
// nu_x([w]) = <x, C_w(R) x> = ||P_w R^{1/2} x||^2.
//

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "matrix.hpp"
#include "packet_tree.hpp"
#include "psd.hpp"

namespace wpc {

// Absolute floor below which a cylinder counts as massless, relative to tr(R).
inline constexpr double zero_mass_rel = 1e-12;

namespace detail {

inline void require_dim(const PacketTree& tree, std::size_t dim)
{
    if (tree.ambient_dim() != dim)
        throw DimensionMismatch("operator dimension " + std::to_string(dim) +
                                " does not match tree ambient dimension " +
                                std::to_string(tree.ambient_dim()));
}

//
// Trace and HS norm of C_w(A) = (B S)ᵀ (B S), with S = A^{1/2} and B the
// node basis. The nonzero spectrum of YᵀY equals that of Y Yᵀ, so both
// numbers come from the small d x d Gram matrix.
//
struct BlockStats
{
    double trace = 0.0;
    double hs = 0.0;
};

inline BlockStats block_stats(const Matrix& factor)
{
    const Matrix small = outer_gram(factor);
    return {trace_of(small), small.frobenius_norm()};
}

inline Matrix content_factor(const Matrix& sqrt_a, const Matrix& basis) { return basis * sqrt_a; }

} // namespace detail

struct ContentBlock
{
    PacketNode node;
    PsdOperator op;
    double trace_weight = 0.0;
    double hs_weight = 0.0;
};

inline ContentBlock content_operator(const PsdOperator& r, const PsdOperator& sqrt_r,
                                     const PacketTree& tree, const PacketNode& w,
                                     double tol = default_psd_tol)
{
    detail::require_dim(tree, r.dim());
    const Matrix y = detail::content_factor(sqrt_r.matrix(), tree.basis(w));
    PsdOperator c = make_psd(SymMatrix(gram_of_rows(y)), tol);
    const double tr = trace(c);
    const double hs = hs_norm(c);
    return {w, std::move(c), tr, hs};
}

inline ContentBlock content_operator(const PsdOperator& r, const PacketTree& tree,
                                     const PacketNode& w, double tol = default_psd_tol)
{
    detail::require_dim(tree, r.dim());
    return content_operator(r, sqrt_psd(r), tree, w, tol);
}

struct ContentDecomposition
{
    std::size_t depth = 0;
    std::vector<ContentBlock> blocks;
    double source_trace = 0.0;

    nlohmann::json to_json(bool dense_blocks = false) const
    {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& b : blocks) {
            nlohmann::json row = {{"word", b.node.label()},
                                  {"trace_weight", b.trace_weight},
                                  {"hs_weight", b.hs_weight}};
            if (dense_blocks) {
                const auto d = b.op.matrix().data();
                row["block"] = {{"dim", b.op.dim()}, {"data", std::vector<double>(d.begin(), d.end())}};
            }
            rows.push_back(std::move(row));
        }
        return {{"depth", depth}, {"source_trace", source_trace}, {"blocks", rows}};
    }
};

// Reconstruction tolerance shared by decompositions and extraction traces.
inline double reconstruction_tol(const SymMatrix& r) { return 1e-8 * (1.0 + hs_norm(r)); }

inline ContentDecomposition depth_decomposition(const PsdOperator& r, const PacketTree& tree,
                                                std::size_t n, double tol = default_psd_tol)
{
    detail::require_dim(tree, r.dim());
    const auto& slice = tree.depth_indices(n);
    const PsdOperator s = sqrt_psd(r);

    ContentDecomposition dec{n, {}, trace(r)};
    Matrix sum(r.dim(), r.dim());
    for (std::size_t i : slice) {
        dec.blocks.push_back(content_operator(r, s, tree, tree.node(i), tol));
        sum += dec.blocks.back().op.matrix();
    }
    const double err = max_abs_diff(sum, r.matrix());
    if (err > reconstruction_tol(r.base()))
        throw NumericalBreakdown("depth-" + std::to_string(n) +
                                 " content blocks do not reconstruct the operator (max error " +
                                 std::to_string(err) + ")");
    return dec;
}

//
// Cylinder masses for every node up to the tree depth, aligned with
// tree.nodes().
//
struct CylinderWeights
{
    std::vector<PacketNode> nodes;
    std::vector<double> mass;

    double at(const PacketTree& tree, const PacketNode& w) const { return mass.at(tree.index_of(w)); }

    nlohmann::json to_json() const
    {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < nodes.size(); ++i)
            rows.push_back({{"word", nodes[i].label()}, {"depth", nodes[i].depth()}, {"mass", mass[i]}});
        return rows;
    }
};

struct CylinderCheck
{
    double additivity = 0.0; // max relative |mu(w) - sum_children mu(v)|
    double root_mass = 0.0;  // relative |mu(root) - tr R|
    double min_mass = 0.0;
};

inline CylinderCheck check_cylinders(const CylinderWeights& cw, const PacketTree& tree, double trace_r)
{
    CylinderCheck chk;
    const double scale = std::max(std::abs(trace_r), 1e-300);
    chk.min_mass = cw.mass.empty() ? 0.0 : cw.mass[0];
    for (std::size_t i = 0; i < tree.size(); ++i) {
        chk.min_mass = std::min(chk.min_mass, cw.mass[i]);
        if (tree.is_leaf(i))
            continue;
        double sum = 0.0;
        for (std::size_t v : tree.children(i))
            sum += cw.mass[v];
        chk.additivity = std::max(chk.additivity, std::abs(cw.mass[i] - sum) / scale);
    }
    const std::size_t root = tree.depth_indices(0).front();
    chk.root_mass = trace_r == 0.0 ? std::abs(cw.mass[root]) : std::abs(cw.mass[root] - trace_r) / scale;
    return chk;
}

inline CylinderWeights cylinder_weights(const PsdOperator& r, const PacketTree& tree)
{
    detail::require_dim(tree, r.dim());
    const PsdOperator s = sqrt_psd(r);
    CylinderWeights cw;
    cw.nodes = tree.nodes();
    cw.mass.resize(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i)
        cw.mass[i] = detail::block_stats(detail::content_factor(s.matrix(), tree.basis(i))).trace;

    const CylinderCheck chk = check_cylinders(cw, tree, trace(r));
    if (chk.additivity > 1e-9 || chk.root_mass > 1e-10 || chk.min_mass < -1e-12)
        throw NumericalBreakdown("cylinder weights violate additivity or root mass");
    return cw;
}

namespace detail {

inline double node_energy(const PsdOperator& sqrt_r, const PacketTree& tree,
                          std::span<const double> x, std::size_t node_index)
{
    const Vector sx = sqrt_r.matrix() * x;
    const Vector c = tree.basis(node_index) * sx;
    return dot(c, c);
}

} // namespace detail

inline double vector_weight(const PsdOperator& r, const PacketTree& tree, std::span<const double> x,
                            const PacketNode& w)
{
    detail::require_dim(tree, r.dim());
    if (x.size() != r.dim())
        throw DimensionMismatch("vector length " + std::to_string(x.size()) +
                                " does not match operator dimension " + std::to_string(r.dim()));
    return detail::node_energy(sqrt_psd(r), tree, x, tree.index_of(w));
}

struct DensityEntry
{
    PacketNode node;
    double mass = 0.0;   // mu_R([w])
    double energy = 0.0; // nu_x([w])
    double ratio = 0.0;  // nu_x([w]) / mu_R([w])
};

//
// Fixed-depth density nu_x([w]) / mu_R([w]). Cylinders whose mass is below
// eps = 1e-12 tr(R) are omitted; their energy must then be at most
// eps (1 + ||x||^2), since nu_x([w]) <= mu_R([w]) ||x||^2.
//
inline std::vector<DensityEntry> discrete_density(const PsdOperator& r, const PacketTree& tree,
                                                  std::span<const double> x, std::size_t n)
{
    detail::require_dim(tree, r.dim());
    if (x.size() != r.dim())
        throw DimensionMismatch("vector length does not match operator dimension");
    const PsdOperator s = sqrt_psd(r);
    const double eps = zero_mass_rel * trace(r);
    const double xx = dot(x, x);

    std::vector<DensityEntry> out;
    for (std::size_t i : tree.depth_indices(n)) {
        const double mu = detail::block_stats(detail::content_factor(s.matrix(), tree.basis(i))).trace;
        const double nu = detail::node_energy(s, tree, x, i);
        if (mu > eps) {
            out.push_back({tree.node(i), mu, nu, nu / mu});
            continue;
        }
        if (nu > eps * (1.0 + xx))
            throw AbsoluteContinuityViolation("cylinder '" + tree.node(i).label() + "' has mass " +
                                              std::to_string(mu) + " but vector energy " +
                                              std::to_string(nu));
    }
    return out;
}

// max_w |nu_{x+y} + nu_{x-y} - 2 nu_x - 2 nu_y| over depth-n cylinders.
inline double parallelogram_check(const PsdOperator& r, const PacketTree& tree,
                                  std::span<const double> x, std::span<const double> y, std::size_t n)
{
    detail::require_dim(tree, r.dim());
    if (x.size() != r.dim() || y.size() != r.dim())
        throw DimensionMismatch("vector length does not match operator dimension");
    const PsdOperator s = sqrt_psd(r);
    Vector sum(x.size()), diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum[i] = x[i] + y[i];
        diff[i] = x[i] - y[i];
    }
    double worst = 0.0;
    for (std::size_t i : tree.depth_indices(n)) {
        const double v = detail::node_energy(s, tree, sum, i) + detail::node_energy(s, tree, diff, i) -
                         2.0 * detail::node_energy(s, tree, x, i) - 2.0 * detail::node_energy(s, tree, y, i);
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

} // namespace wpc
