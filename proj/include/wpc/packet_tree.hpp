#pragma once

//
// Packet trees: rooted dyadic trees of mutually orthogonal subspaces. Every
// node stores an orthonormal row basis of its subspace W_w, so P_w = BᵀB.
//
// Three realizations are built in:
//   shannon        contiguous dyadic frequency bands on 2^levels coordinates
//   filterbank-1d  periodized two-channel filter-bank packets on signals
//   filterbank-2d  separable tensor products of 1D packets on square patches
//

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "filters.hpp"
#include "matrix.hpp"
#include "psd.hpp"

namespace wpc {

enum class Realization { shannon, filterbank_1d, filterbank_2d };

inline std::string to_string(Realization r)
{
    switch (r) {
    case Realization::shannon:
        return "shannon";
    case Realization::filterbank_1d:
        return "filterbank-1d";
    case Realization::filterbank_2d:
        return "filterbank-2d";
    }
    return "unknown";
}

//
// Tree node word. One-dimensional trees use `row` only; two-dimensional nodes
// carry a row word and a column word of equal length.
//
struct PacketNode
{
    std::string row;
    std::optional<std::string> col;

    std::size_t depth() const noexcept { return row.size(); }
    bool is_2d() const noexcept { return col.has_value(); }

    // "0110" for 1D, "01|10" for 2D ("|" is the 2D root)
    std::string label() const { return col ? row + "|" + *col : row; }

    static PacketNode parse(const std::string& label)
    {
        auto valid = [](const std::string& w) {
            return std::all_of(w.begin(), w.end(), [](char c) { return c == '0' || c == '1'; });
        };
        const auto bar = label.find('|');
        if (bar == std::string::npos) {
            if (!valid(label))
                throw UnknownNode("node word '" + label + "' is not a dyadic word");
            return PacketNode{label, std::nullopt};
        }
        std::string r = label.substr(0, bar);
        std::string c = label.substr(bar + 1);
        if (!valid(r) || !valid(c) || r.size() != c.size())
            throw UnknownNode("node word '" + label + "' is not a pair of equal-length dyadic words");
        return PacketNode{std::move(r), std::move(c)};
    }

    friend auto operator<=>(const PacketNode&, const PacketNode&) = default;
    friend bool operator==(const PacketNode&, const PacketNode&) = default;
};

class PacketTree;
PacketTree corrupt_basis_row(PacketTree tree, const PacketNode& node, std::size_t row);

class PacketTree
{
public:
    Realization realization() const noexcept { return realization_; }
    std::size_t ambient_dim() const noexcept { return ambient_dim_; }
    std::size_t max_depth() const noexcept { return slices_.size() - 1; }
    const std::string& filter_name() const noexcept { return filter_name_; }

    std::size_t size() const noexcept { return nodes_.size(); }
    const PacketNode& node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<PacketNode>& nodes() const noexcept { return nodes_; }

    bool contains(const PacketNode& w) const { return index_.count(w) != 0; }

    std::size_t index_of(const PacketNode& w) const
    {
        auto it = index_.find(w);
        if (it == index_.end())
            throw UnknownNode("node '" + w.label() + "' is not in the packet tree");
        return it->second;
    }

    const Matrix& basis(std::size_t i) const { return bases_.at(i); }
    const Matrix& basis(const PacketNode& w) const { return bases_[index_of(w)]; }

    std::size_t subspace_dim(std::size_t i) const { return bases_.at(i).rows(); }

    const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
    bool is_leaf(std::size_t i) const { return children_.at(i).empty(); }

    // Node indices at depth n, in lexicographic word order.
    const std::vector<std::size_t>& depth_indices(std::size_t n) const
    {
        if (n >= slices_.size())
            throw InvalidDepth("depth " + std::to_string(n) + " exceeds tree max depth " +
                               std::to_string(max_depth()));
        return slices_[n];
    }

    std::size_t node_count(std::size_t n) const { return depth_indices(n).size(); }

    nlohmann::json describe() const
    {
        nlohmann::json nodes = nlohmann::json::array();
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            nodes.push_back({{"word", nodes_[i].label()},
                             {"depth", nodes_[i].depth()},
                             {"dim", bases_[i].rows()}});
        nlohmann::json j = {{"realization", to_string(realization_)},
                            {"ambient_dim", ambient_dim_},
                            {"max_depth", max_depth()},
                            {"nodes", nodes}};
        if (!filter_name_.empty())
            j["filter"] = filter_name_;
        return j;
    }

    // Appends nodes level by level; only the builders use this.
    class Builder;

private:
    friend PacketTree corrupt_basis_row(PacketTree tree, const PacketNode& node, std::size_t row);

    Realization realization_ = Realization::shannon;
    std::size_t ambient_dim_ = 0;
    std::string filter_name_;
    std::vector<PacketNode> nodes_;
    std::vector<Matrix> bases_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::size_t>> slices_;
    std::map<PacketNode, std::size_t> index_;
};

class PacketTree::Builder
{
public:
    Builder(Realization r, std::size_t ambient_dim, std::string filter_name = {})
    {
        tree_.realization_ = r;
        tree_.ambient_dim_ = ambient_dim;
        tree_.filter_name_ = std::move(filter_name);
    }

    std::size_t add(PacketNode w, Matrix basis, std::optional<std::size_t> parent)
    {
        const std::size_t i = tree_.nodes_.size();
        const std::size_t d = w.depth();
        if (tree_.slices_.size() <= d)
            tree_.slices_.resize(d + 1);
        tree_.slices_[d].push_back(i);
        tree_.index_.emplace(w, i);
        tree_.nodes_.push_back(std::move(w));
        tree_.bases_.push_back(std::move(basis));
        tree_.children_.emplace_back();
        if (parent)
            tree_.children_[*parent].push_back(i);
        return i;
    }

    PacketTree finish()
    {
        for (auto& slice : tree_.slices_)
            std::sort(slice.begin(), slice.end(), [&](std::size_t a, std::size_t b) {
                return tree_.nodes_[a] < tree_.nodes_[b];
            });
        for (auto& ch : tree_.children_)
            std::sort(ch.begin(), ch.end(), [&](std::size_t a, std::size_t b) {
                return tree_.nodes_[a] < tree_.nodes_[b];
            });
        return std::move(tree_);
    }

private:
    PacketTree tree_;
};

// Test fixture hook: returns a copy with one basis row of `node` set to zero.
inline PacketTree corrupt_basis_row(PacketTree tree, const PacketNode& node, std::size_t row)
{
    Matrix& b = tree.bases_[tree.index_of(node)];
    if (row >= b.rows())
        throw DimensionMismatch("basis row " + std::to_string(row) + " out of range");
    for (double& v : b.row(row))
        v = 0.0;
    return tree;
}

inline std::size_t word_value(const std::string& w)
{
    std::size_t m = 0;
    for (char c : w)
        m = 2 * m + std::size_t(c == '1');
    return m;
}

inline std::vector<std::string> dyadic_words(std::size_t n)
{
    std::vector<std::string> words;
    for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
        std::string w(n, '0');
        for (std::size_t b = 0; b < n; ++b)
            if (m & (std::size_t{1} << (n - 1 - b)))
                w[b] = '1';
        words.push_back(std::move(w));
    }
    return words;
}

//
// Frequency band of a Shannon node: the contiguous integer range
// [first, last] of length 2^(levels - |w|).
//
struct FrequencyBand
{
    long first;
    long last;
};

inline FrequencyBand shannon_band(std::size_t levels, const std::string& word)
{
    if (word.size() > levels)
        throw InvalidDepth("word longer than the number of levels");
    const long half = 1L << (levels - 1);
    const long width = 1L << (levels - word.size());
    const long m = long(word_value(word));
    return {-half + m * width, -half + (m + 1) * width - 1};
}

// Array position of frequency k.
inline std::size_t shannon_position(std::size_t levels, long k)
{
    return std::size_t(k + (1L << (levels - 1)));
}

inline PacketTree build_shannon_tree(std::size_t levels, std::size_t max_depth)
{
    if (levels == 0)
        throw InvalidDepth("Shannon tree needs at least one level");
    if (max_depth > levels)
        throw InvalidDepth("max depth " + std::to_string(max_depth) + " exceeds levels " +
                           std::to_string(levels));
    const std::size_t dim = std::size_t{1} << levels;
    PacketTree::Builder builder(Realization::shannon, dim);

    auto band_basis = [&](const std::string& word) {
        const auto band = shannon_band(levels, word);
        Matrix b(std::size_t(band.last - band.first + 1), dim);
        for (long k = band.first; k <= band.last; ++k)
            b(std::size_t(k - band.first), shannon_position(levels, k)) = 1.0;
        return b;
    };

    std::vector<std::size_t> frontier{builder.add(PacketNode{"", std::nullopt}, band_basis(""), std::nullopt)};
    std::vector<std::string> words{""};
    for (std::size_t d = 0; d < max_depth; ++d) {
        std::vector<std::size_t> next;
        std::vector<std::string> next_words;
        for (std::size_t i = 0; i < frontier.size(); ++i)
            for (char c : {'0', '1'}) {
                std::string w = words[i] + c;
                next.push_back(builder.add(PacketNode{w, std::nullopt}, band_basis(w), frontier[i]));
                next_words.push_back(std::move(w));
            }
        frontier = std::move(next);
        words = std::move(next_words);
    }
    return builder.finish();
}

namespace detail {

// One periodized analysis channel on signals of even length n: row k holds the
// taps placed at positions 2k, 2k+1, ... (mod n).
inline Matrix analysis_matrix(const std::vector<double>& taps, std::size_t n)
{
    Matrix a(n / 2, n);
    for (std::size_t k = 0; k < n / 2; ++k)
        for (std::size_t i = 0; i < taps.size(); ++i)
            a(k, (2 * k + i) % n) += taps[i];
    return a;
}

// 1D packet bases for all words of length <= depth, keyed by word.
inline std::map<std::string, Matrix> filter_bases_1d(const FilterPair& f, std::size_t len,
                                                     std::size_t depth)
{
    std::map<std::string, Matrix> bases;
    bases.emplace("", Matrix::identity(len));
    std::vector<std::string> level{""};
    for (std::size_t d = 0; d < depth; ++d) {
        std::vector<std::string> next;
        for (const auto& w : level) {
            const Matrix& parent = bases.at(w);
            const std::size_t n = parent.rows();
            bases.emplace(w + '0', analysis_matrix(f.lowpass(), n) * parent);
            bases.emplace(w + '1', analysis_matrix(f.highpass(), n) * parent);
            next.push_back(w + '0');
            next.push_back(w + '1');
        }
        level = std::move(next);
    }
    return bases;
}

inline void require_dyadic_divisible(std::size_t len, std::size_t depth, const char* what)
{
    if (depth >= 8 * sizeof(std::size_t) || len % (std::size_t{1} << depth) != 0)
        throw InvalidDepth(std::string("2^depth must divide the ") + what + " (" +
                           std::to_string(len) + ", depth " + std::to_string(depth) + ")");
}

} // namespace detail

inline PacketTree build_filter_tree_1d(const FilterPair& f, std::size_t signal_len, std::size_t depth)
{
    if (signal_len == 0)
        throw InvalidDepth("signal length must be positive");
    detail::require_dyadic_divisible(signal_len, depth, "signal length");
    auto bases = detail::filter_bases_1d(f, signal_len, depth);

    PacketTree::Builder builder(Realization::filterbank_1d, signal_len, f.name());
    std::map<std::string, std::size_t> ids;
    ids[""] = builder.add(PacketNode{"", std::nullopt}, bases.at(""), std::nullopt);
    for (std::size_t d = 1; d <= depth; ++d)
        for (const auto& w : dyadic_words(d))
            ids[w] = builder.add(PacketNode{w, std::nullopt}, bases.at(w), ids.at(w.substr(0, d - 1)));
    return builder.finish();
}

// Row-major flattening: entry (i, j) of a patch sits at i * side + j.
inline PacketTree build_filter_tree_2d(const FilterPair& f, std::size_t patch_side, std::size_t depth)
{
    if (patch_side == 0)
        throw InvalidDepth("patch side must be positive");
    detail::require_dyadic_divisible(patch_side, depth, "patch side");
    auto bases = detail::filter_bases_1d(f, patch_side, depth);
    const std::size_t dim = patch_side * patch_side;

    auto tensor = [&](const Matrix& br, const Matrix& bc) {
        Matrix b(br.rows() * bc.rows(), dim);
        for (std::size_t a = 0; a < br.rows(); ++a)
            for (std::size_t c = 0; c < bc.rows(); ++c) {
                auto out = b.row(a * bc.rows() + c);
                for (std::size_t i = 0; i < patch_side; ++i) {
                    const double ri = br(a, i);
                    if (ri == 0.0)
                        continue;
                    for (std::size_t j = 0; j < patch_side; ++j)
                        out[i * patch_side + j] = ri * bc(c, j);
                }
            }
        return b;
    };

    PacketTree::Builder builder(Realization::filterbank_2d, dim, f.name());
    std::map<PacketNode, std::size_t> ids;
    const PacketNode root{"", std::string{}};
    ids[root] = builder.add(root, tensor(bases.at(""), bases.at("")), std::nullopt);
    for (std::size_t d = 1; d <= depth; ++d) {
        const auto words = dyadic_words(d);
        for (const auto& r : words)
            for (const auto& c : words) {
                PacketNode w{r, c};
                PacketNode parent{r.substr(0, d - 1), c.substr(0, d - 1)};
                ids[w] = builder.add(w, tensor(bases.at(r), bases.at(c)), ids.at(parent));
            }
    }
    return builder.finish();
}

// P_w = BᵀB as a plain symmetric matrix (no spectral data).
inline SymMatrix projection_matrix(const PacketTree& tree, std::size_t i)
{
    return SymMatrix(gram_of_rows(tree.basis(i)));
}

inline PsdOperator projection(const PacketTree& tree, const PacketNode& w)
{
    return make_psd(projection_matrix(tree, tree.index_of(w)));
}

inline std::vector<PacketNode> depth_nodes(const PacketTree& tree, std::size_t n)
{
    std::vector<PacketNode> out;
    for (std::size_t i : tree.depth_indices(n))
        out.push_back(tree.node(i));
    return out;
}

struct TreeReport
{
    double partition = 0.0;           // max_n ||sum_{|w|=n} P_w - I||_max
    double child_splitting = 0.0;     // max_w ||P_w - sum_children P_v||_max
    double child_orthogonality = 0.0; // max ||P_v P_v'||_max over sibling pairs
    double basis_orthonormality = 0.0; // max ||B Bᵀ - I||_max

    double worst() const
    {
        return std::max({partition, child_splitting, child_orthogonality, basis_orthonormality});
    }
    bool ok(double tol = 1e-10) const { return worst() <= tol; }

    nlohmann::json to_json() const
    {
        return {{"partition", partition},
                {"child_splitting", child_splitting},
                {"child_orthogonality", child_orthogonality},
                {"basis_orthonormality", basis_orthonormality}};
    }
};

inline TreeReport validate_tree(const PacketTree& tree)
{
    TreeReport rep;
    std::vector<Matrix> proj;
    proj.reserve(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
        proj.push_back(gram_of_rows(tree.basis(i)));
        const Matrix g = outer_gram(tree.basis(i));
        rep.basis_orthonormality =
            std::max(rep.basis_orthonormality, max_abs_diff(g, Matrix::identity(g.rows())));
    }

    const Matrix eye = Matrix::identity(tree.ambient_dim());
    for (std::size_t n = 0; n <= tree.max_depth(); ++n) {
        Matrix sum(tree.ambient_dim(), tree.ambient_dim());
        for (std::size_t i : tree.depth_indices(n))
            sum += proj[i];
        rep.partition = std::max(rep.partition, max_abs_diff(sum, eye));
    }

    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& ch = tree.children(i);
        if (ch.empty())
            continue;
        Matrix sum(tree.ambient_dim(), tree.ambient_dim());
        for (std::size_t v : ch)
            sum += proj[v];
        rep.child_splitting = std::max(rep.child_splitting, max_abs_diff(proj[i], sum));
        for (std::size_t a = 0; a < ch.size(); ++a)
            for (std::size_t b = a + 1; b < ch.size(); ++b)
                rep.child_orthogonality =
                    std::max(rep.child_orthogonality, (proj[ch[a]] * proj[ch[b]]).max_abs());
    }
    return rep;
}

} // namespace wpc
