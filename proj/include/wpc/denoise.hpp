#pragma once

//
// Patch-based denoising by packet-block selection:
//
//   1. separable 2D packet tree on m x m patches, depth n
//   2. block scores s_w = (1/M) sum_i ||P_w y_i||^2  (= tr(P_w R_hat))
//   3. keep the K best blocks, T_K = sum_{w in W_K} P_w
//   4. replace each patch y by T_K y and overlap-average
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "content.hpp"
#include "errors.hpp"
#include "filters.hpp"
#include "image.hpp"
#include "matrix.hpp"
#include "packet_tree.hpp"
#include "psd.hpp"

namespace wpc {

struct PatchPosition
{
    std::size_t row = 0;
    std::size_t col = 0;
};

struct PatchSet
{
    std::size_t patch_side = 0;
    std::size_t stride = 0;
    std::vector<PatchPosition> positions;
    std::vector<Vector> patches; // row-major flattening, length m^2

    std::size_t size() const noexcept { return patches.size(); }
};

// Anchors 0, stride, 2 stride, ... plus one flush with the far edge if the
// regular grid does not reach it.
inline std::vector<std::size_t> patch_anchors(std::size_t extent, std::size_t m, std::size_t stride)
{
    std::vector<std::size_t> a;
    for (std::size_t p = 0; p + m <= extent; p += stride)
        a.push_back(p);
    if (a.back() + m < extent)
        a.push_back(extent - m);
    return a;
}

inline PatchSet extract_patches(const ImageBuffer& img, std::size_t m, std::size_t stride)
{
    if (m == 0 || stride == 0)
        throw InvalidConfig("patch side and stride must be positive");
    if (m > std::min(img.width, img.height))
        throw InvalidConfig("patch side " + std::to_string(m) + " exceeds the image size " +
                            std::to_string(img.width) + "x" + std::to_string(img.height));

    PatchSet ps{m, stride, {}, {}};
    for (std::size_t r : patch_anchors(img.height, m, stride))
        for (std::size_t c : patch_anchors(img.width, m, stride)) {
            Vector y(m * m);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    y[i * m + j] = img.at(r + i, c + j);
            ps.positions.push_back({r, c});
            ps.patches.push_back(std::move(y));
        }
    return ps;
}

// R_hat = (1/M) sum_i y_i y_iᵀ
inline PsdOperator second_moment(const PatchSet& ps, double tol = default_psd_tol)
{
    if (ps.patches.empty())
        throw InvalidConfig("second moment of an empty patch set");
    const std::size_t d = ps.patches.front().size();
    Matrix acc(d, d);
    for (const auto& y : ps.patches) {
        if (y.size() != d)
            throw DimensionMismatch("patches of unequal length");
        for (std::size_t i = 0; i < d; ++i) {
            if (y[i] == 0.0)
                continue;
            auto row = acc.row(i);
            for (std::size_t j = 0; j < d; ++j)
                row[j] += y[i] * y[j];
        }
    }
    acc *= 1.0 / double(ps.patches.size());
    return make_psd(SymMatrix(std::move(acc)), tol);
}

struct BlockScores
{
    std::size_t depth = 0;
    std::vector<std::size_t> node_indices; // lexicographic depth slice
    std::vector<PacketNode> nodes;
    std::vector<double> scores;

    double total() const { return std::accumulate(scores.begin(), scores.end(), 0.0); }
};

inline BlockScores block_scores(const PatchSet& ps, const PacketTree& tree, std::size_t n,
                                bool validate = false)
{
    if (ps.patches.empty())
        throw InvalidConfig("block scores of an empty patch set");
    if (tree.ambient_dim() != ps.patches.front().size())
        throw DimensionMismatch("tree ambient dimension " + std::to_string(tree.ambient_dim()) +
                                " does not match patch length " +
                                std::to_string(ps.patches.front().size()));
    BlockScores bs;
    bs.depth = n;
    for (std::size_t i : tree.depth_indices(n)) {
        const Matrix& b = tree.basis(i);
        double s = 0.0;
        for (const auto& y : ps.patches) {
            const Vector c = b * y;
            s += dot(c, c);
        }
        bs.node_indices.push_back(i);
        bs.nodes.push_back(tree.node(i));
        bs.scores.push_back(s / double(ps.size()));
    }

    if (validate) {
        // s_w = tr(P_w R_hat)
        const PsdOperator r = second_moment(ps);
        for (std::size_t k = 0; k < bs.scores.size(); ++k) {
            const double t = trace_of(projection_matrix(tree, bs.node_indices[k]).matrix() * r.matrix());
            if (std::abs(t - bs.scores[k]) > 1e-8 * std::max(std::abs(t), std::abs(bs.scores[k])))
                throw NumericalBreakdown("block score of '" + bs.nodes[k].label() +
                                         "' disagrees with tr(P_w R_hat)");
        }
    }
    return bs;
}

// HS scores ||C_w(R_hat)||_2 over the depth-n slice.
inline BlockScores hs_block_scores(const PsdOperator& r, const PacketTree& tree, std::size_t n)
{
    detail::require_dim(tree, r.dim());
    const PsdOperator s = sqrt_psd(r);
    BlockScores bs;
    bs.depth = n;
    for (std::size_t i : tree.depth_indices(n)) {
        bs.node_indices.push_back(i);
        bs.nodes.push_back(tree.node(i));
        bs.scores.push_back(detail::block_stats(detail::content_factor(s.matrix(), tree.basis(i))).hs);
    }
    return bs;
}

struct Selection
{
    std::size_t k = 0;
    std::vector<std::size_t> node_indices; // chosen, in score order
    std::vector<PacketNode> chosen;
    PsdOperator projection; // T_K
};

inline Selection select_top_k(const BlockScores& scores, std::size_t k, const PacketTree& tree)
{
    if (k == 0)
        throw InvalidConfig("K must be at least 1");
    std::vector<std::size_t> order(scores.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // the slice is lexicographic, so a stable sort breaks ties by word
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores.scores[a] > scores.scores[b];
    });
    order.resize(std::min(k, order.size()));

    Selection sel;
    sel.k = k;
    Matrix t(tree.ambient_dim(), tree.ambient_dim());
    for (std::size_t o : order) {
        sel.node_indices.push_back(scores.node_indices[o]);
        sel.chosen.push_back(scores.nodes[o]);
        t += gram_of_rows(tree.basis(scores.node_indices[o]));
    }
    sel.projection = make_psd(SymMatrix(std::move(t)));
    return sel;
}

// T_K y computed from per-node coefficients.
inline Vector apply_selection(const Selection& sel, const PacketTree& tree, std::span<const double> y)
{
    Vector out(y.size(), 0.0);
    for (std::size_t i : sel.node_indices) {
        const Matrix& b = tree.basis(i);
        const Vector c = b * y;
        for (std::size_t r = 0; r < b.rows(); ++r) {
            auto row = b.row(r);
            for (std::size_t j = 0; j < y.size(); ++j)
                out[j] += c[r] * row[j];
        }
    }
    return out;
}

enum class ScoreMode { trace, hs };

struct DenoiseConfig
{
    std::size_t patch_side = 8;
    std::size_t depth = 2;
    std::size_t top_k = 4;
    std::size_t stride = 0; // 0 selects patch_side / 2
    std::string filter = "haar";
    ScoreMode mode = ScoreMode::trace;

    std::size_t effective_stride() const { return stride ? stride : std::max<std::size_t>(1, patch_side / 2); }

    void validate() const
    {
        if (patch_side == 0)
            throw InvalidConfig("patch side must be positive");
        if (depth == 0 || depth >= 32 || patch_side % (std::size_t{1} << depth) != 0)
            throw InvalidConfig("2^depth must divide the patch side (m = " + std::to_string(patch_side) +
                                ", n = " + std::to_string(depth) + ")");
        if (top_k == 0)
            throw InvalidConfig("K must be at least 1");
        if (filter != "haar" && filter != "d4")
            throw InvalidConfig("unknown filter '" + filter + "'");
    }
};

struct DenoiseReport
{
    DenoiseConfig config;
    std::size_t node_count = 0;
    std::size_t patch_count = 0;
    BlockScores scores;
    std::vector<PacketNode> chosen;
    double retained_energy_fraction = 0.0;
    std::optional<double> psnr_noisy;
    std::optional<double> psnr_denoised;

    nlohmann::json to_json() const
    {
        nlohmann::json sc = nlohmann::json::array();
        for (std::size_t i = 0; i < scores.nodes.size(); ++i)
            sc.push_back({{"word", scores.nodes[i].label()}, {"s_w", scores.scores[i]}});
        nlohmann::json ch = nlohmann::json::array();
        for (const auto& w : chosen)
            ch.push_back(w.label());
        nlohmann::json j = {{"m", config.patch_side},
                            {"n", config.depth},
                            {"K", config.top_k},
                            {"stride", config.effective_stride()},
                            {"filter", config.filter},
                            {"mode", config.mode == ScoreMode::trace ? "trace" : "hs"},
                            {"N_n", node_count},
                            {"M", patch_count},
                            {"scores", sc},
                            {"chosen", ch},
                            {"retained_energy_fraction", retained_energy_fraction}};
        if (psnr_noisy)
            j["psnr_noisy"] = *psnr_noisy;
        if (psnr_denoised)
            j["psnr_denoised"] = *psnr_denoised;
        return j;
    }
};

struct DenoiseResult
{
    ImageBuffer image;
    DenoiseReport report;
};

inline DenoiseResult denoise_image(const ImageBuffer& img, const DenoiseConfig& cfg)
{
    cfg.validate();
    const PacketTree tree = build_filter_tree_2d(filter_by_name(cfg.filter), cfg.patch_side, cfg.depth);
    const PatchSet ps = extract_patches(img, cfg.patch_side, cfg.effective_stride());

    // trace scores always feed the retained-energy fraction
    const BlockScores energy = block_scores(ps, tree, cfg.depth);
    const BlockScores ranking =
        cfg.mode == ScoreMode::trace ? energy : hs_block_scores(second_moment(ps), tree, cfg.depth);
    const Selection sel = select_top_k(ranking, cfg.top_k, tree);

    std::vector<Vector> cleaned(ps.size());
    for (std::size_t p = 0; p < ps.size(); ++p)
        cleaned[p] = apply_selection(sel, tree, ps.patches[p]);

    // fixed patch order keeps the accumulation bit-reproducible
    ImageBuffer sum(img.width, img.height);
    std::vector<std::size_t> cover(img.pixels.size(), 0);
    const std::size_t m = cfg.patch_side;
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto [r0, c0] = ps.positions[p];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                sum.at(r0 + i, c0 + j) += cleaned[p][i * m + j];
                ++cover[(r0 + i) * img.width + c0 + j];
            }
    }
    for (std::size_t i = 0; i < sum.pixels.size(); ++i)
        sum.pixels[i] /= double(cover[i]);

    DenoiseReport rep;
    rep.config = cfg;
    rep.node_count = tree.node_count(cfg.depth);
    rep.patch_count = ps.size();
    rep.scores = ranking;
    rep.chosen = sel.chosen;
    const double total = energy.total();
    double kept = 0.0;
    for (std::size_t i : sel.node_indices)
        for (std::size_t k = 0; k < energy.node_indices.size(); ++k)
            if (energy.node_indices[k] == i)
                kept += energy.scores[k];
    rep.retained_energy_fraction = total > 0.0 ? kept / total : 1.0;
    return {std::move(sum), std::move(rep)};
}

} // namespace wpc
