#pragma once

//
// Sequential content extraction
//
//     D_k     = (R^{(k-1)})^{1/2} P_{w_k} (R^{(k-1)})^{1/2}
//     R^{(k)} = R^{(k-1)} - D_k
//
// along a given node sequence, or along the depth-n node of largest trace
// (trace greedy) or largest HS norm (HS greedy) of the current remainder.
// Remainders are re-projected onto the positive cone after every step.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "content.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "packet_tree.hpp"
#include "psd.hpp"

namespace wpc {

enum class ExtractionMode { sequence, trace_greedy, hs_greedy };

inline std::string to_string(ExtractionMode m)
{
    switch (m) {
    case ExtractionMode::sequence:
        return "sequence";
    case ExtractionMode::trace_greedy:
        return "trace";
    case ExtractionMode::hs_greedy:
        return "hs";
    }
    return "unknown";
}

enum class RetainPolicy { stats_only, full_blocks };

struct ExtractionStep
{
    std::size_t k = 0;
    PacketNode node;
    double extracted_trace = 0.0;
    double extracted_hs = 0.0;
    double remainder_trace = 0.0;
    double remainder_hs = 0.0;
    std::optional<double> gamma; // coherence of R^{(k-1)}, HS greedy only
    double bound_trace = 0.0;    // (1 - 1/N)^k tr R
    double bound_hs = 0.0;       // (1 - 1/N^2)^{k/2} ||R||_2
};

struct ExtractionTrace
{
    ExtractionMode mode = ExtractionMode::sequence;
    std::optional<std::size_t> depth; // absent for mixed-depth sequences
    std::size_t node_count = 0;       // N_n
    double initial_trace = 0.0;
    double initial_hs = 0.0;
    std::vector<ExtractionStep> steps;

    // Filled under RetainPolicy::full_blocks: D_1..D_m and R^{(0)}..R^{(m)}.
    std::vector<SymMatrix> blocks;
    std::vector<SymMatrix> remainders;

    std::optional<PsdOperator> final_remainder;
};

struct GreedyOptions
{
    std::size_t max_steps = 64;
    double stop_tol = 1e-12;
    double psd_tol = default_psd_tol;
    RetainPolicy retain = RetainPolicy::stats_only;
};

//
// Block-diagonal pinching E_n(A) = sum_{|w|=n} P_w A P_w.
//
inline SymMatrix conditional_expectation(const SymMatrix& a, const PacketTree& tree, std::size_t n)
{
    detail::require_dim(tree, a.dim());
    Matrix out(a.dim(), a.dim());
    for (std::size_t i : tree.depth_indices(n)) {
        const Matrix& b = tree.basis(i);
        const Matrix bt = b.transpose();
        out += bt * (b * a.matrix() * bt) * b;
    }
    return SymMatrix(std::move(out));
}

struct CoherenceValue
{
    double gamma = 1.0;
    double denominator = 0.0; // sum_w ||C_w(A)||_2^2
    double numerator = 0.0;   // ||A||_2^2
};

// Denominators at or below this are treated as A == 0.
inline constexpr double coherence_floor = 1e-300;

namespace detail {

inline CoherenceValue coherence_from(const PsdOperator& a, const PsdOperator& sqrt_a,
                                     const PacketTree& tree, std::size_t n)
{
    CoherenceValue cv;
    cv.numerator = std::pow(hs_norm(a), 2);
    for (std::size_t i : tree.depth_indices(n))
        cv.denominator += std::pow(block_stats(content_factor(sqrt_a.matrix(), tree.basis(i))).hs, 2);
    if (!(cv.denominator > coherence_floor))
        throw UndefinedCoherence("coherence is undefined for a zero operator");

    // sum_w ||C_w(A)||^2 = tr(E_n(A) A)
    const double via_pinching = trace_of(conditional_expectation(a.base(), tree, n).matrix() * a.matrix());
    if (std::abs(via_pinching - cv.denominator) > 1e-8 * std::abs(cv.denominator))
        throw NumericalBreakdown("coherence denominator disagrees with tr(E_n(A) A)");
    cv.gamma = cv.numerator / cv.denominator;
    return cv;
}

} // namespace detail

inline CoherenceValue coherence(const PsdOperator& a, const PacketTree& tree, std::size_t n)
{
    detail::require_dim(tree, a.dim());
    return detail::coherence_from(a, sqrt_psd(a), tree, n);
}

namespace detail {

class Extractor
{
public:
    Extractor(const PsdOperator& r, const PacketTree& tree, ExtractionMode mode,
              std::optional<std::size_t> depth, const GreedyOptions& opt)
        : tree_(tree), opt_(opt), source_(r.base()), current_(r), sum_(r.dim(), r.dim())
    {
        require_dim(tree, r.dim());
        scale_ = r.max_eigenvalue();
        trace_.mode = mode;
        trace_.depth = depth;
        trace_.node_count = depth ? tree.node_count(*depth) : 0;
        trace_.initial_trace = trace(r);
        trace_.initial_hs = hs_norm(r);
        if (opt.retain == RetainPolicy::full_blocks)
            trace_.remainders.push_back(r.base());
    }

    const PsdOperator& current() const { return current_; }
    const PsdOperator& current_sqrt()
    {
        if (!sqrt_)
            sqrt_ = sqrt_psd(current_);
        return *sqrt_;
    }
    std::size_t steps() const { return trace_.steps.size(); }
    const ExtractionTrace& record() const { return trace_; }

    void extract(std::size_t node_index, std::optional<double> gamma)
    {
        const std::size_t k = trace_.steps.size() + 1;
        const Matrix y = content_factor(current_sqrt().matrix(), tree_.basis(node_index));
        const BlockStats st = block_stats(y);
        SymMatrix d(gram_of_rows(y));

        PsdOperator next;
        try {
            next = make_psd(current_.base() - d, opt_.psd_tol, scale_);
        } catch (const NotPositive& e) {
            throw NumericalBreakdown("remainder left the positive cone at step " + std::to_string(k) +
                                         ": " + e.what(),
                                     std::ptrdiff_t(k));
        }

        sum_ += d.matrix();
        const double err = max_abs_diff(source_.matrix(), sum_ + next.matrix());
        if (err > reconstruction_tol(source_))
            throw NumericalBreakdown("telescoping identity failed at step " + std::to_string(k) +
                                         " (max error " + std::to_string(err) + ")",
                                     std::ptrdiff_t(k));

        ExtractionStep step;
        step.k = k;
        step.node = tree_.node(node_index);
        step.extracted_trace = st.trace;
        step.extracted_hs = st.hs;
        step.remainder_trace = trace(next);
        step.remainder_hs = hs_norm(next);
        step.gamma = gamma;
        if (trace_.mode != ExtractionMode::sequence) {
            const double nn = double(trace_.node_count);
            step.bound_trace = std::pow(1.0 - 1.0 / nn, double(k)) * trace_.initial_trace;
            step.bound_hs = std::pow(1.0 - 1.0 / (nn * nn), 0.5 * double(k)) * trace_.initial_hs;
        } else {
            // arbitrary sequences: only the Loewner bound R^{(k)} <= R applies
            step.bound_trace = trace_.initial_trace;
            step.bound_hs = trace_.initial_hs;
        }
        trace_.steps.push_back(std::move(step));

        if (opt_.retain == RetainPolicy::full_blocks) {
            trace_.blocks.push_back(std::move(d));
            trace_.remainders.push_back(next.base());
        }
        current_ = std::move(next);
        sqrt_.reset();
    }

    ExtractionTrace finish()
    {
        trace_.final_remainder = current_;
        return std::move(trace_);
    }

private:
    const PacketTree& tree_;
    GreedyOptions opt_;
    SymMatrix source_;
    PsdOperator current_;
    std::optional<PsdOperator> sqrt_;
    Matrix sum_;
    double scale_ = 0.0;
    ExtractionTrace trace_;
};

// Index of the largest score; ties go to the earliest (lexicographically
// smallest) node because the slice is ordered.
inline std::size_t argmax_first(const std::vector<double>& scores)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best])
            best = i;
    return best;
}

} // namespace detail

inline ExtractionTrace extract_sequence(const PsdOperator& r, const PacketTree& tree,
                                        const std::vector<PacketNode>& nodes,
                                        RetainPolicy retain = RetainPolicy::stats_only,
                                        double psd_tol = default_psd_tol)
{
    std::vector<std::size_t> ids;
    for (const auto& w : nodes)
        ids.push_back(tree.index_of(w));

    std::optional<std::size_t> depth;
    if (!nodes.empty() && std::all_of(nodes.begin(), nodes.end(),
                                      [&](const PacketNode& w) { return w.depth() == nodes[0].depth(); }))
        depth = nodes[0].depth();

    GreedyOptions opt;
    opt.retain = retain;
    opt.psd_tol = psd_tol;
    detail::Extractor ex(r, tree, ExtractionMode::sequence, depth, opt);
    for (std::size_t i : ids)
        ex.extract(i, std::nullopt);
    return ex.finish();
}

inline ExtractionTrace trace_greedy(const PsdOperator& r, const PacketTree& tree, std::size_t n,
                                    const GreedyOptions& opt = {})
{
    const auto& slice = tree.depth_indices(n);
    detail::Extractor ex(r, tree, ExtractionMode::trace_greedy, n, opt);
    const double floor = opt.stop_tol * trace(r);

    while (ex.steps() < opt.max_steps && trace(ex.current()) > floor) {
        std::vector<double> scores;
        for (std::size_t i : slice)
            scores.push_back(
                detail::block_stats(detail::content_factor(ex.current_sqrt().matrix(), tree.basis(i))).trace);
        ex.extract(slice[detail::argmax_first(scores)], std::nullopt);
    }
    return ex.finish();
}

inline ExtractionTrace hs_greedy(const PsdOperator& r, const PacketTree& tree, std::size_t n,
                                 const GreedyOptions& opt = {})
{
    const auto& slice = tree.depth_indices(n);
    detail::Extractor ex(r, tree, ExtractionMode::hs_greedy, n, opt);
    const double floor = opt.stop_tol * hs_norm(r);

    while (ex.steps() < opt.max_steps && hs_norm(ex.current()) > floor) {
        CoherenceValue cv;
        try {
            cv = detail::coherence_from(ex.current(), ex.current_sqrt(), tree, n);
        } catch (const UndefinedCoherence&) {
            break;
        }
        std::vector<double> scores;
        for (std::size_t i : slice)
            scores.push_back(
                detail::block_stats(detail::content_factor(ex.current_sqrt().matrix(), tree.basis(i))).hs);
        ex.extract(slice[detail::argmax_first(scores)], cv.gamma);
    }
    return ex.finish();
}

} // namespace wpc
