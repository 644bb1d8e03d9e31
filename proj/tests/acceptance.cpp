// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "support.hpp"

using namespace wpc;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

double sq(double x) { return x * x; }

struct Outcome
{
    bool pass = true;
    std::string detail;
};

// Counts checks and keeps the first failure.
struct Ledger
{
    Outcome out;
    std::size_t checks = 0;

    void require(bool cond, const std::string& what)
    {
        ++checks;
        if (!cond && out.pass) {
            out.pass = false;
            out.detail = what;
        }
    }
};

struct Member
{
    std::string label;
    PacketTree tree;
    PsdOperator r;
};

// 50 seeded Gram operators over dims {8, 16, 32}, Shannon and Haar/D4 trees of depth 3.
std::vector<Member> ensemble()
{
    Gen g(20240601);
    const std::size_t dims[] = {8, 16, 32};
    const char* kinds[] = {"shannon", "haar", "d4"};
    std::vector<Member> out;
    for (std::size_t t = 0; t < 50; ++t) {
        const std::size_t dim = dims[t % 3];
        const std::string kind = kinds[(t / 3) % 3];
        PacketTree tree = kind == "shannon" ? build_shannon_tree(std::size_t(std::log2(double(dim))), 3)
                                            : build_filter_tree_1d(filter_by_name(kind), dim, 3);
        const std::size_t rank = t % 4 == 3 ? 1 + g.index(dim) : dim;
        out.push_back({kind + "-" + std::to_string(dim) + "#" + std::to_string(t), std::move(tree),
                       psd(g.gram(dim, rank))});
    }
    return out;
}

Dense dense_projection(const Matrix& basis)
{
    const std::size_t d = basis.cols();
    Dense p(d, std::vector<double>(d, 0.0));
    for (std::size_t r = 0; r < basis.rows(); ++r)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                p[i][j] += basis(r, i) * basis(r, j);
    return p;
}

Outcome ac1_reconstruction(const std::vector<Member>& ens, Ledger& lg)
{
    for (const auto& m : ens) {
        const Dense r = to_dense(m.r.matrix());
        const double bound = 1e-8 * (1 + frob(r));
        const PsdOperator s = sqrt_psd(m.r);
        lg.require(frob_diff(mul(to_dense(s.matrix()), to_dense(s.matrix())), r) <= bound,
                   m.label + ": square root does not square back");
        for (std::size_t n = 1; n <= 3; ++n) {
            Dense sum(r.size(), std::vector<double>(r.size(), 0.0));
            for (std::size_t i : m.tree.depth_indices(n)) {
                const Dense c = to_dense(content_operator(m.r, s, m.tree, m.tree.node(i)).op.matrix());
                for (std::size_t a = 0; a < r.size(); ++a)
                    for (std::size_t b = 0; b < r.size(); ++b)
                        sum[a][b] += c[a][b];
            }
            const double err = frob_diff(sum, r);
            lg.require(err <= bound, m.label + " n=" + std::to_string(n) + ": error " + std::to_string(err));
        }
    }
    return lg.out;
}

Outcome ac2_shannon_oracle(Ledger& lg)
{
    Gen g(7001);
    const PacketTree tree = build_shannon_tree(4, 4);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> sym(16);
        for (double& v : sym)
            v = g.uniform(0.0, 10.0);
        const PsdOperator r = make_psd(SymMatrix(Matrix::diagonal(sym)));
        const CylinderWeights cw = cylinder_weights(r, tree);
        for (std::size_t i = 0; i < tree.size(); ++i) {
            const std::string w = tree.node(i).label();
            const double err = std::abs(cw.mass[i] - symbol_block_sum(sym, 4, w));
            lg.require(err <= 1e-12, "symbol " + std::to_string(t) + " word '" + w + "': error " + std::to_string(err));
        }
    }
    return lg.out;
}

Outcome ac3_trace_envelope(const std::vector<Member>& ens, Ledger& lg)
{
    for (const auto& m : ens)
        for (std::size_t n = 1; n <= 3; ++n) {
            const auto tr = trace_greedy(m.r, m.tree, n);
            const double nn = double(m.tree.node_count(n)), t0 = tr.initial_trace;
            for (const auto& s : tr.steps)
                lg.require(s.remainder_trace <= std::pow(1 - 1 / nn, double(s.k)) * t0 * (1 + 1e-9),
                           m.label + " n=" + std::to_string(n) + " k=" + std::to_string(s.k));
            if (tr.final_remainder)
                lg.require(std::abs(trace(*tr.final_remainder) - (tr.steps.empty() ? t0 : tr.steps.back().remainder_trace)) <=
                               1e-9 * (1 + t0),
                           m.label + ": recorded remainder trace disagrees with final remainder");
        }

    Gen g(7002);
    for (std::size_t levels = 3; levels <= 5; ++levels)
        for (std::size_t n = 1; n <= 3; ++n)
            for (int t = 0; t < 4; ++t) {
                std::vector<double> sym(std::size_t{1} << levels);
                for (double& v : sym)
                    v = g.uniform();
                const PsdOperator r = make_psd(SymMatrix(Matrix::diagonal(sym)));
                const PacketTree tree = build_shannon_tree(levels, n);
                GreedyOptions opt;
                opt.max_steps = tree.node_count(n);
                opt.stop_tol = 0.0;
                const auto tr = trace_greedy(r, tree, n, opt);
                const double rem = tr.steps.empty() ? trace(r) : tr.steps.back().remainder_trace;
                lg.require(rem <= 1e-12 * trace(r), "diagonal Shannon L" + std::to_string(levels) + " n=" +
                                                        std::to_string(n) + ": remainder " + std::to_string(rem));
            }
    return lg.out;
}

Outcome ac4_hs_envelopes(const std::vector<Member>& ens, Ledger& lg)
{
    for (const auto& m : ens)
        for (std::size_t n = 1; n <= 3; ++n) {
            const auto tr = hs_greedy(m.r, m.tree, n);
            const double nn = double(m.tree.node_count(n)), h0 = sq(tr.initial_hs);
            double prev = h0;
            for (const auto& s : tr.steps) {
                const std::string at = m.label + " n=" + std::to_string(n) + " k=" + std::to_string(s.k);
                lg.require(s.gamma.has_value(), at + ": no coherence recorded");
                const double cur = sq(s.remainder_hs);
                if (s.gamma)
                    lg.require(cur <= (1 - 1 / (*s.gamma * nn)) * prev * (1 + 1e-9), at + ": per-step bound");
                lg.require(cur <= std::pow(1 - 1 / (nn * nn), double(s.k)) * h0 * (1 + 1e-9), at + ": uniform bound");
                prev = cur;
            }
        }

    Rng rng(7004);
    for (const auto& m : ens)
        for (std::size_t n = 1; n <= 3; ++n) {
            const PsdOperator r = make_psd(random_block_diagonal(rng, m.tree, n));
            const auto tr = hs_greedy(r, m.tree, n);
            const double nn = double(m.tree.node_count(n));
            double prev = sq(tr.initial_hs);
            for (const auto& s : tr.steps) {
                const double cur = sq(s.remainder_hs);
                lg.require(cur <= (1 - 1 / nn) * prev * (1 + 1e-9),
                           m.label + " block-diagonal n=" + std::to_string(n) + " k=" + std::to_string(s.k));
                prev = cur;
            }
        }
    return lg.out;
}

Outcome ac5_coherence(const std::vector<Member>& ens, Ledger& lg)
{
    for (const auto& m : ens) {
        const PsdOperator s = sqrt_psd(m.r);
        const Dense a = to_dense(m.r.matrix()), sd = to_dense(s.matrix());
        for (std::size_t n = 1; n <= 3; ++n) {
            const std::string at = m.label + " n=" + std::to_string(n);
            const CoherenceValue cv = coherence(m.r, m.tree, n);
            const double nn = double(m.tree.node_count(n));
            lg.require(cv.gamma >= 1 - 1e-9 && cv.gamma <= nn + 1e-9, at + ": gamma " + std::to_string(cv.gamma));

            // sum_w ||S P_w S||^2 against tr(E_n(A) A), both dense
            double blocks = 0.0;
            Dense pinched(a.size(), std::vector<double>(a.size(), 0.0));
            for (std::size_t i : m.tree.depth_indices(n)) {
                const Dense p = dense_projection(m.tree.basis(i));
                blocks += sq(frob(mul(mul(sd, p), sd)));
                const Dense pap = mul(mul(p, a), p);
                for (std::size_t x = 0; x < a.size(); ++x)
                    for (std::size_t y = 0; y < a.size(); ++y)
                        pinched[x][y] += pap[x][y];
            }
            const double via_pinching = tr(mul(pinched, a));
            lg.require(std::abs(blocks - via_pinching) <= 1e-8 * via_pinching, at + ": sum of block norms != tr(E A)");
            lg.require(std::abs(cv.denominator - blocks) <= 1e-8 * blocks, at + ": denominator disagrees");
            lg.require(std::abs(cv.gamma - sq(frob(a)) / blocks) <= 1e-8 * cv.gamma, at + ": gamma disagrees");
        }
    }

    Rng rng(7005);
    for (const auto& m : ens)
        for (std::size_t n = 1; n <= 3; ++n) {
            const PsdOperator bd = make_psd(random_block_diagonal(rng, m.tree, n));
            const double gb = coherence(bd, m.tree, n).gamma;
            lg.require(std::abs(gb - 1) <= 1e-9, m.label + " block-diagonal gamma " + std::to_string(gb));

            // unit v with <v, P_w v> = 1/N for every w
            const auto& slice = m.tree.depth_indices(n);
            const double nn = double(slice.size());
            std::vector<double> v(m.tree.ambient_dim(), 0.0);
            for (std::size_t i : slice)
                for (std::size_t j = 0; j < v.size(); ++j)
                    v[j] += m.tree.basis(i)(0, j) / std::sqrt(nn);
            Dense vv(v.size(), std::vector<double>(v.size()));
            for (std::size_t i = 0; i < v.size(); ++i)
                for (std::size_t j = 0; j < v.size(); ++j)
                    vv[i][j] = v[i] * v[j];
            const double ge = coherence(psd(vv), m.tree, n).gamma;
            lg.require(std::abs(ge - nn) <= 1e-6, m.label + " equal-spread gamma " + std::to_string(ge));
        }
    return lg.out;
}

Outcome ac6_difference_inequality(const std::vector<Member>& ens, Ledger& lg)
{
    Gen g(7006);
    for (int t = 0; t < 200; ++t) {
        const auto& m = ens[g.index(ens.size())];
        const std::size_t dim = m.tree.ambient_dim();
        const Dense a = g.gram(dim, 1 + g.index(dim));
        const PsdOperator ap = psd(a);
        const Dense s = to_dense(sqrt_psd(ap).matrix());
        const std::size_t n = g.index(m.tree.max_depth() + 1);
        Dense q(dim, std::vector<double>(dim, 0.0));
        for (std::size_t i : m.tree.depth_indices(n))
            if (g.uniform() < 0.5) {
                const Dense p = dense_projection(m.tree.basis(i));
                for (std::size_t x = 0; x < dim; ++x)
                    for (std::size_t y = 0; y < dim; ++y)
                        q[x][y] += p[x][y];
            }
        const Dense d = mul(mul(s, q), s);
        const double lhs = sq(frob_diff(a, d));
        const double rhs = sq(frob(a)) - sq(frob(d)) + 1e-9 * sq(frob(a));
        lg.require(lhs <= rhs, "pair " + std::to_string(t) + ": " + std::to_string(lhs) + " > " + std::to_string(rhs));
    }
    return lg.out;
}

Outcome ac7_measure(const std::vector<Member>& ens, Ledger& lg)
{
    for (const auto& m : ens) {
        const CylinderWeights cw = cylinder_weights(m.r, m.tree);
        const CylinderCheck chk = check_cylinders(cw, m.tree, trace(m.r));
        lg.require(chk.additivity <= 1e-9 && chk.root_mass <= 1e-9 && chk.min_mass >= 0.0,
                   m.label + ": additivity " + std::to_string(chk.additivity));
    }

    Gen g(7007);
    for (int t = 0; t < 100; ++t) {
        const auto& m = ens[g.index(ens.size())];
        const auto x = g.vec(m.tree.ambient_dim()), y = g.vec(m.tree.ambient_dim());
        const std::size_t n = g.index(4);
        const double viol = parallelogram_check(m.r, m.tree, x, y, n);
        const double bound = 1e-9 * (1 + operator_norm(m.r) * sq(norm(x) + norm(y)));
        lg.require(viol <= bound, "parallelogram pair " + std::to_string(t) + ": " + std::to_string(viol));
    }

    // operators supported on a random subset of depth-n packets: the rest carry no energy
    for (const auto& m : ens) {
        const std::size_t n = 1 + g.index(3), dim = m.tree.ambient_dim();
        Dense q(dim, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> empty;
        for (std::size_t i : m.tree.depth_indices(n)) {
            if (g.uniform() < 0.5) {
                empty.push_back(i);
                continue;
            }
            const Dense p = dense_projection(m.tree.basis(i));
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = 0; b < dim; ++b)
                    q[a][b] += p[a][b];
        }
        if (empty.size() == m.tree.node_count(n))
            continue;
        const Dense r0 = to_dense(m.r.matrix());
        const PsdOperator r = psd(mul(mul(q, r0), q));
        const auto x = g.vec(dim);
        const CylinderWeights cw = cylinder_weights(r, m.tree);
        const double eps = 1e-12 * trace(r) * (1 + sq(norm(x)));
        for (std::size_t i : empty) {
            lg.require(cw.mass[i] <= 1e-12 * trace(r), m.label + ": empty cylinder has mass");
            lg.require(vector_weight(r, m.tree, x, m.tree.node(i)) <= eps,
                       m.label + ": zero-mass cylinder '" + m.tree.node(i).label() + "' carries energy");
        }
        try {
            discrete_density(r, m.tree, x, n);
        } catch (const AbsoluteContinuityViolation& e) {
            lg.require(false, m.label + ": " + e.what());
        }
    }
    return lg.out;
}

Outcome ac8_denoise(Ledger& lg)
{
    const ImageBuffer clean = synthetic_scene(64, 64);
    const ImageBuffer noisy = add_gaussian_noise(clean, 0.1, 8);
    const double base = psnr(noisy, clean).db;

    DenoiseConfig cfg;
    cfg.patch_side = 8;
    cfg.depth = 2;
    cfg.stride = 4;
    cfg.filter = "haar";

    bool improved = false;
    std::ostringstream psnrs;
    psnrs << std::fixed << std::setprecision(2) << "noisy " << base << " dB";
    for (std::size_t k : {2, 4, 8}) {
        cfg.top_k = k;
        const double db = psnr(denoise_image(noisy, cfg).image, clean).db;
        psnrs << ", K=" << k << " " << db;
        improved = improved || db > base;
    }
    lg.require(improved, "no K in {2, 4, 8} improves PSNR (" + psnrs.str() + ")");

    cfg.top_k = 16;
    lg.require(quantized(denoise_image(noisy, cfg).image) == quantized(noisy), "K = N does not reproduce the input");

    const PacketTree tree = build_filter_tree_2d(haar_filter(), 8, 2);
    const PatchSet ps = extract_patches(noisy, 8, 4);
    const PsdOperator r = second_moment(ps);
    const PsdOperator s = sqrt_psd(r);
    const BlockScores bs = block_scores(ps, tree, 2);
    for (std::size_t k : {2, 4, 8, 16}) {
        const Selection sel = select_top_k(bs, k, tree);
        Matrix rk(r.dim(), r.dim());
        for (const auto& w : sel.chosen)
            rk += content_operator(r, s, tree, w).op.matrix();
        const std::string at = "K=" + std::to_string(k);
        try {
            make_psd(SymMatrix(rk), 1e-8);
            lg.require(true, "");
        } catch (const NotPositive& e) {
            lg.require(false, at + ": truncated moment not PSD: " + e.what());
        }
        try {
            make_psd(SymMatrix(r.matrix() - rk), 1e-8, r.max_eigenvalue());
            lg.require(true, "");
        } catch (const NotPositive& e) {
            lg.require(false, at + ": discarded part not PSD: " + e.what());
        }
    }
    if (lg.out.pass)
        lg.out.detail = psnrs.str();
    return lg.out;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome ac9_determinism(Ledger& lg)
{
    const fs::path dir = fs::temp_directory_path() / "wpc_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream sink;

    Gen g(7009);
    const Dense a = g.gram(16);
    std::vector<double> data;
    for (const auto& row : a)
        data.insert(data.end(), row.begin(), row.end());
    cli::write_text((dir / "r.json").string(), nlohmann::json{{"dim", 16}, {"data", data}}.dump());

    for (const char* mode : {"trace", "hs"})
        for (const char* tree : {"shannon", "d4"}) {
            const std::string tag = std::string(mode) + "-" + tree;
            cli::RunConfig cfg;
            cfg.in = (dir / "r.json").string();
            cfg.mode = mode;
            cfg.tree = tree;
            cfg.depth = 2;
            for (int run = 0; run < 2; ++run) {
                cfg.out = (dir / (tag + std::to_string(run) + ".json")).string();
                lg.require(cli::cmd_greedy(cfg, sink, sink) == 0, tag + ": greedy failed");
            }
            lg.require(slurp(dir / (tag + "0.json")) == slurp(dir / (tag + "1.json")), tag + ": JSON differs");
            lg.require(slurp(dir / (tag + "0.csv")) == slurp(dir / (tag + "1.csv")), tag + ": CSV differs");
        }

    write_pgm((dir / "clean.pgm").string(), synthetic_scene(64, 64), true);
    cli::RunConfig d;
    d.in = (dir / "clean.pgm").string();
    d.tree = "haar";
    d.depth = 2;
    d.stride = 4;
    d.sigma = 0.1;
    d.seed = 99;
    for (int run = 0; run < 2; ++run) {
        d.out = (dir / ("den" + std::to_string(run) + ".pgm")).string();
        d.report = (dir / ("den" + std::to_string(run) + ".json")).string();
        lg.require(cli::cmd_denoise(d, sink, sink) == 0, "denoise failed: " + sink.str());
    }
    lg.require(slurp(dir / "den0.pgm") == slurp(dir / "den1.pgm"), "denoised PGM differs");
    lg.require(slurp(dir / "den0.json") == slurp(dir / "den1.json"), "denoise report differs");
    fs::remove_all(dir);
    return lg.out;
}

} // namespace

int main()
{
    const auto ens = ensemble();

    struct Criterion
    {
        const char* id;
        const char* name;
        double budget_s;
        std::function<Outcome(Ledger&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"AC1", "reconstruction identity", 30, [&](Ledger& l) { return ac1_reconstruction(ens, l); }},
        {"AC2", "Shannon oracle", 5, [&](Ledger& l) { return ac2_shannon_oracle(l); }},
        {"AC3", "trace-greedy envelope", 60, [&](Ledger& l) { return ac3_trace_envelope(ens, l); }},
        {"AC4", "HS-greedy envelopes", 90, [&](Ledger& l) { return ac4_hs_envelopes(ens, l); }},
        {"AC5", "coherence bounds", 0, [&](Ledger& l) { return ac5_coherence(ens, l); }},
        {"AC6", "difference inequality", 0, [&](Ledger& l) { return ac6_difference_inequality(ens, l); }},
        {"AC7", "measure structure", 0, [&](Ledger& l) { return ac7_measure(ens, l); }},
        {"AC8", "denoising pipeline", 30, [&](Ledger& l) { return ac8_denoise(l); }},
        {"AC9", "determinism", 0, [&](Ledger& l) { return ac9_determinism(l); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        Ledger lg;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run(lg);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs > c.budget_s) {
            o.pass = false;
            o.detail = "runtime over budget of " + std::to_string(int(c.budget_s)) + " s";
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << "  " << std::left << std::setw(26) << c.name
                  << std::right << std::fixed << std::setprecision(2) << std::setw(7) << secs << " s  "
                  << lg.checks << " checks";
        if (!o.detail.empty())
            std::cout << "  " << o.detail;
        std::cout << "\n";
    }
    std::cout << (failed ? "acceptance FAILED: " + std::to_string(failed) + " criteria" : "acceptance passed") << "\n";
    return failed ? 1 : 0;
}
