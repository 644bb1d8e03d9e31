#pragma once

//
// Subcommand implementations for the wpc tool. Each command returns the
// process exit code; main() only parses flags into a RunConfig.
//

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include <wpc/wpc.hpp>

namespace wpc::cli {

enum ExitCode : int {
    ok = 0,
    selftest_failure = 1,
    malformed_input = 2,
    not_positive = 3,
    bound_violation = 4,
    config_violation = 5,
};

struct RunConfig
{
    std::string in;
    std::string out;
    std::string clean;
    std::string report;
    std::string filter_file;

    std::string tree = "shannon"; // shannon | haar | d4
    std::optional<std::size_t> levels;
    std::optional<std::size_t> patch_side;
    std::size_t depth = 1;

    std::string mode = "trace"; // trace | hs
    std::size_t steps = 64;
    std::size_t topk = 4;
    std::optional<std::size_t> stride;
    double sigma = 0.0;
    std::uint64_t seed = 1;
    double stop_tol = 1e-12;
    double psd_tol = default_psd_tol;
    std::size_t size = 64;
    bool ascii = false;

    bool quick = false;
    bool corrupt_tree = false;
};

// WPC_TOL overrides the default PSD clamp tolerance.
inline double psd_tol_from_env(double fallback = default_psd_tol)
{
    const char* v = std::getenv("WPC_TOL");
    if (!v || !*v)
        return fallback;
    char* end = nullptr;
    const double t = std::strtod(v, &end);
    if (end == v || *end != '\0' || !(t >= 0.0) || !std::isfinite(t))
        throw InvalidConfig(std::string("WPC_TOL is not a nonnegative number: '") + v + "'");
    return t;
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw MalformedInput("cannot write '" + path + "'");
    out << text;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline FilterPair resolve_filter(const RunConfig& cfg)
{
    if (!cfg.filter_file.empty())
        return filter_from_json(read_json_file(cfg.filter_file));
    return filter_by_name(cfg.tree);
}

// Tree matching an operator of dimension `dim`.
inline PacketTree tree_for_dimension(const RunConfig& cfg, std::size_t dim)
{
    if (cfg.tree == "shannon") {
        std::size_t levels = 0;
        while ((std::size_t{1} << levels) < dim)
            ++levels;
        if (cfg.levels)
            levels = *cfg.levels;
        if (levels == 0 || levels >= 8 * sizeof(std::size_t) || (std::size_t{1} << levels) != dim)
            throw InvalidConfig("Shannon tree needs dimension 2^levels, operator has dimension " +
                                std::to_string(dim));
        return build_shannon_tree(levels, cfg.depth);
    }
    if (cfg.tree != "haar" && cfg.tree != "d4")
        throw InvalidConfig("unknown tree '" + cfg.tree + "' (expected shannon, haar or d4)");
    const FilterPair f = resolve_filter(cfg);
    if (cfg.patch_side) {
        if (*cfg.patch_side * *cfg.patch_side != dim)
            throw InvalidConfig("patch side " + std::to_string(*cfg.patch_side) +
                                " does not match operator dimension " + std::to_string(dim));
        return build_filter_tree_2d(f, *cfg.patch_side, cfg.depth);
    }
    return build_filter_tree_1d(f, dim, cfg.depth);
}

// Runs `body`, mapping library errors onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body)
{
    try {
        return body();
    } catch (const NotPositive& e) {
        err << "error: " << e.what() << "\n";
        return not_positive;
    } catch (const InvalidConfig& e) {
        err << "error: " << e.what() << "\n";
        return config_violation;
    } catch (const InvalidDepth& e) {
        err << "error: " << e.what() << "\n";
        return config_violation;
    } catch (const InvalidFilter& e) {
        err << "error: " << e.what() << "\n";
        return config_violation;
    } catch (const MalformedInput& e) {
        err << "error: " << e.what() << "\n";
        return malformed_input;
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << "\n";
        return malformed_input;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return malformed_input;
    }
}

inline PsdOperator load_operator(const RunConfig& cfg)
{
    if (cfg.in.empty())
        throw MalformedInput("--in <matrix.json> is required");
    return make_psd(matrix_from_json(read_json_file(cfg.in)), cfg.psd_tol);
}

inline int cmd_decompose(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr)
{
    return guarded(err, [&] {
        const PsdOperator r = load_operator(cfg);
        const PacketTree tree = tree_for_dimension(cfg, r.dim());
        const CylinderWeights cw = cylinder_weights(r, tree);
        const CylinderCheck chk = check_cylinders(cw, tree, trace(r));

        nlohmann::json j = {{"tree", {{"realization", to_string(tree.realization())},
                                      {"ambient_dim", tree.ambient_dim()},
                                      {"max_depth", tree.max_depth()}}},
                            {"trace", trace(r)},
                            {"clamp_applied", r.clamp_applied()},
                            {"cylinders", cw.to_json()},
                            {"validation", {{"additivity", chk.additivity},
                                            {"root_mass", chk.root_mass},
                                            {"min_mass", chk.min_mass}}}};
        if (!tree.filter_name().empty())
            j["tree"]["filter"] = tree.filter_name();

        if (cfg.out.empty())
            log << dump(j);
        else
            write_text(cfg.out, dump(j));
        log << "decompose: " << cw.mass.size() << " cylinders, additivity " << chk.additivity
            << ", root mass " << chk.root_mass << "\n";
        return int(ok);
    });
}

inline std::string csv_path_for(const RunConfig& cfg)
{
    if (!cfg.report.empty())
        return cfg.report;
    if (cfg.out.empty())
        return {};
    const auto dot = cfg.out.rfind('.');
    const auto slash = cfg.out.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return cfg.out + ".csv";
    return cfg.out.substr(0, dot) + ".csv";
}

inline int cmd_greedy(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr)
{
    return guarded(err, [&] {
        if (cfg.mode != "trace" && cfg.mode != "hs")
            throw InvalidConfig("unknown mode '" + cfg.mode + "' (expected trace or hs)");
        if (!(cfg.stop_tol >= 0.0))
            throw InvalidConfig("stop tolerance must be nonnegative");
        const PsdOperator r = load_operator(cfg);
        const PacketTree tree = tree_for_dimension(cfg, r.dim());

        GreedyOptions opt;
        opt.max_steps = cfg.steps;
        opt.stop_tol = cfg.stop_tol;
        opt.psd_tol = cfg.psd_tol;
        const ExtractionTrace tr = cfg.mode == "trace" ? trace_greedy(r, tree, cfg.depth, opt)
                                                       : hs_greedy(r, tree, cfg.depth, opt);

        const std::string json = dump(decay_report_json(tr));
        if (cfg.out.empty())
            log << json;
        else
            write_text(cfg.out, json);
        if (const auto csv = csv_path_for(cfg); !csv.empty())
            write_text(csv, decay_report_csv(tr));

        const DecayReport rep = decay_report(tr);
        log << "greedy (" << cfg.mode << "): " << rep.summary() << "\n";
        return rep.ok() ? int(ok) : int(bound_violation);
    });
}

inline DenoiseConfig denoise_config(const RunConfig& cfg)
{
    DenoiseConfig dc;
    dc.patch_side = cfg.patch_side.value_or(8);
    dc.depth = cfg.depth;
    dc.top_k = cfg.topk;
    dc.stride = cfg.stride.value_or(0);
    dc.filter = cfg.tree == "shannon" ? "haar" : cfg.tree;
    if (cfg.mode == "hs")
        dc.mode = ScoreMode::hs;
    else if (cfg.mode != "trace")
        throw InvalidConfig("unknown mode '" + cfg.mode + "' (expected trace or hs)");
    return dc;
}

inline int cmd_denoise(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr)
{
    return guarded(err, [&] {
        if (cfg.in.empty())
            throw MalformedInput("--in <image.pgm> is required");
        if (cfg.out.empty())
            throw InvalidConfig("--out <denoised.pgm> is required");
        const DenoiseConfig dc = denoise_config(cfg);
        dc.validate();

        const ImageBuffer input = read_pgm(cfg.in);
        std::optional<ImageBuffer> clean;
        ImageBuffer noisy = input;
        if (cfg.sigma > 0.0) {
            noisy = add_gaussian_noise(input, cfg.sigma, cfg.seed);
            clean = input;
        }
        if (!cfg.clean.empty())
            clean = read_pgm(cfg.clean);

        DenoiseResult res = denoise_image(noisy, dc);
        if (clean) {
            res.report.psnr_noisy = psnr(noisy, *clean).db;
            res.report.psnr_denoised = psnr(res.image, *clean).db;
        }
        write_pgm(cfg.out, res.image, !cfg.ascii);
        const std::string json = dump(res.report.to_json());
        if (!cfg.report.empty())
            write_text(cfg.report, json);

        log << "denoise: M = " << res.report.patch_count << ", kept " << res.report.chosen.size() << " of "
            << res.report.node_count << " blocks, retained energy " << res.report.retained_energy_fraction;
        if (clean)
            log << ", PSNR " << *res.report.psnr_noisy << " -> " << *res.report.psnr_denoised << " dB";
        log << "\n";
        return int(ok);
    });
}

inline int cmd_synth(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr)
{
    return guarded(err, [&] {
        if (cfg.out.empty())
            throw InvalidConfig("--out <image.pgm> is required");
        if (cfg.size == 0)
            throw InvalidConfig("--size must be positive");
        ImageBuffer img = synthetic_scene(cfg.size, cfg.size);
        if (cfg.sigma > 0.0)
            img = add_gaussian_noise(img, cfg.sigma, cfg.seed);
        write_pgm(cfg.out, img, !cfg.ascii);
        log << "synth: wrote " << cfg.size << "x" << cfg.size << " image to " << cfg.out << "\n";
        return int(ok);
    });
}

} // namespace wpc::cli
