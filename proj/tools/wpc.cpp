#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "selftest.hpp"

using namespace wpc::cli;

namespace {

void tree_flags(CLI::App* app, RunConfig& cfg)
{
    app->add_option("--tree", cfg.tree, "packet tree realization")
        ->check(CLI::IsMember({"shannon", "haar", "d4"}));
    app->add_option("--levels", cfg.levels, "Shannon levels (dimension 2^levels)")->check(CLI::Range(1, 30));
    app->add_option("--patch-side", cfg.patch_side, "side of square patches; selects a 2D filter tree")
        ->check(CLI::PositiveNumber);
    app->add_option("--depth", cfg.depth, "packet depth n")->check(CLI::Range(0, 30));
    app->add_option("--filter-file", cfg.filter_file, "JSON file {\"h\": [...]} overriding the named filter")
        ->check(CLI::ExistingFile);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Packet content decomposition, greedy extraction and denoising"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* decompose = app.add_subcommand("decompose", "cylinder weights of a PSD matrix at every depth");
    decompose->add_option("--in", cfg.in, "matrix JSON")->required()->check(CLI::ExistingFile);
    decompose->add_option("--out", cfg.out, "cylinder JSON (stdout if omitted)");
    tree_flags(decompose, cfg);

    auto* greedy = app.add_subcommand("greedy", "trace or HS greedy content extraction");
    greedy->add_option("--in", cfg.in, "matrix JSON")->required()->check(CLI::ExistingFile);
    greedy->add_option("--out", cfg.out, "decay report JSON (stdout if omitted)");
    greedy->add_option("--report", cfg.report, "decay report CSV (default: --out with .csv)");
    greedy->add_option("--mode", cfg.mode, "greedy criterion")->check(CLI::IsMember({"trace", "hs"}));
    greedy->add_option("--steps", cfg.steps, "maximum number of steps");
    greedy->add_option("--stop-tol", cfg.stop_tol, "stop once the remainder falls below this fraction")
        ->check(CLI::NonNegativeNumber);
    tree_flags(greedy, cfg);

    auto* denoise = app.add_subcommand("denoise", "patch denoising by packet-block selection");
    denoise->add_option("--in", cfg.in, "input PGM")->required()->check(CLI::ExistingFile);
    denoise->add_option("--out", cfg.out, "denoised PGM")->required();
    denoise->add_option("--clean", cfg.clean, "clean reference PGM for PSNR")->check(CLI::ExistingFile);
    denoise->add_option("--report", cfg.report, "report JSON");
    denoise->add_option("--tree", cfg.tree, "filter for the 2D packet tree")
        ->check(CLI::IsMember({"haar", "d4"}));
    denoise->add_option("--patch-side", cfg.patch_side, "patch side m (default 8)")->check(CLI::PositiveNumber);
    denoise->add_option("--depth", cfg.depth, "packet depth n")->check(CLI::Range(0, 30));
    denoise->add_option("--topk", cfg.topk, "number of retained blocks K");
    denoise->add_option("--stride", cfg.stride, "patch stride (default m/2)")->check(CLI::PositiveNumber);
    denoise->add_option("--mode", cfg.mode, "block score")->check(CLI::IsMember({"trace", "hs"}));
    denoise->add_option("--sigma", cfg.sigma, "add seeded Gaussian noise first; the input is then the clean reference")
        ->check(CLI::NonNegativeNumber);
    denoise->add_option("--seed", cfg.seed, "noise seed");
    denoise->add_flag("--ascii", cfg.ascii, "write P2 instead of P5");

    auto* synth = app.add_subcommand("synth", "write the synthetic piecewise-smooth test image");
    synth->add_option("--out", cfg.out, "output PGM")->required();
    synth->add_option("--size", cfg.size, "image side")->check(CLI::PositiveNumber);
    synth->add_option("--sigma", cfg.sigma, "Gaussian noise level")->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", cfg.seed, "noise seed");
    synth->add_flag("--ascii", cfg.ascii, "write P2 instead of P5");

    auto* selftest = app.add_subcommand("selftest", "run the embedded invariant suite");
    selftest->add_option("--seed", cfg.seed, "seed for the random instances");
    selftest->add_flag("--quick", cfg.quick, "smaller subset");
    selftest->add_flag("--corrupt-tree", cfg.corrupt_tree, "zero one basis row (fault injection)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : int(malformed_input);
    }

    try {
        cfg.psd_tol = psd_tol_from_env();
    } catch (const wpc::InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return config_violation;
    }

    if (decompose->parsed())
        return cmd_decompose(cfg);
    if (greedy->parsed())
        return cmd_greedy(cfg);
    if (denoise->parsed())
        return cmd_denoise(cfg);
    if (synth->parsed())
        return cmd_synth(cfg);
    return cmd_selftest(cfg);
}
