#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pedalign/grid_io.hpp"
#include "pedalign/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pedalign;

namespace {

// Exit codes: 0 success, 2 validation/parameter error, 3 missing input,
// 4 undefined metric, 1 anything else.
int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const MissingInputError*>(&e)) return 3;
    if (dynamic_cast<const UndefinedMetricError*>(&e)) return 4;
    if (dynamic_cast<const Error*>(&e)) return 2;
    return 1;
}

const char* category_for(const std::exception& e) {
    if (dynamic_cast<const MissingInputError*>(&e)) return "missing-input";
    if (dynamic_cast<const UndefinedMetricError*>(&e)) return "undefined-metric";
    if (dynamic_cast<const ValidationError*>(&e)) return "validation";
    if (dynamic_cast<const ParseError*>(&e)) return "parse";
    if (dynamic_cast<const InvalidParameterError*>(&e)) return "invalid-parameter";
    if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
    if (dynamic_cast<const EmptyRegionError*>(&e)) return "empty-region";
    if (dynamic_cast<const GenerationError*>(&e)) return "generation";
    return "internal";
}

std::string one_line(std::string msg) {
    for (char& c : msg) {
        if (c == '\n') c = ';';
    }
    return msg;
}

struct GlobalFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    bool no_saliency = false;
    bool clamp_delta = false;
    bool clamp_set = false;
};

RunConfig effective_config(const GlobalFlags& flags) {
    RunConfig config;
    if (!flags.config_path.empty()) {
        config = load_config(flags.config_path);
    }
    if (flags.seed_set) config.seed = flags.seed;
    if (flags.clamp_set) config.clamp_delta = flags.clamp_delta;
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Pedestrian detection post-processing: saliency re-weighting, NMS, "
        "confidence-map bounding-box alignment, part merging, and miss-rate "
        "evaluation on synthetic scenes."};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "Run-configuration JSON file");
    auto* seed_opt = app.add_option("--seed", flags.seed, "Override the config seed");
    app.add_option("--jobs", flags.jobs, "Worker threads for per-detection work")
        ->check(CLI::PositiveNumber);
    app.add_flag("--no-saliency", flags.no_saliency,
                 "Skip saliency re-weighting in detect");
    auto* clamp_opt = app.add_flag("--clamp-delta", flags.clamp_delta,
                                   "Cap the alignment ratio at 1");

    std::string out_dir;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    gen->add_option("--out", out_dir, "Output dataset directory")->required();

    std::string data_dir, in_path, out_path;
    auto* detect = app.add_subcommand(
        "detect", "Re-weight proposal scores with saliency and run NMS");
    detect->add_option("--data", data_dir, "Dataset directory")->required();
    detect->add_option("--proposals", in_path,
                       "Proposals file (default: <data>/proposals.jsonl)");
    detect->add_option("--out", out_path, "Output detections file")->required();

    auto* align = app.add_subcommand(
        "align", "Align detections and merge part scores");
    align->add_option("--data", data_dir, "Dataset directory")->required();
    align->add_option("--dets", in_path, "Input detections file")->required();
    align->add_option("--out", out_path, "Output detections file")->required();

    std::string curve_path;
    auto* eval = app.add_subcommand(
        "eval", "Match detections against ground truth and report log-average miss rate");
    eval->add_option("--data", data_dir, "Dataset directory")->required();
    eval->add_option("--dets", in_path, "Detections file")->required();
    eval->add_option("--curve", curve_path, "Also write the miss-rate/FPPI table");

    auto* curve_export = app.add_subcommand(
        "curve-export", "Write the miss-rate/FPPI table for external plotting");
    curve_export->add_option("--data", data_dir, "Dataset directory")->required();
    curve_export->add_option("--dets", in_path, "Detections file")->required();
    curve_export->add_option("--out", out_path, "Output table file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << one_line(e.what()) << "\n";
        return 2;
    }

    flags.seed_set = seed_opt->count() > 0;
    flags.clamp_set = clamp_opt->count() > 0;

    try {
        const RunConfig config = effective_config(flags);
        if (gen->parsed()) {
            cmd_gen(config, out_dir);
            std::cout << "wrote dataset to " << out_dir << "\n";
        } else if (detect->parsed()) {
            fs::path proposals = in_path.empty()
                                     ? fs::path(data_dir) / dataset_layout::kProposals
                                     : fs::path(in_path);
            cmd_detect(config, data_dir, proposals, out_path, flags.no_saliency);
            std::cout << "wrote detections to " << out_path << "\n";
        } else if (align->parsed()) {
            cmd_align(config, data_dir, in_path, out_path, flags.jobs);
            std::cout << "wrote aligned detections to " << out_path << "\n";
        } else if (eval->parsed()) {
            const EvalResult result = cmd_eval(config, data_dir, in_path);
            if (!curve_path.empty()) {
                atomic_write_text(curve_path, format_curve_table(result.curve));
            }
            std::cout << "images " << result.n_images << "\n"
                      << "evaluable_gt " << result.n_evaluable_gt << "\n"
                      << format_summary(result.curve);
        } else if (curve_export->parsed()) {
            const EvalResult result = cmd_eval(config, data_dir, in_path);
            atomic_write_text(out_path, format_curve_table(result.curve));
            std::cout << format_summary(result.curve);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << category_for(e) << ": " << one_line(e.what())
                  << "\n";
        return exit_code_for(e);
    }
    return 0;
}
