#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "pedalign/alignment.hpp"
#include "pedalign/parts.hpp"
#include "pedalign/scene.hpp"

namespace pedalign {

// Every pipeline parameter with its default. Precedence when composing a
// run: built-in defaults < config file < command-line flags.
struct RunConfig {
    // Saliency re-weighting and proposal suppression.
    double th_b = 0.5;
    double nms_iou = 0.5;

    // Alignment.
    double expand = 0.25;
    int f = 4;
    double L = 0.8;
    bool clamp_delta = false;
    int upsample_rows = 0;  // 0 = match region aspect automatically
    int upsample_cols = 0;

    // Part merging.
    std::array<double, 3> w = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double a = -0.1;
    double b = 0.0;
    bool normalize_penalty = false;

    // Evaluation.
    double min_height = 50.0;
    double min_visibility = 0.65;
    double eval_iou = 0.5;

    // Synthetic data generation.
    int n_images = 4;
    int n_pedestrians = 3;
    int n_distractors = 3;
    double jitter_sigma = 8.0;
    double occlusion_fraction = 0.2;
    int image_w = 640;
    int image_h = 480;

    std::uint64_t seed = 1;

    AlignParams align_params() const;
    MergeParams merge_params() const;
    SceneParams scene_params(int image_index) const;

    // Rejects out-of-domain values with an InvalidParameterError naming the
    // offending key.
    void validate() const;
};

nlohmann::json config_to_json(const RunConfig& config);

// Overlays the keys present in j onto config; unknown keys are an error.
void apply_config_json(RunConfig& config, const nlohmann::json& j);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace pedalign
