#include "pedalign/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pedalign/grid_io.hpp"
#include "pedalign/rng.hpp"

namespace pedalign {

using nlohmann::json;

AlignParams RunConfig::align_params() const {
    return AlignParams{expand, f, L, clamp_delta, upsample_rows, upsample_cols};
}

MergeParams RunConfig::merge_params() const { return MergeParams{w, a, b}; }

SceneParams RunConfig::scene_params(int image_index) const {
    SceneParams params;
    params.n_pedestrians = n_pedestrians;
    params.n_distractors = n_distractors;
    params.jitter_sigma = jitter_sigma;
    params.occlusion_fraction = occlusion_fraction;
    params.image_w = image_w;
    params.image_h = image_h;
    params.seed = mix_seed(seed, static_cast<std::uint64_t>(image_index));
    return params;
}

void RunConfig::validate() const {
    const auto fail = [](const std::string& what) {
        throw InvalidParameterError("config: " + what);
    };
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) fail("nms_iou must be in (0,1]");
    if (!(expand >= 0.0)) fail("expand must be >= 0");
    if (f < 1) fail("f must be >= 1");
    if (!(L > 0.0 && L <= 1.0)) fail("L must be in (0,1]");
    if (upsample_rows < 0 || upsample_cols < 0) {
        fail("upsample dimensions must be >= 0");
    }
    if ((upsample_rows == 0) != (upsample_cols == 0)) {
        fail("upsample_rows and upsample_cols must be set together");
    }
    if (std::abs(w[0] + w[1] + w[2] - 1.0) > 1e-9) {
        fail("part weights w must sum to 1");
    }
    if (!(min_height >= 0.0)) fail("min_height must be >= 0");
    if (!(min_visibility >= 0.0 && min_visibility <= 1.0)) {
        fail("min_visibility must be in [0,1]");
    }
    if (!(eval_iou > 0.0 && eval_iou < 1.0)) fail("eval_iou must be in (0,1)");
    if (n_images < 1) fail("n_images must be >= 1");
    if (n_pedestrians < 0 || n_distractors < 0) {
        fail("object counts must be >= 0");
    }
    if (!(jitter_sigma >= 0.0)) fail("jitter_sigma must be >= 0");
    if (!(occlusion_fraction >= 0.0 && occlusion_fraction <= 1.0)) {
        fail("occlusion_fraction must be in [0,1]");
    }
    if (image_w <= 0 || image_h <= 0) fail("image dimensions must be positive");
}

json config_to_json(const RunConfig& c) {
    return json{{"th_b", c.th_b},
                {"nms_iou", c.nms_iou},
                {"expand", c.expand},
                {"f", c.f},
                {"L", c.L},
                {"clamp_delta", c.clamp_delta},
                {"upsample_rows", c.upsample_rows},
                {"upsample_cols", c.upsample_cols},
                {"w", c.w},
                {"a", c.a},
                {"b", c.b},
                {"normalize_penalty", c.normalize_penalty},
                {"min_height", c.min_height},
                {"min_visibility", c.min_visibility},
                {"eval_iou", c.eval_iou},
                {"n_images", c.n_images},
                {"n_pedestrians", c.n_pedestrians},
                {"n_distractors", c.n_distractors},
                {"jitter_sigma", c.jitter_sigma},
                {"occlusion_fraction", c.occlusion_fraction},
                {"image_w", c.image_w},
                {"image_h", c.image_h},
                {"seed", c.seed}};
}

void apply_config_json(RunConfig& config, const json& j) {
    if (!j.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "th_b") config.th_b = value.get<double>();
        else if (key == "nms_iou") config.nms_iou = value.get<double>();
        else if (key == "expand") config.expand = value.get<double>();
        else if (key == "f") config.f = value.get<int>();
        else if (key == "L") config.L = value.get<double>();
        else if (key == "clamp_delta") config.clamp_delta = value.get<bool>();
        else if (key == "upsample_rows") config.upsample_rows = value.get<int>();
        else if (key == "upsample_cols") config.upsample_cols = value.get<int>();
        else if (key == "w") {
            if (!value.is_array() || value.size() != 3) {
                throw ValidationError("config: w must be an array of 3 weights");
            }
            for (std::size_t i = 0; i < 3; ++i) config.w[i] = value.at(i).get<double>();
        }
        else if (key == "a") config.a = value.get<double>();
        else if (key == "b") config.b = value.get<double>();
        else if (key == "normalize_penalty") config.normalize_penalty = value.get<bool>();
        else if (key == "min_height") config.min_height = value.get<double>();
        else if (key == "min_visibility") config.min_visibility = value.get<double>();
        else if (key == "eval_iou") config.eval_iou = value.get<double>();
        else if (key == "n_images") config.n_images = value.get<int>();
        else if (key == "n_pedestrians") config.n_pedestrians = value.get<int>();
        else if (key == "n_distractors") config.n_distractors = value.get<int>();
        else if (key == "jitter_sigma") config.jitter_sigma = value.get<double>();
        else if (key == "occlusion_fraction") config.occlusion_fraction = value.get<double>();
        else if (key == "image_w") config.image_w = value.get<int>();
        else if (key == "image_h") config.image_h = value.get<int>();
        else if (key == "seed") config.seed = value.get<std::uint64_t>();
        else {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open config file: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    RunConfig config;
    try {
        apply_config_json(config, j);
        config.validate();
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return config;
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
    atomic_write_text(path, config_to_json(config).dump(2) + "\n");
}

}  // namespace pedalign
