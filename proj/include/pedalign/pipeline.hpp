#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pedalign/config.hpp"
#include "pedalign/dataset.hpp"
#include "pedalign/evaluation.hpp"

namespace pedalign {

// Command implementations shared by the CLI and the tests. All file writes
// are atomic (temp file + rename) and all behavior is deterministic under a
// fixed config.

// Writes a complete synthetic dataset: image manifest, annotations,
// proposals with scores, per-image saliency grids, the analytic scene
// models, and the effective run configuration.
void cmd_gen(const RunConfig& config, const std::filesystem::path& out_dir);

// Saliency re-weighting followed by per-image NMS; output sorted by
// (image_id, score descending). With no_saliency set the scores pass
// through unchanged.
void cmd_detect(const RunConfig& config, const std::filesystem::path& data_dir,
                const std::filesystem::path& proposals_path,
                const std::filesystem::path& out_path, bool no_saliency);

// Bounding-box alignment plus part-level evaluation and score merging for
// every detection. jobs > 1 aligns detections concurrently.
void cmd_align(const RunConfig& config, const std::filesystem::path& data_dir,
               const std::filesystem::path& dets_path,
               const std::filesystem::path& out_path, int jobs = 1);

struct EvalResult {
    EvalCurve curve;
    int n_images = 0;
    int n_evaluable_gt = 0;
};

// Reasonable-subset filtering, per-image matching, and the miss-rate/FPPI
// sweep.
EvalResult cmd_eval(const RunConfig& config,
                    const std::filesystem::path& data_dir,
                    const std::filesystem::path& dets_path);

std::string format_curve_table(const EvalCurve& curve);
std::string format_summary(const EvalCurve& curve);

// Alignment + part merge for one detection; exposed for tests.
struct AlignedDetection {
    Box box;
    double score;
    double anchor_x;
    double anchor_y;
};
AlignedDetection align_one(const RunConfig& config, const ScorerBackend& backend,
                           const std::string& image_id, const Box& proposal);

}  // namespace pedalign
