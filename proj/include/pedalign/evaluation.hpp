#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pedalign/geometry.hpp"

namespace pedalign {

// Per-image ground truth: the full body extent plus an optional visible
// region (defaults to the full box). Annotations marked ignore still act
// as ignore regions during matching.
struct Annotation {
    std::string image_id;
    Box bb_full = Box(0, 0, 1, 1);
    std::optional<Box> bb_vis;
    bool ignore = false;

    const Box& vis_box() const { return bb_vis ? *bb_vis : bb_full; }
    double visibility() const { return vis_box().area() / bb_full.area(); }
};

// Checks the visible-inside-full invariant; returns an error message when
// violated.
std::optional<std::string> annotation_violation(const Annotation& ann);

// Marks everything outside the evaluable subset as ignore (nothing is
// removed): evaluable means bb_full.h > min_height and visibility >
// min_visibility, both strict. Already-ignored annotations stay ignored.
std::vector<Annotation> reasonable_filter(std::vector<Annotation> anns,
                                          double min_height = 50.0,
                                          double min_visibility = 0.65);

enum class DetLabel { tp, fp, ignored };

struct MatchResult {
    std::vector<DetLabel> det_labels;  // indexed like the input detections
    std::vector<bool> gt_matched;      // indexed like the input annotations
};

// Greedy matching for one image: detections in descending score order
// (ties by input index) each take the highest-IoU unmatched evaluable
// annotation with IoU strictly above the threshold; failing that, a
// detection overlapping an ignore region above the threshold is labeled
// ignored, otherwise it is a false positive. Evaluable annotations match
// at most once; ignore regions absorb any number of detections.
MatchResult match_image(const std::vector<ScoredBox>& dets,
                        const std::vector<Annotation>& anns, double iou_thr);

struct LabeledDetection {
    double score;
    DetLabel label;
};

struct CurvePoint {
    double fppi;
    double miss_rate;
};

struct EvalCurve {
    std::vector<CurvePoint> points;
    double log_avg_mr;
};

// Threshold sweep over all distinct detection scores (descending) pooled
// across images, plus the log-average miss rate over the nine reference
// FPPI points 10^(-2+k/4), k=0..8. Miss rates are floored at 1e-4 before
// the logs are averaged; a reference with no sweep point at or below it
// contributes a miss rate of 1. Throws UndefinedMetricError when there is
// no evaluable ground truth.
EvalCurve curve(const std::vector<LabeledDetection>& dets, int n_images,
                int n_evaluable_gt);

inline constexpr double kMissRateFloor = 1e-4;

}  // namespace pedalign
