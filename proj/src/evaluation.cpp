#include "pedalign/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pedalign {

std::optional<std::string> annotation_violation(const Annotation& ann) {
    if (!ann.bb_vis) return std::nullopt;
    const Box& vis = *ann.bb_vis;
    const Box& full = ann.bb_full;
    if (vis.x < full.x || vis.y < full.y || vis.right() > full.right() ||
        vis.bottom() > full.bottom()) {
        return "bb_vis extends outside bb_full";
    }
    return std::nullopt;
}

std::vector<Annotation> reasonable_filter(std::vector<Annotation> anns,
                                          double min_height,
                                          double min_visibility) {
    for (Annotation& ann : anns) {
        const bool evaluable =
            ann.bb_full.h > min_height && ann.visibility() > min_visibility;
        ann.ignore = ann.ignore || !evaluable;
    }
    return anns;
}

MatchResult match_image(const std::vector<ScoredBox>& dets,
                        const std::vector<Annotation>& anns, double iou_thr) {
    if (!(iou_thr > 0.0 && iou_thr < 1.0)) {
        throw InvalidParameterError("matching IoU threshold must be in (0,1)");
    }

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });

    MatchResult result;
    result.det_labels.assign(dets.size(), DetLabel::fp);
    result.gt_matched.assign(anns.size(), false);

    for (std::size_t det_idx : order) {
        const Box& box = dets[det_idx].box;

        double best_iou = 0.0;
        std::size_t best_gt = anns.size();
        for (std::size_t g = 0; g < anns.size(); ++g) {
            if (anns[g].ignore || result.gt_matched[g]) continue;
            const double overlap = iou(box, anns[g].bb_full);
            if (overlap > best_iou) {
                best_iou = overlap;
                best_gt = g;
            }
        }
        if (best_gt < anns.size() && best_iou > iou_thr) {
            result.det_labels[det_idx] = DetLabel::tp;
            result.gt_matched[best_gt] = true;
            continue;
        }

        double best_ignore = 0.0;
        for (const Annotation& ann : anns) {
            if (!ann.ignore) continue;
            best_ignore = std::max(best_ignore, iou(box, ann.bb_full));
        }
        result.det_labels[det_idx] =
            best_ignore > iou_thr ? DetLabel::ignored : DetLabel::fp;
    }
    return result;
}

EvalCurve curve(const std::vector<LabeledDetection>& dets, int n_images,
                int n_evaluable_gt) {
    if (n_images < 1) {
        throw InvalidParameterError("curve needs at least one image");
    }
    if (n_evaluable_gt == 0) {
        throw UndefinedMetricError(
            "log-average miss rate is undefined with no evaluable ground truth");
    }

    std::vector<LabeledDetection> sorted;
    sorted.reserve(dets.size());
    for (const LabeledDetection& d : dets) {
        if (d.label != DetLabel::ignored) sorted.push_back(d);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledDetection& a, const LabeledDetection& b) {
                  return a.score > b.score;
              });

    EvalCurve out;
    long tp = 0;
    long fp = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].label == DetLabel::tp) {
            ++tp;
        } else {
            ++fp;
        }
        const bool last_of_threshold =
            i + 1 == sorted.size() || sorted[i + 1].score != sorted[i].score;
        if (last_of_threshold) {
            out.points.push_back(
                CurvePoint{static_cast<double>(fp) / n_images,
                           1.0 - static_cast<double>(tp) / n_evaluable_gt});
        }
    }

    // Nine reference points evenly log-spaced over [1e-2, 1]. The miss rate
    // at a reference is the sweep point with the largest fppi <= reference
    // (the latest one when several share that fppi), or 1 if none exists.
    double log_sum = 0.0;
    for (int k = 0; k <= 8; ++k) {
        const double ref = std::pow(10.0, -2.0 + 0.25 * k);
        double mr = 1.0;
        for (const CurvePoint& p : out.points) {
            if (p.fppi <= ref) {
                mr = p.miss_rate;
            } else {
                break;
            }
        }
        log_sum += std::log(std::max(mr, kMissRateFloor));
    }
    out.log_avg_mr = std::exp(log_sum / 9.0);
    return out;
}

}  // namespace pedalign
