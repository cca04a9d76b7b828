#include "pedalign/parts.hpp"

#include <cmath>
#include <sstream>

namespace pedalign {

const char* part_name(PartKind kind) {
    switch (kind) {
        case PartKind::head: return "head";
        case PartKind::torso: return "torso";
        case PartKind::legs: return "legs";
    }
    throw InvalidParameterError("unknown part kind");
}

std::array<Box, 3> part_boxes(const Box& bb_vis) {
    const double third = bb_vis.h / 3.0;
    return {Box(bb_vis.x, bb_vis.y, bb_vis.w, third),
            Box(bb_vis.x, bb_vis.y + third, bb_vis.w, third),
            Box(bb_vis.x, bb_vis.y + 2.0 * third, bb_vis.w, bb_vis.h - 2.0 * third)};
}

double penalty(double x_p, double y_p, double x_a, double y_a, double a,
               double b) {
    const double dx = std::abs(x_p - x_a);
    const double dy = std::abs(y_p - y_a);
    return a * (dx + dy) + b * (dx * dx - dy * dy);
}

double merge(double score_root, const std::array<PartDetection, 3>& parts,
             double x_a, double y_a, const MergeParams& params) {
    const double wsum = params.w[0] + params.w[1] + params.w[2];
    if (std::abs(wsum - 1.0) > 1e-9) {
        std::ostringstream oss;
        oss << "part weights must sum to 1, got " << wsum;
        throw InvalidParameterError(oss.str());
    }
    double score = score_root;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const PartDetection& p = parts[i];
        score += params.w[i] *
                 (p.score + penalty(p.x, p.y, x_a, y_a, params.a, params.b));
    }
    return score;
}

}  // namespace pedalign
