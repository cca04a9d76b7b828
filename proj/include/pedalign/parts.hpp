#pragma once

#include <array>

#include "pedalign/geometry.hpp"

namespace pedalign {

enum class PartKind { head = 0, torso = 1, legs = 2 };

inline constexpr std::array<PartKind, 3> kAllParts = {
    PartKind::head, PartKind::torso, PartKind::legs};

const char* part_name(PartKind kind);

struct PartDetection {
    PartKind kind;
    double score;
    double x;
    double y;
};

// Part importance weights (must sum to 1) and the penalty weights a, b.
struct MergeParams {
    std::array<double, 3> w = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double a = -0.1;
    double b = 0.0;
};

// Uniform horizontal thirds of the visible box: head on top, torso in the
// middle, legs at the bottom; full width, tiling the box exactly. Indexed
// by PartKind.
std::array<Box, 3> part_boxes(const Box& bb_vis);

// Spatial distance penalty between a part position and the anchor:
//   P = a*(|xp-xa| + |yp-ya|) + b*(|xp-xa|^2 - |yp-ya|^2)
// Note the minus sign on the y term of the quadratic part.
double penalty(double x_p, double y_p, double x_a, double y_a, double a,
               double b);

// Final detection score: root score plus the weighted part scores with
// their spatial penalties. Throws InvalidParameterError when the weights
// do not sum to 1 (within 1e-9).
double merge(double score_root, const std::array<PartDetection, 3>& parts,
             double x_a, double y_a, const MergeParams& params);

}  // namespace pedalign
