#pragma once

#include <vector>

#include "pedalign/geometry.hpp"

namespace pedalign {

// Dense per-pixel pedestrian-saliency grid, row-major, values in [0,1].
class SaliencyMap {
public:
    SaliencyMap(int width, int height, std::vector<double> values);

    static SaliencyMap constant(int width, int height, double value);

    int width() const { return width_; }
    int height() const { return height_; }
    double at(int row, int col) const {
        return values_[static_cast<std::size_t>(row) * width_ + col];
    }
    const std::vector<double>& values() const { return values_; }
    double mean() const;

private:
    int width_;
    int height_;
    std::vector<double> values_;
};

// Range [first,last] of integer pixel indices whose centers fall inside the
// half-open interval [lo,hi); empty when last < first. A pixel index i has
// its center at i + 0.5.
struct PixelRange {
    int first;
    int last;
    bool empty() const { return last < first; }
};
PixelRange pixels_in_interval(double lo, double hi, int limit);

// Weight applied to a proposal score: 1 when the score already exceeds
// th_b, otherwise the mean saliency over all pixel centers inside the
// bounds-clipped box. Throws EmptyRegionError when no pixel center is
// covered.
double saliency_weight(const ScoredBox& b, const SaliencyMap& map, double th_b);

// Same box, score multiplied by saliency_weight.
ScoredBox reweight(const ScoredBox& b, const SaliencyMap& map, double th_b);

// White rectangles on a black background: 1.0 at every pixel whose center
// is covered by at least one ground-truth box, 0.0 elsewhere. Boxes outside
// the image are clipped.
SaliencyMap saliency_ground_truth(int image_w, int image_h,
                                  const std::vector<Box>& gt);

}  // namespace pedalign
