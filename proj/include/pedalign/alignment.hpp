#pragma once

#include <string>
#include <utility>

#include "pedalign/heatmap.hpp"

namespace pedalign {

// Best placement found by the sliding-window search over a confidence map.
// x_p/y_p is the center of the target rectangle in the pixel frame of the
// searched map (the enlarged detection region).
struct CoarsePosition {
    double x_p;
    double y_p;
    double target_w;
    double target_h;
    double mean_value;
};

struct Delta {
    double dx;
    double dy;
};

// Updated proposal center plus the box of the original size re-centered
// there.
struct AnchorPosition {
    double x_a;
    double y_a;
    Box aligned_box;
};

struct TargetSize {
    double w;
    double h;
};

// Target rectangle dimensions: the enlarging ratio L applied to the region
// dimensions. L must lie in (0,1].
TargetSize target_size(double L, double region_w, double region_h);

// Cell shape a target rectangle of the given pixel size rasterizes to under
// the map's frame (at least 1x1). Throws InvalidParameterError when the
// rectangle does not fit inside the map.
struct CellShape {
    int rows;
    int cols;
};
CellShape target_cells(const ConfidenceMap& map, double target_w, double target_h);

// Exhaustive one-cell-stride search for the placement with the largest mean
// of covered cell values; ties break to the smallest row, then the smallest
// column.
CoarsePosition coarse_position(const ConfidenceMap& map, double target_w,
                               double target_h);

// The confidence ratio of the alignment update:
//   r = 2 * sum_i (t_i - o_i)^2 / (sum_i t_i^2 + sum_i o_i^2)
// always in [0,2]; defined as 0 when both rectangles are identically zero.
// Throws DimensionError when the element counts differ.
double confidence_ratio(const std::vector<double>& target_values,
                        const std::vector<double>& original_values);

// Displacement toward the coarse position, scaled by the confidence ratio
// between the target rectangle and the same-shape rectangle centered at the
// original position. With clamp set, the ratio is capped at 1 so the update
// never overshoots the raw offset.
Delta delta(const ConfidenceMap& map, const CoarsePosition& target, double x_o,
            double y_o, bool clamp = false);

// Anchor update: the original center moved by the mean of the FCN and CAM
// deltas; the aligned box keeps the original size.
AnchorPosition align(const Box& original, const Delta& delta_fcn,
                     const Delta& delta_cam);

struct AlignParams {
    double expand_ratio = 0.25;
    int f = 4;
    double L = 0.8;
    bool clamp_delta = false;
    // 0 means choose automatically so the upsampled map matches the
    // region's pixel aspect ratio at stride s/f.
    int upsample_rows = 0;
    int upsample_cols = 0;
};

// Upsample target for a stitched rows x cols map over a region of the given
// pixel size, honoring explicit dimensions when set.
CellShape upsample_dims(const AlignParams& params, int rows, int cols,
                        double region_w, double region_h);

// The full alignment pass for one proposal: expand the box, stitch the FCN
// and CAM maps at sub-stride resolution, upsample both to the region's
// aspect ratio, locate the coarse position on each, and fuse the two deltas
// into the anchor. Coordinates in and out are absolute image pixels.
AnchorPosition align_proposal(const ScorerBackend& backend, const Box& proposal,
                              const std::string& image_id,
                              const AlignParams& params,
                              DetectorKind det = DetectorKind::root);

}  // namespace pedalign
