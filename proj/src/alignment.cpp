#include "pedalign/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pedalign {

TargetSize target_size(double L, double region_w, double region_h) {
    if (!(L > 0.0 && L <= 1.0)) {
        throw InvalidParameterError("enlarging ratio L must be in (0,1]");
    }
    if (!(region_w > 0.0 && region_h > 0.0)) {
        throw InvalidParameterError("region dimensions must be positive");
    }
    return TargetSize{L * region_w, L * region_h};
}

CellShape target_cells(const ConfidenceMap& map, double target_w,
                       double target_h) {
    if (!(target_w > 0.0 && target_h > 0.0)) {
        throw InvalidParameterError("target dimensions must be positive");
    }
    const MapFrame& frame = map.frame();
    const int cols = std::max(1, static_cast<int>(std::lround(
                                     target_w / frame.cell_size_x())));
    const int rows = std::max(1, static_cast<int>(std::lround(
                                     target_h / frame.cell_size_y())));
    if (rows > map.rows() || cols > map.cols()) {
        std::ostringstream oss;
        oss << "target rectangle (" << rows << "x" << cols
            << " cells) larger than map extent (" << map.rows() << "x"
            << map.cols() << ")";
        throw InvalidParameterError(oss.str());
    }
    return CellShape{rows, cols};
}

namespace {

double window_sum(const ConfidenceMap& map, int r0, int c0, int rows, int cols) {
    double sum = 0.0;
    for (int r = r0; r < r0 + rows; ++r) {
        for (int c = c0; c < c0 + cols; ++c) {
            sum += map.at(r, c);
        }
    }
    return sum;
}

// Top-left cell of the same-shape rectangle whose center is closest to the
// given pixel position, clamped into the map.
struct Placement {
    int r0;
    int c0;
};

Placement placement_at(const ConfidenceMap& map, const CellShape& shape,
                       double x, double y) {
    const MapFrame& frame = map.frame();
    const double cc = (x * frame.scale_x - frame.origin_x) / frame.stride;
    const double cr = (y * frame.scale_y - frame.origin_y) / frame.stride;
    int c0 = static_cast<int>(std::lround(cc - (shape.cols - 1) / 2.0));
    int r0 = static_cast<int>(std::lround(cr - (shape.rows - 1) / 2.0));
    c0 = std::clamp(c0, 0, map.cols() - shape.cols);
    r0 = std::clamp(r0, 0, map.rows() - shape.rows);
    return Placement{r0, c0};
}

std::vector<double> rect_values(const ConfidenceMap& map, const Placement& p,
                                const CellShape& shape) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(shape.rows) * shape.cols);
    for (int r = p.r0; r < p.r0 + shape.rows; ++r) {
        for (int c = p.c0; c < p.c0 + shape.cols; ++c) {
            out.push_back(map.at(r, c));
        }
    }
    return out;
}

}  // namespace

CoarsePosition coarse_position(const ConfidenceMap& map, double target_w,
                               double target_h) {
    const CellShape shape = target_cells(map, target_w, target_h);
    const double n = static_cast<double>(shape.rows) * shape.cols;

    int best_r = 0;
    int best_c = 0;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (int r0 = 0; r0 + shape.rows <= map.rows(); ++r0) {
        for (int c0 = 0; c0 + shape.cols <= map.cols(); ++c0) {
            const double sum = window_sum(map, r0, c0, shape.rows, shape.cols);
            if (sum > best_sum) {
                best_sum = sum;
                best_r = r0;
                best_c = c0;
            }
        }
    }

    const double center_row = best_r + (shape.rows - 1) / 2.0;
    const double center_col = best_c + (shape.cols - 1) / 2.0;
    const PixelPos center = cell_to_pixel(map.frame(), center_row, center_col);
    return CoarsePosition{center.x, center.y, target_w, target_h, best_sum / n};
}

double confidence_ratio(const std::vector<double>& target_values,
                        const std::vector<double>& original_values) {
    if (target_values.size() != original_values.size()) {
        std::ostringstream oss;
        oss << "rectangles differ in element count: " << target_values.size()
            << " vs " << original_values.size();
        throw DimensionError(oss.str());
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < target_values.size(); ++i) {
        const double t = target_values[i];
        const double o = original_values[i];
        num += (t - o) * (t - o);
        den += t * t + o * o;
    }
    if (den == 0.0) return 0.0;
    return 2.0 * num / den;
}

Delta delta(const ConfidenceMap& map, const CoarsePosition& target, double x_o,
            double y_o, bool clamp) {
    const CellShape shape = target_cells(map, target.target_w, target.target_h);
    const Placement tp = placement_at(map, shape, target.x_p, target.y_p);
    const Placement op = placement_at(map, shape, x_o, y_o);
    double r = confidence_ratio(rect_values(map, tp, shape),
                                rect_values(map, op, shape));
    if (clamp) r = std::min(r, 1.0);
    return Delta{r * (target.x_p - x_o), r * (target.y_p - y_o)};
}

AnchorPosition align(const Box& original, const Delta& delta_fcn,
                     const Delta& delta_cam) {
    if (!std::isfinite(delta_fcn.dx) || !std::isfinite(delta_fcn.dy) ||
        !std::isfinite(delta_cam.dx) || !std::isfinite(delta_cam.dy)) {
        throw InvalidParameterError("alignment deltas must be finite");
    }
    const double x_a = original.center_x() + 0.5 * (delta_fcn.dx + delta_cam.dx);
    const double y_a = original.center_y() + 0.5 * (delta_fcn.dy + delta_cam.dy);
    return AnchorPosition{
        x_a, y_a,
        Box(x_a - 0.5 * original.w, y_a - 0.5 * original.h, original.w, original.h)};
}

CellShape upsample_dims(const AlignParams& params, int rows, int cols,
                        double region_w, double region_h) {
    if (params.upsample_rows > 0 && params.upsample_cols > 0) {
        return CellShape{std::max(params.upsample_rows, rows),
                         std::max(params.upsample_cols, cols)};
    }
    // Match the region's aspect ratio without dropping below the stitched
    // resolution on either axis.
    const double rho = region_h / region_w;  // rows per column
    if (cols * rho >= rows) {
        const int out_rows =
            std::max(rows, static_cast<int>(std::lround(cols * rho)));
        return CellShape{out_rows, cols};
    }
    const int out_cols = std::max(cols, static_cast<int>(std::lround(rows / rho)));
    return CellShape{rows, out_cols};
}

AnchorPosition align_proposal(const ScorerBackend& backend, const Box& proposal,
                              const std::string& image_id,
                              const AlignParams& params, DetectorKind det) {
    const Box expanded = expand_box(proposal, params.expand_ratio);

    // Sub-stride shifts move the scoring window right/down only, so the
    // densified grid of a base region hangs (f-1)*s/f past its right and
    // bottom edges. Scoring from a base translated up-left by half the
    // total shift centers that grid on the expanded region and removes the
    // systematic search bias. Translation does not change the resize
    // scales, which depend only on the region size.
    namespace bg = backend_geometry;
    const double recenter = bg::kStride * (params.f - 1) / (2.0 * params.f);
    const Box region(expanded.x - recenter * expanded.w / bg::kInputWidth,
                     expanded.y - recenter * expanded.h / bg::kInputHeight,
                     expanded.w, expanded.h);

    const StitchedMaps stitched =
        shift_and_stitch_pair(backend, image_id, det, region, params.f);

    const CellShape dims = upsample_dims(params, stitched.fcn.rows(),
                                         stitched.fcn.cols(), region.w, region.h);
    const ConfidenceMap fcn_up = upsample(stitched.fcn, dims.rows, dims.cols);
    const ConfidenceMap cam_up = upsample(stitched.cam, dims.rows, dims.cols);

    const TargetSize target = target_size(params.L, region.w, region.h);

    // Work in region-local pixels: that is the frame the maps are tied to.
    const double x_o = proposal.center_x() - region.x;
    const double y_o = proposal.center_y() - region.y;

    const CoarsePosition coarse_fcn =
        coarse_position(fcn_up, target.w, target.h);
    const CoarsePosition coarse_cam =
        coarse_position(cam_up, target.w, target.h);
    const Delta d_fcn = delta(fcn_up, coarse_fcn, x_o, y_o, params.clamp_delta);
    const Delta d_cam = delta(cam_up, coarse_cam, x_o, y_o, params.clamp_delta);

    // Deltas are displacements, identical in the local and absolute frames.
    return align(proposal, d_fcn, d_cam);
}

}  // namespace pedalign
