#include "pedalign/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pedalign {

namespace {

bool all_finite(std::initializer_list<double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace

Box::Box(double x, double y, double w, double h) : x(x), y(y), w(w), h(h) {
    if (!all_finite({x, y, w, h})) {
        throw InvalidParameterError("box fields must be finite");
    }
    if (w <= 0.0 || h <= 0.0) {
        std::ostringstream oss;
        oss << "degenerate box: w=" << w << " h=" << h;
        throw InvalidParameterError(oss.str());
    }
}

MapFrame::MapFrame(double origin_x, double origin_y, double stride,
                   double scale_x, double scale_y)
    : origin_x(origin_x),
      origin_y(origin_y),
      stride(stride),
      scale_x(scale_x),
      scale_y(scale_y) {
    if (!all_finite({origin_x, origin_y, stride, scale_x, scale_y})) {
        throw InvalidParameterError("map frame fields must be finite");
    }
    if (stride <= 0.0 || scale_x <= 0.0 || scale_y <= 0.0) {
        throw InvalidParameterError("map frame stride and scales must be positive");
    }
}

double intersection_area(const Box& a, const Box& b) {
    const double ix = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    return ix * iy;
}

double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    // Areas derived from the same edge arithmetic as the intersection so
    // identical boxes yield exactly 1.
    const double area_a = (a.right() - a.x) * (a.bottom() - a.y);
    const double area_b = (b.right() - b.x) * (b.bottom() - b.y);
    return inter / (area_a + area_b - inter);
}

std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates,
                           double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw InvalidParameterError("NMS IoU threshold must be in (0,1]");
    }
    for (const ScoredBox& c : candidates) {
        if (!std::isfinite(c.score)) {
            throw InvalidParameterError("NMS candidate score must be finite");
        }
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return candidates[a].score > candidates[b].score;
                     });

    std::vector<ScoredBox> kept;
    kept.reserve(candidates.size());
    for (std::size_t idx : order) {
        const ScoredBox& cand = candidates[idx];
        bool suppressed = false;
        for (const ScoredBox& k : kept) {
            if (iou(cand.box, k.box) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(cand);
    }
    return kept;
}

PixelPos cell_to_pixel(const MapFrame& frame, double cell_row, double cell_col) {
    return PixelPos{(frame.origin_x + cell_col * frame.stride) / frame.scale_x,
                    (frame.origin_y + cell_row * frame.stride) / frame.scale_y};
}

CellPos pixel_to_cell(const MapFrame& frame, double x, double y) {
    const double col = (x * frame.scale_x - frame.origin_x) / frame.stride;
    const double row = (y * frame.scale_y - frame.origin_y) / frame.stride;
    return CellPos{static_cast<int>(std::lround(row)),
                   static_cast<int>(std::lround(col))};
}

Box expand_box(const Box& b, double ratio) {
    if (!(ratio >= 0.0) || !std::isfinite(ratio)) {
        throw InvalidParameterError("expand ratio must be >= 0");
    }
    const double nw = b.w * (1.0 + ratio);
    const double nh = b.h * (1.0 + ratio);
    return Box(b.center_x() - 0.5 * nw, b.center_y() - 0.5 * nh, nw, nh);
}

std::optional<Box> clip_box(const Box& b, double image_w, double image_h) {
    const double x0 = std::max(b.x, 0.0);
    const double y0 = std::max(b.y, 0.0);
    const double x1 = std::min(b.right(), image_w);
    const double y1 = std::min(b.bottom(), image_h);
    if (x1 - x0 <= 0.0 || y1 - y0 <= 0.0) return std::nullopt;
    return Box(x0, y0, x1 - x0, y1 - y0);
}

}  // namespace pedalign
