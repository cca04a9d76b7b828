#pragma once

#include <optional>
#include <vector>

#include "pedalign/errors.hpp"

namespace pedalign {

// Axis-aligned box in continuous pixel coordinates, top-left origin.
// Area is w*h with no +1 pixel convention. Degenerate boxes (w or h <= 0,
// or any non-finite field) are rejected at construction.
struct Box {
    double x;
    double y;
    double w;
    double h;

    Box(double x, double y, double w, double h);

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double center_x() const { return x + 0.5 * w; }
    double center_y() const { return y + 0.5 * h; }
    double area() const { return w * h; }
};

struct ScoredBox {
    Box box;
    double score;
};

// Ties cells of a coarse map back to pixel coordinates of the frame the
// map was computed over. origin_* is the position of cell (0,0)'s center
// in the resized (network-input) frame, stride is the cell pitch there,
// and scale_* are the resize factors from the source frame to the resized
// frame, so a cell center lands at ((origin_x + col*stride)/scale_x, ...)
// in source pixels.
struct MapFrame {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double stride = 1.0;
    double scale_x = 1.0;
    double scale_y = 1.0;

    MapFrame() = default;
    MapFrame(double origin_x, double origin_y, double stride,
             double scale_x = 1.0, double scale_y = 1.0);

    // Cell pitch measured in source-frame pixels, per axis.
    double cell_size_x() const { return stride / scale_x; }
    double cell_size_y() const { return stride / scale_y; }
};

struct PixelPos {
    double x;
    double y;
};

struct CellPos {
    int row;
    int col;
};

double intersection_area(const Box& a, const Box& b);

// Intersection over union; symmetric, 0 for disjoint boxes, 1 for identical.
double iou(const Box& a, const Box& b);

// Greedy non-maximum suppression in descending score order; a candidate is
// suppressed iff its IoU with an already kept box exceeds the threshold
// (strictly). Score ties break by input index, lower index first. Output
// preserves descending score order. Threshold must lie in (0,1].
std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates,
                           double iou_threshold);

// Fractional cell indices are allowed (e.g. the center of a 2x2 cell block).
PixelPos cell_to_pixel(const MapFrame& frame, double cell_row, double cell_col);

// Nearest cell to a source-frame pixel position. Inverse of cell_to_pixel
// for integer cells.
CellPos pixel_to_cell(const MapFrame& frame, double x, double y);

// Scales width and height by (1+ratio) about the box center. No clipping;
// use clip_box for that.
Box expand_box(const Box& b, double ratio);

// Intersection with [0,image_w) x [0,image_h); nullopt when empty.
std::optional<Box> clip_box(const Box& b, double image_w, double image_h);

}  // namespace pedalign
