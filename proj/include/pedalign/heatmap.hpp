#pragma once

#include <string>
#include <vector>

#include "pedalign/geometry.hpp"

namespace pedalign {

// Geometry every scorer backend declares: a detection region is resized to
// a 160x96 (h x w) input and scored on a 5x3 grid with 32 pixels between
// steps; cell (0,0) is centered half a stride in from the top-left corner.
namespace backend_geometry {
inline constexpr double kInputHeight = 160.0;
inline constexpr double kInputWidth = 96.0;
inline constexpr double kStride = 32.0;
inline constexpr int kMapRows = 5;
inline constexpr int kMapCols = 3;
inline constexpr double kOrigin = 16.0;
}  // namespace backend_geometry

// Coarse grid of detector confidences plus the frame tying cells back to
// pixel coordinates.
class ConfidenceMap {
public:
    ConfidenceMap(int rows, int cols, std::vector<double> values, MapFrame frame);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double at(int row, int col) const {
        return values_[static_cast<std::size_t>(row) * cols_ + col];
    }
    const std::vector<double>& values() const { return values_; }
    const MapFrame& frame() const { return frame_; }

private:
    int rows_;
    int cols_;
    std::vector<double> values_;
    MapFrame frame_;
};

// Per-cell activations over K channels, cell-major with channels interleaved.
class FeatureGrid {
public:
    FeatureGrid(int rows, int cols, int channels, std::vector<double> values,
                MapFrame frame);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int channels() const { return channels_; }
    double at(int row, int col, int channel) const {
        return values_[(static_cast<std::size_t>(row) * cols_ + col) * channels_ +
                       channel];
    }
    const std::vector<double>& values() const { return values_; }
    const MapFrame& frame() const { return frame_; }

private:
    int rows_;
    int cols_;
    int channels_;
    std::vector<double> values_;
    MapFrame frame_;
};

struct ClassWeights {
    std::vector<double> weights;
};

enum class DetectorKind { root = 0, head = 1, torso = 2, legs = 3 };

const char* detector_name(DetectorKind det);
DetectorKind detector_from_name(const std::string& name);

// Window shift used by shift-and-stitch: the scoring window moves right by
// dx*stride/f and down by dy*stride/f in the resized frame.
struct ShiftStep {
    int dx = 0;
    int dy = 0;
    int f = 1;
};

struct ScorerResult {
    ConfidenceMap fcn;
    FeatureGrid features;
    double score;
};

// Contract for anything that can score a region of an image. Evaluations
// must be deterministic (identical inputs yield identical outputs) and
// follow the declared backend_geometry. A backend that is not safe for
// concurrent evaluate calls overrides concurrent_safe.
class ScorerBackend {
public:
    virtual ~ScorerBackend() = default;

    virtual ScorerResult evaluate(const std::string& image_id, DetectorKind det,
                                  const Box& region,
                                  const ShiftStep& shift) const = 0;

    // Class weights w_k applied to the feature channels when forming the
    // class activation map.
    virtual ClassWeights cam_weights(DetectorKind det) const = 0;

    virtual bool concurrent_safe() const { return true; }
};

// Class activation map: per-cell weighted sum over channels, same frame as
// the feature grid. Throws DimensionError when the weight count does not
// match the channel count.
ConfidenceMap cam(const FeatureGrid& features, const ClassWeights& weights);

// The scalar variant: sum of the activation map over all cells.
double cam_total(const FeatureGrid& features, const ClassWeights& weights);

// Interlaces f*f constituent maps (indexed maps[dy*f + dx]) into one map of
// f-times the resolution: output cell (i*f+dy, j*f+dx) takes value (i,j) of
// the map for shift (dx,dy). Pure permutation, no arithmetic.
ConfidenceMap stitch_maps(const std::vector<ConfidenceMap>& maps, int f);

// Evaluates the backend at all f*f sub-stride window shifts and interlaces
// the confidence maps. Requires f to divide the map stride exactly.
ConfidenceMap shift_and_stitch(const ScorerBackend& backend,
                               const std::string& image_id, DetectorKind det,
                               const Box& region, int f);

// Same evaluations, but the stitched map is built from the class activation
// maps of the per-shift feature grids.
ConfidenceMap shift_and_stitch_cam(const ScorerBackend& backend,
                                   const std::string& image_id, DetectorKind det,
                                   const Box& region, int f);

// One pass over the f*f evaluations producing both stitched maps.
struct StitchedMaps {
    ConfidenceMap fcn;
    ConfidenceMap cam;
};
StitchedMaps shift_and_stitch_pair(const ScorerBackend& backend,
                                   const std::string& image_id, DetectorKind det,
                                   const Box& region, int f);

// Bilinear upsampling over cell centers with endpoints aligned; the output
// frame is recomputed so cell centers span the same pixel extent. Output
// dimensions must be >= input dimensions.
ConfidenceMap upsample(const ConfidenceMap& map, int out_rows, int out_cols);

}  // namespace pedalign
