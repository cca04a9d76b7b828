#include "pedalign/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pedalign {

namespace {

void require_finite(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InvalidParameterError(std::string(what) + " values must be finite");
        }
    }
}

}  // namespace

ConfidenceMap::ConfidenceMap(int rows, int cols, std::vector<double> values,
                             MapFrame frame)
    : rows_(rows), cols_(cols), values_(std::move(values)), frame_(frame) {
    if (rows_ <= 0 || cols_ <= 0) {
        throw InvalidParameterError("confidence map dimensions must be positive");
    }
    if (values_.size() != static_cast<std::size_t>(rows_) * cols_) {
        std::ostringstream oss;
        oss << "confidence map value count " << values_.size()
            << " does not match " << rows_ << "x" << cols_;
        throw DimensionError(oss.str());
    }
    require_finite(values_, "confidence map");
}

FeatureGrid::FeatureGrid(int rows, int cols, int channels,
                         std::vector<double> values, MapFrame frame)
    : rows_(rows),
      cols_(cols),
      channels_(channels),
      values_(std::move(values)),
      frame_(frame) {
    if (rows_ <= 0 || cols_ <= 0 || channels_ <= 0) {
        throw InvalidParameterError("feature grid dimensions must be positive");
    }
    if (values_.size() != static_cast<std::size_t>(rows_) * cols_ * channels_) {
        std::ostringstream oss;
        oss << "feature grid value count " << values_.size() << " does not match "
            << rows_ << "x" << cols_ << "x" << channels_;
        throw DimensionError(oss.str());
    }
    require_finite(values_, "feature grid");
}

const char* detector_name(DetectorKind det) {
    switch (det) {
        case DetectorKind::root: return "root";
        case DetectorKind::head: return "head";
        case DetectorKind::torso: return "torso";
        case DetectorKind::legs: return "legs";
    }
    throw InvalidParameterError("unknown detector kind");
}

DetectorKind detector_from_name(const std::string& name) {
    if (name == "root") return DetectorKind::root;
    if (name == "head") return DetectorKind::head;
    if (name == "torso") return DetectorKind::torso;
    if (name == "legs") return DetectorKind::legs;
    throw ParseError("unknown detector name: " + name);
}

ConfidenceMap cam(const FeatureGrid& features, const ClassWeights& weights) {
    if (weights.weights.size() != static_cast<std::size_t>(features.channels())) {
        std::ostringstream oss;
        oss << "class weight count " << weights.weights.size()
            << " does not match channel count " << features.channels();
        throw DimensionError(oss.str());
    }
    std::vector<double> values(static_cast<std::size_t>(features.rows()) *
                               features.cols());
    std::size_t idx = 0;
    for (int r = 0; r < features.rows(); ++r) {
        for (int c = 0; c < features.cols(); ++c) {
            double sum = 0.0;
            for (int k = 0; k < features.channels(); ++k) {
                sum += weights.weights[k] * features.at(r, c, k);
            }
            values[idx++] = sum;
        }
    }
    return ConfidenceMap(features.rows(), features.cols(), std::move(values),
                         features.frame());
}

double cam_total(const FeatureGrid& features, const ClassWeights& weights) {
    const ConfidenceMap map = cam(features, weights);
    return std::accumulate(map.values().begin(), map.values().end(), 0.0);
}

namespace {

void check_stitch_stride(double stride, int f) {
    if (f < 1) {
        throw InvalidParameterError("shift count f must be >= 1");
    }
    const double steps = stride / static_cast<double>(f);
    if (std::floor(stride) != stride || steps != std::floor(steps)) {
        std::ostringstream oss;
        oss << "shift count f=" << f << " does not divide the stride " << stride;
        throw InvalidParameterError(oss.str());
    }
}

}  // namespace

ConfidenceMap stitch_maps(const std::vector<ConfidenceMap>& maps, int f) {
    if (f < 1) {
        throw InvalidParameterError("shift count f must be >= 1");
    }
    if (maps.size() != static_cast<std::size_t>(f) * f) {
        std::ostringstream oss;
        oss << "stitching needs " << f * f << " maps, got " << maps.size();
        throw DimensionError(oss.str());
    }
    const ConfidenceMap& base = maps.front();
    check_stitch_stride(base.frame().stride, f);
    for (const ConfidenceMap& m : maps) {
        if (m.rows() != base.rows() || m.cols() != base.cols()) {
            throw DimensionError("constituent maps must share dimensions");
        }
    }

    const int out_rows = base.rows() * f;
    const int out_cols = base.cols() * f;
    std::vector<double> values(static_cast<std::size_t>(out_rows) * out_cols);
    for (int dy = 0; dy < f; ++dy) {
        for (int dx = 0; dx < f; ++dx) {
            const ConfidenceMap& m = maps[static_cast<std::size_t>(dy) * f + dx];
            for (int i = 0; i < base.rows(); ++i) {
                for (int j = 0; j < base.cols(); ++j) {
                    const std::size_t out =
                        static_cast<std::size_t>(i * f + dy) * out_cols + (j * f + dx);
                    values[out] = m.at(i, j);
                }
            }
        }
    }
    MapFrame out_frame(base.frame().origin_x, base.frame().origin_y,
                       base.frame().stride / f, base.frame().scale_x,
                       base.frame().scale_y);
    return ConfidenceMap(out_rows, out_cols, std::move(values), out_frame);
}

namespace {

template <typename MapOf>
ConfidenceMap stitch_backend(const ScorerBackend& backend,
                             const std::string& image_id, DetectorKind det,
                             const Box& region, int f, MapOf&& map_of) {
    check_stitch_stride(backend_geometry::kStride, f);
    std::vector<ConfidenceMap> maps;
    maps.reserve(static_cast<std::size_t>(f) * f);
    for (int dy = 0; dy < f; ++dy) {
        for (int dx = 0; dx < f; ++dx) {
            maps.push_back(map_of(
                backend.evaluate(image_id, det, region, ShiftStep{dx, dy, f})));
        }
    }
    return stitch_maps(maps, f);
}

}  // namespace

ConfidenceMap shift_and_stitch(const ScorerBackend& backend,
                               const std::string& image_id, DetectorKind det,
                               const Box& region, int f) {
    return stitch_backend(backend, image_id, det, region, f,
                          [](ScorerResult r) { return std::move(r.fcn); });
}

ConfidenceMap shift_and_stitch_cam(const ScorerBackend& backend,
                                   const std::string& image_id, DetectorKind det,
                                   const Box& region, int f) {
    const ClassWeights weights = backend.cam_weights(det);
    return stitch_backend(backend, image_id, det, region, f,
                          [&](ScorerResult r) { return cam(r.features, weights); });
}

StitchedMaps shift_and_stitch_pair(const ScorerBackend& backend,
                                   const std::string& image_id, DetectorKind det,
                                   const Box& region, int f) {
    check_stitch_stride(backend_geometry::kStride, f);
    const ClassWeights weights = backend.cam_weights(det);
    std::vector<ConfidenceMap> fcn_maps;
    std::vector<ConfidenceMap> cam_maps;
    fcn_maps.reserve(static_cast<std::size_t>(f) * f);
    cam_maps.reserve(static_cast<std::size_t>(f) * f);
    for (int dy = 0; dy < f; ++dy) {
        for (int dx = 0; dx < f; ++dx) {
            ScorerResult r =
                backend.evaluate(image_id, det, region, ShiftStep{dx, dy, f});
            cam_maps.push_back(cam(r.features, weights));
            fcn_maps.push_back(std::move(r.fcn));
        }
    }
    return StitchedMaps{stitch_maps(fcn_maps, f), stitch_maps(cam_maps, f)};
}

ConfidenceMap upsample(const ConfidenceMap& map, int out_rows, int out_cols) {
    if (out_rows < map.rows() || out_cols < map.cols()) {
        std::ostringstream oss;
        oss << "upsample cannot shrink: " << map.rows() << "x" << map.cols()
            << " -> " << out_rows << "x" << out_cols;
        throw InvalidParameterError(oss.str());
    }
    if (out_rows == map.rows() && out_cols == map.cols()) {
        return map;
    }

    const int in_rows = map.rows();
    const int in_cols = map.cols();
    std::vector<double> values(static_cast<std::size_t>(out_rows) * out_cols);
    for (int i = 0; i < out_rows; ++i) {
        const double src_r = out_rows > 1
                                 ? static_cast<double>(i) * (in_rows - 1) / (out_rows - 1)
                                 : 0.0;
        const int r0 = std::min(static_cast<int>(src_r), in_rows - 1);
        const int r1 = std::min(r0 + 1, in_rows - 1);
        const double tr = src_r - r0;
        for (int j = 0; j < out_cols; ++j) {
            const double src_c =
                out_cols > 1
                    ? static_cast<double>(j) * (in_cols - 1) / (out_cols - 1)
                    : 0.0;
            const int c0 = std::min(static_cast<int>(src_c), in_cols - 1);
            const int c1 = std::min(c0 + 1, in_cols - 1);
            const double tc = src_c - c0;
            const double top = map.at(r0, c0) * (1.0 - tc) + map.at(r0, c1) * tc;
            const double bot = map.at(r1, c0) * (1.0 - tc) + map.at(r1, c1) * tc;
            values[static_cast<std::size_t>(i) * out_cols + j] =
                top * (1.0 - tr) + bot * tr;
        }
    }

    // Keep the input stride; fold the per-axis center spacing into the
    // scales so the first and last cell centers stay where they were.
    const MapFrame& in = map.frame();
    const double x0 = cell_to_pixel(in, 0, 0).x;
    const double y0 = cell_to_pixel(in, 0, 0).y;
    const double step_x = out_cols > 1 && in_cols > 1
                              ? (in_cols - 1) * in.cell_size_x() / (out_cols - 1)
                              : in.cell_size_x();
    const double step_y = out_rows > 1 && in_rows > 1
                              ? (in_rows - 1) * in.cell_size_y() / (out_rows - 1)
                              : in.cell_size_y();
    const double scale_x = in.stride / step_x;
    const double scale_y = in.stride / step_y;
    MapFrame out_frame(x0 * scale_x, y0 * scale_y, in.stride, scale_x, scale_y);
    return ConfidenceMap(out_rows, out_cols, std::move(values), out_frame);
}

}  // namespace pedalign
