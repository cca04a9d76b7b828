#include "pedalign/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pedalign {

SaliencyMap::SaliencyMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width_ <= 0 || height_ <= 0) {
        throw InvalidParameterError("saliency map dimensions must be positive");
    }
    if (values_.size() != static_cast<std::size_t>(width_) * height_) {
        std::ostringstream oss;
        oss << "saliency map value count " << values_.size() << " does not match "
            << width_ << "x" << height_;
        throw DimensionError(oss.str());
    }
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidParameterError("saliency values must lie in [0,1]");
        }
    }
}

SaliencyMap SaliencyMap::constant(int width, int height, double value) {
    return SaliencyMap(width, height,
                       std::vector<double>(static_cast<std::size_t>(width) * height,
                                           value));
}

double SaliencyMap::mean() const {
    const double sum = std::accumulate(values_.begin(), values_.end(), 0.0);
    return sum / static_cast<double>(values_.size());
}

PixelRange pixels_in_interval(double lo, double hi, int limit) {
    // Pixel i counts iff lo <= i + 0.5 < hi.
    int first = static_cast<int>(std::ceil(lo - 0.5));
    int last = static_cast<int>(std::ceil(hi - 0.5)) - 1;
    first = std::max(first, 0);
    last = std::min(last, limit - 1);
    return PixelRange{first, last};
}

double saliency_weight(const ScoredBox& b, const SaliencyMap& map, double th_b) {
    if (b.score > th_b) return 1.0;

    const PixelRange cols = pixels_in_interval(b.box.x, b.box.right(), map.width());
    const PixelRange rows = pixels_in_interval(b.box.y, b.box.bottom(), map.height());
    if (cols.empty() || rows.empty()) {
        throw EmptyRegionError("box covers no pixels inside the image");
    }

    double sum = 0.0;
    for (int r = rows.first; r <= rows.last; ++r) {
        for (int c = cols.first; c <= cols.last; ++c) {
            sum += map.at(r, c);
        }
    }
    const double n = static_cast<double>(rows.last - rows.first + 1) *
                     static_cast<double>(cols.last - cols.first + 1);
    return sum / n;
}

ScoredBox reweight(const ScoredBox& b, const SaliencyMap& map, double th_b) {
    return ScoredBox{b.box, b.score * saliency_weight(b, map, th_b)};
}

SaliencyMap saliency_ground_truth(int image_w, int image_h,
                                  const std::vector<Box>& gt) {
    if (image_w <= 0 || image_h <= 0) {
        throw InvalidParameterError("image dimensions must be positive");
    }
    std::vector<double> values(static_cast<std::size_t>(image_w) * image_h, 0.0);
    for (const Box& box : gt) {
        const PixelRange cols = pixels_in_interval(box.x, box.right(), image_w);
        const PixelRange rows = pixels_in_interval(box.y, box.bottom(), image_h);
        if (cols.empty() || rows.empty()) continue;
        for (int r = rows.first; r <= rows.last; ++r) {
            std::fill(values.begin() + static_cast<std::size_t>(r) * image_w + cols.first,
                      values.begin() + static_cast<std::size_t>(r) * image_w + cols.last + 1,
                      1.0);
        }
    }
    return SaliencyMap(image_w, image_h, std::move(values));
}

}  // namespace pedalign
