#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pedalign/heatmap.hpp"
#include "pedalign/saliency.hpp"

namespace pedalign {

enum class GridKind { saliency, confidence, feature };

// Portable grid file shared by saliency maps, confidence maps and feature
// grids: a two-line header (magic/kind/shape, then frame metadata) followed
// by one line of values per row, channels interleaved. Values are written
// with 17 significant digits so a save/load round trip is bit-exact.
struct Grid {
    GridKind kind;
    int rows = 0;
    int cols = 0;
    int channels = 1;
    MapFrame frame;
    std::vector<double> values;
};

Grid load_grid(const std::filesystem::path& path);
void save_grid(const Grid& grid, const std::filesystem::path& path);

Grid to_grid(const SaliencyMap& map);
Grid to_grid(const ConfidenceMap& map);
Grid to_grid(const FeatureGrid& grid);

SaliencyMap saliency_from_grid(const Grid& grid);
ConfidenceMap confidence_from_grid(const Grid& grid);
FeatureGrid features_from_grid(const Grid& grid);

// Writes to a temp file in the same directory and renames into place.
void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace pedalign
