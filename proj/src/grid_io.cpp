#include "pedalign/grid_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pedalign {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "pgrid";
constexpr int kVersion = 1;

const char* kind_name(GridKind kind) {
    switch (kind) {
        case GridKind::saliency: return "saliency";
        case GridKind::confidence: return "confidence";
        case GridKind::feature: return "feature";
    }
    throw InvalidParameterError("unknown grid kind");
}

GridKind kind_from_name(const std::string& name, const fs::path& path) {
    if (name == "saliency") return GridKind::saliency;
    if (name == "confidence") return GridKind::confidence;
    if (name == "feature") return GridKind::feature;
    throw ParseError(path.string() + ": unknown grid kind '" + name + "'");
}

void append_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

void atomic_write_text(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw MissingInputError("cannot open for writing: " + tmp.string());
        }
        out << content;
        if (!out) {
            throw MissingInputError("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void save_grid(const Grid& grid, const fs::path& path) {
    if (grid.rows <= 0 || grid.cols <= 0 || grid.channels <= 0) {
        throw InvalidParameterError("grid dimensions must be positive");
    }
    if (grid.values.size() !=
        static_cast<std::size_t>(grid.rows) * grid.cols * grid.channels) {
        throw DimensionError("grid value count does not match its shape");
    }

    std::string out;
    out.reserve(grid.values.size() * 20 + 128);
    {
        std::ostringstream header;
        header << kMagic << " " << kVersion << " " << kind_name(grid.kind) << " "
               << grid.rows << " " << grid.cols << " " << grid.channels << "\n";
        out += header.str();
    }
    out += "frame ";
    append_double(out, grid.frame.origin_x);
    out += ' ';
    append_double(out, grid.frame.origin_y);
    out += ' ';
    append_double(out, grid.frame.stride);
    out += ' ';
    append_double(out, grid.frame.scale_x);
    out += ' ';
    append_double(out, grid.frame.scale_y);
    out += '\n';

    const std::size_t per_row = static_cast<std::size_t>(grid.cols) * grid.channels;
    for (int r = 0; r < grid.rows; ++r) {
        for (std::size_t i = 0; i < per_row; ++i) {
            if (i > 0) out += ' ';
            append_double(out, grid.values[static_cast<std::size_t>(r) * per_row + i]);
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

Grid load_grid(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open grid file: " + path.string());
    }

    Grid grid;
    std::string magic;
    int version = 0;
    std::string kind;
    if (!(in >> magic >> version >> kind >> grid.rows >> grid.cols >>
          grid.channels)) {
        throw ParseError(path.string() + ": malformed grid header");
    }
    if (magic != kMagic || version != kVersion) {
        throw ParseError(path.string() + ": not a pgrid v1 file");
    }
    grid.kind = kind_from_name(kind, path);
    if (grid.rows <= 0 || grid.cols <= 0 || grid.channels <= 0) {
        throw ParseError(path.string() + ": non-positive grid shape");
    }

    std::string frame_tag;
    double ox, oy, stride, sx, sy;
    if (!(in >> frame_tag >> ox >> oy >> stride >> sx >> sy) ||
        frame_tag != "frame") {
        throw ParseError(path.string() + ": malformed frame line");
    }
    try {
        grid.frame = MapFrame(ox, oy, stride, sx, sy);
    } catch (const InvalidParameterError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }

    const std::size_t expected =
        static_cast<std::size_t>(grid.rows) * grid.cols * grid.channels;
    grid.values.resize(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        if (!(in >> grid.values[i])) {
            std::ostringstream oss;
            oss << path.string() << ": truncated grid data (expected " << expected
                << " values, got " << i << ")";
            throw ParseError(oss.str());
        }
    }
    std::string trailing;
    if (in >> trailing) {
        throw ParseError(path.string() + ": trailing data after grid values");
    }
    return grid;
}

Grid to_grid(const SaliencyMap& map) {
    Grid g;
    g.kind = GridKind::saliency;
    g.rows = map.height();
    g.cols = map.width();
    g.channels = 1;
    g.frame = MapFrame();
    g.values = map.values();
    return g;
}

Grid to_grid(const ConfidenceMap& map) {
    Grid g;
    g.kind = GridKind::confidence;
    g.rows = map.rows();
    g.cols = map.cols();
    g.channels = 1;
    g.frame = map.frame();
    g.values = map.values();
    return g;
}

Grid to_grid(const FeatureGrid& grid) {
    Grid g;
    g.kind = GridKind::feature;
    g.rows = grid.rows();
    g.cols = grid.cols();
    g.channels = grid.channels();
    g.frame = grid.frame();
    g.values = grid.values();
    return g;
}

SaliencyMap saliency_from_grid(const Grid& grid) {
    if (grid.kind != GridKind::saliency || grid.channels != 1) {
        throw ParseError("grid is not a single-channel saliency map");
    }
    return SaliencyMap(grid.cols, grid.rows, grid.values);
}

ConfidenceMap confidence_from_grid(const Grid& grid) {
    if (grid.kind != GridKind::confidence || grid.channels != 1) {
        throw ParseError("grid is not a single-channel confidence map");
    }
    return ConfidenceMap(grid.rows, grid.cols, grid.values, grid.frame);
}

FeatureGrid features_from_grid(const Grid& grid) {
    if (grid.kind != GridKind::feature) {
        throw ParseError("grid is not a feature grid");
    }
    return FeatureGrid(grid.rows, grid.cols, grid.channels, grid.values,
                       grid.frame);
}

}  // namespace pedalign
