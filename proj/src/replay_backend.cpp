#include "pedalign/replay_backend.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pedalign/grid_io.hpp"

namespace pedalign {

namespace fs = std::filesystem;
using nlohmann::json;

std::string evaluation_key(const std::string& image_id, DetectorKind det,
                           const Box& region, const ShiftStep& shift) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "|%s|%.6f,%.6f,%.6f,%.6f|f%d|dx%d|dy%d",
                  detector_name(det), region.x, region.y, region.w, region.h,
                  shift.f, shift.dx, shift.dy);
    return image_id + buf;
}

std::string region_hash(const std::string& key) {
    // FNV-1a 64.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

RecordingBackend::RecordingBackend(const ScorerBackend& inner, fs::path dir)
    : inner_(inner), dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

RecordingBackend::~RecordingBackend() {
    try {
        flush();
    } catch (...) {
        // Destructors cannot propagate; callers needing the error call
        // flush() themselves first.
    }
}

ScorerResult RecordingBackend::evaluate(const std::string& image_id,
                                        DetectorKind det, const Box& region,
                                        const ShiftStep& shift) const {
    ScorerResult result = inner_.evaluate(image_id, det, region, shift);

    const std::string key = evaluation_key(image_id, det, region, shift);
    const std::string hash = region_hash(key);
    const std::string fcn_file = hash + ".fcn.grid";
    const std::string feat_file = hash + ".feat.grid";

    std::lock_guard<std::mutex> lock(mutex_);
    if (!manifest_.count(key)) {
        save_grid(to_grid(result.fcn), dir_ / fcn_file);
        save_grid(to_grid(result.features), dir_ / feat_file);
        manifest_[key] = json{{"key", key},
                              {"image_id", image_id},
                              {"det", detector_name(det)},
                              {"region", {{"x", region.x},
                                          {"y", region.y},
                                          {"w", region.w},
                                          {"h", region.h}}},
                              {"f", shift.f},
                              {"dx", shift.dx},
                              {"dy", shift.dy},
                              {"score", result.score},
                              {"fcn", fcn_file},
                              {"features", feat_file}};
    }
    weights_.emplace(detector_name(det), inner_.cam_weights(det));
    return result;
}

ClassWeights RecordingBackend::cam_weights(DetectorKind det) const {
    ClassWeights w = inner_.cam_weights(det);
    std::lock_guard<std::mutex> lock(mutex_);
    weights_.emplace(detector_name(det), w);
    return w;
}

void RecordingBackend::flush() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string manifest;
    for (const auto& [key, entry] : manifest_) {
        manifest += entry.dump();
        manifest += '\n';
    }
    atomic_write_text(dir_ / "manifest.jsonl", manifest);

    json weights = json::object();
    for (const auto& [det, w] : weights_) {
        weights[det] = w.weights;
    }
    atomic_write_text(dir_ / "weights.json", weights.dump(2) + "\n");
}

DirectoryBackend::DirectoryBackend(fs::path dir) : dir_(std::move(dir)) {
    const fs::path manifest_path = dir_ / "manifest.jsonl";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open backend manifest: " +
                                manifest_path.string());
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            entries_[j.at("key").get<std::string>()] =
                Entry{j.at("fcn").get<std::string>(),
                      j.at("features").get<std::string>(),
                      j.at("score").get<double>()};
        } catch (const json::exception& e) {
            std::ostringstream oss;
            oss << manifest_path.string() << ":" << lineno << ": " << e.what();
            throw ParseError(oss.str());
        }
    }

    const fs::path weights_path = dir_ / "weights.json";
    std::ifstream win(weights_path, std::ios::binary);
    if (win) {
        json j;
        try {
            win >> j;
            for (const auto& [det, w] : j.items()) {
                weights_[det] = ClassWeights{w.get<std::vector<double>>()};
            }
        } catch (const json::exception& e) {
            throw ParseError(weights_path.string() + ": " + e.what());
        }
    }
}

ScorerResult DirectoryBackend::evaluate(const std::string& image_id,
                                        DetectorKind det, const Box& region,
                                        const ShiftStep& shift) const {
    const std::string key = evaluation_key(image_id, det, region, shift);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw MissingInputError("backend directory has no evaluation for " + key);
    }
    const Grid fcn = load_grid(dir_ / it->second.fcn_file);
    const Grid feat = load_grid(dir_ / it->second.features_file);
    return ScorerResult{confidence_from_grid(fcn), features_from_grid(feat),
                        it->second.score};
}

ClassWeights DirectoryBackend::cam_weights(DetectorKind det) const {
    auto it = weights_.find(detector_name(det));
    if (it == weights_.end()) {
        throw MissingInputError(std::string("no class weights recorded for ") +
                                detector_name(det));
    }
    return it->second;
}

}  // namespace pedalign
