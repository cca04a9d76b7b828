#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include <json.hpp>

#include "pedalign/heatmap.hpp"

namespace pedalign {

// Canonical lookup key for one backend evaluation.
std::string evaluation_key(const std::string& image_id, DetectorKind det,
                           const Box& region, const ShiftStep& shift);

// Short filesystem-safe digest of an evaluation key.
std::string region_hash(const std::string& key);

// Wraps another backend and writes every evaluation to a directory: one
// grid file per (image_id, region hash, shift) for the confidence map and
// one for the features, plus a manifest.jsonl line carrying the score and
// file names. The directory can then be replayed without the original
// backend.
class RecordingBackend : public ScorerBackend {
public:
    RecordingBackend(const ScorerBackend& inner, std::filesystem::path dir);
    ~RecordingBackend() override;

    ScorerResult evaluate(const std::string& image_id, DetectorKind det,
                          const Box& region,
                          const ShiftStep& shift) const override;
    ClassWeights cam_weights(DetectorKind det) const override;
    bool concurrent_safe() const override { return false; }

    // Writes the manifest; called automatically on destruction.
    void flush() const;

private:
    const ScorerBackend& inner_;
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, nlohmann::json> manifest_;
    mutable std::map<std::string, ClassWeights> weights_;
};

// Replays a directory written by RecordingBackend. Unknown evaluations
// raise MissingInputError naming the key.
class DirectoryBackend : public ScorerBackend {
public:
    explicit DirectoryBackend(std::filesystem::path dir);

    ScorerResult evaluate(const std::string& image_id, DetectorKind det,
                          const Box& region,
                          const ShiftStep& shift) const override;
    ClassWeights cam_weights(DetectorKind det) const override;

private:
    struct Entry {
        std::string fcn_file;
        std::string features_file;
        double score;
    };
    std::filesystem::path dir_;
    std::map<std::string, Entry> entries_;
    std::map<std::string, ClassWeights> weights_;
};

}  // namespace pedalign
