#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pedalign/evaluation.hpp"
#include "pedalign/geometry.hpp"

namespace pedalign {

// Records mirror the line-oriented files one to one: each carries the
// parsed fields plus any unknown fields, which are preserved verbatim on
// rewrite.

struct ImageInfo {
    std::string image_id;
    int width = 0;
    int height = 0;
    nlohmann::json extra = nlohmann::json::object();
};

struct AnnotationRecord {
    Annotation ann;
    nlohmann::json extra = nlohmann::json::object();
};

struct DetectionRecord {
    std::string image_id;
    ScoredBox det{Box(0, 0, 1, 1), 0.0};
    nlohmann::json extra = nlohmann::json::object();
};

struct Dataset {
    std::vector<ImageInfo> images;
    std::vector<AnnotationRecord> annotations;

    const ImageInfo* find_image(const std::string& image_id) const;
    std::vector<Annotation> annotations_for(const std::string& image_id) const;
};

// Standard names inside a dataset directory.
namespace dataset_layout {
inline constexpr const char* kImages = "images.jsonl";
inline constexpr const char* kAnnotations = "annotations.jsonl";
inline constexpr const char* kProposals = "proposals.jsonl";
inline constexpr const char* kSaliencyDir = "saliency";
inline constexpr const char* kScene = "scene.json";
inline constexpr const char* kRunConfig = "run_config.json";
}  // namespace dataset_layout

// Loads images.jsonl and annotations.jsonl from a dataset directory and
// validates the cross-record invariants (annotation image ids exist, boxes
// intersect their image, bb_vis inside bb_full). Throws ParseError with
// file and line on malformed records and ValidationError listing all
// offenders on invariant violations.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);
void save_detections(const std::vector<DetectionRecord>& dets,
                     const std::filesystem::path& path);

// Serialization helpers shared by the record readers/writers.
nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& j, const std::string& context);

std::filesystem::path saliency_grid_path(const std::filesystem::path& dir,
                                         const std::string& image_id);

}  // namespace pedalign
