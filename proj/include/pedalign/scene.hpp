#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pedalign/heatmap.hpp"
#include "pedalign/parts.hpp"
#include "pedalign/saliency.hpp"

namespace pedalign {

struct SceneParams {
    int n_pedestrians = 3;
    int n_distractors = 3;
    double jitter_sigma = 8.0;
    double occlusion_fraction = 0.0;
    int image_w = 640;
    int image_h = 480;
    std::uint64_t seed = 1;
};

// One separable Gaussian bump in the analytic confidence field.
struct Emitter {
    DetectorKind det;
    double cx;
    double cy;
    double amp;
    double tau_x;
    double tau_y;
};

// Low-amplitude deterministic ripple standing in for scorer noise. Being a
// fixed analytic function of absolute position, it survives dense-vs-
// stitched comparisons exactly. Wavelengths are a few map cells so the
// ripple roughly cancels over search rectangles.
struct Ripple {
    double amp = 0.01;
    double fx = 0.33;
    double fy = 0.41;
    double phase_x = 0.0;
    double phase_y = 0.0;
};

// The per-image model an AnalyticBackend scores from: bumps per detector
// kind plus the ripple. Feature channels are derived fields so the class
// activation map peaks where the confidence map does, with a different
// profile.
struct AnalyticModel {
    std::vector<Emitter> emitters;
    Ripple ripple;
    std::array<double, 3> cam_weights = {0.6, 0.4, 0.15};

    double field_value(DetectorKind det, double x, double y) const;
    double channel_value(int channel, DetectorKind det, double x, double y) const;

    nlohmann::json to_json() const;
    static AnalyticModel from_json(const nlohmann::json& j);
};

struct PlantedPedestrian {
    Box full;
    Box vis;
    std::array<Box, 3> part_truth;
    bool occluded = false;
};

struct PlantedDistractor {
    Box box;
};

// A proposal plus the link back to the object that generated it.
struct SceneProposal {
    ScoredBox det;
    int truth_index;   // into pedestrians or distractors
    bool distractor;
};

struct SyntheticScene {
    SceneParams params;
    std::string image_id = "img000";
    std::vector<PlantedPedestrian> pedestrians;
    std::vector<PlantedDistractor> distractors;
    std::vector<SceneProposal> proposals;
    AnalyticModel model;

    SaliencyMap make_saliency() const;
    Box proposal_truth(const SceneProposal& p) const;
};

// Deterministic per seed. Pedestrian truth boxes respect the reasonable
// subset unless the occlusion fraction forces some below 65% visibility;
// proposals are the truth boxes displaced by per-axis Gaussian jitter
// clipped at three sigma and kept inside the image. Throws GenerationError
// when placement constraints cannot be met after bounded retries.
SyntheticScene generate_scene(const SceneParams& params);

// Scores regions of any number of images against their analytic models.
class AnalyticBackend : public ScorerBackend {
public:
    AnalyticBackend() = default;

    void add_image(const std::string& image_id, AnalyticModel model);
    static AnalyticBackend for_scene(const SyntheticScene& scene);

    ScorerResult evaluate(const std::string& image_id, DetectorKind det,
                          const Box& region,
                          const ShiftStep& shift) const override;
    ClassWeights cam_weights(DetectorKind det) const override;

    const AnalyticModel& model(const std::string& image_id) const;

    nlohmann::json to_json() const;
    static AnalyticBackend from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static AnalyticBackend load(const std::filesystem::path& path);

    static constexpr int kChannels = 3;

private:
    std::map<std::string, AnalyticModel> models_;
};

}  // namespace pedalign
