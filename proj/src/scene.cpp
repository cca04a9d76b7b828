#include "pedalign/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pedalign/grid_io.hpp"
#include "pedalign/rng.hpp"

namespace pedalign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double gauss(double d, double tau) {
    return std::exp(-0.5 * d * d / (tau * tau));
}

// Each planted object contributes a two-component bump: a narrow core that
// makes the confidence-ratio update sensitive to small displacements, and a
// broad low pedestal that anchors the coarse search and keeps the ratio
// from saturating (the pedestal mass sits in the denominator of the ratio).
constexpr double kCoreTauW = 0.08;
constexpr double kCoreTauH = 0.033;
constexpr double kPedestalTauW = 0.30;
constexpr double kPedestalTauH = 0.22;
constexpr double kPedestalAmp = 0.09;
constexpr double kPedestrianAmp = 1.0;
constexpr double kDistractorAmp = 0.45;

// Feature channels: two bump families at different widths plus a second
// ripple, so the activation map shares the peaks of the confidence field
// without duplicating it.
constexpr double kNarrowChannel = 0.8;
constexpr double kWideChannel = 1.3;

void add_bump(std::vector<Emitter>& out, DetectorKind det, const Box& box,
              double amp) {
    out.push_back(Emitter{det, box.center_x(), box.center_y(), amp,
                          std::max(1.0, box.w * kCoreTauW),
                          std::max(1.0, box.h * kCoreTauH)});
    out.push_back(Emitter{det, box.center_x(), box.center_y(),
                          amp * kPedestalAmp,
                          std::max(1.0, box.w * kPedestalTauW),
                          std::max(1.0, box.h * kPedestalTauH)});
}

}  // namespace

double AnalyticModel::field_value(DetectorKind det, double x, double y) const {
    double v = ripple.amp * std::sin(ripple.fx * x + ripple.phase_x) *
               std::cos(ripple.fy * y + ripple.phase_y);
    for (const Emitter& e : emitters) {
        if (e.det != det) continue;
        v += e.amp * gauss(x - e.cx, e.tau_x) * gauss(y - e.cy, e.tau_y);
    }
    return v;
}

double AnalyticModel::channel_value(int channel, DetectorKind det, double x,
                                    double y) const {
    switch (channel) {
        case 0:
        case 1: {
            const double widen = channel == 0 ? kNarrowChannel : kWideChannel;
            double v = 0.0;
            for (const Emitter& e : emitters) {
                if (e.det != det) continue;
                v += e.amp * gauss(x - e.cx, e.tau_x * widen) *
                     gauss(y - e.cy, e.tau_y * widen);
            }
            return v;
        }
        case 2:
            return ripple.amp * std::sin(1.7 * ripple.fx * x + ripple.phase_y) *
                   std::cos(2.3 * ripple.fy * y + ripple.phase_x);
        default:
            throw InvalidParameterError("analytic model has 3 channels");
    }
}

json AnalyticModel::to_json() const {
    json emitters_json = json::array();
    for (const Emitter& e : emitters) {
        emitters_json.push_back(json{{"det", detector_name(e.det)},
                                     {"cx", e.cx},
                                     {"cy", e.cy},
                                     {"amp", e.amp},
                                     {"tau_x", e.tau_x},
                                     {"tau_y", e.tau_y}});
    }
    return json{{"emitters", emitters_json},
                {"ripple",
                 json{{"amp", ripple.amp},
                      {"fx", ripple.fx},
                      {"fy", ripple.fy},
                      {"phase_x", ripple.phase_x},
                      {"phase_y", ripple.phase_y}}},
                {"cam_weights", cam_weights}};
}

AnalyticModel AnalyticModel::from_json(const json& j) {
    AnalyticModel model;
    for (const json& e : j.at("emitters")) {
        model.emitters.push_back(Emitter{
            detector_from_name(e.at("det").get<std::string>()),
            e.at("cx").get<double>(), e.at("cy").get<double>(),
            e.at("amp").get<double>(), e.at("tau_x").get<double>(),
            e.at("tau_y").get<double>()});
    }
    const json& r = j.at("ripple");
    model.ripple = Ripple{r.at("amp").get<double>(), r.at("fx").get<double>(),
                          r.at("fy").get<double>(), r.at("phase_x").get<double>(),
                          r.at("phase_y").get<double>()};
    if (j.contains("cam_weights")) {
        const auto w = j.at("cam_weights");
        for (std::size_t i = 0; i < model.cam_weights.size(); ++i) {
            model.cam_weights[i] = w.at(i).get<double>();
        }
    }
    return model;
}

SaliencyMap SyntheticScene::make_saliency() const {
    std::vector<Box> boxes;
    boxes.reserve(pedestrians.size());
    for (const PlantedPedestrian& p : pedestrians) {
        boxes.push_back(p.vis);
    }
    return saliency_ground_truth(params.image_w, params.image_h, boxes);
}

Box SyntheticScene::proposal_truth(const SceneProposal& p) const {
    return p.distractor ? distractors[p.truth_index].box
                        : pedestrians[p.truth_index].full;
}

namespace {

// Minimum axis-aligned gap between two boxes; 0 when they touch or overlap.
double box_gap(const Box& a, const Box& b) {
    const double gx = std::max({a.x - b.right(), b.x - a.right(), 0.0});
    const double gy = std::max({a.y - b.bottom(), b.y - a.bottom(), 0.0});
    return std::max(gx, gy);
}

Box jittered_box(Rng& rng, const Box& truth, double sigma, double image_w,
                 double image_h) {
    double dx = 0.0;
    double dy = 0.0;
    if (sigma > 0.0) {
        dx = std::clamp(rng.normal(0.0, sigma), -3.0 * sigma, 3.0 * sigma);
        dy = std::clamp(rng.normal(0.0, sigma), -3.0 * sigma, 3.0 * sigma);
    }
    double x = truth.x + dx;
    double y = truth.y + dy;
    x = std::clamp(x, 0.0, std::max(0.0, image_w - truth.w));
    y = std::clamp(y, 0.0, std::max(0.0, image_h - truth.h));
    return Box(x, y, truth.w, truth.h);
}

}  // namespace

SyntheticScene generate_scene(const SceneParams& params) {
    if (params.image_w <= 0 || params.image_h <= 0) {
        throw InvalidParameterError("scene image dimensions must be positive");
    }
    if (params.n_pedestrians < 0 || params.n_distractors < 0) {
        throw InvalidParameterError("scene object counts must be non-negative");
    }
    if (!(params.jitter_sigma >= 0.0)) {
        throw InvalidParameterError("jitter sigma must be >= 0");
    }
    if (params.occlusion_fraction < 0.0 || params.occlusion_fraction > 1.0) {
        throw InvalidParameterError("occlusion fraction must be in [0,1]");
    }

    SyntheticScene scene;
    scene.params = params;
    Rng rng(mix_seed(params.seed, 0));

    const double margin = 8.0;
    constexpr int kMaxRetries = 200;
    // Keeping distractors this far from every visible pedestrian box
    // guarantees a 3-sigma-jittered distractor proposal never overlaps
    // pedestrian saliency.
    const double distractor_gap = 3.0 * params.jitter_sigma + 2.0;

    std::vector<Box> placed;

    for (int i = 0; i < params.n_pedestrians; ++i) {
        bool ok = false;
        for (int attempt = 0; attempt < kMaxRetries && !ok; ++attempt) {
            const double max_h =
                std::min(180.0, params.image_h - 2.0 * margin);
            if (max_h < 80.0) {
                throw GenerationError("image too small for pedestrian placement");
            }
            const double h = rng.uniform(80.0, max_h);
            const double w = 0.41 * h;
            if (params.image_w - 2.0 * margin < w) {
                throw GenerationError("image too narrow for pedestrian placement");
            }
            const double x = rng.uniform(margin, params.image_w - margin - w);
            const double y = rng.uniform(margin, params.image_h - margin - h);
            Box full(x, y, w, h);

            bool overlaps = false;
            for (const Box& other : placed) {
                if (iou(full, other) > 0.25) {
                    overlaps = true;
                    break;
                }
            }
            if (overlaps) continue;

            const bool occluded = rng.uniform() < params.occlusion_fraction;
            // Occlusion hides the lower body: visible height drops below
            // the 65% visibility bound.
            const Box vis =
                occluded ? Box(full.x, full.y, full.w,
                               full.h * rng.uniform(0.3, 0.6))
                         : full;
            scene.pedestrians.push_back(
                PlantedPedestrian{full, vis, part_boxes(vis), occluded});
            placed.push_back(full);
            ok = true;
        }
        if (!ok) {
            throw GenerationError("could not place pedestrian after retries");
        }
    }

    for (int i = 0; i < params.n_distractors; ++i) {
        bool ok = false;
        for (int attempt = 0; attempt < kMaxRetries && !ok; ++attempt) {
            const double max_h =
                std::min(200.0, params.image_h - 2.0 * margin);
            if (max_h < 100.0) {
                throw GenerationError("image too small for distractor placement");
            }
            const double h = rng.uniform(100.0, max_h);
            const double w = h * rng.uniform(0.12, 0.2);
            const double x = rng.uniform(margin, params.image_w - margin - w);
            const double y = rng.uniform(margin, params.image_h - margin - h);
            Box box(x, y, w, h);

            bool conflict = false;
            for (const PlantedPedestrian& ped : scene.pedestrians) {
                if (box_gap(box, ped.vis) < distractor_gap) {
                    conflict = true;
                    break;
                }
            }
            for (const PlantedDistractor& other : scene.distractors) {
                if (!conflict && iou(box, other.box) > 0.25) {
                    conflict = true;
                }
            }
            if (conflict) continue;

            scene.distractors.push_back(PlantedDistractor{box});
            ok = true;
        }
        if (!ok) {
            throw GenerationError("could not place distractor after retries");
        }
    }

    // Analytic confidence field: a bump per pedestrian for the root
    // detector and per part box for the part detectors; distractors get
    // weaker root bumps only.
    for (const PlantedPedestrian& ped : scene.pedestrians) {
        add_bump(scene.model.emitters, DetectorKind::root, ped.full,
                 kPedestrianAmp);
        const std::array<DetectorKind, 3> kinds = {
            DetectorKind::head, DetectorKind::torso, DetectorKind::legs};
        for (std::size_t k = 0; k < kinds.size(); ++k) {
            add_bump(scene.model.emitters, kinds[k], ped.part_truth[k],
                     kPedestrianAmp);
        }
    }
    for (const PlantedDistractor& d : scene.distractors) {
        add_bump(scene.model.emitters, DetectorKind::root, d.box, kDistractorAmp);
    }
    scene.model.ripple.phase_x = rng.uniform(0.0, 2.0 * M_PI);
    scene.model.ripple.phase_y = rng.uniform(0.0, 2.0 * M_PI);

    for (std::size_t i = 0; i < scene.pedestrians.size(); ++i) {
        const Box jittered = jittered_box(rng, scene.pedestrians[i].full,
                                          params.jitter_sigma, params.image_w,
                                          params.image_h);
        scene.proposals.push_back(SceneProposal{
            ScoredBox{jittered, rng.uniform(0.6, 0.95)}, static_cast<int>(i),
            false});
    }
    for (std::size_t i = 0; i < scene.distractors.size(); ++i) {
        const Box jittered = jittered_box(rng, scene.distractors[i].box,
                                          params.jitter_sigma, params.image_w,
                                          params.image_h);
        scene.proposals.push_back(SceneProposal{
            ScoredBox{jittered, rng.uniform(0.2, 0.45)}, static_cast<int>(i),
            true});
    }

    return scene;
}

void AnalyticBackend::add_image(const std::string& image_id, AnalyticModel model) {
    models_[image_id] = std::move(model);
}

AnalyticBackend AnalyticBackend::for_scene(const SyntheticScene& scene) {
    AnalyticBackend backend;
    backend.add_image(scene.image_id, scene.model);
    return backend;
}

const AnalyticModel& AnalyticBackend::model(const std::string& image_id) const {
    auto it = models_.find(image_id);
    if (it == models_.end()) {
        throw MissingInputError("no analytic model for image " + image_id);
    }
    return it->second;
}

ScorerResult AnalyticBackend::evaluate(const std::string& image_id,
                                       DetectorKind det, const Box& region,
                                       const ShiftStep& shift) const {
    if (shift.f < 1 || shift.dx < 0 || shift.dy < 0 || shift.dx >= shift.f ||
        shift.dy >= shift.f) {
        throw InvalidParameterError("shift indices must satisfy 0 <= d < f");
    }
    const AnalyticModel& m = model(image_id);

    namespace bg = backend_geometry;
    const double scale_x = bg::kInputWidth / region.w;
    const double scale_y = bg::kInputHeight / region.h;
    const double off_x = shift.dx * bg::kStride / shift.f;
    const double off_y = shift.dy * bg::kStride / shift.f;

    std::vector<double> fcn(static_cast<std::size_t>(bg::kMapRows) * bg::kMapCols);
    std::vector<double> features(fcn.size() * kChannels);
    std::size_t cell = 0;
    for (int i = 0; i < bg::kMapRows; ++i) {
        for (int j = 0; j < bg::kMapCols; ++j, ++cell) {
            const double x =
                region.x + (bg::kOrigin + bg::kStride * j + off_x) / scale_x;
            const double y =
                region.y + (bg::kOrigin + bg::kStride * i + off_y) / scale_y;
            fcn[cell] = m.field_value(det, x, y);
            for (int k = 0; k < kChannels; ++k) {
                features[cell * kChannels + k] = m.channel_value(k, det, x, y);
            }
        }
    }

    // Frame positions are local to the unshifted region, so stitched cells
    // land where the shifted windows actually looked.
    MapFrame frame(bg::kOrigin + off_x, bg::kOrigin + off_y, bg::kStride,
                   scale_x, scale_y);
    const double score =
        m.field_value(det, region.center_x(), region.center_y());
    return ScorerResult{
        ConfidenceMap(bg::kMapRows, bg::kMapCols, std::move(fcn), frame),
        FeatureGrid(bg::kMapRows, bg::kMapCols, kChannels, std::move(features),
                    frame),
        score};
}

ClassWeights AnalyticBackend::cam_weights(DetectorKind) const {
    if (models_.empty()) {
        throw MissingInputError("analytic backend has no models");
    }
    const auto& w = models_.begin()->second.cam_weights;
    return ClassWeights{{w[0], w[1], w[2]}};
}

json AnalyticBackend::to_json() const {
    json images = json::array();
    for (const auto& [id, model] : models_) {
        images.push_back(json{{"image_id", id}, {"model", model.to_json()}});
    }
    return json{{"format", "pedalign-scene"}, {"version", 1}, {"images", images}};
}

AnalyticBackend AnalyticBackend::from_json(const json& j) {
    if (j.value("format", "") != "pedalign-scene") {
        throw ParseError("not a pedalign scene file");
    }
    AnalyticBackend backend;
    for (const json& img : j.at("images")) {
        backend.add_image(img.at("image_id").get<std::string>(),
                          AnalyticModel::from_json(img.at("model")));
    }
    return backend;
}

void AnalyticBackend::save(const fs::path& path) const {
    atomic_write_text(path, to_json().dump(2) + "\n");
}

AnalyticBackend AnalyticBackend::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open scene file: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace pedalign
