#include "pedalign/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <map>
#include <sstream>

#include "pedalign/alignment.hpp"
#include "pedalign/grid_io.hpp"
#include "pedalign/saliency.hpp"
#include "pedalign/scene.hpp"

namespace pedalign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string image_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "img%03d", index);
    return buf;
}

}  // namespace

void cmd_gen(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    fs::create_directories(out_dir);
    fs::create_directories(out_dir / dataset_layout::kSaliencyDir);

    Dataset dataset;
    std::vector<DetectionRecord> proposals;
    AnalyticBackend backend;

    for (int i = 0; i < config.n_images; ++i) {
        SceneParams params = config.scene_params(i);
        SyntheticScene scene = generate_scene(params);
        scene.image_id = image_name(i);

        ImageInfo img;
        img.image_id = scene.image_id;
        img.width = params.image_w;
        img.height = params.image_h;
        dataset.images.push_back(img);

        for (std::size_t p = 0; p < scene.pedestrians.size(); ++p) {
            const PlantedPedestrian& ped = scene.pedestrians[p];
            AnnotationRecord rec;
            rec.ann.image_id = scene.image_id;
            rec.ann.bb_full = ped.full;
            if (ped.occluded) rec.ann.bb_vis = ped.vis;
            dataset.annotations.push_back(std::move(rec));
        }

        for (const SceneProposal& prop : scene.proposals) {
            const Box truth = scene.proposal_truth(prop);
            DetectionRecord rec;
            rec.image_id = scene.image_id;
            rec.det = prop.det;
            rec.extra = json{{"truth_kind", prop.distractor ? "distractor" : "pedestrian"},
                             {"truth_x", truth.x},
                             {"truth_y", truth.y},
                             {"truth_w", truth.w},
                             {"truth_h", truth.h}};
            proposals.push_back(std::move(rec));
        }

        save_grid(to_grid(scene.make_saliency()),
                  saliency_grid_path(out_dir, scene.image_id));
        backend.add_image(scene.image_id, scene.model);
    }

    save_dataset(dataset, out_dir);
    save_detections(proposals, out_dir / dataset_layout::kProposals);
    backend.save(out_dir / dataset_layout::kScene);
    save_config(config, out_dir / dataset_layout::kRunConfig);
}

void cmd_detect(const RunConfig& config, const fs::path& data_dir,
                const fs::path& proposals_path, const fs::path& out_path,
                bool no_saliency) {
    config.validate();
    const Dataset dataset = load_dataset(data_dir);
    std::vector<DetectionRecord> proposals = load_detections(proposals_path);

    // Group by image, preserving input order inside each group.
    std::map<std::string, std::vector<std::size_t>> by_image;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const std::string& id = proposals[i].image_id;
        if (!dataset.find_image(id)) {
            throw ValidationError("detections reference unknown image_id " + id);
        }
        by_image[id].push_back(i);
    }

    std::vector<DetectionRecord> output;
    for (const auto& [image_id, indices] : by_image) {
        std::vector<ScoredBox> candidates;
        candidates.reserve(indices.size());
        if (no_saliency) {
            for (std::size_t i : indices) candidates.push_back(proposals[i].det);
        } else {
            const fs::path grid_path = saliency_grid_path(data_dir, image_id);
            if (!fs::exists(grid_path)) {
                throw MissingInputError("no saliency map for image " + image_id +
                                        " (" + grid_path.string() + ")");
            }
            const SaliencyMap saliency = saliency_from_grid(load_grid(grid_path));
            for (std::size_t i : indices) {
                candidates.push_back(reweight(proposals[i].det, saliency, config.th_b));
            }
        }

        const std::vector<ScoredBox> kept = nms(candidates, config.nms_iou);

        // Map kept boxes back to their source records to keep extra fields.
        std::vector<bool> used(indices.size(), false);
        for (const ScoredBox& k : kept) {
            for (std::size_t j = 0; j < indices.size(); ++j) {
                if (used[j]) continue;
                const ScoredBox& c = candidates[j];
                if (c.box.x == k.box.x && c.box.y == k.box.y && c.box.w == k.box.w &&
                    c.box.h == k.box.h && c.score == k.score) {
                    DetectionRecord rec = proposals[indices[j]];
                    rec.det = k;
                    output.push_back(std::move(rec));
                    used[j] = true;
                    break;
                }
            }
        }
    }

    std::stable_sort(output.begin(), output.end(),
                     [](const DetectionRecord& a, const DetectionRecord& b) {
                         if (a.image_id != b.image_id) return a.image_id < b.image_id;
                         return a.det.score > b.det.score;
                     });
    save_detections(output, out_path);
}

AlignedDetection align_one(const RunConfig& config, const ScorerBackend& backend,
                           const std::string& image_id, const Box& proposal) {
    const AlignParams params = config.align_params();
    const AnchorPosition anchor =
        align_proposal(backend, proposal, image_id, params, DetectorKind::root);

    const double root_score =
        backend
            .evaluate(image_id, DetectorKind::root,
                      expand_box(proposal, params.expand_ratio), ShiftStep{})
            .score;

    // Part positions come from the same alignment machinery run per part on
    // the anchored box.
    const std::array<Box, 3> pboxes = part_boxes(anchor.aligned_box);
    const std::array<DetectorKind, 3> kinds = {
        DetectorKind::head, DetectorKind::torso, DetectorKind::legs};
    std::array<PartDetection, 3> parts;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const AnchorPosition part_anchor =
            align_proposal(backend, pboxes[i], image_id, params, kinds[i]);
        const double part_score =
            backend
                .evaluate(image_id, kinds[i],
                          expand_box(pboxes[i], params.expand_ratio), ShiftStep{})
                .score;
        parts[i] = PartDetection{static_cast<PartKind>(i), part_score,
                                 part_anchor.x_a, part_anchor.y_a};
    }

    double score;
    if (config.normalize_penalty) {
        // Penalty displacements expressed in units of the proposal size.
        std::array<PartDetection, 3> scaled = parts;
        for (PartDetection& p : scaled) {
            p.x /= proposal.w;
            p.y /= proposal.h;
        }
        score = merge(root_score, scaled, anchor.x_a / proposal.w,
                      anchor.y_a / proposal.h, config.merge_params());
    } else {
        score = merge(root_score, parts, anchor.x_a, anchor.y_a,
                      config.merge_params());
    }
    return AlignedDetection{anchor.aligned_box, score, anchor.x_a, anchor.y_a};
}

void cmd_align(const RunConfig& config, const fs::path& data_dir,
               const fs::path& dets_path, const fs::path& out_path, int jobs) {
    config.validate();
    if (jobs < 1) {
        throw InvalidParameterError("jobs must be >= 1");
    }
    load_dataset(data_dir);  // validates the directory
    const AnalyticBackend backend =
        AnalyticBackend::load(data_dir / dataset_layout::kScene);
    std::vector<DetectionRecord> dets = load_detections(dets_path);

    std::vector<AlignedDetection> aligned(dets.size(),
                                          AlignedDetection{Box(0, 0, 1, 1), 0, 0, 0});
    const auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                aligned[i] = align_one(config, backend, dets[i].image_id,
                                       dets[i].det.box);
            } catch (const Error& e) {
                std::ostringstream oss;
                oss << "aligning detection " << i << " (image " << dets[i].image_id
                    << "): " << e.what();
                throw Error(oss.str());
            }
        }
    };

    const std::size_t n = dets.size();
    const std::size_t n_jobs = std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1));
    if (n_jobs <= 1 || !backend.concurrent_safe()) {
        worker(0, n);
    } else {
        std::vector<std::future<void>> futures;
        const std::size_t chunk = (n + n_jobs - 1) / n_jobs;
        for (std::size_t j = 0; j < n_jobs; ++j) {
            const std::size_t begin = j * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            futures.push_back(
                std::async(std::launch::async, worker, begin, end));
        }
        for (auto& f : futures) f.get();
    }

    for (std::size_t i = 0; i < n; ++i) {
        dets[i].det = ScoredBox{aligned[i].box, aligned[i].score};
        dets[i].extra["anchor_x"] = aligned[i].anchor_x;
        dets[i].extra["anchor_y"] = aligned[i].anchor_y;
    }
    save_detections(dets, out_path);
}

EvalResult cmd_eval(const RunConfig& config, const fs::path& data_dir,
                    const fs::path& dets_path) {
    config.validate();
    const Dataset dataset = load_dataset(data_dir);
    const std::vector<DetectionRecord> dets = load_detections(dets_path);

    std::vector<LabeledDetection> labeled;
    int n_evaluable = 0;
    for (const ImageInfo& img : dataset.images) {
        const std::vector<Annotation> anns = reasonable_filter(
            dataset.annotations_for(img.image_id), config.min_height,
            config.min_visibility);
        for (const Annotation& ann : anns) {
            if (!ann.ignore) ++n_evaluable;
        }

        std::vector<ScoredBox> image_dets;
        for (const DetectionRecord& rec : dets) {
            if (rec.image_id == img.image_id) image_dets.push_back(rec.det);
        }
        const MatchResult matches = match_image(image_dets, anns, config.eval_iou);
        for (std::size_t i = 0; i < image_dets.size(); ++i) {
            labeled.push_back(
                LabeledDetection{image_dets[i].score, matches.det_labels[i]});
        }
    }

    for (const DetectionRecord& rec : dets) {
        if (!dataset.find_image(rec.image_id)) {
            throw ValidationError("detections reference unknown image_id " +
                                  rec.image_id);
        }
    }

    EvalResult result;
    result.n_images = static_cast<int>(dataset.images.size());
    result.n_evaluable_gt = n_evaluable;
    result.curve = curve(labeled, result.n_images, n_evaluable);
    return result;
}

std::string format_curve_table(const EvalCurve& curve) {
    std::string out = "# fppi miss_rate\n";
    char buf[80];
    for (const CurvePoint& p : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.fppi, p.miss_rate);
        out += buf;
    }
    return out;
}

std::string format_summary(const EvalCurve& curve) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "log_avg_mr %.17g\n", curve.log_avg_mr);
    return buf;
}

}  // namespace pedalign
