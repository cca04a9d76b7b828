#include "pedalign/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pedalign/grid_io.hpp"

namespace pedalign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Parses one JSONL file, handing each non-empty line to the callback.
template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open: " + path.string());
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            std::ostringstream oss;
            oss << path.string() << ":" << lineno << ": " << e.what();
            throw ParseError(oss.str());
        }
        if (!j.is_object()) {
            std::ostringstream oss;
            oss << path.string() << ":" << lineno << ": record is not an object";
            throw ParseError(oss.str());
        }
        try {
            fn(j, lineno);
        } catch (const json::exception& e) {
            std::ostringstream oss;
            oss << path.string() << ":" << lineno << ": " << e.what();
            throw ParseError(oss.str());
        } catch (const InvalidParameterError& e) {
            std::ostringstream oss;
            oss << path.string() << ":" << lineno << ": " << e.what();
            throw ParseError(oss.str());
        }
    }
}

json take_extras(json j, std::initializer_list<const char*> known) {
    for (const char* key : known) {
        j.erase(key);
    }
    return j;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::string content;
    for (const std::string& line : lines) {
        content += line;
        content += '\n';
    }
    atomic_write_text(path, content);
}

}  // namespace

json box_to_json(const Box& box) {
    return json{{"x", box.x}, {"y", box.y}, {"w", box.w}, {"h", box.h}};
}

Box box_from_json(const json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("x") || !j.contains("y") ||
        !j.contains("w") || !j.contains("h")) {
        throw InvalidParameterError(context + " must be an object with x,y,w,h");
    }
    return Box(j.at("x").get<double>(), j.at("y").get<double>(),
               j.at("w").get<double>(), j.at("h").get<double>());
}

const ImageInfo* Dataset::find_image(const std::string& image_id) const {
    for (const ImageInfo& img : images) {
        if (img.image_id == image_id) return &img;
    }
    return nullptr;
}

std::vector<Annotation> Dataset::annotations_for(const std::string& image_id) const {
    std::vector<Annotation> out;
    for (const AnnotationRecord& rec : annotations) {
        if (rec.ann.image_id == image_id) out.push_back(rec.ann);
    }
    return out;
}

Dataset load_dataset(const fs::path& dir) {
    Dataset ds;

    for_each_record(dir / dataset_layout::kImages, [&](const json& j, int) {
        ImageInfo img;
        img.image_id = j.at("image_id").get<std::string>();
        img.width = j.at("width").get<int>();
        img.height = j.at("height").get<int>();
        img.extra = take_extras(j, {"image_id", "width", "height"});
        ds.images.push_back(std::move(img));
    });

    const fs::path ann_path = dir / dataset_layout::kAnnotations;
    if (fs::exists(ann_path)) {
        for_each_record(ann_path, [&](const json& j, int) {
            AnnotationRecord rec;
            rec.ann.image_id = j.at("image_id").get<std::string>();
            rec.ann.bb_full = box_from_json(j.at("full"), "full");
            if (j.contains("vis")) {
                rec.ann.bb_vis = box_from_json(j.at("vis"), "vis");
            }
            rec.ann.ignore = j.value("ignore", false);
            rec.extra = take_extras(j, {"image_id", "full", "vis", "ignore"});
            ds.annotations.push_back(std::move(rec));
        });
    }

    // Cross-record invariants, reported together.
    std::vector<std::string> violations;
    std::set<std::string> image_ids;
    for (const ImageInfo& img : ds.images) {
        if (!image_ids.insert(img.image_id).second) {
            violations.push_back("duplicate image_id: " + img.image_id);
        }
        if (img.width <= 0 || img.height <= 0) {
            violations.push_back("non-positive dimensions for image " + img.image_id);
        }
    }
    for (std::size_t i = 0; i < ds.annotations.size(); ++i) {
        const Annotation& ann = ds.annotations[i].ann;
        std::ostringstream where;
        where << "annotation " << i << " (image " << ann.image_id << ")";
        const ImageInfo* img = ds.find_image(ann.image_id);
        if (!img) {
            violations.push_back(where.str() + ": unknown image_id");
            continue;
        }
        if (auto msg = annotation_violation(ann)) {
            violations.push_back(where.str() + ": " + *msg);
        }
        if (!clip_box(ann.bb_full, img->width, img->height)) {
            violations.push_back(where.str() + ": box outside image bounds");
        }
    }
    if (!violations.empty()) {
        std::string msg = "dataset validation failed:";
        for (const std::string& v : violations) {
            msg += "\n  " + v;
        }
        throw ValidationError(msg);
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir);

    std::vector<std::string> lines;
    lines.reserve(dataset.images.size());
    for (const ImageInfo& img : dataset.images) {
        json j = img.extra;
        j["image_id"] = img.image_id;
        j["width"] = img.width;
        j["height"] = img.height;
        lines.push_back(j.dump());
    }
    write_lines(dir / dataset_layout::kImages, lines);

    lines.clear();
    for (const AnnotationRecord& rec : dataset.annotations) {
        json j = rec.extra;
        j["image_id"] = rec.ann.image_id;
        j["full"] = box_to_json(rec.ann.bb_full);
        if (rec.ann.bb_vis) {
            j["vis"] = box_to_json(*rec.ann.bb_vis);
        }
        if (rec.ann.ignore) {
            j["ignore"] = true;
        }
        lines.push_back(j.dump());
    }
    write_lines(dir / dataset_layout::kAnnotations, lines);
}

std::vector<DetectionRecord> load_detections(const fs::path& path) {
    std::vector<DetectionRecord> out;
    for_each_record(path, [&](const json& j, int) {
        DetectionRecord rec{
            j.at("image_id").get<std::string>(),
            ScoredBox{Box(j.at("x").get<double>(), j.at("y").get<double>(),
                          j.at("w").get<double>(), j.at("h").get<double>()),
                      j.at("score").get<double>()},
            take_extras(j, {"image_id", "x", "y", "w", "h", "score"})};
        out.push_back(std::move(rec));
    });
    return out;
}

void save_detections(const std::vector<DetectionRecord>& dets,
                     const fs::path& path) {
    std::vector<std::string> lines;
    lines.reserve(dets.size());
    for (const DetectionRecord& rec : dets) {
        json j = rec.extra;
        j["image_id"] = rec.image_id;
        j["x"] = rec.det.box.x;
        j["y"] = rec.det.box.y;
        j["w"] = rec.det.box.w;
        j["h"] = rec.det.box.h;
        j["score"] = rec.det.score;
        lines.push_back(j.dump());
    }
    write_lines(path, lines);
}

std::filesystem::path saliency_grid_path(const fs::path& dir,
                                         const std::string& image_id) {
    return dir / dataset_layout::kSaliencyDir / (image_id + ".grid");
}

}  // namespace pedalign
