#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pedalign/evaluation.hpp"

using namespace pedalign;

namespace {

Annotation make_ann(const std::string& id, Box full,
                    std::optional<Box> vis = std::nullopt) {
    Annotation ann;
    ann.image_id = id;
    ann.bb_full = full;
    ann.bb_vis = vis;
    return ann;
}

// Independent replay of the greedy-by-score matching rule, written as a
// plain exhaustive loop.
MatchResult oracle_match(const std::vector<ScoredBox>& dets,
                         const std::vector<Annotation>& anns, double thr) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dets.size(); ++i) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
        return a < b;
    });

    MatchResult result;
    result.det_labels.assign(dets.size(), DetLabel::fp);
    result.gt_matched.assign(anns.size(), false);
    for (std::size_t d : order) {
        std::size_t best = anns.size();
        for (std::size_t g = 0; g < anns.size(); ++g) {
            if (anns[g].ignore || result.gt_matched[g]) continue;
            if (iou(dets[d].box, anns[g].bb_full) <= thr) continue;
            if (best == anns.size() ||
                iou(dets[d].box, anns[g].bb_full) > iou(dets[d].box, anns[best].bb_full)) {
                best = g;
            }
        }
        if (best != anns.size()) {
            result.det_labels[d] = DetLabel::tp;
            result.gt_matched[best] = true;
            continue;
        }
        for (const Annotation& ann : anns) {
            if (ann.ignore && iou(dets[d].box, ann.bb_full) > thr) {
                result.det_labels[d] = DetLabel::ignored;
                break;
            }
        }
    }
    return result;
}

// Threshold sweep recomputed from scratch at every threshold.
EvalCurve oracle_curve(const std::vector<LabeledDetection>& dets, int n_images,
                       int n_gt) {
    std::vector<double> thresholds;
    for (const LabeledDetection& d : dets) {
        if (d.label != DetLabel::ignored) thresholds.push_back(d.score);
    }
    std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    EvalCurve out;
    for (double t : thresholds) {
        long tp = 0, fp = 0;
        for (const LabeledDetection& d : dets) {
            if (d.label == DetLabel::ignored || d.score < t) continue;
            if (d.label == DetLabel::tp) ++tp;
            else ++fp;
        }
        out.points.push_back(CurvePoint{static_cast<double>(fp) / n_images,
                                        1.0 - static_cast<double>(tp) / n_gt});
    }
    double log_sum = 0.0;
    for (int k = 0; k <= 8; ++k) {
        const double ref = std::pow(10.0, -2.0 + 0.25 * k);
        double mr = 1.0;
        for (const CurvePoint& p : out.points) {
            if (p.fppi <= ref) mr = p.miss_rate;
        }
        log_sum += std::log(std::max(mr, kMissRateFloor));
    }
    out.log_avg_mr = std::exp(log_sum / 9.0);
    return out;
}

}  // namespace

TEST_CASE("reasonable filter thresholds are strict") {
    std::vector<Annotation> anns;
    anns.push_back(make_ann("a", Box(0, 0, 40, 80)));                      // tall, fully visible
    anns.push_back(make_ann("a", Box(0, 0, 30, 49)));                      // too short
    anns.push_back(make_ann("a", Box(0, 0, 30, 50)));                      // exactly 50: still short
    anns.push_back(make_ann("a", Box(0, 0, 40, 80), Box(0, 0, 40, 40)));   // 50% visible
    anns.push_back(make_ann("a", Box(0, 0, 40, 80), Box(0, 0, 40, 52)));   // 65% visible exactly
    anns.push_back(make_ann("a", Box(0, 0, 40, 80), Box(0, 0, 40, 53)));   // just over 65%

    const auto filtered = reasonable_filter(anns);
    CHECK(!filtered[0].ignore);
    CHECK(filtered[1].ignore);
    CHECK(filtered[2].ignore);
    CHECK(filtered[3].ignore);
    CHECK(filtered[4].ignore);
    CHECK(!filtered[5].ignore);

    // Pre-set ignore flags survive.
    anns[0].ignore = true;
    CHECK(reasonable_filter(anns)[0].ignore);
}

TEST_CASE("match basic outcomes") {
    // IoU 0.6: shift a 10x10 box right by 2.5.
    std::vector<Annotation> one_gt = {make_ann("a", Box(0, 0, 10, 10))};
    const MatchResult tp = match_image({{Box(2.5, 0, 10, 10), 0.8}}, one_gt, 0.5);
    CHECK(tp.det_labels[0] == DetLabel::tp);
    CHECK(tp.gt_matched[0]);

    // IoU 0.4 < 0.5: FP, ground truth missed.
    const MatchResult fp = match_image({{Box(4.3, 0, 10, 10), 0.8}}, one_gt, 0.5);
    CHECK(fp.det_labels[0] == DetLabel::fp);
    CHECK(!fp.gt_matched[0]);

    // Two detections on one ground truth: higher score wins, other is FP.
    const MatchResult two = match_image(
        {{Box(0.5, 0, 10, 10), 0.9}, {Box(1, 0, 10, 10), 0.7}}, one_gt, 0.5);
    CHECK(two.det_labels[0] == DetLabel::tp);
    CHECK(two.det_labels[1] == DetLabel::fp);

    // Detections over ignore regions are absorbed, not penalized.
    std::vector<Annotation> with_ignore = {make_ann("a", Box(0, 0, 10, 10))};
    with_ignore[0].ignore = true;
    const MatchResult ign = match_image({{Box(0, 0, 10, 10), 0.8}}, with_ignore, 0.5);
    CHECK(ign.det_labels[0] == DetLabel::ignored);
}

TEST_CASE("match equals the exhaustive oracle on random instances") {
    std::mt19937 gen(97);
    std::uniform_int_distribution<int> count(0, 3);
    std::uniform_real_distribution<double> pos(0.0, 25.0);
    std::uniform_real_distribution<double> size(4.0, 20.0);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::uniform_real_distribution<double> flag(0.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<ScoredBox> dets;
        std::vector<Annotation> anns;
        const int nd = count(gen);
        const int ng = count(gen);
        for (int i = 0; i < nd; ++i) {
            dets.push_back({Box(pos(gen), pos(gen), size(gen), size(gen)), score(gen)});
        }
        for (int i = 0; i < ng; ++i) {
            Annotation ann = make_ann("a", Box(pos(gen), pos(gen), size(gen), size(gen)));
            ann.ignore = flag(gen) < 0.3;
            anns.push_back(ann);
        }
        const MatchResult got = match_image(dets, anns, 0.5);
        const MatchResult expected = oracle_match(dets, anns, 0.5);
        CHECK(got.det_labels == expected.det_labels);
        CHECK(got.gt_matched == expected.gt_matched);
    }
}

TEST_CASE("adding a trailing low-score detection never relabels the rest") {
    std::mt19937 gen(101);
    std::uniform_int_distribution<int> count(1, 5);
    std::uniform_real_distribution<double> pos(0.0, 25.0);
    std::uniform_real_distribution<double> size(4.0, 20.0);
    std::uniform_real_distribution<double> score(0.5, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<ScoredBox> dets;
        std::vector<Annotation> anns;
        for (int i = 0; i < count(gen); ++i) {
            dets.push_back({Box(pos(gen), pos(gen), size(gen), size(gen)), score(gen)});
        }
        for (int i = 0; i < count(gen); ++i) {
            anns.push_back(make_ann("a", Box(pos(gen), pos(gen), size(gen), size(gen))));
        }
        const MatchResult before = match_image(dets, anns, 0.5);
        dets.push_back({Box(pos(gen), pos(gen), size(gen), size(gen)), 0.01});
        const MatchResult after = match_image(dets, anns, 0.5);
        for (std::size_t i = 0; i + 1 < after.det_labels.size(); ++i) {
            CHECK(after.det_labels[i] == before.det_labels[i]);
        }
    }
}

TEST_CASE("curve degenerate cases") {
    // Perfect detector: miss rate at the floor everywhere.
    std::vector<LabeledDetection> perfect = {{1.0, DetLabel::tp},
                                             {1.0, DetLabel::tp},
                                             {1.0, DetLabel::tp}};
    const EvalCurve p = curve(perfect, 2, 3);
    CHECK(p.log_avg_mr == doctest::Approx(1e-4).epsilon(1e-12));
    REQUIRE(p.points.size() == 1);
    CHECK(p.points[0].fppi == 0.0);
    CHECK(p.points[0].miss_rate == 0.0);

    // No detections at all: total miss.
    const EvalCurve empty = curve({}, 2, 3);
    CHECK(empty.log_avg_mr == 1.0);
    CHECK(empty.points.empty());

    CHECK_THROWS_AS(curve({}, 2, 0), UndefinedMetricError);
}

TEST_CASE("curve matches the from-scratch sweep oracle") {
    std::mt19937 gen(103);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::uniform_real_distribution<double> kind(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<LabeledDetection> dets;
        std::uniform_int_distribution<int> count(0, 25);
        const int n = count(gen);
        int tp_total = 0;
        for (int i = 0; i < n; ++i) {
            const double k = kind(gen);
            DetLabel label = k < 0.45  ? DetLabel::tp
                             : k < 0.9 ? DetLabel::fp
                                       : DetLabel::ignored;
            if (label == DetLabel::tp) ++tp_total;
            // Duplicate scores happen on purpose.
            dets.push_back({std::round(score(gen) * 20.0) / 20.0, label});
        }
        const int n_gt = tp_total + std::uniform_int_distribution<int>(0, 5)(gen);
        if (n_gt == 0) continue;
        const EvalCurve got = curve(dets, 3, n_gt);
        const EvalCurve expected = oracle_curve(dets, 3, n_gt);
        REQUIRE(got.points.size() == expected.points.size());
        for (std::size_t i = 0; i < got.points.size(); ++i) {
            CHECK(got.points[i].fppi == expected.points[i].fppi);
            CHECK(got.points[i].miss_rate == expected.points[i].miss_rate);
        }
        CHECK(got.log_avg_mr == doctest::Approx(expected.log_avg_mr).epsilon(1e-12));

        // Monotone envelope: fppi never decreases, miss rate never increases.
        for (std::size_t i = 1; i < got.points.size(); ++i) {
            CHECK(got.points[i].fppi >= got.points[i - 1].fppi);
            CHECK(got.points[i].miss_rate <= got.points[i - 1].miss_rate);
        }
        CHECK(got.log_avg_mr >= kMissRateFloor);
        CHECK(got.log_avg_mr <= 1.0);
    }
}

TEST_CASE("ignored detections leave the curve bit-identical") {
    std::vector<LabeledDetection> base = {
        {0.9, DetLabel::tp}, {0.8, DetLabel::fp}, {0.55, DetLabel::tp},
        {0.4, DetLabel::fp}, {0.2, DetLabel::tp}};
    const EvalCurve before = curve(base, 4, 5);

    std::vector<LabeledDetection> with_ignored = base;
    with_ignored.push_back({0.85, DetLabel::ignored});
    with_ignored.push_back({0.3, DetLabel::ignored});
    with_ignored.push_back({0.95, DetLabel::ignored});
    const EvalCurve after = curve(with_ignored, 4, 5);

    REQUIRE(before.points.size() == after.points.size());
    for (std::size_t i = 0; i < before.points.size(); ++i) {
        CHECK(before.points[i].fppi == after.points[i].fppi);
        CHECK(before.points[i].miss_rate == after.points[i].miss_rate);
    }
    CHECK(before.log_avg_mr == after.log_avg_mr);
}
