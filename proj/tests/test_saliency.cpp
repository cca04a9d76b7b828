#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "pedalign/saliency.hpp"

using namespace pedalign;

namespace {

// Exact area of the union of boxes clipped to the image, via coordinate
// compression; independent of the pixel rasterization used by the map.
double union_area_clipped(const std::vector<Box>& boxes, double image_w,
                          double image_h) {
    std::vector<Box> clipped;
    for (const Box& b : boxes) {
        if (auto c = clip_box(b, image_w, image_h)) clipped.push_back(*c);
    }
    if (clipped.empty()) return 0.0;
    std::vector<double> xs, ys;
    for (const Box& b : clipped) {
        xs.push_back(b.x);
        xs.push_back(b.right());
        ys.push_back(b.y);
        ys.push_back(b.bottom());
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const double cx = 0.5 * (xs[i] + xs[i + 1]);
            const double cy = 0.5 * (ys[j] + ys[j + 1]);
            for (const Box& b : clipped) {
                if (cx >= b.x && cx < b.right() && cy >= b.y && cy < b.bottom()) {
                    area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
                    break;
                }
            }
        }
    }
    return area;
}

SaliencyMap half_map(int size) {
    // Left half 1.0, right half 0.0.
    std::vector<double> values(static_cast<std::size_t>(size) * size, 0.0);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size / 2; ++c) {
            values[static_cast<std::size_t>(r) * size + c] = 1.0;
        }
    }
    return SaliencyMap(size, size, std::move(values));
}

}  // namespace

TEST_CASE("saliency map validates its domain") {
    CHECK_THROWS_AS(SaliencyMap(2, 2, {0.0, 0.5, 1.0}), DimensionError);
    CHECK_THROWS_AS(SaliencyMap(2, 1, {0.0, 1.5}), InvalidParameterError);
    CHECK_THROWS_AS(SaliencyMap(0, 2, {}), InvalidParameterError);
    const SaliencyMap map = SaliencyMap::constant(3, 2, 0.25);
    CHECK(map.mean() == 0.25);
}

TEST_CASE("saliency weight branches") {
    const SaliencyMap map = SaliencyMap::constant(20, 20, 0.8);

    // Above the threshold the map is irrelevant.
    CHECK(saliency_weight({Box(0, 0, 10, 10), 0.9}, map, 0.5) == 1.0);

    // Below the threshold: mean of a constant map.
    CHECK(saliency_weight({Box(2, 2, 10, 10), 0.3}, map, 0.5) ==
          doctest::Approx(0.8).epsilon(1e-12));

    // Half over a region of ones, half over zeros, equal pixel counts.
    const SaliencyMap half = half_map(20);
    CHECK(saliency_weight({Box(0, 0, 20, 20), 0.3}, half, 0.5) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("saliency weight errors on boxes outside the image") {
    const SaliencyMap map = SaliencyMap::constant(10, 10, 0.5);
    CHECK_THROWS_AS(saliency_weight({Box(50, 50, 5, 5), 0.1}, map, 0.5),
                    EmptyRegionError);
    // Inside the image but covering no pixel center.
    CHECK_THROWS_AS(saliency_weight({Box(0.6, 0.6, 0.2, 0.2), 0.1}, map, 0.5),
                    EmptyRegionError);
}

TEST_CASE("reweight examples") {
    const SaliencyMap map08 = SaliencyMap::constant(20, 20, 0.8);
    const ScoredBox low{Box(0, 0, 10, 10), 0.3};
    CHECK(reweight(low, map08, 0.5).score == doctest::Approx(0.24).epsilon(1e-12));

    const ScoredBox high{Box(0, 0, 10, 10), 0.7};
    CHECK(reweight(high, map08, 0.5).score == 0.7);  // bit-identical

    const SaliencyMap zeros = SaliencyMap::constant(20, 20, 0.0);
    CHECK(reweight(low, zeros, 0.5).score == 0.0);
}

TEST_CASE("reweight properties") {
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> pos(0.0, 30.0);
    std::uniform_real_distribution<double> size(1.0, 20.0);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::uniform_real_distribution<double> score_dist(0.0, 1.0);

    std::vector<double> values(50 * 50);
    for (double& v : values) v = val(gen);
    const SaliencyMap map(50, 50, values);
    const SaliencyMap ones = SaliencyMap::constant(50, 50, 1.0);

    for (int i = 0; i < 500; ++i) {
        const ScoredBox b{Box(pos(gen), pos(gen), size(gen), size(gen)),
                          score_dist(gen)};
        const double out = reweight(b, map, 0.5).score;
        // Weight is in [0,1], so non-negative scores never increase.
        CHECK(out <= b.score + 1e-15);
        CHECK(reweight(b, ones, 0.5).score == b.score);
        if (b.score > 0.5) CHECK(out == b.score);
    }

    // Ranking of proposals above th_b is untouched.
    const ScoredBox a{Box(0, 0, 5, 5), 0.9};
    const ScoredBox c{Box(10, 10, 5, 5), 0.7};
    CHECK(reweight(a, map, 0.5).score > reweight(c, map, 0.5).score);
}

TEST_CASE("saliency ground truth examples") {
    CHECK(saliency_ground_truth(50, 40, {}).mean() == 0.0);

    const SaliencyMap one_box = saliency_ground_truth(100, 100, {Box(20, 30, 10, 10)});
    CHECK(one_box.mean() == doctest::Approx(0.01).epsilon(1e-12));

    // Overlapping boxes stay exactly 1.0 in the overlap.
    const SaliencyMap two =
        saliency_ground_truth(50, 50, {Box(0, 0, 20, 20), Box(10, 10, 20, 20)});
    CHECK(two.at(15, 15) == 1.0);
    for (double v : two.values()) {
        CHECK((v == 0.0 || v == 1.0));
    }
}

TEST_CASE("saliency ground truth mean equals the union-area fraction") {
    std::mt19937 gen(17);
    std::uniform_int_distribution<int> pos(-10, 90);
    std::uniform_int_distribution<int> size(1, 40);
    std::uniform_int_distribution<int> count(0, 6);
    const int W = 80, H = 60;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Box> boxes;
        const int n = count(gen);
        for (int i = 0; i < n; ++i) {
            boxes.push_back(Box(pos(gen), pos(gen), size(gen), size(gen)));
        }
        const SaliencyMap map = saliency_ground_truth(W, H, boxes);
        const double expected = union_area_clipped(boxes, W, H) / (W * H);
        CHECK(map.mean() == doctest::Approx(expected).epsilon(1e-9));
    }
}
