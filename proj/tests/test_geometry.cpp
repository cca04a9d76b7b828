#include <doctest.h>

#include <cmath>
#include <random>

#include "pedalign/geometry.hpp"

using namespace pedalign;

namespace {

// Pixel-rasterization IoU oracle for integer-coordinate boxes: counts
// integer pixel centers inside each region.
double raster_iou(const Box& a, const Box& b) {
    const int x0 = static_cast<int>(std::floor(std::min(a.x, b.x)));
    const int y0 = static_cast<int>(std::floor(std::min(a.y, b.y)));
    const int x1 = static_cast<int>(std::ceil(std::max(a.right(), b.right())));
    const int y1 = static_cast<int>(std::ceil(std::max(a.bottom(), b.bottom())));
    long inter = 0;
    long uni = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const double cx = x + 0.5;
            const double cy = y + 0.5;
            const bool in_a = cx >= a.x && cx < a.right() && cy >= a.y && cy < a.bottom();
            const bool in_b = cx >= b.x && cx < b.right() && cy >= b.y && cy < b.bottom();
            if (in_a && in_b) ++inter;
            if (in_a || in_b) ++uni;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Independent greedy NMS reference: quadratic scan, no early exits.
std::vector<ScoredBox> brute_force_nms(const std::vector<ScoredBox>& candidates,
                                       double threshold) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < candidates.size(); ++i) order.push_back(i);
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const ScoredBox& a = candidates[order[i]];
            const ScoredBox& b = candidates[order[j]];
            const bool swap = b.score > a.score ||
                              (b.score == a.score && order[j] < order[i]);
            if (swap) std::swap(order[i], order[j]);
        }
    }
    std::vector<ScoredBox> kept;
    for (std::size_t idx : order) {
        bool ok = true;
        for (const ScoredBox& k : kept) {
            const double inter = intersection_area(candidates[idx].box, k.box);
            const double uni = candidates[idx].box.area() + k.box.area() - inter;
            if (inter / uni > threshold) ok = false;
        }
        if (ok) kept.push_back(candidates[idx]);
    }
    return kept;
}

Box random_int_box(std::mt19937& gen, int span, int max_size) {
    std::uniform_int_distribution<int> pos(0, span);
    std::uniform_int_distribution<int> size(1, max_size);
    return Box(pos(gen), pos(gen), size(gen), size(gen));
}

bool same_box(const Box& a, const Box& b) {
    return a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h;
}

}  // namespace

TEST_CASE("box construction rejects degenerate boxes") {
    CHECK_THROWS_AS(Box(0, 0, 0, 10), InvalidParameterError);
    CHECK_THROWS_AS(Box(0, 0, 10, -1), InvalidParameterError);
    CHECK_THROWS_AS(Box(0, 0, std::nan(""), 1), InvalidParameterError);
    const Box b(1, 2, 3, 4);
    CHECK(b.area() == 12.0);
    CHECK(b.center_x() == 2.5);
    CHECK(b.center_y() == 4.0);
}

TEST_CASE("iou basic cases") {
    const Box a(0, 0, 10, 10);
    CHECK(iou(a, Box(0, 0, 10, 10)) == 1.0);
    CHECK(iou(a, Box(20, 20, 5, 5)) == 0.0);
    // Half-offset overlap: inter 50, union 150.
    CHECK(iou(a, Box(5, 0, 10, 10)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("iou is symmetric and exact on self") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> pos(-50.0, 50.0);
    std::uniform_real_distribution<double> size(0.1, 40.0);
    for (int i = 0; i < 2000; ++i) {
        const Box a(pos(gen), pos(gen), size(gen), size(gen));
        const Box b(pos(gen), pos(gen), size(gen), size(gen));
        CHECK(iou(a, b) == iou(b, a));
        CHECK(iou(a, a) == 1.0);
        CHECK(iou(a, b) >= 0.0);
        CHECK(iou(a, b) <= 1.0);
    }
}

TEST_CASE("iou matches the pixel-rasterization oracle on integer boxes") {
    std::mt19937 gen(11);
    double max_err = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const Box a = random_int_box(gen, 40, 25);
        const Box b = random_int_box(gen, 40, 25);
        max_err = std::max(max_err, std::abs(iou(a, b) - raster_iou(a, b)));
    }
    CHECK(max_err <= 1e-9);
}

TEST_CASE("nms duplicate suppression and disjoint boxes") {
    const std::vector<ScoredBox> dup = {{Box(0, 0, 10, 10), 0.9},
                                        {Box(0, 0, 10, 10), 0.8}};
    const auto kept = nms(dup, 0.5);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == 0.9);

    const std::vector<ScoredBox> disjoint = {{Box(0, 0, 10, 10), 0.9},
                                             {Box(50, 50, 10, 10), 0.8}};
    CHECK(nms(disjoint, 0.5).size() == 2);
}

TEST_CASE("nms keeps the chain endpoints") {
    // A-B and B-C overlap above the threshold, A-C below it, scores
    // A > B > C: greedy suppresses B against A, then keeps C because its
    // only strong overlap was with the already-suppressed B.
    const Box a(0, 0, 10, 10);
    const Box b(2, 0, 10, 10);
    const Box c(4, 0, 10, 10);
    REQUIRE(iou(a, b) == doctest::Approx(2.0 / 3.0));
    REQUIRE(iou(b, c) == doctest::Approx(2.0 / 3.0));
    REQUIRE(iou(a, c) == doctest::Approx(3.0 / 7.0));

    const std::vector<ScoredBox> chain = {{a, 0.9}, {b, 0.8}, {c, 0.7}};
    const auto kept = nms(chain, 0.5);
    REQUIRE(kept.size() == 2);
    CHECK(same_box(kept[0].box, a));
    CHECK(same_box(kept[1].box, c));
}

TEST_CASE("nms rejects out-of-domain thresholds") {
    const std::vector<ScoredBox> one = {{Box(0, 0, 1, 1), 0.5}};
    CHECK_THROWS_AS(nms(one, 0.0), InvalidParameterError);
    CHECK_THROWS_AS(nms(one, -0.5), InvalidParameterError);
    CHECK_THROWS_AS(nms(one, 1.5), InvalidParameterError);
    CHECK_NOTHROW(nms(one, 1.0));
}

TEST_CASE("nms matches brute force and is a fixed point") {
    std::mt19937 gen(23);
    std::uniform_int_distribution<int> count(0, 20);
    std::uniform_real_distribution<double> score(-1.0, 1.0);
    std::uniform_real_distribution<double> thr_dist(0.1, 0.9);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ScoredBox> boxes;
        const int n = count(gen);
        for (int i = 0; i < n; ++i) {
            boxes.push_back({random_int_box(gen, 30, 15), score(gen)});
        }
        const double thr = thr_dist(gen);
        const auto kept = nms(boxes, thr);
        const auto expected = brute_force_nms(boxes, thr);
        REQUIRE(kept.size() == expected.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            CHECK(same_box(kept[i].box, expected[i].box));
            CHECK(kept[i].score == expected[i].score);
        }
        // No kept pair overlaps above the threshold; rerunning changes nothing.
        for (std::size_t i = 0; i < kept.size(); ++i) {
            for (std::size_t j = i + 1; j < kept.size(); ++j) {
                CHECK(iou(kept[i].box, kept[j].box) <= thr);
            }
        }
        CHECK(nms(kept, thr).size() == kept.size());
    }
}

TEST_CASE("cell_to_pixel examples") {
    const MapFrame unit(16, 16, 32);
    const PixelPos origin = cell_to_pixel(unit, 0, 0);
    CHECK(origin.x == 16.0);
    CHECK(origin.y == 16.0);
    const PixelPos p = cell_to_pixel(unit, 2, 1);
    CHECK(p.x == 48.0);
    CHECK(p.y == 80.0);

    // 160-wide region resized to 96: col 1 sits at 48/0.6 = 80 source px.
    const MapFrame scaled(16, 16, 32, 0.6, 1.0);
    CHECK(cell_to_pixel(scaled, 0, 1).x == doctest::Approx(80.0).epsilon(1e-12));
}

TEST_CASE("cell/pixel round trip is the identity on all cells") {
    const MapFrame frames[] = {MapFrame(16, 16, 32), MapFrame(0, 0, 1),
                               MapFrame(16, 12, 32, 0.6, 1.6),
                               MapFrame(-5, 3, 7.5, 2.0, 0.25)};
    for (const MapFrame& frame : frames) {
        for (int r = 0; r < 12; ++r) {
            for (int c = 0; c < 12; ++c) {
                const PixelPos p = cell_to_pixel(frame, r, c);
                const CellPos back = pixel_to_cell(frame, p.x, p.y);
                CHECK(back.row == r);
                CHECK(back.col == c);
            }
        }
    }
}

TEST_CASE("expand_box examples") {
    const Box b = expand_box(Box(100, 100, 48, 80), 0.25);
    CHECK(b.x == doctest::Approx(94.0).epsilon(1e-12));
    CHECK(b.y == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(b.w == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(b.h == doctest::Approx(100.0).epsilon(1e-12));

    const Box same = expand_box(Box(3, 4, 5, 6), 0.0);
    CHECK(same_box(same, Box(3, 4, 5, 6)));

    const Box neg = expand_box(Box(0, 0, 4, 4), 0.25);
    CHECK(neg.x == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(neg.y == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(neg.w == doctest::Approx(5.0).epsilon(1e-12));

    CHECK_THROWS_AS(expand_box(Box(0, 0, 1, 1), -0.1), InvalidParameterError);
}

TEST_CASE("expand_box preserves center and scales area") {
    std::mt19937 gen(31);
    std::uniform_real_distribution<double> pos(-100.0, 100.0);
    std::uniform_real_distribution<double> size(0.5, 60.0);
    std::uniform_real_distribution<double> ratio(0.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const Box b(pos(gen), pos(gen), size(gen), size(gen));
        const double r = ratio(gen);
        const Box e = expand_box(b, r);
        CHECK(std::abs(e.center_x() - b.center_x()) <= 1e-9);
        CHECK(std::abs(e.center_y() - b.center_y()) <= 1e-9);
        CHECK(e.area() ==
              doctest::Approx(b.area() * (1.0 + r) * (1.0 + r)).epsilon(1e-9));
    }
}

TEST_CASE("clip_box intersects with the image and reports empty") {
    const auto clipped = clip_box(Box(-5, -5, 20, 20), 10, 10);
    REQUIRE(clipped.has_value());
    CHECK(same_box(*clipped, Box(0, 0, 10, 10)));
    CHECK(!clip_box(Box(50, 50, 5, 5), 10, 10).has_value());
    CHECK(!clip_box(Box(10, 0, 5, 5), 10, 10).has_value());  // exactly abutting
}
