#include "lafs/maps.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "lafs/io.hpp"
#include "lafs/rng.hpp"
#include "oracles.hpp"

using namespace lafs;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        dir_ = fs::temp_directory_path() /
               ("lafs_maps_test_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    ~TempDir() { fs::remove_all(dir_); }
    fs::path operator/(const std::string& name) const { return dir_ / name; }

private:
    fs::path dir_;
};

TEST(ScoreMap, NoShrinkCoversExactInterior) {
    const RotatedBox box({10.0f, 10.0f}, 10.0f, 10.0f, 0.0f);  // (5,5)-(15,15)
    const DenseMap score = generate_score_map({box}, 20, 20, 0.0f);
    int on = 0;
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) {
            const bool inside = x >= 5 && x < 15 && y >= 5 && y < 15;
            EXPECT_EQ(score.at(y, x, 0), inside ? 1.0f : 0.0f)
                << "pixel (" << x << "," << y << ")";
            on += score.at(y, x, 0) > 0.0f;
        }
    EXPECT_EQ(on, 100);
}

TEST(ScoreMap, ShrinkLeavesCore) {
    const RotatedBox box({10.0f, 10.0f}, 10.0f, 10.0f, 0.0f);
    const DenseMap score = generate_score_map({box}, 20, 20, 0.3f);
    int on = 0;
    for (float v : score.data) on += v > 0.0f;
    EXPECT_EQ(on, 16);  // 10 - 2*3 per side
    for (int y = 8; y < 12; ++y)
        for (int x = 8; x < 12; ++x) EXPECT_EQ(score.at(y, x, 0), 1.0f);
}

TEST(ScoreMap, EmptyBoxListAllZeros) {
    const DenseMap score = generate_score_map({}, 8, 8, 0.3f);
    for (float v : score.data) EXPECT_EQ(v, 0.0f);
}

TEST(ScoreMap, RejectsBadShrinkRatio) {
    EXPECT_THROW(generate_score_map({}, 8, 8, 0.5f), std::invalid_argument);
    EXPECT_THROW(generate_score_map({}, 8, 8, -0.1f), std::invalid_argument);
}

TEST(GeoMap, AxisAlignedDistances) {
    const RotatedBox box({5.0f, 5.0f}, 10.0f, 10.0f, 0.0f);  // (0,0)-(10,10)
    const DenseMap score = generate_score_map({box}, 12, 12, 0.0f);
    const DenseMap geo = generate_geo_map({box}, score);
    // pixel center (3.5, 2.5) is pixel x=3, y=2
    EXPECT_FLOAT_EQ(geo.at(2, 3, kTop), 2.5f);
    EXPECT_FLOAT_EQ(geo.at(2, 3, kBottom), 7.5f);
    EXPECT_FLOAT_EQ(geo.at(2, 3, kLeft), 3.5f);
    EXPECT_FLOAT_EQ(geo.at(2, 3, kRight), 6.5f);
    EXPECT_FLOAT_EQ(geo.at(2, 3, kTheta), 0.0f);
    // outside
    for (int c = 0; c < 5; ++c) EXPECT_FLOAT_EQ(geo.at(11, 11, c), 0.0f);
}

TEST(GeoMap, RotatedRoundTripsThroughBoxFromComponents) {
    const RotatedBox box({20.0f, 20.0f}, 22.0f, 12.0f, 0.5f);
    const DenseMap score = generate_score_map({box}, 40, 40, 0.2f);
    const DenseMap geo = generate_geo_map({box}, score);
    int checked = 0;
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) {
            if (score.at(y, x, 0) <= 0.0f) continue;
            const BoxComponents c{geo.at(y, x, kTop), geo.at(y, x, kBottom),
                                  geo.at(y, x, kLeft), geo.at(y, x, kRight),
                                  geo.at(y, x, kTheta)};
            const RotatedBox rebuilt = box_from_components(pixel_center(y, x), c);
            EXPECT_GE(quad_iou(rebuilt, box), 0.999f);
            ++checked;
        }
    EXPECT_GT(checked, 0);
}

TEST(GeoMap, ScoreGeometryConsistency) {
    const RotatedBox box({16.0f, 16.0f}, 18.0f, 10.0f, -0.4f);
    const DenseMap score = generate_score_map({box}, 32, 32, 0.3f);
    const DenseMap geo = generate_geo_map({box}, score);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            if (score.at(y, x, 0) > 0.0f)
                for (int c = kTop; c <= kRight; ++c)
                    EXPECT_GT(geo.at(y, x, c), 0.0f);
}

TEST(GeoMap, OverlappingBoxesAreAnError) {
    const RotatedBox a({10.0f, 10.0f}, 10.0f, 10.0f, 0.0f);
    const RotatedBox b({12.0f, 10.0f}, 10.0f, 10.0f, 0.0f);
    const DenseMap score = generate_score_map({a, b}, 24, 24, 0.0f);
    EXPECT_THROW(generate_geo_map({a, b}, score), std::runtime_error);
}

// Three-pixel instance with gaps 0, 1, 2 on one channel.
TEST(ConfMap, GapNormalizationExample) {
    const RotatedBox box({1.5f, 0.5f}, 3.0f, 1.0f, 0.0f);  // pixels (0..2, 0)
    DenseMap mask(1, 3, 1);
    mask.data = {1.0f, 1.0f, 1.0f};
    DenseMap gt(1, 3, 5);
    DenseMap pred(1, 3, 5);
    for (int x = 0; x < 3; ++x) pred.at(0, x, kTop) = static_cast<float>(x);
    const DenseMap conf = generate_conf_map(pred, gt, mask, {box});
    EXPECT_FLOAT_EQ(conf.at(0, 0, kTop), 1.0f);
    EXPECT_FLOAT_EQ(conf.at(0, 1, kTop), 0.5f);
    EXPECT_FLOAT_EQ(conf.at(0, 2, kTop), 0.0f);
}

TEST(ConfMap, MaskedOutPixelsAreZero) {
    const RotatedBox box({1.5f, 0.5f}, 3.0f, 1.0f, 0.0f);
    DenseMap mask(1, 3, 1);
    mask.data = {1.0f, 0.0f, 1.0f};
    DenseMap gt(1, 3, 5), pred(1, 3, 5);
    pred.at(0, 1, kTop) = 5.0f;
    const DenseMap conf = generate_conf_map(pred, gt, mask, {box});
    for (int c = 0; c < 5; ++c) EXPECT_FLOAT_EQ(conf.at(0, 1, c), 0.0f);
}

TEST(ConfMap, EqualGapsGiveConfidenceOne) {
    const RotatedBox box({1.5f, 0.5f}, 3.0f, 1.0f, 0.0f);
    DenseMap mask(1, 3, 1);
    mask.data = {1.0f, 1.0f, 1.0f};
    DenseMap gt(1, 3, 5), pred(1, 3, 5);
    for (int x = 0; x < 3; ++x) pred.at(0, x, kLeft) = 2.0f;  // uniform gap 2
    const DenseMap conf = generate_conf_map(pred, gt, mask, {box});
    for (int x = 0; x < 3; ++x) EXPECT_FLOAT_EQ(conf.at(0, x, kLeft), 1.0f);
}

// Normalization is per instance: scaling one instance's gaps by a positive
// constant leaves its confidences unchanged.
TEST(ConfMap, PerInstanceScaleInvariance) {
    const RotatedBox left({2.0f, 2.0f}, 4.0f, 4.0f, 0.0f);
    const RotatedBox right({10.0f, 2.0f}, 4.0f, 4.0f, 0.0f);
    DenseMap mask = generate_score_map({left, right}, 8, 16, 0.0f);
    DenseMap gt(8, 16, 5);
    DenseMap pred_a(8, 16, 5), pred_b(8, 16, 5);
    Rng rng(3);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 16; ++x) {
            const float gap = static_cast<float>(rng.next_double());
            pred_a.at(y, x, kTop) = gap;
            pred_b.at(y, x, kTop) = x < 8 ? gap * 7.0f : gap;  // scale left instance
        }
    const DenseMap conf_a = generate_conf_map(pred_a, gt, mask, {left, right});
    const DenseMap conf_b = generate_conf_map(pred_b, gt, mask, {left, right});
    for (std::size_t i = 0; i < conf_a.data.size(); ++i)
        EXPECT_NEAR(conf_a.data[i], conf_b.data[i], 1e-6f);
}

TEST(ConfMap, MonotoneInGap) {
    const RotatedBox box({8.0f, 8.0f}, 12.0f, 12.0f, 0.0f);
    DenseMap mask = generate_score_map({box}, 16, 16, 0.0f);
    DenseMap gt(16, 16, 5), pred(16, 16, 5);
    Rng rng(4);
    for (std::size_t i = 0; i < pred.data.size(); ++i)
        pred.data[i] = static_cast<float>(rng.next_double() * 3.0);
    const DenseMap conf = generate_conf_map(pred, gt, mask, {box});
    for (int c = 0; c < 4; ++c) {
        float best_conf = -1.0f, best_gap = 0.0f;
        float worst_conf = 2.0f, worst_gap = 0.0f;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                if (mask.at(y, x, 0) <= 0.0f) continue;
                const float gap = std::abs(pred.at(y, x, c) - gt.at(y, x, c));
                const float cv = conf.at(y, x, c);
                EXPECT_GE(cv, 0.0f);
                EXPECT_LE(cv, 1.0f);
                if (cv > best_conf) { best_conf = cv; best_gap = gap; }
                if (cv < worst_conf) { worst_conf = cv; worst_gap = gap; }
            }
        EXPECT_FLOAT_EQ(best_conf, 1.0f);
        EXPECT_FLOAT_EQ(worst_conf, 0.0f);
        EXPECT_LT(best_gap, worst_gap);
    }
}

TEST(LmapIo, RoundTripIsBitIdentical) {
    TempDir tmp;
    DenseMap map(3, 5, 2);
    Rng rng(9);
    for (float& v : map.data) v = static_cast<float>(rng.uniform(-10, 10));
    write_map(map, tmp / "m.lmap");
    const DenseMap back = read_map(tmp / "m.lmap");
    EXPECT_EQ(back.height, 3);
    EXPECT_EQ(back.width, 5);
    EXPECT_EQ(back.channels, 2);
    EXPECT_EQ(back.data, map.data);
}

TEST(LmapIo, FileSizeMatchesFormat) {
    TempDir tmp;
    write_map(DenseMap(2, 2, 1), tmp / "z.lmap");
    EXPECT_EQ(fs::file_size(tmp / "z.lmap"), 20u + 16u);
}

TEST(LmapIo, BadMagicIsFormatError) {
    TempDir tmp;
    std::ofstream(tmp / "bad.lmap") << "PAMLxxxxxxxxxxxxxxxxxxxx";
    EXPECT_THROW(read_map(tmp / "bad.lmap"), format_error);
}

TEST(LmapIo, TruncatedPayloadIsFormatError) {
    TempDir tmp;
    write_map(DenseMap(4, 4, 2), tmp / "t.lmap");
    fs::resize_file(tmp / "t.lmap", 40);
    EXPECT_THROW(read_map(tmp / "t.lmap"), format_error);
}

TEST(LmapIo, NonFiniteValueIsFormatError) {
    TempDir tmp;
    DenseMap map(1, 1, 1);
    map.data[0] = std::numeric_limits<float>::infinity();
    write_map(map, tmp / "inf.lmap");
    EXPECT_THROW(read_map(tmp / "inf.lmap"), format_error);
}

TEST(BoxesJson, RoundTrip) {
    TempDir tmp;
    Rng rng(21);
    std::vector<RotatedBox> boxes;
    for (int i = 0; i < 5; ++i) boxes.push_back(oracles::random_box(rng));
    write_boxes(boxes, tmp / "boxes.json");
    const std::vector<RotatedBox> back = read_boxes(tmp / "boxes.json");
    ASSERT_EQ(back.size(), boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        EXPECT_FLOAT_EQ(back[i].center.x, boxes[i].center.x);
        EXPECT_FLOAT_EQ(back[i].width, boxes[i].width);
        EXPECT_FLOAT_EQ(back[i].theta, boxes[i].theta);
    }
}

} // namespace
