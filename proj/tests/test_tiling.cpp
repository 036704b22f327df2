#include <doctest.h>

#include <random>
#include <set>

#include "ctxpath/tiling.hpp"
#include "support/test_support.hpp"

using namespace ctxpath;

namespace {

// Coordinate oracle for one counterclockwise quarter turn of a w x h image:
// source (x, y) lands at (y, w - 1 - x) in the h x w result.
ImageRGB rot90_oracle(const ImageRGB& img) {
    ImageRGB out(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) out.at(y, img.width() - 1 - x, c) = img.at(x, y, c);
    return out;
}

ImageRGB flip_oracle(const ImageRGB& img) {
    ImageRGB out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) out.at(img.width() - 1 - x, y, c) = img.at(x, y, c);
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("grid geometry") {
    const PatchGrid g = make_grid(2048, 1536, 512, 512);
    CHECK(g.cols == 4);
    CHECK(g.rows == 3);
    CHECK(g.count() == 12);

    const PatchGrid one = make_grid(512, 512, 512, 512);
    CHECK(one.rows == 1);
    CHECK(one.cols == 1);

    const PatchGrid half = make_grid(2048, 1536, 512, 256);
    CHECK(half.cols == 7);
    CHECK(half.rows == 5);
    for (int c = 0; c < half.cols; ++c) CHECK(half.origin_x(c) == 256 * c);
    CHECK(half.origin_x(half.cols - 1) + 512 == 2048);

    // Ragged border is dropped.
    const PatchGrid ragged = make_grid(1100, 700, 512, 512);
    CHECK(ragged.cols == 2);
    CHECK(ragged.rows == 1);

    CHECK(code_of([] { make_grid(511, 600, 512, 512); }) == ErrorCode::PatchTooLarge);
    CHECK(code_of([] { make_grid(600, 600, 512, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("grid formula on random shapes") {
    std::mt19937 rng(3);
    for (int t = 0; t < 200; ++t) {
        const int w = 1 + static_cast<int>(rng() % 300), h = 1 + static_cast<int>(rng() % 300);
        const int p = 1 + static_cast<int>(rng() % std::min(w, h));
        const int s = 1 + static_cast<int>(rng() % 64);
        const PatchGrid g = make_grid(w, h, p, s);
        CHECK(g.cols == (w - p) / s + 1);
        CHECK(g.rows == (h - p) / s + 1);
        CHECK(g.origin_x(g.cols - 1) + p <= w);
        CHECK(g.origin_y(g.rows - 1) + p <= h);
    }
}

TEST_CASE("extract_patch") {
    SUBCASE("whole image for a 1x1 grid") {
        const ImageRGB img = test_support::random_image(64, 64, 1);
        CHECK(extract_patch(img, make_grid(64, 64, 64, 64), 0, 0) == img);
    }
    SUBCASE("checkerboard against direct indexing") {
        ImageRGB img(40, 30);
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 40; ++x)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(((x / 3 + y / 3) % 2) * 200 + c + x);
        const PatchGrid g = make_grid(40, 30, 12, 7);
        for (int r = 0; r < g.rows; ++r)
            for (int col = 0; col < g.cols; ++col) {
                const ImageRGB p = extract_patch(img, g, r, col);
                REQUIRE(p.width() == 12);
                for (int y = 0; y < 12; ++y)
                    for (int x = 0; x < 12; ++x)
                        for (int c = 0; c < 3; ++c) CHECK(p.at(x, y, c) == img.at(col * 7 + x, r * 7 + y, c));
            }
    }
    SUBCASE("non-overlapping patches partition the cropped image") {
        const ImageRGB img = test_support::gradient_image(50, 35);
        const PatchGrid g = make_grid(50, 35, 16, 16);
        ImageRGB rebuilt(g.cols * 16, g.rows * 16);
        std::vector<int> hits(static_cast<std::size_t>(rebuilt.pixel_count()), 0);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) {
                const ImageRGB p = extract_patch(img, g, r, c);
                for (int y = 0; y < 16; ++y)
                    for (int x = 0; x < 16; ++x) {
                        ++hits[static_cast<std::size_t>((r * 16 + y) * rebuilt.width() + c * 16 + x)];
                        for (int ch = 0; ch < 3; ++ch) rebuilt.at(c * 16 + x, r * 16 + y, ch) = p.at(x, y, ch);
                    }
            }
        for (int h : hits) CHECK(h == 1);
        for (int y = 0; y < rebuilt.height(); ++y)
            for (int x = 0; x < rebuilt.width(); ++x)
                for (int ch = 0; ch < 3; ++ch) CHECK(rebuilt.at(x, y, ch) == img.at(x, y, ch));
    }
    SUBCASE("out of grid") {
        const ImageRGB img(32, 32);
        const PatchGrid g = make_grid(32, 32, 16, 16);
        CHECK(code_of([&] { extract_patch(img, g, 2, 0); }) == ErrorCode::OutOfGrid);
        CHECK(code_of([&] { extract_patch(img, g, 0, -1); }) == ErrorCode::OutOfGrid);
    }
}

TEST_CASE("context blocks") {
    const PatchGrid g = make_grid(2048, 1536, 512, 512);
    CHECK(enumerate_blocks(g, 2).size() == 6);
    CHECK(enumerate_blocks(g, 1).size() == 12);
    const auto k3 = enumerate_blocks(g, 3);
    REQUIRE(k3.size() == 2);
    CHECK(k3[0].anchor == GridPos{0, 0});
    CHECK(k3[1].anchor == GridPos{0, 1});
    CHECK(code_of([&] { enumerate_blocks(g, 4); }) == ErrorCode::BlockTooLarge);
    CHECK(code_of([&] { enumerate_blocks(g, 0); }) == ErrorCode::InvalidArgument);

    const auto k2 = enumerate_blocks(g, 2);
    CHECK(k2[1].members == std::vector<GridPos>{{0, 1}, {0, 2}, {1, 1}, {1, 2}});
    for (std::size_t i = 1; i < k2.size(); ++i) CHECK(k2[i - 1].anchor < k2[i].anchor);

    std::mt19937 rng(9);
    for (int t = 0; t < 100; ++t) {
        const int rows = 1 + static_cast<int>(rng() % 8), cols = 1 + static_cast<int>(rng() % 8);
        for (int k = 1; k <= std::min(rows, cols); ++k) {
            const auto blocks = enumerate_blocks(rows, cols, k);
            CHECK(blocks.size() == static_cast<std::size_t>((rows - k + 1) * (cols - k + 1)));
            for (const auto& b : blocks) {
                CHECK(b.members.size() == static_cast<std::size_t>(k * k));
                CHECK(b.members.front() == b.anchor);
                CHECK(b.members.back() == GridPos{b.anchor.row + k - 1, b.anchor.col + k - 1});
            }
        }
    }
}

TEST_CASE("dihedral pixel maps") {
    const ImageRGB img = test_support::gradient_image(2, 3);
    CHECK(apply_dihedral(img, DihedralOp::identity()) == img);
    CHECK(apply_dihedral(img, DihedralOp::rot90()) == rot90_oracle(img));
    CHECK(apply_dihedral(img, DihedralOp::flip()) == flip_oracle(img));

    ImageRGB four = img;
    for (int i = 0; i < 4; ++i) four = apply_dihedral(four, DihedralOp::rot90());
    CHECK(four == img);

    // id = rotation + 4 * flip: flip first, then quarter turns.
    const ImageRGB big = test_support::gradient_image(5, 3);
    for (int id = 0; id < 8; ++id) {
        ImageRGB expect = id >= 4 ? flip_oracle(big) : big;
        for (int r = 0; r < id % 4; ++r) expect = rot90_oracle(expect);
        CHECK(apply_dihedral(big, DihedralOp(id)) == expect);
    }
}

TEST_CASE("dihedral group closure and inverses") {
    const ImageRGB img = test_support::gradient_image(4, 3);
    const auto ops = all_dihedral_ops();
    REQUIRE(ops.size() == 8);
    std::set<int> ids;
    for (const auto& op : ops) ids.insert(op.id());
    CHECK(ids.size() == 8);
    for (const auto a : ops) {
        CHECK(apply_dihedral(apply_dihedral(img, a), a.inverse()) == img);
        CHECK(a.then(a.inverse()) == DihedralOp::identity());
        for (const auto b : ops) {
            const DihedralOp ab = a.then(b);
            CHECK(ids.count(ab.id()) == 1);
            CHECK(apply_dihedral(apply_dihedral(img, a), b) == apply_dihedral(img, ab));
        }
    }
    CHECK_THROWS_AS(DihedralOp(8), Error);
    CHECK_THROWS_AS(DihedralOp(-1), Error);
}
