#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ctxpath/image.hpp"

namespace ctxpath {

struct GridPos {
    int row = 0;
    int col = 0;

    friend bool operator==(const GridPos&, const GridPos&) = default;
    friend auto operator<=>(const GridPos&, const GridPos&) = default;
};

// Regular patch lattice over an image. Border pixels that do not fill a whole
// patch on the right/bottom are dropped.
struct PatchGrid {
    int patch_size = 0;
    int stride = 0;
    int rows = 0;
    int cols = 0;

    int count() const noexcept { return rows * cols; }
    int origin_x(int col) const noexcept { return col * stride; }
    int origin_y(int row) const noexcept { return row * stride; }
    bool contains(GridPos p) const noexcept {
        return p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols;
    }

    friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

// k x k window of grid cells anchored at its top-left cell; members row-major.
struct ContextBlock {
    int k = 0;
    GridPos anchor;
    std::vector<GridPos> members;
};

// One of the 8 symmetries of the square: an optional horizontal flip followed
// by `rotation()` quarter turns counterclockwise. id = rotation + 4 * flip.
class DihedralOp {
public:
    constexpr DihedralOp() = default;
    explicit DihedralOp(int id);

    static constexpr int kCount = 8;
    static DihedralOp identity() { return DihedralOp(0); }
    static DihedralOp rot90() { return DihedralOp(1); }
    static DihedralOp flip() { return DihedralOp(4); }

    constexpr int id() const noexcept { return id_; }
    constexpr int rotation() const noexcept { return id_ % 4; }
    constexpr bool flipped() const noexcept { return id_ >= 4; }

    // Result of applying *this first and then `next`.
    DihedralOp then(DihedralOp next) const noexcept;
    DihedralOp inverse() const noexcept;

    friend constexpr bool operator==(DihedralOp, DihedralOp) = default;

private:
    int id_ = 0;
};

std::vector<DihedralOp> all_dihedral_ops();

PatchGrid make_grid(int width, int height, int patch_size, int stride);
ImageRGB extract_patch(const ImageRGB& img, const PatchGrid& grid, int row, int col);
std::vector<ContextBlock> enumerate_blocks(const PatchGrid& grid, int k);
std::vector<ContextBlock> enumerate_blocks(int rows, int cols, int k);
ImageRGB apply_dihedral(const ImageRGB& img, DihedralOp op);

}  // namespace ctxpath
