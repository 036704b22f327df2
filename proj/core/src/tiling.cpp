#include "ctxpath/tiling.hpp"

#include <algorithm>
#include <string>

#include "ctxpath/error.hpp"

namespace ctxpath {

DihedralOp::DihedralOp(int id) : id_(id) {
    if (id < 0 || id >= kCount)
        throw Error(ErrorCode::InvalidArgument, "dihedral op id must be in 0..7, got " + std::to_string(id));
}

DihedralOp DihedralOp::then(DihedralOp next) const noexcept {
    // next * this, with flip * rot^a = rot^-a * flip.
    const int rot = next.flipped() ? next.rotation() - rotation() : next.rotation() + rotation();
    DihedralOp out;
    out.id_ = ((rot % 4) + 4) % 4 + ((flipped() != next.flipped()) ? 4 : 0);
    return out;
}

DihedralOp DihedralOp::inverse() const noexcept {
    if (flipped()) return *this;
    DihedralOp out;
    out.id_ = (4 - rotation()) % 4;
    return out;
}

std::vector<DihedralOp> all_dihedral_ops() {
    std::vector<DihedralOp> ops;
    for (int i = 0; i < DihedralOp::kCount; ++i) ops.emplace_back(i);
    return ops;
}

PatchGrid make_grid(int width, int height, int patch_size, int stride) {
    if (width < 1 || height < 1 || patch_size < 1)
        throw Error(ErrorCode::InvalidArgument, "grid dimensions must be positive");
    if (stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
    if (patch_size > std::min(width, height))
        throw Error(ErrorCode::PatchTooLarge,
                    "patch " + std::to_string(patch_size) + " does not fit in " +
                        std::to_string(width) + "x" + std::to_string(height));
    PatchGrid grid;
    grid.patch_size = patch_size;
    grid.stride = stride;
    grid.cols = (width - patch_size) / stride + 1;
    grid.rows = (height - patch_size) / stride + 1;
    return grid;
}

ImageRGB extract_patch(const ImageRGB& img, const PatchGrid& grid, int row, int col) {
    if (!grid.contains({row, col}))
        throw Error(ErrorCode::OutOfGrid,
                    "cell (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                        std::to_string(grid.rows) + "x" + std::to_string(grid.cols) + " grid");
    const int x0 = grid.origin_x(col);
    const int y0 = grid.origin_y(row);
    const int p = grid.patch_size;
    if (x0 + p > img.width() || y0 + p > img.height())
        throw Error(ErrorCode::OutOfGrid, "grid does not fit the image");
    ImageRGB patch(p, p);
    const auto src = img.data();
    auto dst = patch.data();
    const std::size_t row_bytes = static_cast<std::size_t>(p) * 3;
    for (int y = 0; y < p; ++y) {
        const std::size_t from =
            (static_cast<std::size_t>(y0 + y) * static_cast<std::size_t>(img.width()) +
             static_cast<std::size_t>(x0)) * 3;
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(from), row_bytes,
                    dst.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(y) * row_bytes));
    }
    return patch;
}

std::vector<ContextBlock> enumerate_blocks(int rows, int cols, int k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "block size must be >= 1");
    if (k > std::min(rows, cols))
        throw Error(ErrorCode::BlockTooLarge,
                    "block " + std::to_string(k) + "x" + std::to_string(k) + " does not fit a " +
                        std::to_string(rows) + "x" + std::to_string(cols) + " grid");
    std::vector<ContextBlock> blocks;
    blocks.reserve(static_cast<std::size_t>((rows - k + 1) * (cols - k + 1)));
    for (int r = 0; r + k <= rows; ++r) {
        for (int c = 0; c + k <= cols; ++c) {
            ContextBlock b;
            b.k = k;
            b.anchor = {r, c};
            b.members.reserve(static_cast<std::size_t>(k * k));
            for (int dr = 0; dr < k; ++dr)
                for (int dc = 0; dc < k; ++dc) b.members.push_back({r + dr, c + dc});
            blocks.push_back(std::move(b));
        }
    }
    return blocks;
}

std::vector<ContextBlock> enumerate_blocks(const PatchGrid& grid, int k) {
    return enumerate_blocks(grid.rows, grid.cols, k);
}

namespace {

ImageRGB flip_horizontal(const ImageRGB& img) {
    const int w = img.width(), h = img.height();
    ImageRGB out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) out.at(w - 1 - x, y, c) = img.at(x, y, c);
    return out;
}

ImageRGB rotate90(const ImageRGB& img) {
    const int w = img.width(), h = img.height();
    ImageRGB out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, w - 1 - x, c) = img.at(x, y, c);
    return out;
}

}  // namespace

ImageRGB apply_dihedral(const ImageRGB& img, DihedralOp op) {
    ImageRGB out = op.flipped() ? flip_horizontal(img) : img;
    for (int i = 0; i < op.rotation(); ++i) out = rotate90(out);
    return out;
}

}  // namespace ctxpath
