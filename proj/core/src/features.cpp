#include "ctxpath/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctxpath/error.hpp"

namespace ctxpath {

FeatureMatrix::FeatureMatrix(int rows, int cols, std::size_t dim, DihedralOp augmentation)
    : rows_(rows), cols_(cols), dim_(dim), augmentation_(augmentation) {
    if (rows < 0 || cols < 0) throw Error(ErrorCode::InvalidArgument, "negative grid shape");
    values_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * dim, 0.0);
}

FeatureMatrix::FeatureMatrix(int rows, int cols, std::size_t dim, DihedralOp augmentation,
                             std::vector<double> values)
    : FeatureMatrix(rows, cols, dim, augmentation) {
    if (values.size() != values_.size())
        throw Error(ErrorCode::DimMismatch, "feature buffer holds " + std::to_string(values.size()) +
                                                " values, expected " + std::to_string(values_.size()));
    values_ = std::move(values);
}

std::span<double> FeatureMatrix::cell(int row, int col) {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
        throw Error(ErrorCode::OutOfGrid, "feature cell outside grid");
    const std::size_t off = (static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
                             static_cast<std::size_t>(col)) * dim_;
    return std::span<double>(values_).subspan(off, dim_);
}

std::span<const double> FeatureMatrix::cell(int row, int col) const {
    return const_cast<FeatureMatrix*>(this)->cell(row, col);
}

namespace baseline {

int bin_index(double v, double lo, double hi) noexcept {
    const double t = (v - lo) / (hi - lo) * kBins;
    if (!(t > 0.0)) return 0;
    if (t >= kBins) return kBins - 1;
    return static_cast<int>(t);
}

}  // namespace baseline

FeatureVector baseline_extract(const ImageRGB& patch) {
    using namespace baseline;
    if (patch.empty()) throw Error(ErrorCode::InvalidArgument, "empty patch");
    const int w = patch.width(), h = patch.height();
    const std::size_t n = patch.pixel_count();
    const auto px = patch.data();

    FeatureVector f(kDim, 0.0);
    std::vector<Triple> lab(n);
    std::vector<double> luma(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Rgb8 rgb{px[3 * i], px[3 * i + 1], px[3 * i + 2]};
        lab[i] = rgb_to_lalphabeta(rgb);
        luma[i] = (0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]) / 255.0;
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    // Moments of the data shifted by its first sample, exact for constant patches.
    for (int c = 0; c < 3; ++c) {
        const double shift = lab[0][c];
        double sum = 0.0, ss = 0.0;
        for (const Triple& v : lab) {
            const double d = v[c] - shift;
            sum += d;
            ss += d * d;
        }
        const double mean_d = sum * inv_n;
        f[c] = shift + mean_d;
        f[3 + c] = std::sqrt(std::max(0.0, ss * inv_n - mean_d * mean_d));
    }

    constexpr const double* ranges[3] = {kLRange, kAlphaRange, kBetaRange};
    for (const Triple& v : lab)
        for (int c = 0; c < 3; ++c)
            f[6 + c * kBins + bin_index(v[c], ranges[c][0], ranges[c][1])] += inv_n;

    auto at = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return luma[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = 0.5 * (at(x + 1, y) - at(x - 1, y));
            const double gy = 0.5 * (at(x, y + 1) - at(x, y - 1));
            f[54 + bin_index(std::sqrt(gx * gx + gy * gy), kGradRange[0], kGradRange[1])] += inv_n;
        }
    }
    return f;
}

FeatureMatrix extract_grid_features(const ImageRGB& img, int patch_size, int stride, DihedralOp op) {
    const ImageRGB oriented = op == DihedralOp::identity() ? img : apply_dihedral(img, op);
    const PatchGrid grid = make_grid(oriented.width(), oriented.height(), patch_size, stride);
    FeatureMatrix fm(grid.rows, grid.cols, baseline::kDim, op);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const FeatureVector v = baseline_extract(extract_patch(oriented, grid, r, c));
            std::copy(v.begin(), v.end(), fm.cell(r, c).begin());
        }
    }
    return fm;
}

FeatureVector assemble_block_features(const FeatureMatrix& fm, const ContextBlock& block) {
    FeatureVector out;
    out.reserve(block.members.size() * fm.dim());
    for (const GridPos& p : block.members) {
        if (p.row < 0 || p.row >= fm.rows() || p.col < 0 || p.col >= fm.cols())
            throw Error(ErrorCode::OutOfGrid, "block member (" + std::to_string(p.row) + "," +
                                                  std::to_string(p.col) + ") outside feature grid");
        const auto v = fm.cell(p.row, p.col);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

BaselineFeatureSource::BaselineFeatureSource(ImageLoader loader, BaselineOptions options)
    : loader_(std::move(loader)), options_(std::move(options)) {
    if (options_.normalize_to && options_.normalize_to->space != options_.space)
        throw Error(ErrorCode::InvalidArgument, "normalization target colorspace mismatch");
}

std::vector<FeatureMatrix> BaselineFeatureSource::features(const std::string& image_id,
                                                           std::span<const DihedralOp> ops) const {
    return features_of(loader_(image_id), ops);
}

std::vector<FeatureMatrix> BaselineFeatureSource::features_of(const ImageRGB& img,
                                                              std::span<const DihedralOp> ops,
                                                              Diagnostics* diag) const {
    const ImageRGB normalized = options_.normalize_to
                                    ? reinhard_normalize(img, *options_.normalize_to, options_.space, diag)
                                    : img;
    std::vector<FeatureMatrix> out;
    out.reserve(ops.size());
    for (DihedralOp op : ops)
        out.push_back(extract_grid_features(normalized, options_.patch_size, options_.stride, op));
    return out;
}

StoreFeatureSource::StoreFeatureSource(std::vector<FeatureStoreEntry> entries) {
    for (auto& e : entries) {
        if (records_.empty()) dim_ = e.features.dim();
        else if (e.features.dim() != dim_)
            throw Error(ErrorCode::DimMismatch, "store mixes feature dimensions");
        const int aug = e.features.augmentation().id();
        if (!records_.emplace(std::pair{e.image_id, aug}, std::move(e.features)).second)
            throw Error(ErrorCode::DuplicateKey,
                        "duplicate record (" + e.image_id + ", " + std::to_string(aug) + ")");
    }
}

bool StoreFeatureSource::contains(const std::string& image_id, DihedralOp op) const {
    return records_.count({image_id, op.id()}) != 0;
}

std::vector<FeatureMatrix> StoreFeatureSource::features(const std::string& image_id,
                                                        std::span<const DihedralOp> ops) const {
    std::vector<FeatureMatrix> out;
    out.reserve(ops.size());
    for (DihedralOp op : ops) {
        const auto it = records_.find({image_id, op.id()});
        if (it == records_.end())
            throw Error(ErrorCode::MissingRecord, "feature store has no record for (" + image_id +
                                                      ", augmentation " + std::to_string(op.id()) + ")");
        out.push_back(it->second);
    }
    return out;
}

}  // namespace ctxpath
