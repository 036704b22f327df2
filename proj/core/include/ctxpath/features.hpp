#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxpath/color.hpp"
#include "ctxpath/image.hpp"
#include "ctxpath/tiling.hpp"

namespace ctxpath {

using FeatureVector = std::vector<double>;

/// Per-patch feature vectors of one (image, orientation), row-major over the grid.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(int rows, int cols, std::size_t dim, DihedralOp augmentation = {});
    FeatureMatrix(int rows, int cols, std::size_t dim, DihedralOp augmentation,
                  std::vector<double> values);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t dim() const noexcept { return dim_; }
    DihedralOp augmentation() const noexcept { return augmentation_; }

    std::span<double> cell(int row, int col);
    std::span<const double> cell(int row, int col) const;
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::size_t dim_ = 0;
    DihedralOp augmentation_;
    std::vector<double> values_;
};

struct FeatureStoreEntry {
    std::string image_id;
    FeatureMatrix features;

    friend bool operator==(const FeatureStoreEntry&, const FeatureStoreEntry&) = default;
};

// Baseline descriptor layout (D = 70):
//   [0,3)   mean of l, alpha, beta
//   [3,6)   population std of l, alpha, beta
//   [6,22)  l histogram, 16 bins over [-4.5, 0.5)
//   [22,38) alpha histogram, 16 bins over [-1.2, 1.2)
//   [38,54) beta histogram, 16 bins over [-0.3, 0.3)
//   [54,70) gradient-magnitude histogram of luma, 16 bins over [0, 0.5)
// Values outside a histogram's range land in its first or last bin. Luma is
// (0.299 R + 0.587 G + 0.114 B) / 255; the gradient uses central differences
// with replicated borders.
namespace baseline {
inline constexpr std::size_t kDim = 70;
inline constexpr int kBins = 16;
inline constexpr double kLRange[2] = {-4.5, 0.5};
inline constexpr double kAlphaRange[2] = {-1.2, 1.2};
inline constexpr double kBetaRange[2] = {-0.3, 0.3};
inline constexpr double kGradRange[2] = {0.0, 0.5};

int bin_index(double v, double lo, double hi) noexcept;
}  // namespace baseline

FeatureVector baseline_extract(const ImageRGB& patch);

/// Tiles `img` after applying `op` and runs the baseline descriptor on every patch.
FeatureMatrix extract_grid_features(const ImageRGB& img, int patch_size, int stride, DihedralOp op);

/// Concatenates the member vectors of `block` in row-major member order.
FeatureVector assemble_block_features(const FeatureMatrix& fm, const ContextBlock& block);

// Supplies per-patch features for an image under a set of orientations.
class FeatureSource {
public:
    virtual ~FeatureSource() = default;
    virtual std::vector<FeatureMatrix> features(const std::string& image_id,
                                                std::span<const DihedralOp> ops) const = 0;
};

using ImageLoader = std::function<ImageRGB(const std::string& image_id)>;

struct BaselineOptions {
    int patch_size = 512;
    int stride = 512;
    ColorSpace space = ColorSpace::LAlphaBeta;
    std::optional<ChannelStats> normalize_to;  // skip normalization when empty
};

class BaselineFeatureSource final : public FeatureSource {
public:
    BaselineFeatureSource(ImageLoader loader, BaselineOptions options);

    std::vector<FeatureMatrix> features(const std::string& image_id,
                                        std::span<const DihedralOp> ops) const override;

    // Normalizes (if configured) and extracts without going through the loader.
    std::vector<FeatureMatrix> features_of(const ImageRGB& img, std::span<const DihedralOp> ops,
                                           Diagnostics* diag = nullptr) const;

    const BaselineOptions& options() const noexcept { return options_; }

private:
    ImageLoader loader_;
    BaselineOptions options_;
};

class StoreFeatureSource final : public FeatureSource {
public:
    explicit StoreFeatureSource(std::vector<FeatureStoreEntry> entries);

    std::vector<FeatureMatrix> features(const std::string& image_id,
                                        std::span<const DihedralOp> ops) const override;

    bool contains(const std::string& image_id, DihedralOp op) const;
    std::size_t dim() const noexcept { return dim_; }

private:
    std::map<std::pair<std::string, int>, FeatureMatrix> records_;
    std::size_t dim_ = 0;
};

}  // namespace ctxpath
