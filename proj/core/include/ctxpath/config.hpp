#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ctxpath/color.hpp"
#include "ctxpath/pca.hpp"
#include "ctxpath/tiling.hpp"

namespace ctxpath {

enum class ExtractorKind : std::uint8_t { Baseline, Store };

std::string_view to_string(ExtractorKind kind) noexcept;
ExtractorKind parse_extractor(std::string_view name);

// Scale: gamma = value * scale_gamma(training data). Fixed: gamma = value.
struct GammaPolicy {
    enum class Kind { Scale, Fixed };

    Kind kind = Kind::Scale;
    double value = 1.0;

    static GammaPolicy scale(double multiplier = 1.0) { return {Kind::Scale, multiplier}; }
    static GammaPolicy fixed(double gamma) { return {Kind::Fixed, gamma}; }

    friend bool operator==(const GammaPolicy&, const GammaPolicy&) = default;
};

std::string format_gamma(const GammaPolicy& g);
GammaPolicy parse_gamma(std::string_view text);  // "scale", "scale*0.1", "0.25"

struct PipelineConfig {
    ColorSpace space = ColorSpace::LAlphaBeta;
    int patch_size = 512;
    int stride = 0;  // 0: equal to patch_size (non-overlapping)
    int block_size = 2;
    PcaTarget pca = PcaTarget::variance(0.95);
    double svm_c = 1.0;
    GammaPolicy gamma;
    double svm_tol = 1e-3;
    std::size_t svm_max_passes = 0;
    std::vector<int> augmentations = {0, 1, 2, 3, 4, 5, 6, 7};
    ExtractorKind extractor = ExtractorKind::Baseline;
    bool two_class = false;

    int effective_stride() const noexcept { return stride == 0 ? patch_size : stride; }
    std::vector<DihedralOp> augmentation_ops() const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Throws ConfigError when an invariant fails.
void validate(const PipelineConfig& cfg);

std::vector<int> parse_augmentations(std::string_view text);  // "all", "none", "0,1,5"
std::string format_augmentations(const std::vector<int>& augs);

/// Applies one key=value setting; throws ConfigError on unknown keys or bad values.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);

// Flat config file: one key=value per line, '#' starts a comment.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig read_config_file(const std::filesystem::path& path, PipelineConfig base = {});
std::string format_config(const PipelineConfig& cfg);

}  // namespace ctxpath
