#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ctxpath/features.hpp"
#include "ctxpath/image.hpp"
#include "ctxpath/labels.hpp"
#include "ctxpath/manifest.hpp"
#include "ctxpath/pipeline.hpp"

namespace ctxpath::synthetic {

struct SyntheticImage {
    std::string image_id;
    ClassLabel label = ClassLabel::Normal;
    ImageRGB image;
};

// Four classes, each with its own texture so that classes stay separable after
// stain normalization removes global color differences:
//   normal   smooth low-frequency blend of two colors
//   benign   2 px checkerboard
//   insitu   16 px stripes, random orientation
//   invasive per-pixel random blend
struct SignatureSpec {
    int per_class = 15;
    int width = 1024;
    int height = 768;
    std::uint64_t seed = 1;
    std::string id_prefix = "sig";
};

std::vector<SyntheticImage> signature_corpus(const SignatureSpec& spec);

// Three classes built from two patch types that share an identical color
// histogram: A (stripes of period 8) and B (two halves). A single patch says
// nothing about the class; only the arrangement of neighbouring patches does.
//   normal  every patch A, or every patch B
//   benign  patch rows alternate between A and B
//   insitu  A/B checkerboard over the grid
struct ContextSpec {
    int per_class = 20;
    int patch_size = 128;
    int cols = 4;
    int rows = 3;
    std::uint64_t seed = 1;
    std::string id_prefix = "ctx";
};

std::vector<SyntheticImage> context_corpus(const ContextSpec& spec);

Dataset dataset_of(std::span<const SyntheticImage> images);

/// Loader over an in-memory copy of `images`; unknown ids throw MissingRecord.
ImageLoader memory_loader(std::span<const SyntheticImage> images);

/// Writes <id>.png for each image plus manifest.csv into `dir` (created).
std::filesystem::path write_corpus(const std::filesystem::path& dir, std::span<const SyntheticImage> images);

}  // namespace ctxpath::synthetic
