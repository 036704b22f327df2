#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ctxpath/image.hpp"

namespace ctxpath {

// Format is chosen from the extension: .png, .tif, .tiff (case-insensitive).
// Failures throw Error(IoFailure).
ImageRGB read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageRGB& img);

bool is_supported_image(const std::filesystem::path& path);

ImageRGB read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageRGB& img);

// Baseline TIFF: 8-bit chunky RGB (or grayscale, expanded), uncompressed or
// PackBits, strips only. Writing always produces uncompressed RGB.
ImageRGB decode_tiff(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_tiff(const ImageRGB& img);
ImageRGB read_tiff(const std::filesystem::path& path);
void write_tiff(const std::filesystem::path& path, const ImageRGB& img);

}  // namespace ctxpath
