#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxpath/error.hpp"
#include "ctxpath/image.hpp"

namespace ctxpath {

// CieLab: sRGB (companded) -> XYZ (D65) -> L*a*b*.
// LAlphaBeta: linear RGB in [0,1] -> LMS -> log10 -> decorrelated l, alpha, beta.
enum class ColorSpace : std::uint8_t { CieLab, LAlphaBeta };

std::string_view to_string(ColorSpace space) noexcept;
ColorSpace parse_color_space(std::string_view name);  // throws UnknownColorSpace

using Triple = std::array<double, 3>;
using Rgb8 = std::array<std::uint8_t, 3>;

/// Real-valued 3-channel raster tagged with the colorspace it was produced in.
class ImageF3 {
public:
    ImageF3(int width, int height, ColorSpace space);
    ImageF3(int width, int height, ColorSpace space, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    ColorSpace space() const noexcept { return space_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    Triple pixel(std::size_t i) const noexcept {
        return {data_[3 * i], data_[3 * i + 1], data_[3 * i + 2]};
    }
    void set_pixel(std::size_t i, const Triple& v) noexcept {
        data_[3 * i] = v[0];
        data_[3 * i + 1] = v[1];
        data_[3 * i + 2] = v[2];
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

private:
    int width_;
    int height_;
    ColorSpace space_;
    std::vector<double> data_;
};

struct ChannelStats {
    Triple mean{};
    Triple std{};
    ColorSpace space = ColorSpace::LAlphaBeta;

    friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

// Per-pixel conversions.
Triple rgb_to_lab(const Rgb8& rgb) noexcept;
Rgb8 lab_to_rgb(const Triple& lab) noexcept;
Triple rgb_to_lalphabeta(const Rgb8& rgb) noexcept;
Rgb8 lalphabeta_to_rgb(const Triple& lab) noexcept;

ImageF3 rgb_to_space(const ImageRGB& img, ColorSpace space);
ImageRGB space_to_rgb(const ImageF3& img);

/// Population (1/N) mean and standard deviation of each channel.
ChannelStats compute_stats(const ImageF3& img);

/// Applies the statistics transfer in the image's own colorspace.
/// Channels whose source std is below 1e-12 are set to the target mean and
/// reported as DegenerateChannel.
ImageF3 reinhard_transfer(const ImageF3& src, const ChannelStats& target,
                          Diagnostics* diag = nullptr);

ImageRGB reinhard_normalize(const ImageRGB& src, const ChannelStats& target, ColorSpace space,
                            Diagnostics* diag = nullptr);

// Text record: colorspace,mean1,mean2,mean3,std1,std2,std3
std::string format_stats(const ChannelStats& stats);
ChannelStats parse_stats(std::string_view record);
ChannelStats read_stats_file(const std::string& path);
void write_stats_file(const std::string& path, const ChannelStats& stats);

}  // namespace ctxpath
