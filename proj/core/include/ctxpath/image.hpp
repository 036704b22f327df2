#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ctxpath {

// 8-bit, 3-channel raster, row-major interleaved RGB.
class ImageRGB {
public:
    ImageRGB() = default;
    ImageRGB(int width, int height);
    ImageRGB(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    std::uint8_t& at(int x, int y, int c) noexcept { return data_[index(x, y) + c]; }
    std::uint8_t at(int x, int y, int c) const noexcept { return data_[index(x, y) + c]; }

    std::span<std::uint8_t> data() noexcept { return data_; }
    std::span<const std::uint8_t> data() const noexcept { return data_; }

    friend bool operator==(const ImageRGB&, const ImageRGB&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

}  // namespace ctxpath
