#include "ctxpath/image.hpp"

#include <string>

#include "ctxpath/error.hpp"

namespace ctxpath {

ImageRGB::ImageRGB(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw Error(ErrorCode::InvalidArgument,
                    "image dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    data_.assign(pixel_count() * 3, 0);
}

ImageRGB::ImageRGB(int width, int height, std::vector<std::uint8_t> data)
    : ImageRGB(width, height) {
    if (data.size() != data_.size())
        throw Error(ErrorCode::InvalidArgument,
                    "pixel buffer holds " + std::to_string(data.size()) + " bytes, expected " +
                        std::to_string(data_.size()));
    data_ = std::move(data);
}

}  // namespace ctxpath
