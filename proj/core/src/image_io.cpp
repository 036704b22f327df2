#include "ctxpath/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <string>

#include "ctxpath/error.hpp"

namespace ctxpath {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

}  // namespace

bool is_supported_image(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    return ext == ".png" || ext == ".tif" || ext == ".tiff";
}

ImageRGB read_image(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".tif" || ext == ".tiff") return read_tiff(path);
    throw Error(ErrorCode::IoFailure, "unsupported image format: " + path.string());
}

void write_image(const std::filesystem::path& path, const ImageRGB& img) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") return write_png(path, img);
    if (ext == ".tif" || ext == ".tiff") return write_tiff(path, img);
    throw Error(ErrorCode::IoFailure, "unsupported image format: " + path.string());
}

ImageRGB read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.string().c_str()) == 0)
        throw Error(ErrorCode::IoFailure, "cannot read PNG " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    if (image.width == 0 || image.height == 0 || image.width > (1u << 20) || image.height > (1u << 20)) {
        png_image_free(&image);
        throw Error(ErrorCode::IoFailure, "PNG has unsupported dimensions: " + path.string());
    }
    ImageRGB img(static_cast<int>(image.width), static_cast<int>(image.height));
    if (png_image_finish_read(&image, nullptr, img.data().data(), 0, nullptr) == 0) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::IoFailure, "cannot decode PNG " + path.string() + ": " + msg);
    }
    return img;
}

void write_png(const std::filesystem::path& path, const ImageRGB& img) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    if (png_image_write_to_file(&image, path.string().c_str(), 0, img.data().data(), 0, nullptr) == 0)
        throw Error(ErrorCode::IoFailure, "cannot write PNG " + path.string() + ": " + image.message);
}

}  // namespace ctxpath
