#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "ctxpath/error.hpp"
#include "ctxpath/image_io.hpp"

namespace ctxpath {

namespace {

enum Tag : std::uint16_t {
    kImageWidth = 256,
    kImageLength = 257,
    kBitsPerSample = 258,
    kCompression = 259,
    kPhotometric = 262,
    kStripOffsets = 273,
    kSamplesPerPixel = 277,
    kRowsPerStrip = 278,
    kStripByteCounts = 279,
    kXResolution = 282,
    kYResolution = 283,
    kPlanarConfig = 284,
    kResolutionUnit = 296,
};

constexpr std::uint16_t kNoCompression = 1;
constexpr std::uint16_t kPackBits = 32773;

[[noreturn]] void bad(const std::string& what) {
    throw Error(ErrorCode::IoFailure, "TIFF: " + what);
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
        if (bytes.size() < 8) bad("file too short");
        if (bytes[0] == 'I' && bytes[1] == 'I') little_ = true;
        else if (bytes[0] == 'M' && bytes[1] == 'M') little_ = false;
        else bad("bad byte-order mark");
        if (u16(2) != 42) bad("bad magic number");
    }

    std::uint16_t u16(std::size_t off) const {
        need(off, 2);
        return little_ ? static_cast<std::uint16_t>(bytes_[off] | bytes_[off + 1] << 8)
                       : static_cast<std::uint16_t>(bytes_[off] << 8 | bytes_[off + 1]);
    }
    std::uint32_t u32(std::size_t off) const {
        need(off, 4);
        const std::uint32_t b0 = bytes_[off], b1 = bytes_[off + 1], b2 = bytes_[off + 2],
                            b3 = bytes_[off + 3];
        return little_ ? (b0 | b1 << 8 | b2 << 16 | b3 << 24) : (b0 << 24 | b1 << 16 | b2 << 8 | b3);
    }
    void need(std::size_t off, std::size_t len) const {
        if (off > bytes_.size() || len > bytes_.size() - off) bad("offset out of range");
    }
    std::span<const std::uint8_t> bytes() const { return bytes_; }

private:
    std::span<const std::uint8_t> bytes_;
    bool little_ = true;
};

// Values of a SHORT or LONG array tag.
std::vector<std::uint32_t> tag_values(const Reader& r, std::size_t entry) {
    const std::uint16_t type = r.u16(entry + 2);
    const std::uint32_t count = r.u32(entry + 4);
    std::size_t width = 0;
    if (type == 3) width = 2;
    else if (type == 4) width = 4;
    else if (type == 1) width = 1;
    else return {};
    if (count > (1u << 24)) bad("tag count too large");
    const std::size_t total = width * count;
    const std::size_t base = total <= 4 ? entry + 8 : r.u32(entry + 8);
    r.need(base, total);
    std::vector<std::uint32_t> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (width == 1) out[i] = r.bytes()[base + i];
        else if (width == 2) out[i] = r.u16(base + 2 * i);
        else out[i] = r.u32(base + 4 * i);
    }
    return out;
}

void unpack_bits(std::span<const std::uint8_t> in, std::vector<std::uint8_t>& out) {
    std::size_t i = 0;
    while (i < in.size()) {
        const auto n = static_cast<std::int8_t>(in[i++]);
        if (n >= 0) {
            const std::size_t len = static_cast<std::size_t>(n) + 1;
            if (i + len > in.size()) bad("truncated PackBits literal run");
            out.insert(out.end(), in.begin() + static_cast<std::ptrdiff_t>(i),
                       in.begin() + static_cast<std::ptrdiff_t>(i + len));
            i += len;
        } else if (n != -128) {
            if (i >= in.size()) bad("truncated PackBits repeat run");
            out.insert(out.end(), static_cast<std::size_t>(1 - n), in[i++]);
        }
    }
}

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xff));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) b.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

}  // namespace

ImageRGB decode_tiff(std::span<const std::uint8_t> bytes) {
    const Reader r(bytes);
    const std::size_t ifd = r.u32(4);
    const std::uint16_t n_entries = r.u16(ifd);
    std::map<std::uint16_t, std::vector<std::uint32_t>> tags;
    for (std::uint16_t e = 0; e < n_entries; ++e) {
        const std::size_t entry = ifd + 2 + 12u * e;
        tags[r.u16(entry)] = tag_values(r, entry);
    }
    auto scalar = [&](Tag tag, std::uint32_t fallback) -> std::uint32_t {
        const auto it = tags.find(tag);
        if (it == tags.end() || it->second.empty()) return fallback;
        return it->second.front();
    };

    const std::uint32_t width = scalar(kImageWidth, 0);
    const std::uint32_t height = scalar(kImageLength, 0);
    if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20))
        bad("unsupported dimensions");
    const std::uint32_t spp = scalar(kSamplesPerPixel, 1);
    const std::uint32_t photometric = scalar(kPhotometric, 2);
    const std::uint32_t compression = scalar(kCompression, kNoCompression);
    if (scalar(kPlanarConfig, 1) != 1) bad("planar configuration not supported");
    if (compression != kNoCompression && compression != kPackBits)
        bad("compression scheme " + std::to_string(compression) + " not supported");
    if (tags.count(kBitsPerSample))
        for (std::uint32_t b : tags[kBitsPerSample])
            if (b != 8) bad("only 8-bit samples are supported");
    const bool gray = photometric == 0 || photometric == 1;
    if (!gray && photometric != 2) bad("photometric interpretation not supported");
    if ((gray && spp < 1) || (!gray && spp < 3)) bad("too few samples per pixel");

    const auto offsets = tags[kStripOffsets];
    const auto counts = tags[kStripByteCounts];
    if (offsets.empty() || offsets.size() != counts.size()) bad("missing strip tables");
    const std::uint32_t rows_per_strip = std::min(scalar(kRowsPerStrip, height), height);
    if (rows_per_strip == 0) bad("RowsPerStrip is zero");

    const std::size_t row_bytes = static_cast<std::size_t>(width) * spp;
    std::vector<std::uint8_t> raw;
    raw.reserve(row_bytes * height);
    for (std::size_t s = 0; s < offsets.size(); ++s) {
        r.need(offsets[s], counts[s]);
        const auto strip = bytes.subspan(offsets[s], counts[s]);
        if (compression == kPackBits) unpack_bits(strip, raw);
        else raw.insert(raw.end(), strip.begin(), strip.end());
    }
    if (raw.size() < row_bytes * height) bad("pixel data truncated");

    ImageRGB img(static_cast<int>(width), static_cast<int>(height));
    auto px = img.data();
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* src = raw.data() + i * spp;
        for (int c = 0; c < 3; ++c) {
            std::uint8_t v = gray ? src[0] : src[c];
            if (photometric == 0) v = static_cast<std::uint8_t>(255 - v);
            px[3 * i + c] = v;
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_tiff(const ImageRGB& img) {
    const auto w = static_cast<std::uint32_t>(img.width());
    const auto h = static_cast<std::uint32_t>(img.height());
    const auto pixel_bytes = static_cast<std::uint32_t>(img.data().size());

    constexpr std::uint16_t kEntries = 13;
    const std::uint32_t ifd_offset = 8;
    const std::uint32_t ifd_size = 2 + 12 * kEntries + 4;
    const std::uint32_t bps_offset = ifd_offset + ifd_size;  // 3 SHORTs
    const std::uint32_t res_offset = bps_offset + 6;         // 2 RATIONALs
    const std::uint32_t data_offset = res_offset + 16;

    std::vector<std::uint8_t> b;
    b.reserve(data_offset + pixel_bytes);
    b.push_back('I');
    b.push_back('I');
    put16(b, 42);
    put32(b, ifd_offset);

    put16(b, kEntries);
    auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t count, std::uint32_t value) {
        put16(b, tag);
        put16(b, type);
        put32(b, count);
        if (type == 3 && count == 1) {
            put16(b, static_cast<std::uint16_t>(value));
            put16(b, 0);
        } else {
            put32(b, value);
        }
    };
    entry(kImageWidth, 4, 1, w);
    entry(kImageLength, 4, 1, h);
    entry(kBitsPerSample, 3, 3, bps_offset);
    entry(kCompression, 3, 1, kNoCompression);
    entry(kPhotometric, 3, 1, 2);
    entry(kStripOffsets, 4, 1, data_offset);
    entry(kSamplesPerPixel, 3, 1, 3);
    entry(kRowsPerStrip, 4, 1, h);
    entry(kStripByteCounts, 4, 1, pixel_bytes);
    entry(kXResolution, 5, 1, res_offset);
    entry(kYResolution, 5, 1, res_offset + 8);
    entry(kPlanarConfig, 3, 1, 1);
    entry(kResolutionUnit, 3, 1, 1);
    put32(b, 0);

    for (int i = 0; i < 3; ++i) put16(b, 8);
    for (int i = 0; i < 2; ++i) {
        put32(b, 1);
        put32(b, 1);
    }
    b.insert(b.end(), img.data().begin(), img.data().end());
    return b;
}

ImageRGB read_tiff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    return decode_tiff(bytes);
}

void write_tiff(const std::filesystem::path& path, const ImageRGB& img) {
    const auto bytes = encode_tiff(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace ctxpath
