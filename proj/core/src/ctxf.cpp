#include "ctxpath/ctxf.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <string>

#include "ctxpath/error.hpp"

namespace ctxpath {

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "CTXF requires IEEE-754 float32");

class Writer {
public:
    explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        u8(static_cast<std::uint8_t>(v & 0xff));
        u8(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int s = 0; s < 32; s += 8) u8(static_cast<std::uint8_t>((v >> s) & 0xff));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }

private:
    std::vector<std::uint8_t>& out_;
};

class Cursor {
public:
    explicit Cursor(std::span<const std::uint8_t> in) : in_(in) {}

    bool has(std::size_t n) const noexcept { return in_.size() - pos_ >= n; }
    std::size_t remaining() const noexcept { return in_.size() - pos_; }

    std::uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>(in_[pos_] | in_[pos_ + 1] << 8);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = v << 8 | in_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n) const {
        if (!has(n)) throw Error(ErrorCode::CorruptRecord, "unexpected end of feature store");
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_store(std::span<const FeatureStoreEntry> entries) {
    const std::size_t dim = entries.empty() ? 0 : entries.front().features.dim();
    std::set<std::pair<std::string, int>> keys;
    for (const auto& e : entries) {
        if (e.features.dim() != dim)
            throw Error(ErrorCode::DimMismatch, "entries must share one feature dimension");
        if (e.image_id.size() > std::numeric_limits<std::uint16_t>::max())
            throw Error(ErrorCode::InvalidArgument, "image id too long: " + e.image_id);
        if (e.features.rows() > 0xffff || e.features.cols() > 0xffff)
            throw Error(ErrorCode::InvalidArgument, "grid too large for CTXF");
        if (!keys.emplace(e.image_id, e.features.augmentation().id()).second)
            throw Error(ErrorCode::DuplicateKey, "duplicate record (" + e.image_id + ", " +
                                                     std::to_string(e.features.augmentation().id()) + ")");
        for (double v : e.features.values())
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite feature value");
    }
    if (dim > std::numeric_limits<std::uint32_t>::max() ||
        entries.size() > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorCode::InvalidArgument, "store too large for CTXF");

    std::vector<std::uint8_t> out;
    Writer w(out);
    w.bytes(ctxf::kMagic, 4);
    w.u32(ctxf::kVersion);
    w.u32(static_cast<std::uint32_t>(dim));
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        w.u16(static_cast<std::uint16_t>(e.image_id.size()));
        w.bytes(e.image_id.data(), e.image_id.size());
        w.u8(static_cast<std::uint8_t>(e.features.augmentation().id()));
        w.u16(static_cast<std::uint16_t>(e.features.rows()));
        w.u16(static_cast<std::uint16_t>(e.features.cols()));
        for (double v : e.features.values()) w.f32(static_cast<float>(v));
    }
    return out;
}

std::vector<FeatureStoreEntry> decode_store(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), ctxf::kMagic, 4) != 0)
        throw Error(ErrorCode::BadMagic, "not a CTXF feature store");
    Cursor in(bytes.subspan(4));
    if (!in.has(12)) throw Error(ErrorCode::CorruptRecord, "truncated CTXF header");
    const std::uint32_t version = in.u32();
    if (version != ctxf::kVersion)
        throw Error(ErrorCode::UnsupportedVersion, "CTXF version " + std::to_string(version));
    const std::size_t dim = in.u32();
    const std::uint32_t count = in.u32();

    std::vector<FeatureStoreEntry> entries;
    std::set<std::pair<std::string, int>> keys;
    for (std::uint32_t r = 0; r < count; ++r) {
        FeatureStoreEntry e;
        e.image_id = in.str(in.u16());
        const int aug = in.u8();
        if (aug >= DihedralOp::kCount)
            throw Error(ErrorCode::CorruptRecord, "augmentation id " + std::to_string(aug) + " out of range");
        const int rows = in.u16();
        const int cols = in.u16();
        const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * dim;
        if (n > in.remaining() / 4)
            throw Error(ErrorCode::CorruptRecord, "record " + std::to_string(r) + " (" + e.image_id +
                                                      ") payload truncated");
        std::vector<double> values(n);
        for (auto& v : values) {
            v = in.f32();
            if (!std::isfinite(v))
                throw Error(ErrorCode::CorruptRecord, "non-finite value in record " + e.image_id);
        }
        e.features = FeatureMatrix(rows, cols, dim, DihedralOp(aug), std::move(values));
        if (!keys.emplace(e.image_id, aug).second)
            throw Error(ErrorCode::DuplicateKey, "duplicate record (" + e.image_id + ", " +
                                                     std::to_string(aug) + ")");
        entries.push_back(std::move(e));
    }
    if (in.remaining() != 0)
        throw Error(ErrorCode::CorruptRecord, std::to_string(in.remaining()) +
                                                  " trailing bytes after " + std::to_string(count) + " records");
    return entries;
}

void store_write(const std::filesystem::path& path, std::span<const FeatureStoreEntry> entries) {
    const auto bytes = encode_store(entries);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<FeatureStoreEntry> store_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    return decode_store(bytes);
}

}  // namespace ctxpath
