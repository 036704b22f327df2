#include "ctxpath/color.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ctxpath {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

constexpr double kDegenerateStd = 1e-12;
constexpr double kLmsFloor = 1e-4;

// sRGB primaries, D65 white.
constexpr Mat3 kRgbToXyz{{{0.4124564, 0.3575761, 0.1804375},
                          {0.2126729, 0.7151522, 0.0721750},
                          {0.0193339, 0.1191920, 0.9503041}}};
constexpr Triple kWhiteD65{0.95047, 1.0, 1.08883};

constexpr Mat3 kRgbToLms{{{0.3811, 0.5783, 0.0402},
                          {0.1967, 0.7244, 0.0782},
                          {0.0241, 0.1288, 0.8444}}};

Mat3 invert(const Mat3& m) {
    const double a = m[0][0], b = m[0][1], c = m[0][2];
    const double d = m[1][0], e = m[1][1], f = m[1][2];
    const double g = m[2][0], h = m[2][1], i = m[2][2];
    const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    return {{{(e * i - f * h) / det, (c * h - b * i) / det, (b * f - c * e) / det},
             {(f * g - d * i) / det, (a * i - c * g) / det, (c * d - a * f) / det},
             {(d * h - e * g) / det, (b * g - a * h) / det, (a * e - b * d) / det}}};
}

const Mat3& xyz_to_rgb() {
    static const Mat3 m = invert(kRgbToXyz);
    return m;
}

const Mat3& lms_to_rgb() {
    static const Mat3 m = invert(kRgbToLms);
    return m;
}

Triple mul(const Mat3& m, const Triple& v) noexcept {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

double srgb_decode(double c) noexcept {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double srgb_encode(double lin) noexcept {
    return lin <= 0.0031308 ? 12.92 * lin : 1.055 * std::pow(lin, 1.0 / 2.4) - 0.055;
}

const std::array<double, 256>& srgb_lut() {
    static const auto lut = [] {
        std::array<double, 256> t{};
        for (int v = 0; v < 256; ++v) t[v] = srgb_decode(v / 255.0);
        return t;
    }();
    return lut;
}

constexpr double kDelta = 6.0 / 29.0;

double lab_f(double t) noexcept {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) noexcept {
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

std::uint8_t quantize(double v) noexcept {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(std::round(v));
}

Rgb8 quantize(const Triple& rgb255) noexcept {
    return {quantize(rgb255[0]), quantize(rgb255[1]), quantize(rgb255[2])};
}

const double kInvSqrt3 = 1.0 / std::sqrt(3.0);
const double kInvSqrt6 = 1.0 / std::sqrt(6.0);
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

std::string_view to_string(ColorSpace space) noexcept {
    switch (space) {
        case ColorSpace::CieLab: return "cielab";
        case ColorSpace::LAlphaBeta: return "lalphabeta";
    }
    return "unknown";
}

ColorSpace parse_color_space(std::string_view name) {
    if (name == "cielab" || name == "lab") return ColorSpace::CieLab;
    if (name == "lalphabeta" || name == "lab-reinhard") return ColorSpace::LAlphaBeta;
    throw Error(ErrorCode::UnknownColorSpace, "unknown colorspace '" + std::string(name) + "'");
}

ImageF3::ImageF3(int width, int height, ColorSpace space)
    : width_(width), height_(height), space_(space) {
    if (width < 1 || height < 1)
        throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
    data_.assign(pixel_count() * 3, 0.0);
}

ImageF3::ImageF3(int width, int height, ColorSpace space, std::vector<double> data)
    : ImageF3(width, height, space) {
    if (data.size() != data_.size())
        throw Error(ErrorCode::InvalidArgument, "sample buffer size does not match dimensions");
    for (double v : data)
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite sample");
    data_ = std::move(data);
}

Triple rgb_to_lab(const Rgb8& rgb) noexcept {
    const auto& lut = srgb_lut();
    const Triple xyz = mul(kRgbToXyz, {lut[rgb[0]], lut[rgb[1]], lut[rgb[2]]});
    const double fx = lab_f(xyz[0] / kWhiteD65[0]);
    const double fy = lab_f(xyz[1] / kWhiteD65[1]);
    const double fz = lab_f(xyz[2] / kWhiteD65[2]);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb8 lab_to_rgb(const Triple& lab) noexcept {
    const double fy = (lab[0] + 16.0) / 116.0;
    const double fx = fy + lab[1] / 500.0;
    const double fz = fy - lab[2] / 200.0;
    const Triple xyz{kWhiteD65[0] * lab_f_inv(fx), kWhiteD65[1] * lab_f_inv(fy),
                     kWhiteD65[2] * lab_f_inv(fz)};
    const Triple lin = mul(xyz_to_rgb(), xyz);
    return quantize(Triple{255.0 * srgb_encode(std::max(lin[0], 0.0)),
                           255.0 * srgb_encode(std::max(lin[1], 0.0)),
                           255.0 * srgb_encode(std::max(lin[2], 0.0))});
}

Triple rgb_to_lalphabeta(const Rgb8& rgb) noexcept {
    const Triple lms = mul(kRgbToLms, {rgb[0] / 255.0, rgb[1] / 255.0, rgb[2] / 255.0});
    const double l = std::log10(std::max(lms[0], kLmsFloor));
    const double m = std::log10(std::max(lms[1], kLmsFloor));
    const double s = std::log10(std::max(lms[2], kLmsFloor));
    return {kInvSqrt3 * (l + m + s), kInvSqrt6 * (l + m - 2.0 * s), kInvSqrt2 * (l - m)};
}

Rgb8 lalphabeta_to_rgb(const Triple& lab) noexcept {
    const double sum = lab[0] / kInvSqrt3;   // L + M + S
    const double diff = lab[1] / kInvSqrt6;  // L + M - 2S
    const double lm = lab[2] / kInvSqrt2;    // L - M
    const double s = (sum - diff) / 3.0;
    const double l = (sum - s + lm) / 2.0;
    const double m = (sum - s - lm) / 2.0;
    const Triple lms{std::pow(10.0, l), std::pow(10.0, m), std::pow(10.0, s)};
    const Triple rgb = mul(lms_to_rgb(), lms);
    return quantize(Triple{255.0 * rgb[0], 255.0 * rgb[1], 255.0 * rgb[2]});
}

ImageF3 rgb_to_space(const ImageRGB& img, ColorSpace space) {
    ImageF3 out(img.width(), img.height(), space);
    const auto px = img.data();
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const Rgb8 rgb{px[3 * i], px[3 * i + 1], px[3 * i + 2]};
        out.set_pixel(i, space == ColorSpace::CieLab ? rgb_to_lab(rgb) : rgb_to_lalphabeta(rgb));
    }
    return out;
}

ImageRGB space_to_rgb(const ImageF3& img) {
    if (img.space() != ColorSpace::CieLab && img.space() != ColorSpace::LAlphaBeta)
        throw Error(ErrorCode::UnknownColorSpace, "unsupported colorspace tag");
    ImageRGB out(img.width(), img.height());
    auto px = out.data();
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const Triple v = img.pixel(i);
        const Rgb8 rgb = img.space() == ColorSpace::CieLab ? lab_to_rgb(v) : lalphabeta_to_rgb(v);
        px[3 * i] = rgb[0];
        px[3 * i + 1] = rgb[1];
        px[3 * i + 2] = rgb[2];
    }
    return out;
}

ChannelStats compute_stats(const ImageF3& img) {
    // Welford update per channel.
    Triple mean{}, m2{};
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const Triple v = img.pixel(i);
        const double count = static_cast<double>(i + 1);
        for (int c = 0; c < 3; ++c) {
            const double delta = v[c] - mean[c];
            mean[c] += delta / count;
            m2[c] += delta * (v[c] - mean[c]);
        }
    }
    ChannelStats stats;
    stats.space = img.space();
    stats.mean = mean;
    for (int c = 0; c < 3; ++c) stats.std[c] = std::sqrt(std::max(m2[c], 0.0) / static_cast<double>(n));
    return stats;
}

ImageF3 reinhard_transfer(const ImageF3& src, const ChannelStats& target, Diagnostics* diag) {
    if (target.space != src.space())
        throw Error(ErrorCode::InvalidArgument,
                    "target stats are in " + std::string(to_string(target.space)) +
                        " but the image is in " + std::string(to_string(src.space())));
    const ChannelStats source = compute_stats(src);
    std::array<bool, 3> degenerate{};
    Triple scale{};
    for (int c = 0; c < 3; ++c) {
        degenerate[c] = source.std[c] < kDegenerateStd;
        if (degenerate[c]) {
            warn(diag, WarningCode::DegenerateChannel,
                 "channel " + std::to_string(c) + " has zero spread; set to target mean");
        } else {
            scale[c] = target.std[c] / source.std[c];
        }
    }
    ImageF3 out(src.width(), src.height(), src.space());
    const std::size_t n = src.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        Triple v = src.pixel(i);
        for (int c = 0; c < 3; ++c)
            v[c] = degenerate[c] ? target.mean[c]
                                 : (v[c] - source.mean[c]) * scale[c] + target.mean[c];
        out.set_pixel(i, v);
    }
    return out;
}

ImageRGB reinhard_normalize(const ImageRGB& src, const ChannelStats& target, ColorSpace space,
                            Diagnostics* diag) {
    if (target.space != space)
        throw Error(ErrorCode::InvalidArgument, "target stats colorspace does not match");
    return space_to_rgb(reinhard_transfer(rgb_to_space(src, space), target, diag));
}

std::string format_stats(const ChannelStats& stats) {
    std::ostringstream os;
    os << to_string(stats.space);
    char buf[32];
    for (double v : stats.mean) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
    }
    for (double v : stats.std) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
    }
    return os.str();
}

ChannelStats parse_stats(std::string_view record) {
    while (!record.empty() && (record.back() == '\n' || record.back() == '\r' || record.back() == ' '))
        record.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = record.find(',', start);
        fields.emplace_back(record.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (fields.size() != 7)
        throw Error(ErrorCode::SchemaViolation,
                    "stats record needs 7 comma-separated fields, got " + std::to_string(fields.size()));
    ChannelStats stats;
    stats.space = parse_color_space(fields[0]);
    for (int i = 0; i < 6; ++i) {
        const std::string& f = fields[i + 1];
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(f, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != f.size() || !std::isfinite(v))
            throw Error(ErrorCode::SchemaViolation, "bad number '" + f + "' in stats record");
        (i < 3 ? stats.mean[i] : stats.std[i - 3]) = v;
    }
    for (double s : stats.std)
        if (s < 0.0) throw Error(ErrorCode::SchemaViolation, "negative std in stats record");
    return stats;
}

ChannelStats read_stats_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open stats file " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        return parse_stats(line);
    }
    throw Error(ErrorCode::SchemaViolation, "stats file " + path + " is empty");
}

void write_stats_file(const std::string& path, const ChannelStats& stats) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write stats file " + path);
    out << format_stats(stats) << '\n';
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

}  // namespace ctxpath
