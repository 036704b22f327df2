#include "ctxpath/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>

#include "ctxpath/image_io.hpp"

namespace ctxpath::synthetic {

namespace {

using Color = std::array<double, 3>;

// Portable uniform draws; std distributions differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Color jitter(const Color& c, double amount, Rng& rng) {
    return {c[0] + rng.uniform(-amount, amount), c[1] + rng.uniform(-amount, amount),
            c[2] + rng.uniform(-amount, amount)};
}

void put(ImageRGB& img, int x, int y, const Color& a, const Color& b, double t, double noise, Rng& rng) {
    for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = quantize(a[c] + (b[c] - a[c]) * t + rng.uniform(-noise, noise));
}

std::string make_id(const std::string& prefix, ClassLabel label, int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d", index);
    return prefix + "_" + std::string(to_string(label)) + "_" + buf;
}

// H&E-like palettes per class: a light and a dark tone.
constexpr std::array<std::array<Color, 2>, 4> kPalettes = {{
    {{{232, 190, 210}, {150, 80, 140}}},
    {{{225, 170, 200}, {110, 50, 120}}},
    {{{240, 200, 220}, {120, 60, 150}}},
    {{{215, 160, 195}, {90, 40, 110}}},
}};

ImageRGB signature_image(ClassLabel label, int w, int h, Rng& rng) {
    const auto& pal = kPalettes[static_cast<std::size_t>(label)];
    const Color a = jitter(pal[0], 12.0, rng);
    const Color b = jitter(pal[1], 12.0, rng);
    constexpr double noise = 3.0;
    ImageRGB img(w, h);
    switch (label) {
        case ClassLabel::Normal: {
            const double px = rng.uniform(180.0, 320.0), py = rng.uniform(180.0, 320.0);
            const double phx = rng.uniform(0.0, 1.0), phy = rng.uniform(0.0, 1.0);
            constexpr double tau = 2.0 * std::numbers::pi;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double t = 0.5 + 0.5 * std::sin(tau * (x / px + phx)) * std::sin(tau * (y / py + phy));
                    put(img, x, y, a, b, t, noise, rng);
                }
            break;
        }
        case ClassLabel::Benign:
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) put(img, x, y, a, b, ((x / 2 + y / 2) % 2) ? 1.0 : 0.0, noise, rng);
            break;
        case ClassLabel::InSitu: {
            const bool vertical = rng.coin();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const int v = vertical ? x : y;
                    put(img, x, y, a, b, ((v / 16) % 2) ? 1.0 : 0.0, noise, rng);
                }
            break;
        }
        case ClassLabel::Invasive:
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) put(img, x, y, a, b, rng.uniform(), noise, rng);
            break;
    }
    return img;
}

}  // namespace

std::vector<SyntheticImage> signature_corpus(const SignatureSpec& spec) {
    if (spec.per_class < 1 || spec.width < 1 || spec.height < 1)
        throw Error(ErrorCode::InvalidArgument, "signature corpus needs positive sizes");
    Rng rng(spec.seed);
    std::vector<SyntheticImage> out;
    for (int i = 0; i < spec.per_class; ++i)
        for (int c = 0; c < kClassLabelCount; ++c) {
            const auto label = static_cast<ClassLabel>(c);
            out.push_back({make_id(spec.id_prefix, label, i), label, signature_image(label, spec.width, spec.height, rng)});
        }
    return out;
}

std::vector<SyntheticImage> context_corpus(const ContextSpec& spec) {
    if (spec.per_class < 1 || spec.patch_size < 8 || spec.cols < 2 || spec.rows < 2)
        throw Error(ErrorCode::InvalidArgument, "context corpus needs a grid of at least 2x2 patches of 8 px");
    const Color c1{205, 125, 175};
    const Color c2{95, 45, 135};
    constexpr double noise = 4.0;
    const int p = spec.patch_size;
    Rng rng(spec.seed);

    // Type A: horizontal stripes, 4 px each. Type B: left half c1, right half c2.
    auto paint = [&](ImageRGB& img, int gx, int gy, bool type_a) {
        for (int y = 0; y < p; ++y)
            for (int x = 0; x < p; ++x) {
                const bool second = type_a ? ((y / 4) % 2 == 1) : (x >= p / 2);
                put(img, gx * p + x, gy * p + y, c1, c2, second ? 1.0 : 0.0, noise, rng);
            }
    };

    const ClassLabel classes[] = {ClassLabel::Normal, ClassLabel::Benign, ClassLabel::InSitu};
    std::vector<SyntheticImage> out;
    for (int i = 0; i < spec.per_class; ++i)
        for (const ClassLabel label : classes) {
            ImageRGB img(spec.cols * p, spec.rows * p);
            const bool parity = rng.coin();
            for (int gy = 0; gy < spec.rows; ++gy)
                for (int gx = 0; gx < spec.cols; ++gx) {
                    bool type_a = parity;
                    if (label == ClassLabel::Benign) type_a = ((gy % 2) == 0) == parity;
                    if (label == ClassLabel::InSitu) type_a = (((gx + gy) % 2) == 0) == parity;
                    paint(img, gx, gy, type_a);
                }
            out.push_back({make_id(spec.id_prefix, label, i), label, std::move(img)});
        }
    return out;
}

Dataset dataset_of(std::span<const SyntheticImage> images) {
    Dataset out;
    out.reserve(images.size());
    for (const auto& s : images) out.push_back({s.image_id, s.label});
    return out;
}

ImageLoader memory_loader(std::span<const SyntheticImage> images) {
    auto store = std::make_shared<std::map<std::string, ImageRGB>>();
    for (const auto& s : images) store->emplace(s.image_id, s.image);
    return [store](const std::string& id) {
        const auto it = store->find(id);
        if (it == store->end()) throw Error(ErrorCode::MissingRecord, "no synthetic image '" + id + "'");
        return it->second;
    };
}

std::filesystem::path write_corpus(const std::filesystem::path& dir, std::span<const SyntheticImage> images) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<ManifestRecord> records;
    for (const auto& s : images) {
        const auto path = dir / (s.image_id + ".png");
        write_image(path, s.image);
        records.push_back({s.image_id, path, s.label});
    }
    const auto manifest = dir / "manifest.csv";
    write_manifest(manifest, records);
    return manifest;
}

}  // namespace ctxpath::synthetic
