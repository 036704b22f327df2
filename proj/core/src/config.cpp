#include "ctxpath/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ctxpath/error.hpp"
#include "text_util.hpp"

namespace ctxpath {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw Error(ErrorCode::ConfigError,
                "invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v);
}

}  // namespace

std::string_view to_string(ExtractorKind kind) noexcept {
    return kind == ExtractorKind::Baseline ? "baseline" : "store";
}

ExtractorKind parse_extractor(std::string_view name) {
    if (name == "baseline") return ExtractorKind::Baseline;
    if (name == "store") return ExtractorKind::Store;
    throw Error(ErrorCode::ConfigError, "unknown extractor '" + std::string(name) + "'");
}

std::string format_gamma(const GammaPolicy& g) {
    if (g.kind == GammaPolicy::Kind::Fixed) return detail::format_double(g.value);
    if (g.value == 1.0) return "scale";
    return "scale*" + detail::format_double(g.value);
}

GammaPolicy parse_gamma(std::string_view text) {
    text = detail::trim(text);
    if (text == "scale") return GammaPolicy::scale();
    if (text.starts_with("scale*")) {
        const auto m = detail::to_double(text.substr(6));
        if (!m || *m <= 0.0) bad_value("svm_gamma", text);
        return GammaPolicy::scale(*m);
    }
    const auto v = detail::to_double(text);
    if (!v || *v <= 0.0) bad_value("svm_gamma", text);
    return GammaPolicy::fixed(*v);
}

std::vector<DihedralOp> PipelineConfig::augmentation_ops() const {
    std::vector<DihedralOp> ops;
    for (int id : augmentations) ops.emplace_back(id);
    return ops;
}

void validate(const PipelineConfig& cfg) {
    if (cfg.patch_size < 1) throw Error(ErrorCode::ConfigError, "patch_size must be >= 1");
    if (cfg.stride < 0) throw Error(ErrorCode::ConfigError, "stride must be >= 0");
    if (cfg.block_size < 1) throw Error(ErrorCode::ConfigError, "block_size must be >= 1");
    if (!(cfg.svm_c > 0.0)) throw Error(ErrorCode::ConfigError, "svm_c must be positive");
    if (!(cfg.gamma.value > 0.0)) throw Error(ErrorCode::ConfigError, "svm_gamma must be positive");
    if (!(cfg.svm_tol > 0.0)) throw Error(ErrorCode::ConfigError, "svm_tol must be positive");
    if (cfg.pca.kind == PcaTarget::Kind::VarianceFraction &&
        !(cfg.pca.fraction > 0.0 && cfg.pca.fraction <= 1.0))
        throw Error(ErrorCode::ConfigError, "pca_variance must lie in (0, 1]");
    if (std::find(cfg.augmentations.begin(), cfg.augmentations.end(), 0) == cfg.augmentations.end())
        throw Error(ErrorCode::ConfigError, "augmentation set must contain the identity (0)");
    std::vector<int> sorted = cfg.augmentations;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(ErrorCode::ConfigError, "augmentation set has duplicates");
    for (int id : sorted)
        if (id < 0 || id >= DihedralOp::kCount)
            throw Error(ErrorCode::ConfigError, "augmentation ids must be in 0..7");
}

std::vector<int> parse_augmentations(std::string_view text) {
    text = detail::trim(text);
    if (text == "all") return {0, 1, 2, 3, 4, 5, 6, 7};
    if (text == "none") return {0};
    std::vector<int> out;
    for (const auto& part : detail::split(text, ',')) {
        const auto id = detail::to_int<int>(part);
        if (!id || *id < 0 || *id >= DihedralOp::kCount) bad_value("augment", text);
        out.push_back(*id);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string format_augmentations(const std::vector<int>& augs) {
    std::string out;
    for (std::size_t i = 0; i < augs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(augs[i]);
    }
    return out;
}

void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
    key = detail::trim(key);
    value = detail::trim(value);
    auto int_value = [&](int min) {
        const auto v = detail::to_int<int>(value);
        if (!v || *v < min) bad_value(key, value);
        return *v;
    };
    auto real_value = [&] {
        const auto v = detail::to_double(value);
        if (!v) bad_value(key, value);
        return *v;
    };
    if (key == "colorspace") {
        try {
            cfg.space = parse_color_space(value);
        } catch (const Error&) {
            bad_value(key, value);
        }
    } else if (key == "patch_size") {
        cfg.patch_size = int_value(1);
    } else if (key == "stride") {
        cfg.stride = int_value(0);
    } else if (key == "block_size") {
        cfg.block_size = int_value(1);
    } else if (key == "pca_variance") {
        cfg.pca = PcaTarget::variance(real_value());
    } else if (key == "pca_components") {
        cfg.pca = PcaTarget::fixed(static_cast<std::size_t>(int_value(0)));
    } else if (key == "svm_c") {
        cfg.svm_c = real_value();
    } else if (key == "svm_gamma") {
        cfg.gamma = parse_gamma(value);
    } else if (key == "svm_tol") {
        cfg.svm_tol = real_value();
    } else if (key == "svm_max_passes") {
        cfg.svm_max_passes = static_cast<std::size_t>(int_value(0));
    } else if (key == "augment") {
        cfg.augmentations = parse_augmentations(value);
    } else if (key == "extractor") {
        cfg.extractor = parse_extractor(value);
    } else if (key == "two_class") {
        cfg.two_class = parse_bool(key, value);
    } else {
        throw Error(ErrorCode::ConfigError, "unknown config key '" + std::string(key) + "'");
    }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
    std::size_t line_no = 0;
    for (const auto& raw : detail::split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");
        apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
    validate(base);
    return base;
}

PipelineConfig read_config_file(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string format_config(const PipelineConfig& cfg) {
    std::ostringstream os;
    os << "colorspace=" << to_string(cfg.space) << '\n'
       << "patch_size=" << cfg.patch_size << '\n'
       << "stride=" << cfg.stride << '\n'
       << "block_size=" << cfg.block_size << '\n';
    if (cfg.pca.kind == PcaTarget::Kind::VarianceFraction)
        os << "pca_variance=" << detail::format_double(cfg.pca.fraction) << '\n';
    else
        os << "pca_components=" << cfg.pca.components << '\n';
    os << "svm_c=" << detail::format_double(cfg.svm_c) << '\n'
       << "svm_gamma=" << format_gamma(cfg.gamma) << '\n'
       << "svm_tol=" << detail::format_double(cfg.svm_tol) << '\n'
       << "svm_max_passes=" << cfg.svm_max_passes << '\n'
       << "augment=" << format_augmentations(cfg.augmentations) << '\n'
       << "extractor=" << to_string(cfg.extractor) << '\n'
       << "two_class=" << (cfg.two_class ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace ctxpath
