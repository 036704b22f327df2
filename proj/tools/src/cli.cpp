#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxpath/color.hpp"
#include "ctxpath/config.hpp"
#include "ctxpath/ctxf.hpp"
#include "ctxpath/eval.hpp"
#include "ctxpath/image_io.hpp"
#include "ctxpath/manifest.hpp"
#include "ctxpath/parallel.hpp"
#include "ctxpath/pipeline.hpp"
#include "ctxpath/synthetic.hpp"

namespace ctxpath::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IoFailure:
            return kIoError;
        case ErrorCode::UnknownColorSpace:
        case ErrorCode::BadMagic:
        case ErrorCode::UnsupportedVersion:
        case ErrorCode::CorruptRecord:
        case ErrorCode::DuplicateKey:
        case ErrorCode::VersionMismatch:
        case ErrorCode::SchemaViolation:
        case ErrorCode::ManifestSchema:
        case ErrorCode::ConfigError:
            return kFormatError;
        default:
            return kRunFailure;
    }
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- shared helpers -------------------------------------------------------

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw UsageError("empty item in list '" + text + "'");
        out.push_back(item.substr(b, e - b + 1));
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw UsageError("not a non-negative integer: '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw UsageError("integer out of range: '" + s + "'");
    }
}

std::size_t resolve_threads(const std::string& flag) {
    std::string text = flag;
    if (text.empty())
        if (const char* env = std::getenv("CTXPATH_THREADS")) text = env;
    if (text.empty()) return hardware_threads();
    const std::uint64_t n = parse_u64(text);
    if (n == 0) throw UsageError("thread count must be positive");
    return static_cast<std::size_t>(n);
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    f << text;
    if (!f) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

std::string format_triple(const std::array<double, 3>& v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%.4f, %.4f, %.4f)", v[0], v[1], v[2]);
    return buf;
}

// Reports warnings; returns kStrictWarning when they must fail the command.
int finish(const Diagnostics& diag, bool strict, std::ostream& err) {
    for (const auto& w : diag.warnings()) err << "warning: " << to_string(w.code) << ": " << w.message << '\n';
    if (strict && !diag.empty()) {
        err << "error: " << diag.warnings().size() << " warning(s) escalated by --strict\n";
        return kStrictWarning;
    }
    return kOk;
}

std::vector<FeatureStoreEntry> load_store(const std::string& path) {
    try {
        return store_read(path);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DimMismatch) throw Error(ErrorCode::CorruptRecord, e.what());
        throw;
    }
}

/// Image files named by `inputs`; directories contribute their supported images in name order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p))
                if (entry.is_regular_file() && is_supported_image(entry.path())) found.push_back(entry.path());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            if (!fs::exists(p)) throw Error(ErrorCode::IoFailure, "no such file: " + in);
            out.push_back(p);
        }
    }
    return out;
}

ChannelStats stats_from_image(const std::string& path, ColorSpace space) {
    return compute_stats(rgb_to_space(read_image(path), space));
}

// ---- option groups --------------------------------------------------------

struct Common {
    std::string threads;
    bool strict = false;

    void add(CLI::App* app, bool with_strict = true) {
        app->add_option("--threads", threads, "Worker thread cap (default: CTXPATH_THREADS or hardware count)");
        if (with_strict) app->add_flag("--strict", strict, "Fail with exit code 3 when any data warning is raised");
    }
};

// Pipeline settings: config file first, then individual flags on top.
struct PipelineFlags {
    std::string config;
    std::vector<std::pair<std::string, std::string>> values;  // key, flag text
    std::vector<std::string> storage;
    std::vector<std::string> sets;
    bool two_class = false;
    bool has_extractor_flag = false;

    void add(CLI::App* app) {
        app->add_option("--config", config, "Pipeline config file (key=value lines)");
        static const std::pair<const char*, const char*> keys[] = {
            {"colorspace", "Normalization colorspace: lalphabeta | cielab"},
            {"patch-size", "Patch edge length in pixels"},
            {"stride", "Patch stride in pixels (0 = patch size)"},
            {"block-size", "Context block edge k (k x k patches)"},
            {"pca-variance", "PCA retained-variance fraction in (0, 1]"},
            {"pca-components", "Fixed PCA output dimension (overrides --pca-variance)"},
            {"svm-c", "SVM box constraint C"},
            {"svm-gamma", "RBF gamma: 'scale', 'scale*X' or a positive number"},
            {"svm-tol", "SMO stopping tolerance"},
            {"svm-max-passes", "SMO iteration cap in sweeps over the data (0 = 10*n)"},
            {"augment", "Training orientations: all | none | comma-separated ids 0-7"},
            {"extractor", "Feature source: baseline | store"},
        };
        storage.resize(std::size(keys));
        for (std::size_t i = 0; i < std::size(keys); ++i)
            app->add_option(std::string("--") + keys[i].first, storage[i], keys[i].second);
        app->add_flag("--two-class", two_class, "Group normal+benign against insitu+invasive");
        app->add_option("--set", sets, "Extra config setting KEY=VALUE (repeatable)");
        for (const auto& k : keys) values.emplace_back(k.first, "");
    }

    PipelineConfig build() {
        PipelineConfig cfg;
        if (!config.empty()) cfg = read_config_file(config);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + s + "'");
            apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        for (std::size_t i = 0; i < storage.size(); ++i) {
            if (storage[i].empty()) continue;
            std::string key = values[i].first;
            std::replace(key.begin(), key.end(), '-', '_');
            apply_setting(cfg, key, storage[i]);
            if (key == "extractor") has_extractor_flag = true;
        }
        if (two_class) cfg.two_class = true;
        validate(cfg);
        return cfg;
    }
};

struct DataFlags {
    std::string manifest;
    std::string features;
    std::string target;
    std::string target_stats;

    void add(CLI::App* app, bool manifest_required) {
        auto* m = app->add_option("--manifest", manifest, "Dataset manifest CSV (image_id,path,label)");
        if (manifest_required) m->required();
        app->add_option("--features", features, "CTXF feature store (selects the store extractor)");
        auto* t = app->add_option("--target", target, "Normalization target image (default: mean stats of training images)");
        auto* ts = app->add_option("--target-stats", target_stats, "Normalization target stats record");
        t->excludes(ts);
    }

    std::optional<ChannelStats> target_for(ColorSpace space) const {
        if (!target.empty()) return stats_from_image(target, space);
        if (!target_stats.empty()) {
            ChannelStats s = read_stats_file(target_stats);
            if (s.space != space)
                throw Error(ErrorCode::ConfigError, "target stats are in " + std::string(to_string(s.space)) +
                                                        " but the pipeline uses " + std::string(to_string(space)));
            return s;
        }
        return std::nullopt;
    }

    // Settles the extractor kind from --features and loads what it needs.
    FeatureSetup setup(PipelineConfig& cfg, bool explicit_extractor, const DatasetManifest* manifest) const {
        if (!features.empty() && cfg.extractor == ExtractorKind::Baseline) {
            if (explicit_extractor) throw UsageError("--features conflicts with --extractor baseline");
            cfg.extractor = ExtractorKind::Store;
        }
        FeatureSetup s;
        s.kind = cfg.extractor;
        if (s.kind == ExtractorKind::Store) {
            if (features.empty()) throw UsageError("the store extractor needs --features");
            s.store = std::make_shared<StoreFeatureSource>(load_store(features));
        } else {
            if (manifest != nullptr) s.loader = manifest->loader();
            s.target = target_for(cfg.space);
        }
        return s;
    }
};

// ---- commands -------------------------------------------------------------

struct NormalizeCmd {
    std::string input, output, target, target_stats, space = "lalphabeta";
    Common common;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("normalize", "Reinhard stain normalization of an image or a directory");
        c->add_option("--input", input, "Input image or directory of images")->required();
        c->add_option("--output", output, "Output image, or directory when --input is a directory")->required();
        auto* t = c->add_option("--target", target, "Target image whose stats are matched");
        auto* ts = c->add_option("--target-stats", target_stats, "Target stats record (see 'stats')");
        t->excludes(ts);
        c->add_option("--space", space, "Colorspace: lalphabeta | cielab");
        common.add(c);
        cmd = c;
    }

    int run(std::ostream& out, std::ostream& err) {
        const ColorSpace cs = parse_color_space(space);
        ChannelStats goal;
        if (!target.empty()) goal = stats_from_image(target, cs);
        else if (!target_stats.empty()) {
            goal = read_stats_file(target_stats);
            if (goal.space != cs)
                throw Error(ErrorCode::ConfigError, "target stats are in " + std::string(to_string(goal.space)) +
                                                        ", --space is " + std::string(to_string(cs)));
        } else
            throw UsageError("normalize needs --target or --target-stats");

        std::vector<std::pair<fs::path, fs::path>> jobs;
        if (fs::is_directory(input)) {
            std::error_code ec;
            fs::create_directories(output, ec);
            if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + output + ": " + ec.message());
            for (const auto& p : expand_inputs({input})) jobs.emplace_back(p, fs::path(output) / p.filename());
        } else {
            if (!fs::exists(input)) throw Error(ErrorCode::IoFailure, "no such file: " + input);
            jobs.emplace_back(input, output);
        }
        Diagnostics diag;
        for (const auto& [src, dst] : jobs) {
            Diagnostics local;
            const ImageRGB result = reinhard_normalize(read_image(src), goal, cs, &local);
            write_image(dst, result);
            const ChannelStats got = compute_stats(rgb_to_space(result, cs));
            out << src.filename().string() << ": mean=" << format_triple(got.mean) << " std=" << format_triple(got.std)
                << '\n';
            for (auto w : local.warnings()) diag.warn(w.code, src.filename().string() + ": " + w.message);
        }
        return finish(diag, common.strict, err);
    }

    CLI::App* cmd = nullptr;
};

struct StatsCmd {
    std::string input, output, space = "lalphabeta";

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("stats", "Write the per-channel mean/std record of an image");
        c->add_option("--input", input, "Input image")->required();
        c->add_option("--space", space, "Colorspace: lalphabeta | cielab");
        c->add_option("--output", output, "Stats file (default: stdout)");
        cmd = c;
    }

    int run(std::ostream& out, std::ostream&) {
        const ChannelStats s = stats_from_image(input, parse_color_space(space));
        if (output.empty()) out << format_stats(s) << '\n';
        else write_stats_file(output, s);
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

struct ExtractCmd {
    std::string out_path;
    PipelineFlags pipeline;
    DataFlags data;
    Common common;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("extract", "Compute per-patch features for a manifest into a CTXF store");
        data.add(c, true);
        pipeline.add(c);
        c->add_option("--out", out_path, "Output CTXF file")->required();
        common.add(c);
        cmd = c;
    }

    int run(std::ostream& out, std::ostream& err) {
        PipelineConfig cfg = pipeline.build();
        const bool baseline = cfg.extractor == ExtractorKind::Baseline && data.features.empty();
        const DatasetManifest manifest = read_manifest(data.manifest, baseline);
        const Dataset dataset = manifest.dataset();
        const FeatureSetup setup = data.setup(cfg, pipeline.has_extractor_flag, &manifest);
        const ChannelStats target = resolve_target(setup, dataset, cfg.space);
        const auto source = make_feature_source(setup, cfg, target);
        const auto entries = collect_features(dataset, *source, cfg.augmentation_ops(), resolve_threads(common.threads));
        store_write(out_path, entries);
        out << "wrote " << entries.size() << " records (D=" << (entries.empty() ? 0 : entries.front().features.dim())
            << ") to " << out_path << '\n';
        return finish({}, common.strict, err);
    }

    CLI::App* cmd = nullptr;
};

struct TrainCmd {
    std::string model_path;
    PipelineFlags pipeline;
    DataFlags data;
    Common common;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("train", "Train a model from a labeled manifest");
        data.add(c, true);
        pipeline.add(c);
        c->add_option("--model", model_path, "Output model file")->required();
        common.add(c);
        cmd = c;
    }

    int run(std::ostream& out, std::ostream& err) {
        PipelineConfig cfg = pipeline.build();
        const bool baseline = cfg.extractor == ExtractorKind::Baseline && data.features.empty();
        const DatasetManifest manifest = read_manifest(data.manifest, baseline);
        const Dataset dataset = manifest.dataset();
        const FeatureSetup setup = data.setup(cfg, pipeline.has_extractor_flag, &manifest);
        const ChannelStats target = resolve_target(setup, dataset, cfg.space);
        const auto source = make_feature_source(setup, cfg, target);
        Diagnostics diag;
        TrainSummary summary;
        const TrainedModel model = train(dataset, *source, cfg, target, resolve_threads(common.threads), &diag, &summary);
        save_model(model, model_path);

        char buf[160];
        out << "training blocks: " << summary.block_samples << '\n';
        out << "pca dimension: " << summary.pca_dim << '\n';
        std::snprintf(buf, sizeof buf, "rbf gamma: %.6g\n", summary.gamma);
        out << buf;
        const auto names = model.class_names();
        for (std::size_t i = 0; i < model.svm.pairs.size(); ++i) {
            const auto& pm = model.svm.pairs[i];
            const auto name = [&](std::size_t c) { return names[static_cast<std::size_t>(model.svm.classes[c])]; };
            out << "support vectors " << name(pm.first) << '/' << name(pm.second) << ": "
                << summary.support_vectors[i] << '\n';
        }
        std::snprintf(buf, sizeof buf, "training accuracy: image %.4f, block %.4f\n", summary.train_image_accuracy,
                      summary.train_block_accuracy);
        out << buf << "model written to " << model_path << '\n';
        return finish(diag, common.strict, err);
    }

    CLI::App* cmd = nullptr;
};

struct PredictCmd {
    std::string model_path, manifest, features, output;
    std::vector<std::string> inputs;
    Common common;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("predict", "Predict image labels with a trained model");
        c->add_option("--model", model_path, "Model file")->required();
        c->add_option("--input", inputs, "Image files or directories (baseline models)");
        c->add_option("--manifest", manifest, "Predict the images of a manifest (labels ignored)");
        c->add_option("--features", features, "CTXF store to predict from (store models)");
        c->add_option("--output", output, "Predictions CSV (default: stdout)");
        common.add(c, false);
        cmd = c;
    }

    int run(std::ostream& out, std::ostream&) {
        const TrainedModel model = load_model(model_path);
        const std::size_t threads = resolve_threads(common.threads);
        std::vector<ImagePrediction> predictions;

        if (model.config.extractor == ExtractorKind::Store) {
            if (features.empty()) throw UsageError("this model was trained on stored features; pass --features");
            if (!inputs.empty()) throw UsageError("--input images cannot be used with a store model");
            std::vector<FeatureStoreEntry> entries;
            for (auto& e : load_store(features))
                if (e.features.augmentation() == DihedralOp::identity()) entries.push_back(std::move(e));
            if (!manifest.empty()) {
                const StoreFeatureSource store(std::move(entries));
                const DihedralOp identity[] = {DihedralOp::identity()};
                const Dataset ds = read_manifest(manifest, false).dataset();
                entries.clear();
                for (const auto& item : ds) entries.push_back({item.image_id, store.features(item.image_id, identity).front()});
            }
            predictions.resize(entries.size());
            parallel_for(entries.size(), threads, [&](std::size_t i) {
                predictions[i] = predict_features(model, entries[i].features, entries[i].image_id);
            });
        } else {
            if (!features.empty()) throw UsageError("--features applies to store models only");
            std::vector<std::pair<std::string, fs::path>> jobs;
            if (!manifest.empty()) {
                const DatasetManifest m = read_manifest(manifest);
                for (const auto& r : m.records()) jobs.emplace_back(r.image_id, r.path);
            }
            for (const auto& p : expand_inputs(inputs)) jobs.emplace_back(p.stem().string(), p);
            if (jobs.empty()) throw UsageError("predict needs --input or --manifest");
            predictions.resize(jobs.size());
            parallel_for(jobs.size(), threads, [&](std::size_t i) {
                predictions[i] = predict(model, read_image(jobs[i].second), jobs[i].first);
            });
        }
        write_text(output, format_predictions_csv(predictions, model.class_names()), out);
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

struct EvaluateCmd {
    std::string model_path, output, predictions_path;
    DataFlags data;
    Common common;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("evaluate", "Evaluate a model on a labeled manifest");
        c->add_option("--model", model_path, "Model file")->required();
        c->add_option("--manifest", data.manifest, "Labeled manifest CSV")->required();
        c->add_option("--features", data.features, "CTXF store (store models)");
        c->add_option("--output", output, "Report CSV (metric,true_class,predicted_class,value)");
        c->add_option("--predictions", predictions_path, "Also write the per-image predictions CSV");
        common.add(c, false);
        cmd = c;
    }

    int run(std::ostream& out, std::ostream&) {
        const TrainedModel model = load_model(model_path);
        const bool store = model.config.extractor == ExtractorKind::Store;
        const DatasetManifest manifest = read_manifest(data.manifest, !store);
        FeatureSetup setup;
        setup.kind = model.config.extractor;
        if (store) {
            if (data.features.empty()) throw UsageError("this model was trained on stored features; pass --features");
            setup.store = std::make_shared<StoreFeatureSource>(load_store(data.features));
        } else {
            setup.loader = manifest.loader();
        }
        const auto source = make_feature_source(setup, model);
        const EvalReport report = evaluate(model, manifest.dataset(), *source, resolve_threads(common.threads));
        out << format_report_text(report);
        if (!output.empty()) write_text(output, format_report_csv(report), out);
        if (!predictions_path.empty())
            write_text(predictions_path, format_predictions_csv(report.predictions, report.class_names), out);
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

struct SplitFlags {
    std::string seed = "0";
    std::string seeds;
    double train_fraction = 0.75;
    bool no_stratify = false;

    void add(CLI::App* app, bool multi_seed) {
        app->add_option("--seed", seed, "Split seed (u64)");
        if (multi_seed) app->add_option("--seeds", seeds, "Comma-separated split seeds (overrides --seed)");
        app->add_option("--train-fraction", train_fraction, "Training fraction of each split");
        app->add_flag("--no-stratify", no_stratify, "Split without per-class stratification");
    }

    SplitSpec spec() const { return {train_fraction, parse_u64(seed), !no_stratify}; }

    std::vector<std::uint64_t> seed_list() const {
        if (seeds.empty()) return {parse_u64(seed)};
        std::vector<std::uint64_t> out;
        for (const auto& s : split_list(seeds)) out.push_back(parse_u64(s));
        return out;
    }
};

struct SweepCmd {
    std::string k_values = "1,2,3", output;
    PipelineFlags pipeline;
    DataFlags data;
    SplitFlags split;
    Common common;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("sweep", "Compare context block sizes on identical splits");
        data.add(c, true);
        pipeline.add(c);
        c->add_option("--k", k_values, "Comma-separated block sizes");
        split.add(c, true);
        c->add_option("--output", output, "Sweep CSV");
        common.add(c);
        cmd = c;
    }

    int run(std::ostream& out, std::ostream& err) {
        PipelineConfig cfg = pipeline.build();
        std::vector<int> ks;
        for (const auto& s : split_list(k_values)) {
            const auto v = parse_u64(s);
            if (v == 0 || v > 64) throw UsageError("block size out of range: " + s);
            ks.push_back(static_cast<int>(v));
        }
        const bool baseline = cfg.extractor == ExtractorKind::Baseline && data.features.empty();
        const DatasetManifest manifest = read_manifest(data.manifest, baseline);
        const FeatureSetup setup = data.setup(cfg, pipeline.has_extractor_flag, &manifest);
        const auto seeds = split.seed_list();
        Diagnostics diag;
        const auto rows = sweep_block_size(manifest.dataset(), setup, cfg, ks, seeds, split.spec(),
                                           resolve_threads(common.threads), &diag);
        out << format_sweep_text(rows);
        if (!output.empty()) write_text(output, format_sweep_csv(rows), out);
        return finish(diag, common.strict, err);
    }

    CLI::App* cmd = nullptr;
};

struct GridCmd {
    std::string c_grid = "0.1,1,10,100", gamma_grid = "scale*0.1,scale,scale*10", output;
    PipelineFlags pipeline;
    DataFlags data;
    SplitFlags split;
    Common common;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("grid-search", "Exhaustive C x gamma search on a held-out split");
        data.add(c, true);
        pipeline.add(c);
        c->add_option("--c-grid", c_grid, "Comma-separated C values");
        c->add_option("--gamma-grid", gamma_grid, "Comma-separated gamma values ('scale*X' or numbers)");
        split.add(c, false);
        c->add_option("--output", output, "Grid CSV");
        common.add(c);
        cmd = c;
    }

    int run(std::ostream& out, std::ostream& err) {
        PipelineConfig cfg = pipeline.build();
        std::vector<double> cs;
        for (const auto& s : split_list(c_grid)) cs.push_back(parse_number(s));
        std::vector<GammaPolicy> gs;
        for (const auto& s : split_list(gamma_grid)) gs.push_back(parse_gamma(s));
        const bool baseline = cfg.extractor == ExtractorKind::Baseline && data.features.empty();
        const DatasetManifest manifest = read_manifest(data.manifest, baseline);
        const FeatureSetup setup = data.setup(cfg, pipeline.has_extractor_flag, &manifest);
        Diagnostics diag;
        const GridSearchResult result = grid_search(manifest.dataset(), setup, cfg, cs, gs, split.spec(),
                                                    resolve_threads(common.threads), &diag);
        char buf[200];
        for (const auto& p : result.points) {
            std::snprintf(buf, sizeof buf, "C=%-8g gamma=%-12s (%.6g)  image_acc=%.4f block_acc=%.4f\n", p.c,
                          format_gamma(p.gamma_policy).c_str(), p.gamma, p.image_accuracy, p.block_accuracy);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "best: C=%g gamma=%s (%.6g) image_acc=%.4f\n", result.best.c,
                      format_gamma(result.best.gamma_policy).c_str(), result.best.gamma, result.best.image_accuracy);
        out << buf;
        if (!output.empty()) write_text(output, format_grid_csv(result), out);
        return finish(diag, common.strict, err);
    }

    CLI::App* cmd = nullptr;
};

struct SynthCmd {
    std::string kind = "signature", out_dir, seed = "1";
    int per_class = 0, width = 1024, height = 768, patch_size = 128, cols = 4, rows = 3;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("synth", "Generate a synthetic labeled corpus with a manifest");
        c->add_option("--kind", kind, "signature (4 texture classes) | context (3 layout classes)");
        c->add_option("--out", out_dir, "Output directory")->required();
        c->add_option("--per-class", per_class, "Images per class (default 15 signature, 20 context)");
        c->add_option("--seed", seed, "Generator seed (u64)");
        c->add_option("--width", width, "Image width (signature)");
        c->add_option("--height", height, "Image height (signature)");
        c->add_option("--patch-size", patch_size, "Patch size (context)");
        c->add_option("--cols", cols, "Grid columns (context)");
        c->add_option("--rows", rows, "Grid rows (context)");
        cmd = c;
    }

    int run(std::ostream& out, std::ostream&) {
        std::vector<synthetic::SyntheticImage> images;
        if (kind == "signature") {
            synthetic::SignatureSpec spec;
            if (per_class > 0) spec.per_class = per_class;
            spec.width = width;
            spec.height = height;
            spec.seed = parse_u64(seed);
            images = synthetic::signature_corpus(spec);
        } else if (kind == "context") {
            synthetic::ContextSpec spec;
            if (per_class > 0) spec.per_class = per_class;
            spec.patch_size = patch_size;
            spec.cols = cols;
            spec.rows = rows;
            spec.seed = parse_u64(seed);
            images = synthetic::context_corpus(spec);
        } else {
            throw UsageError("--kind must be signature or context");
        }
        const auto manifest = synthetic::write_corpus(out_dir, images);
        out << "wrote " << images.size() << " images; manifest " << manifest.string() << '\n';
        return kOk;
    }

    CLI::App* cmd = nullptr;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Context-aware histology image classification: stain normalization, patch features, "
                 "PCA and RBF SVM with block voting",
                 "ctxpath"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ctxpath 0.1.0");

    NormalizeCmd normalize;
    StatsCmd stats;
    ExtractCmd extract;
    TrainCmd train_cmd;
    PredictCmd predict_cmd;
    EvaluateCmd evaluate_cmd;
    SweepCmd sweep;
    GridCmd grid;
    SynthCmd synth;
    normalize.add(app);
    stats.add(app);
    extract.add(app);
    train_cmd.add(app);
    predict_cmd.add(app);
    evaluate_cmd.add(app);
    sweep.add(app);
    grid.add(app);
    synth.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (normalize.cmd->parsed()) return normalize.run(out, err);
        if (stats.cmd->parsed()) return stats.run(out, err);
        if (extract.cmd->parsed()) return extract.run(out, err);
        if (train_cmd.cmd->parsed()) return train_cmd.run(out, err);
        if (predict_cmd.cmd->parsed()) return predict_cmd.run(out, err);
        if (evaluate_cmd.cmd->parsed()) return evaluate_cmd.run(out, err);
        if (sweep.cmd->parsed()) return sweep.run(out, err);
        if (grid.cmd->parsed()) return grid.run(out, err);
        if (synth.cmd->parsed()) return synth.run(out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRunFailure;
    }
    return kUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    for (const auto& a : args) argv.push_back(a.c_str());
    argv.push_back(nullptr);
    return run(static_cast<int>(args.size()), argv.data(), out, err);
}

}  // namespace ctxpath::cli
