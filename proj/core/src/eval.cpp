#include "ctxpath/eval.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ctxpath/parallel.hpp"
#include "text_util.hpp"

namespace ctxpath {

namespace {

// Unbiased draw in [0, bound) by rejection; std distributions are not portable.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % bound;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

std::size_t train_count(double fraction, std::size_t n) {
    const auto c = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(c, 1, n - 1);
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(double v) { return detail::format_double(v); }

struct SplitFeatures {
    DatasetSplit parts;
    ChannelStats target;
    std::vector<FeatureStoreEntry> train;
    std::vector<FeatureStoreEntry> test;
};

SplitFeatures prepare_split(const Dataset& dataset, const FeatureSetup& setup, const PipelineConfig& cfg,
                            const SplitSpec& spec, std::size_t threads) {
    SplitFeatures out;
    out.parts = split(dataset, spec);
    out.target = resolve_target(setup, out.parts.train, cfg.space);
    const auto source = make_feature_source(setup, cfg, out.target);
    const auto ops = cfg.augmentation_ops();
    const DihedralOp identity[] = {DihedralOp::identity()};
    out.train = collect_features(out.parts.train, *source, ops, threads);
    out.test = collect_features(out.parts.validation, *source, identity, threads);
    return out;
}

}  // namespace

DatasetSplit split(const Dataset& dataset, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
    std::mt19937_64 rng(spec.seed);
    std::vector<bool> to_train(dataset.size(), false);

    auto take = [&](std::vector<std::size_t> members) {
        const std::size_t n_train = train_count(spec.train_fraction, members.size());
        shuffle(members, rng);
        for (std::size_t i = 0; i < n_train; ++i) to_train[members[i]] = true;
    };

    if (spec.stratified) {
        std::map<ClassLabel, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset[i].label].push_back(i);
        for (const auto& [label, members] : by_class)
            if (members.size() < 2)
                throw Error(ErrorCode::TooFewSamples, "class '" + std::string(to_string(label)) +
                                                          "' needs at least 2 images to split");
        for (auto& [label, members] : by_class) take(std::move(members));
    } else {
        if (dataset.size() < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 images to split");
        std::vector<std::size_t> all(dataset.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(std::move(all));
    }

    DatasetSplit out;
    for (std::size_t i = 0; i < dataset.size(); ++i) (to_train[i] ? out.train : out.validation).push_back(dataset[i]);
    return out;
}

EvalReport evaluate_predictions(std::vector<ImagePrediction> predictions, std::span<const int> truth,
                                std::vector<std::string> class_names, ConfigEcho echo) {
    if (predictions.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to evaluate");
    if (predictions.size() != truth.size())
        throw Error(ErrorCode::InvalidArgument, "predictions and labels differ in count");
    const std::size_t c = class_names.size();
    EvalReport r;
    r.class_names = std::move(class_names);
    r.config_echo = std::move(echo);
    r.confusion.assign(c, std::vector<std::size_t>(c, 0));
    auto check = [c](int label) {
        if (label < 0 || static_cast<std::size_t>(label) >= c)
            throw Error(ErrorCode::InvalidArgument, "label index " + std::to_string(label) + " out of range");
        return static_cast<std::size_t>(label);
    };
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const std::size_t t = check(truth[i]);
        const std::size_t p = check(predictions[i].label);
        ++r.confusion[t][p];
        ++r.images;
        r.images_correct += t == p;
        for (const auto& b : predictions[i].blocks) {
            ++r.blocks;
            r.blocks_correct += check(b.label) == t;
        }
    }
    r.support.assign(c, 0);
    r.precision.assign(c, 0.0);
    r.recall.assign(c, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t predicted = 0;
        for (std::size_t t = 0; t < c; ++t) {
            r.support[k] += r.confusion[k][t];
            predicted += r.confusion[t][k];
        }
        r.precision[k] = ratio(r.confusion[k][k], predicted);
        r.recall[k] = ratio(r.confusion[k][k], r.support[k]);
    }
    r.image_accuracy = ratio(r.images_correct, r.images);
    r.block_accuracy = ratio(r.blocks_correct, r.blocks);
    r.predictions = std::move(predictions);
    return r;
}

EvalReport evaluate_features(const TrainedModel& model, const Dataset& test,
                             std::span<const FeatureStoreEntry> entries, std::size_t threads) {
    if (test.empty()) throw Error(ErrorCode::EmptyDataset, "test set is empty");
    std::map<std::string, const FeatureMatrix*> identity;
    for (const auto& e : entries)
        if (e.features.augmentation() == DihedralOp::identity()) identity.emplace(e.image_id, &e.features);
    std::vector<const FeatureMatrix*> inputs;
    for (const auto& item : test) {
        const auto it = identity.find(item.image_id);
        if (it == identity.end())
            throw Error(ErrorCode::MissingRecord, "no identity features for '" + item.image_id + "'");
        inputs.push_back(it->second);
    }
    std::vector<ImagePrediction> predictions(test.size());
    parallel_for(test.size(), threads,
                 [&](std::size_t i) { predictions[i] = predict_features(model, *inputs[i], test[i].image_id); });
    std::vector<int> truth;
    for (const auto& item : test) truth.push_back(scheme_index(item.label, model.scheme));
    return evaluate_predictions(std::move(predictions), truth, model.class_names(), echo_config(model.config));
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test, const FeatureSource& source,
                    std::size_t threads) {
    if (test.empty()) throw Error(ErrorCode::EmptyDataset, "test set is empty");
    const DihedralOp identity[] = {DihedralOp::identity()};
    const auto entries = collect_features(test, source, identity, threads);
    return evaluate_features(model, test, entries, threads);
}

ConfigEcho echo_config(const PipelineConfig& cfg) {
    ConfigEcho echo;
    for (const auto& line : detail::split(format_config(cfg), '\n')) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        echo.emplace_back(std::string(detail::trim(std::string_view(line).substr(0, eq))),
                          std::string(detail::trim(std::string_view(line).substr(eq + 1))));
    }
    return echo;
}

std::string format_report_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "metric,true_class,predicted_class,value\n";
    for (const auto& [key, value] : r.config_echo) os << "config." << key << ",,," << value << '\n';
    os << "images,,," << r.images << '\n';
    os << "image_accuracy,,," << fmt(r.image_accuracy) << '\n';
    os << "blocks,,," << r.blocks << '\n';
    os << "block_accuracy,,," << fmt(r.block_accuracy) << '\n';
    for (std::size_t t = 0; t < r.class_names.size(); ++t)
        for (std::size_t p = 0; p < r.class_names.size(); ++p)
            os << "confusion," << r.class_names[t] << ',' << r.class_names[p] << ',' << r.confusion[t][p] << '\n';
    for (std::size_t k = 0; k < r.class_names.size(); ++k) {
        os << "support," << r.class_names[k] << ",," << r.support[k] << '\n';
        os << "precision," << r.class_names[k] << ",," << fmt(r.precision[k]) << '\n';
        os << "recall," << r.class_names[k] << ",," << fmt(r.recall[k]) << '\n';
    }
    return os.str();
}

std::string format_report_text(const EvalReport& r) {
    std::ostringstream os;
    char buf[128];
    std::snprintf(buf, sizeof buf, "image accuracy: %.4f (%zu/%zu)\n", r.image_accuracy, r.images_correct,
                  r.images);
    os << buf;
    std::snprintf(buf, sizeof buf, "block accuracy: %.4f (%zu/%zu)\n", r.block_accuracy, r.blocks_correct,
                  r.blocks);
    os << buf;
    std::size_t width = 11;
    for (const auto& n : r.class_names) width = std::max(width, n.size() + 1);
    auto pad = [&](const std::string& s) { return s + std::string(width - std::min(width, s.size()), ' '); };
    os << "\nconfusion (rows: true, columns: predicted)\n" << pad("");
    for (const auto& n : r.class_names) os << pad(n);
    os << '\n';
    for (std::size_t t = 0; t < r.class_names.size(); ++t) {
        os << pad(r.class_names[t]);
        for (std::size_t p = 0; p < r.class_names.size(); ++p) os << pad(std::to_string(r.confusion[t][p]));
        os << '\n';
    }
    os << '\n' << pad("class") << pad("support") << pad("precision") << "recall\n";
    for (std::size_t k = 0; k < r.class_names.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.4f", r.precision[k]);
        os << pad(r.class_names[k]) << pad(std::to_string(r.support[k])) << pad(buf);
        std::snprintf(buf, sizeof buf, "%.4f", r.recall[k]);
        os << buf << '\n';
    }
    if (!r.config_echo.empty()) {
        os << "\nconfig\n";
        for (const auto& [key, value] : r.config_echo) os << "  " << key << " = " << value << '\n';
    }
    return os.str();
}

std::vector<SweepRow> sweep_block_size(const Dataset& dataset, const FeatureSetup& setup, const PipelineConfig& cfg,
                                       std::span<const int> k_values, std::span<const std::uint64_t> seeds,
                                       const SplitSpec& split_spec, std::size_t threads, Diagnostics* diag) {
    if (k_values.empty() || seeds.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs k values and seeds");
    validate(cfg);
    for (int k : k_values) {
        PipelineConfig probe = cfg;
        probe.block_size = k;
        validate(probe);
    }
    std::vector<SweepRow> rows;
    for (const std::uint64_t seed : seeds) {
        SplitSpec spec = split_spec;
        spec.seed = seed;
        const SplitFeatures sf = prepare_split(dataset, setup, cfg, spec, threads);

        // Configurations are independent; run them side by side and keep k order.
        std::vector<SweepRow> local(k_values.size());
        std::vector<Diagnostics> local_diag(k_values.size());
        const std::size_t outer = std::min(threads, k_values.size());
        const std::size_t inner = std::max<std::size_t>(1, threads / std::max<std::size_t>(1, outer));
        parallel_for(k_values.size(), outer, [&](std::size_t i) {
            PipelineConfig kcfg = cfg;
            kcfg.block_size = k_values[i];
            TrainSummary summary;
            const TrainedModel model =
                train_from_features(sf.parts.train, sf.train, kcfg, sf.target, inner, &local_diag[i], &summary);
            const EvalReport report = evaluate_features(model, sf.parts.validation, sf.test, inner);
            local[i] = {k_values[i], seed, report.image_accuracy, report.block_accuracy, sf.parts.train.size(),
                        sf.parts.validation.size(), summary.pca_dim};
        });
        for (std::size_t i = 0; i < local.size(); ++i) {
            if (diag != nullptr) diag->merge(local_diag[i]);
            rows.push_back(local[i]);
        }
    }
    return rows;
}

std::string format_sweep_csv(std::span<const SweepRow> rows) {
    std::ostringstream os;
    os << "k,seed,image_accuracy,block_accuracy,n_train,n_test,pca_dim\n";
    for (const auto& r : rows)
        os << r.k << ',' << r.seed << ',' << fmt(r.image_accuracy) << ',' << fmt(r.block_accuracy) << ','
           << r.n_train << ',' << r.n_test << ',' << r.pca_dim << '\n';
    return os.str();
}

std::string format_sweep_text(std::span<const SweepRow> rows) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%4s %20s %10s %10s %8s %7s %8s\n", "k", "seed", "image_acc", "block_acc",
                  "n_train", "n_test", "pca_dim");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%4d %20llu %10.4f %10.4f %8zu %7zu %8zu\n", r.k,
                      static_cast<unsigned long long>(r.seed), r.image_accuracy, r.block_accuracy, r.n_train,
                      r.n_test, r.pca_dim);
        os << buf;
    }
    return os.str();
}

GridSearchResult grid_search(const Dataset& dataset, const FeatureSetup& setup, const PipelineConfig& cfg,
                             std::span<const double> c_grid, std::span<const GammaPolicy> gamma_grid,
                             const SplitSpec& split_spec, std::size_t threads, Diagnostics* diag) {
    if (c_grid.empty() || gamma_grid.empty()) throw Error(ErrorCode::InvalidArgument, "grid search needs nonempty grids");
    validate(cfg);
    const SplitFeatures sf = prepare_split(dataset, setup, cfg, split_spec, threads);

    const std::size_t n = c_grid.size() * gamma_grid.size();
    std::vector<GridPoint> points(n);
    std::vector<Diagnostics> local_diag(n);
    const std::size_t outer = std::min(threads, n);
    const std::size_t inner = std::max<std::size_t>(1, threads / std::max<std::size_t>(1, outer));
    parallel_for(n, outer, [&](std::size_t i) {
        PipelineConfig pcfg = cfg;
        pcfg.svm_c = c_grid[i / gamma_grid.size()];
        pcfg.gamma = gamma_grid[i % gamma_grid.size()];
        validate(pcfg);
        TrainSummary summary;
        const TrainedModel model =
            train_from_features(sf.parts.train, sf.train, pcfg, sf.target, inner, &local_diag[i], &summary);
        const EvalReport report = evaluate_features(model, sf.parts.validation, sf.test, inner);
        points[i] = {pcfg.svm_c, pcfg.gamma, summary.gamma, report.image_accuracy, report.block_accuracy};
    });

    GridSearchResult result;
    result.seed = split_spec.seed;
    result.best = points.front();
    for (std::size_t i = 0; i < n; ++i) {
        if (diag != nullptr) diag->merge(local_diag[i]);
        const GridPoint& p = points[i];
        const GridPoint& b = result.best;
        const bool better = p.image_accuracy > b.image_accuracy ||
                            (p.image_accuracy == b.image_accuracy &&
                             (p.c < b.c || (p.c == b.c && p.gamma < b.gamma)));
        if (better) result.best = p;
    }
    result.points = std::move(points);
    return result;
}

std::vector<double> default_c_grid() { return {0.1, 1.0, 10.0, 100.0}; }

std::vector<GammaPolicy> default_gamma_grid() {
    return {GammaPolicy::scale(0.1), GammaPolicy::scale(1.0), GammaPolicy::scale(10.0)};
}

std::string format_grid_csv(const GridSearchResult& result) {
    std::ostringstream os;
    os << "C,gamma_policy,gamma,image_accuracy,block_accuracy,best\n";
    for (const auto& p : result.points) {
        const bool best = p.c == result.best.c && p.gamma_policy == result.best.gamma_policy;
        os << fmt(p.c) << ',' << format_gamma(p.gamma_policy) << ',' << fmt(p.gamma) << ','
           << fmt(p.image_accuracy) << ',' << fmt(p.block_accuracy) << ',' << (best ? 1 : 0) << '\n';
    }
    return os.str();
}

}  // namespace ctxpath
