#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxpath/config.hpp"
#include "ctxpath/error.hpp"
#include "ctxpath/pipeline.hpp"

namespace ctxpath {

struct SplitSpec {
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct DatasetSplit {
    Dataset train;
    Dataset validation;
};

/// Seeded partition that keeps dataset order within each side. Stratified:
/// each class contributes round(fraction * n_c) images to train, clamped so
/// both sides get at least one. Throws TooFewSamples / InvalidArgument.
DatasetSplit split(const Dataset& dataset, const SplitSpec& spec);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

struct EvalReport {
    std::vector<std::string> class_names;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
    std::vector<double> precision;                    // 0 for classes never predicted
    std::vector<double> recall;                       // 0 for classes without support
    std::vector<std::size_t> support;
    std::size_t images = 0;
    std::size_t images_correct = 0;
    std::size_t blocks = 0;
    std::size_t blocks_correct = 0;
    double image_accuracy = 0.0;
    double block_accuracy = 0.0;
    ConfigEcho config_echo;
    std::vector<ImagePrediction> predictions;
};

/// Builds a report from predictions and true class indices (paired by position).
EvalReport evaluate_predictions(std::vector<ImagePrediction> predictions, std::span<const int> truth,
                                std::vector<std::string> class_names, ConfigEcho echo = {});

/// Identity-orientation evaluation over `test`. Throws EmptyDataset.
EvalReport evaluate(const TrainedModel& model, const Dataset& test, const FeatureSource& source,
                    std::size_t threads = 1);

/// Same, from precomputed per-image features (identity records are used).
EvalReport evaluate_features(const TrainedModel& model, const Dataset& test,
                             std::span<const FeatureStoreEntry> entries, std::size_t threads = 1);

ConfigEcho echo_config(const PipelineConfig& cfg);

// CSV columns metric,true_class,predicted_class,value.
std::string format_report_csv(const EvalReport& report);
std::string format_report_text(const EvalReport& report);

struct SweepRow {
    int k = 0;
    std::uint64_t seed = 0;
    double image_accuracy = 0.0;
    double block_accuracy = 0.0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t pca_dim = 0;
};

/// One model per (seed, k) on identical splits; rows ordered by seed then k.
/// Features are computed once per split and shared by every k.
std::vector<SweepRow> sweep_block_size(const Dataset& dataset, const FeatureSetup& setup, const PipelineConfig& cfg,
                                       std::span<const int> k_values, std::span<const std::uint64_t> seeds,
                                       const SplitSpec& split_spec = {}, std::size_t threads = 1,
                                       Diagnostics* diag = nullptr);

std::string format_sweep_csv(std::span<const SweepRow> rows);
std::string format_sweep_text(std::span<const SweepRow> rows);

struct GridPoint {
    double c = 0.0;
    GammaPolicy gamma_policy;
    double gamma = 0.0;  // resolved value
    double image_accuracy = 0.0;
    double block_accuracy = 0.0;
};

struct GridSearchResult {
    std::vector<GridPoint> points;  // C-major in grid order
    GridPoint best;
    std::uint64_t seed = 0;
};

/// Exhaustive search on one held-out split. Best = highest validation image
/// accuracy; ties go to the smaller C, then the smaller resolved gamma.
GridSearchResult grid_search(const Dataset& dataset, const FeatureSetup& setup, const PipelineConfig& cfg,
                             std::span<const double> c_grid, std::span<const GammaPolicy> gamma_grid,
                             const SplitSpec& split_spec = {}, std::size_t threads = 1,
                             Diagnostics* diag = nullptr);

std::vector<double> default_c_grid();
std::vector<GammaPolicy> default_gamma_grid();  // scale * {0.1, 1, 10}

std::string format_grid_csv(const GridSearchResult& result);

}  // namespace ctxpath
