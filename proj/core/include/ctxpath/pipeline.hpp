#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxpath/color.hpp"
#include "ctxpath/config.hpp"
#include "ctxpath/error.hpp"
#include "ctxpath/features.hpp"
#include "ctxpath/labels.hpp"
#include "ctxpath/pca.hpp"
#include "ctxpath/svm.hpp"

namespace ctxpath {

struct LabeledImage {
    std::string image_id;
    ClassLabel label = ClassLabel::Normal;

    friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

using Dataset = std::vector<LabeledImage>;

struct TrainedModel {
    static constexpr int kFormatVersion = 1;

    PipelineConfig config;
    LabelScheme scheme = LabelScheme::FourClass;
    ChannelStats target;  // normalization target applied before baseline extraction
    std::size_t feature_dim = 0;
    PcaModel pca;
    MulticlassSvm svm;

    std::vector<std::string> class_names() const { return ctxpath::class_names(scheme); }

    friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

// Labels are indices into the model's class_names().
struct BlockResult {
    GridPos anchor;
    int label = 0;
    std::vector<double> scores;
};

struct VoteOutcome {
    int label = 0;
    std::vector<int> tally;
    std::vector<double> score_sums;
};

struct ImagePrediction {
    std::string image_id;
    std::vector<BlockResult> blocks;
    int label = 0;
    std::vector<int> tally;
    std::vector<double> score_sums;
};

/// Plurality of block labels; ties go to the larger summed per-class score,
/// then to the earlier class. Independent of block order.
VoteOutcome majority_vote(std::span<const BlockResult> blocks, std::size_t class_count);

// Block vectors for PCA/SVM, ordered by (image_id, augmentation, anchor).
struct BlockSamples {
    Matrix x;
    std::vector<int> labels;
    std::vector<std::string> image_ids;

    std::size_t size() const noexcept { return labels.size(); }
};

BlockSamples build_block_samples(std::span<const FeatureStoreEntry> entries, const Dataset& dataset,
                                 int block_size, LabelScheme scheme);

/// Per (image, orientation) features in (image_id, augmentation id) order.
std::vector<FeatureStoreEntry> collect_features(const Dataset& dataset, const FeatureSource& source,
                                                std::span<const DihedralOp> ops, std::size_t threads = 1);

struct TrainSummary {
    std::size_t block_samples = 0;
    std::size_t pca_dim = 0;
    double gamma = 0.0;
    std::vector<std::size_t> support_vectors;  // per pair machine
    double train_image_accuracy = 0.0;         // identity orientation
    double train_block_accuracy = 0.0;
};

TrainedModel train_from_features(const Dataset& dataset, std::span<const FeatureStoreEntry> entries,
                                 const PipelineConfig& cfg, const ChannelStats& target,
                                 std::size_t threads = 1, Diagnostics* diag = nullptr,
                                 TrainSummary* summary = nullptr);

TrainedModel train(const Dataset& dataset, const FeatureSource& source, const PipelineConfig& cfg,
                   const ChannelStats& target, std::size_t threads = 1, Diagnostics* diag = nullptr,
                   TrainSummary* summary = nullptr);

ImagePrediction predict_features(const TrainedModel& model, const FeatureMatrix& features,
                                 std::string image_id = {});

/// Baseline models only: normalizes with the stored target, identity orientation.
ImagePrediction predict(const TrainedModel& model, const ImageRGB& image, std::string image_id = {});

// How features are produced for an experiment: baseline extraction over
// loaded images, or records from a CTXF store.
struct FeatureSetup {
    ExtractorKind kind = ExtractorKind::Baseline;
    ImageLoader loader;
    std::optional<ChannelStats> target;  // baseline; averaged over training images when empty
    std::shared_ptr<const StoreFeatureSource> store;
};

/// Element-wise mean of the per-image stats of `images` (identity orientation).
ChannelStats average_stats(const Dataset& images, const ImageLoader& loader, ColorSpace space);

ChannelStats resolve_target(const FeatureSetup& setup, const Dataset& train, ColorSpace space);

std::shared_ptr<const FeatureSource> make_feature_source(const FeatureSetup& setup, const PipelineConfig& cfg,
                                                   const ChannelStats& target);

/// Feature source matching a trained model (baseline models get the model's target).
std::shared_ptr<const FeatureSource> make_feature_source(const FeatureSetup& setup, const TrainedModel& model);

// Prediction CSV: image_id,label,block_labels,votes
//   block_labels: ';'-separated labels in block order
//   votes: ';'-separated name=count over all classes in class order
std::string format_predictions_csv(std::span<const ImagePrediction> predictions,
                                   const std::vector<std::string>& class_names);

// Model document (JSON, versioned). Reload reproduces every value exactly.
std::string serialize_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace ctxpath
