#include "ctxpath/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "ctxpath/parallel.hpp"

namespace ctxpath {

namespace {

LabelScheme scheme_of(const PipelineConfig& cfg) {
    return cfg.two_class ? LabelScheme::TwoClass : LabelScheme::FourClass;
}

std::vector<ContextBlock> blocks_or_too_small(int rows, int cols, int k, const std::string& image_id) {
    try {
        return enumerate_blocks(rows, cols, k);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::BlockTooLarge) throw;
        throw Error(ErrorCode::ImageTooSmall, "image '" + image_id + "' has a " + std::to_string(rows) + "x" +
                                                  std::to_string(cols) + " patch grid, too small for " +
                                                  std::to_string(k) + "x" + std::to_string(k) + " blocks");
    }
}

std::map<std::string, ClassLabel> label_map(const Dataset& dataset) {
    std::map<std::string, ClassLabel> labels;
    for (const auto& item : dataset)
        if (!labels.emplace(item.image_id, item.label).second)
            throw Error(ErrorCode::DuplicateKey, "image id '" + item.image_id + "' appears twice");
    return labels;
}

}  // namespace

VoteOutcome majority_vote(std::span<const BlockResult> blocks, std::size_t class_count) {
    VoteOutcome out;
    out.tally.assign(class_count, 0);
    out.score_sums.assign(class_count, 0.0);
    // Per-class score sums are accumulated in a canonical block order so that
    // the floating-point result does not depend on the order blocks arrive in.
    std::vector<const BlockResult*> order;
    order.reserve(blocks.size());
    for (const auto& b : blocks) order.push_back(&b);
    std::sort(order.begin(), order.end(), [](const BlockResult* a, const BlockResult* b) {
        if (a->label != b->label) return a->label < b->label;
        return a->scores < b->scores;
    });
    for (const BlockResult* b : order) {
        if (b->label < 0 || static_cast<std::size_t>(b->label) >= class_count)
            throw Error(ErrorCode::InvalidArgument, "block label out of range");
        ++out.tally[static_cast<std::size_t>(b->label)];
        for (std::size_t c = 0; c < class_count && c < b->scores.size(); ++c) out.score_sums[c] += b->scores[c];
    }
    out.label = static_cast<int>(vote_winner(out.tally, out.score_sums));
    return out;
}

BlockSamples build_block_samples(std::span<const FeatureStoreEntry> entries, const Dataset& dataset,
                                 int block_size, LabelScheme scheme) {
    const auto labels = label_map(dataset);
    std::vector<const FeatureStoreEntry*> order;
    for (const auto& e : entries)
        if (labels.count(e.image_id)) order.push_back(&e);
    std::sort(order.begin(), order.end(), [](const FeatureStoreEntry* a, const FeatureStoreEntry* b) {
        if (a->image_id != b->image_id) return a->image_id < b->image_id;
        return a->features.augmentation().id() < b->features.augmentation().id();
    });

    BlockSamples samples;
    for (const FeatureStoreEntry* e : order) {
        const int label = scheme_index(labels.at(e->image_id), scheme);
        for (const auto& block : blocks_or_too_small(e->features.rows(), e->features.cols(), block_size, e->image_id)) {
            const FeatureVector v = assemble_block_features(e->features, block);
            if (samples.x.rows() == 0) samples.x = Matrix(0, v.size());
            samples.x.append_row(v);
            samples.labels.push_back(label);
            samples.image_ids.push_back(e->image_id);
        }
    }
    return samples;
}

std::vector<FeatureStoreEntry> collect_features(const Dataset& dataset, const FeatureSource& source,
                                                std::span<const DihedralOp> ops, std::size_t threads) {
    label_map(dataset);  // rejects duplicate ids
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return dataset[a].image_id < dataset[b].image_id; });
    std::vector<DihedralOp> sorted_ops(ops.begin(), ops.end());
    std::sort(sorted_ops.begin(), sorted_ops.end(),
              [](DihedralOp a, DihedralOp b) { return a.id() < b.id(); });

    std::vector<std::vector<FeatureMatrix>> per_image(order.size());
    parallel_for(order.size(), threads, [&](std::size_t i) {
        per_image[i] = source.features(dataset[order[i]].image_id, sorted_ops);
    });

    std::vector<FeatureStoreEntry> entries;
    entries.reserve(order.size() * sorted_ops.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        for (auto& fm : per_image[i]) entries.push_back({dataset[order[i]].image_id, std::move(fm)});
    return entries;
}

TrainedModel train_from_features(const Dataset& dataset, std::span<const FeatureStoreEntry> entries,
                                 const PipelineConfig& cfg, const ChannelStats& target, std::size_t threads,
                                 Diagnostics* diag, TrainSummary* summary) {
    validate(cfg);
    if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
    const LabelScheme scheme = scheme_of(cfg);
    const auto labels = label_map(dataset);

    std::set<int> classes;
    for (const auto& item : dataset) classes.insert(scheme_index(item.label, scheme));
    if (classes.size() < 2)
        throw Error(ErrorCode::SingleClassData, "training set contains a single class");

    // Keep the configured orientations only and require all of them per image.
    const std::set<int> wanted(cfg.augmentations.begin(), cfg.augmentations.end());
    std::vector<FeatureStoreEntry> used;
    std::map<std::string, std::set<int>> seen;
    std::size_t dim = 0;
    for (const auto& e : entries) {
        if (!labels.count(e.image_id) || !wanted.count(e.features.augmentation().id())) continue;
        if (used.empty()) dim = e.features.dim();
        else if (e.features.dim() != dim)
            throw Error(ErrorCode::DimMismatch, "feature records disagree on dimension");
        seen[e.image_id].insert(e.features.augmentation().id());
        used.push_back(e);
    }
    for (const auto& item : dataset)
        for (int aug : wanted)
            if (!seen[item.image_id].count(aug))
                throw Error(ErrorCode::MissingRecord, "no features for (" + item.image_id + ", augmentation " +
                                                          std::to_string(aug) + ")");

    const BlockSamples samples = build_block_samples(used, dataset, cfg.block_size, scheme);

    TrainedModel model;
    model.config = cfg;
    model.scheme = scheme;
    model.target = target;
    model.feature_dim = dim;
    model.pca = pca_fit(samples.x, cfg.pca, diag);
    if (model.pca.output_dim() == 0)
        throw Error(ErrorCode::DegenerateData, "block features have zero variance; nothing to classify");

    const Matrix reduced = pca_transform(model.pca, samples.x);
    SmoOptions smo;
    smo.C = cfg.svm_c;
    smo.tol = cfg.svm_tol;
    smo.max_passes = cfg.svm_max_passes;
    smo.kernel.gamma = cfg.gamma.kind == GammaPolicy::Kind::Fixed ? cfg.gamma.value
                                                                  : cfg.gamma.value * scale_gamma(reduced);
    model.svm = ovo_train(reduced, samples.labels, smo, threads, diag);

    if (summary != nullptr) {
        summary->block_samples = samples.size();
        summary->pca_dim = model.pca.output_dim();
        summary->gamma = smo.kernel.gamma;
        summary->support_vectors.clear();
        for (const auto& pm : model.svm.pairs) summary->support_vectors.push_back(pm.machine.support_count());
        std::size_t images = 0, images_ok = 0, blocks = 0, blocks_ok = 0;
        for (const auto& e : used) {
            if (e.features.augmentation() != DihedralOp::identity()) continue;
            const int truth = scheme_index(labels.at(e.image_id), scheme);
            const ImagePrediction p = predict_features(model, e.features, e.image_id);
            ++images;
            images_ok += p.label == truth;
            for (const auto& b : p.blocks) {
                ++blocks;
                blocks_ok += b.label == truth;
            }
        }
        summary->train_image_accuracy = images ? static_cast<double>(images_ok) / static_cast<double>(images) : 0.0;
        summary->train_block_accuracy = blocks ? static_cast<double>(blocks_ok) / static_cast<double>(blocks) : 0.0;
    }
    return model;
}

TrainedModel train(const Dataset& dataset, const FeatureSource& source, const PipelineConfig& cfg,
                   const ChannelStats& target, std::size_t threads, Diagnostics* diag, TrainSummary* summary) {
    validate(cfg);
    if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
    const auto ops = cfg.augmentation_ops();
    const auto entries = collect_features(dataset, source, ops, threads);
    return train_from_features(dataset, entries, cfg, target, threads, diag, summary);
}

ImagePrediction predict_features(const TrainedModel& model, const FeatureMatrix& features, std::string image_id) {
    if (features.dim() != model.feature_dim)
        throw Error(ErrorCode::DimMismatch, "features have dim " + std::to_string(features.dim()) +
                                                ", model expects " + std::to_string(model.feature_dim));
    const std::size_t class_count = class_names(model.scheme).size();
    ImagePrediction out;
    out.image_id = std::move(image_id);
    for (const auto& block :
         blocks_or_too_small(features.rows(), features.cols(), model.config.block_size, out.image_id)) {
        const auto z = pca_transform(model.pca, assemble_block_features(features, block));
        const OvoPrediction p = ovo_predict(model.svm, z);
        BlockResult r;
        r.anchor = block.anchor;
        r.label = p.label;
        r.scores.assign(class_count, 0.0);
        for (std::size_t c = 0; c < model.svm.classes.size(); ++c)
            r.scores[static_cast<std::size_t>(model.svm.classes[c])] = p.scores[c];
        out.blocks.push_back(std::move(r));
    }
    const VoteOutcome vote = majority_vote(out.blocks, class_count);
    out.label = vote.label;
    out.tally = vote.tally;
    out.score_sums = vote.score_sums;
    return out;
}

ImagePrediction predict(const TrainedModel& model, const ImageRGB& image, std::string image_id) {
    if (model.config.extractor != ExtractorKind::Baseline)
        throw Error(ErrorCode::InvalidArgument, "model was trained on stored features; predict from a feature store");
    const int p = model.config.patch_size;
    if (image.width() < p || image.height() < p)
        throw Error(ErrorCode::ImageTooSmall, "image '" + image_id + "' is smaller than one " +
                                                  std::to_string(p) + " px patch");
    const BaselineFeatureSource source({}, {p, model.config.effective_stride(), model.config.space, model.target});
    const DihedralOp identity[] = {DihedralOp::identity()};
    return predict_features(model, source.features_of(image, identity).front(), std::move(image_id));
}

ChannelStats average_stats(const Dataset& images, const ImageLoader& loader, ColorSpace space) {
    if (images.empty()) throw Error(ErrorCode::EmptyDataset, "cannot average stats over zero images");
    std::vector<const LabeledImage*> order;
    for (const auto& item : images) order.push_back(&item);
    std::sort(order.begin(), order.end(),
              [](const LabeledImage* a, const LabeledImage* b) { return a->image_id < b->image_id; });
    ChannelStats avg;
    avg.space = space;
    for (const LabeledImage* item : order) {
        const ChannelStats s = compute_stats(rgb_to_space(loader(item->image_id), space));
        for (int c = 0; c < 3; ++c) {
            avg.mean[c] += s.mean[c];
            avg.std[c] += s.std[c];
        }
    }
    const double n = static_cast<double>(order.size());
    for (int c = 0; c < 3; ++c) {
        avg.mean[c] /= n;
        avg.std[c] /= n;
    }
    return avg;
}

ChannelStats resolve_target(const FeatureSetup& setup, const Dataset& train, ColorSpace space) {
    if (setup.kind == ExtractorKind::Store) {
        ChannelStats neutral;
        neutral.space = space;
        return neutral;
    }
    if (setup.target) {
        if (setup.target->space != space)
            throw Error(ErrorCode::ConfigError, "normalization target is in " +
                                                    std::string(to_string(setup.target->space)) +
                                                    " but the pipeline uses " + std::string(to_string(space)));
        return *setup.target;
    }
    return average_stats(train, setup.loader, space);
}

std::shared_ptr<const FeatureSource> make_feature_source(const FeatureSetup& setup, const PipelineConfig& cfg,
                                                         const ChannelStats& target) {
    if (setup.kind == ExtractorKind::Store) {
        if (!setup.store) throw Error(ErrorCode::InvalidArgument, "store extractor selected without a feature store");
        return setup.store;
    }
    if (!setup.loader) throw Error(ErrorCode::InvalidArgument, "baseline extractor needs an image loader");
    return std::make_shared<BaselineFeatureSource>(
        setup.loader, BaselineOptions{cfg.patch_size, cfg.effective_stride(), cfg.space, target});
}

std::shared_ptr<const FeatureSource> make_feature_source(const FeatureSetup& setup, const TrainedModel& model) {
    return make_feature_source(setup, model.config, model.target);
}

std::string format_predictions_csv(std::span<const ImagePrediction> predictions,
                                   const std::vector<std::string>& class_names) {
    std::ostringstream os;
    os << "image_id,label,block_labels,votes\n";
    for (const auto& p : predictions) {
        os << p.image_id << ',' << class_names.at(static_cast<std::size_t>(p.label)) << ',';
        for (std::size_t b = 0; b < p.blocks.size(); ++b)
            os << (b ? ";" : "") << class_names.at(static_cast<std::size_t>(p.blocks[b].label));
        os << ',';
        for (std::size_t c = 0; c < class_names.size(); ++c)
            os << (c ? ";" : "") << class_names[c] << '=' << (c < p.tally.size() ? p.tally[c] : 0);
        os << '\n';
    }
    return os.str();
}

}  // namespace ctxpath
