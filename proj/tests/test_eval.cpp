#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "ctxpath/eval.hpp"
#include "ctxpath/synthetic.hpp"
#include "support/test_support.hpp"

using namespace ctxpath;
using test_support::error_code_of;

namespace {

Dataset balanced(int per_class) {
    Dataset ds;
    const ClassLabel all[] = {ClassLabel::Normal, ClassLabel::Benign, ClassLabel::InSitu, ClassLabel::Invasive};
    for (int i = 0; i < per_class; ++i)
        for (const ClassLabel l : all) ds.push_back({"img" + std::to_string(ds.size()), l});
    return ds;
}

std::map<ClassLabel, int> class_counts(const Dataset& ds) {
    std::map<ClassLabel, int> out;
    for (const auto& item : ds) ++out[item.label];
    return out;
}

ImagePrediction pred(int label, std::vector<int> block_labels = {}) {
    ImagePrediction p;
    p.label = label;
    for (int b : block_labels) {
        BlockResult r;
        r.label = b;
        p.blocks.push_back(r);
    }
    return p;
}

struct ContextFixture {
    std::vector<synthetic::SyntheticImage> images;
    Dataset dataset;
    FeatureSetup setup;
    PipelineConfig cfg;

    explicit ContextFixture(int per_class) {
        synthetic::ContextSpec spec;
        spec.per_class = per_class;
        spec.patch_size = 32;
        images = synthetic::context_corpus(spec);
        dataset = synthetic::dataset_of(images);
        setup.loader = synthetic::memory_loader(images);
        cfg.patch_size = 32;
        cfg.augmentations = {0};
    }
};

}  // namespace

TEST_CASE("stratified split of eight images") {
    const Dataset ds = balanced(2);
    const DatasetSplit s = split(ds, {0.75, 3, true});
    CHECK(s.train.size() == 4);
    CHECK(s.validation.size() == 4);
    for (const auto& [label, n] : class_counts(s.train)) CHECK(n == 1);
    for (const auto& [label, n] : class_counts(s.validation)) CHECK(n == 1);
}

TEST_CASE("split properties") {
    const Dataset ds = balanced(100);
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
        const DatasetSplit s = split(ds, {0.75, seed, true});
        CHECK(s.train.size() == 300);
        CHECK(s.validation.size() == 100);
        for (const auto& [label, n] : class_counts(s.train)) CHECK(n == 75);

        std::set<std::string> seen;
        for (const auto& i : s.train) seen.insert(i.image_id);
        for (const auto& i : s.validation) CHECK(seen.insert(i.image_id).second);
        CHECK(seen.size() == ds.size());

        // dataset order within each side
        auto index_of = [&](const std::string& id) {
            return std::find_if(ds.begin(), ds.end(), [&](const auto& x) { return x.image_id == id; }) - ds.begin();
        };
        for (std::size_t i = 1; i < s.train.size(); ++i) CHECK(index_of(s.train[i - 1].image_id) < index_of(s.train[i].image_id));

        const DatasetSplit again = split(ds, {0.75, seed, true});
        CHECK(again.train == s.train);
        CHECK(again.validation == s.validation);
    }
    CHECK(split(ds, {0.75, 1, true}).train != split(ds, {0.75, 2, true}).train);

    const DatasetSplit plain = split(ds, {0.5, 4, false});
    CHECK(plain.train.size() == 200);
    CHECK(plain.validation.size() == 200);
}

TEST_CASE("split errors") {
    Dataset ds = balanced(2);
    ds.push_back({"lonely", ClassLabel::Normal});
    ds.erase(std::remove_if(ds.begin(), ds.end(), [](const auto& i) { return i.label == ClassLabel::Benign && i.image_id != "img1"; }), ds.end());
    CHECK(error_code_of([&] { split(ds, {}); }) == ErrorCode::TooFewSamples);
    CHECK(error_code_of([] { split(balanced(2), {0.0, 0, true}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { split(balanced(2), {1.0, 0, true}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("report from predictions") {
    const auto names = class_names(LabelScheme::FourClass);
    SUBCASE("all correct") {
        std::vector<ImagePrediction> preds;
        std::vector<int> truth;
        for (int c = 0; c < 4; ++c)
            for (int i = 0; i < 2; ++i) {
                preds.push_back(pred(c, {c, c}));
                truth.push_back(c);
            }
        const EvalReport r = evaluate_predictions(preds, truth, names);
        CHECK(r.image_accuracy == 1.0);
        CHECK(r.block_accuracy == 1.0);
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t p = 0; p < 4; ++p) CHECK(r.confusion[t][p] == (t == p ? 2u : 0u));
        for (double v : r.precision) CHECK(v == 1.0);
        for (double v : r.recall) CHECK(v == 1.0);
    }
    SUBCASE("all wrong") {
        std::vector<ImagePrediction> preds;
        std::vector<int> truth;
        for (int c = 0; c < 4; ++c) {
            preds.push_back(pred((c + 1) % 4, {(c + 1) % 4}));
            truth.push_back(c);
        }
        const EvalReport r = evaluate_predictions(preds, truth, names);
        CHECK(r.image_accuracy == 0.0);
        CHECK(r.images_correct == 0);
    }
    SUBCASE("hand-tallied confusion matrix") {
        // truth:  0 0 0 1 1 1 2 2 3 3
        // pred:   0 0 1 1 1 2 2 0 3 3
        const std::vector<int> truth{0, 0, 0, 1, 1, 1, 2, 2, 3, 3};
        const std::vector<int> labels{0, 0, 1, 1, 1, 2, 2, 0, 3, 3};
        std::vector<ImagePrediction> preds;
        for (std::size_t i = 0; i < truth.size(); ++i)
            preds.push_back(pred(labels[i], {labels[i], truth[i], truth[i]}));
        const EvalReport r = evaluate_predictions(preds, truth, names, {{"block_size", "2"}});
        const std::vector<std::vector<std::size_t>> expected{{2, 1, 0, 0}, {0, 2, 1, 0}, {1, 0, 1, 0}, {0, 0, 0, 2}};
        CHECK(r.confusion == expected);
        CHECK(r.images == 10);
        CHECK(r.images_correct == 7);
        CHECK(r.image_accuracy == doctest::Approx(0.7));
        std::size_t trace = 0, total = 0;
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t p = 0; p < 4; ++p) {
                total += r.confusion[t][p];
                if (t == p) trace += r.confusion[t][p];
            }
        CHECK(static_cast<double>(trace) / static_cast<double>(total) == r.image_accuracy);
        CHECK(r.precision[0] == doctest::Approx(2.0 / 3.0));
        CHECK(r.recall[0] == doctest::Approx(2.0 / 3.0));
        CHECK(r.precision[2] == doctest::Approx(0.5));
        CHECK(r.recall[2] == doctest::Approx(0.5));
        CHECK(r.support == std::vector<std::size_t>{3, 3, 2, 2});
        CHECK(r.blocks == 30);
        CHECK(r.blocks_correct == 27);

        const std::string csv = format_report_csv(r);
        CHECK(csv.starts_with("metric,true_class,predicted_class,value\n"));
        CHECK(csv.find("config.block_size,,,2\n") != std::string::npos);
        CHECK(csv.find("image_accuracy,,,0.69999999999999996\n") != std::string::npos);
        CHECK(csv.find("confusion,normal,benign,1\n") != std::string::npos);
        CHECK(csv.find("confusion,insitu,normal,1\n") != std::string::npos);
        const std::string text = format_report_text(r);
        CHECK(text.find("image accuracy: 0.7000 (7/10)") != std::string::npos);
    }
    SUBCASE("class never predicted has zero precision") {
        const EvalReport r = evaluate_predictions({pred(0), pred(0)}, std::vector<int>{0, 1}, names);
        CHECK(r.precision[1] == 0.0);
        CHECK(r.recall[1] == 0.0);
        CHECK(r.recall[2] == 0.0);
    }
    SUBCASE("errors") {
        CHECK(error_code_of([&] { evaluate_predictions({}, std::vector<int>{}, names); }) == ErrorCode::EmptyDataset);
        CHECK(error_code_of([&] { evaluate_predictions({pred(0)}, std::vector<int>{0, 1}, names); }) ==
              ErrorCode::InvalidArgument);
        CHECK(error_code_of([&] { evaluate_predictions({pred(0)}, std::vector<int>{7}, names); }) ==
              ErrorCode::InvalidArgument);
    }
}

TEST_CASE("config echo") {
    const ConfigEcho echo = echo_config(PipelineConfig{});
    REQUIRE(!echo.empty());
    CHECK(echo.front() == std::pair<std::string, std::string>{"colorspace", "lalphabeta"});
    CHECK(std::find(echo.begin(), echo.end(), std::pair<std::string, std::string>{"block_size", "2"}) != echo.end());
}

TEST_CASE("evaluate a trained model") {
    ContextFixture f(4);
    const DatasetSplit s = split(f.dataset, {0.5, 1, true});
    const ChannelStats target = resolve_target(f.setup, s.train, f.cfg.space);
    const auto source = make_feature_source(f.setup, f.cfg, target);
    const TrainedModel model = train(s.train, *source, f.cfg, target);
    const EvalReport a = evaluate(model, s.validation, *source);
    const EvalReport b = evaluate(model, s.validation, *source, 3);
    CHECK(a.images == s.validation.size());
    CHECK(a.confusion == b.confusion);
    CHECK(a.blocks == 6 * a.images);
    CHECK(error_code_of([&] { evaluate(model, Dataset{}, *source); }) == ErrorCode::EmptyDataset);

    const auto entries = collect_features(s.validation, *source, std::vector<DihedralOp>{DihedralOp::identity()});
    CHECK(evaluate_features(model, s.validation, entries).confusion == a.confusion);
    CHECK(error_code_of([&] { evaluate_features(model, s.validation, std::span<const FeatureStoreEntry>{}); }) ==
          ErrorCode::MissingRecord);
}

TEST_CASE("block size sweep") {
    ContextFixture f(4);
    const std::vector<int> one{1};
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto single = sweep_block_size(f.dataset, f.setup, f.cfg, one, std::vector<std::uint64_t>{1}, {0.5, 0, true});
    REQUIRE(single.size() == 1);
    CHECK(single[0].k == 1);
    CHECK(single[0].seed == 1);
    CHECK(single[0].n_train + single[0].n_test == f.dataset.size());

    const std::vector<int> ks{1, 2};
    const auto rows = sweep_block_size(f.dataset, f.setup, f.cfg, ks, seeds, {0.5, 0, true});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].seed == 1);
    CHECK(rows[0].k == 1);
    CHECK(rows[1].seed == 1);
    CHECK(rows[1].k == 2);
    CHECK(rows[2].seed == 2);
    CHECK(rows[0].n_test == rows[1].n_test);
    CHECK(rows[0].image_accuracy == single[0].image_accuracy);
    CHECK(sweep_block_size(f.dataset, f.setup, f.cfg, ks, seeds, {0.5, 0, true}, 2).size() == 4);

    const std::string csv = format_sweep_csv(rows);
    CHECK(csv.starts_with("k,seed,image_accuracy,block_accuracy,n_train,n_test,pca_dim\n"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(!format_sweep_text(rows).empty());

    const std::vector<int> too_big{1, 9};
    CHECK(error_code_of([&] { sweep_block_size(f.dataset, f.setup, f.cfg, too_big, seeds, {0.5, 0, true}); }).has_value());
    CHECK(error_code_of([&] { sweep_block_size(f.dataset, f.setup, f.cfg, std::vector<int>{0}, seeds); }).has_value());
}

TEST_CASE("grid search") {
    ContextFixture f(3);
    const SplitSpec spec{0.5, 3, true};
    SUBCASE("singleton grid") {
        const std::vector<double> c{2.0};
        const std::vector<GammaPolicy> g{GammaPolicy::fixed(0.01)};
        const GridSearchResult r = grid_search(f.dataset, f.setup, f.cfg, c, g, spec);
        REQUIRE(r.points.size() == 1);
        CHECK(r.best.c == 2.0);
        CHECK(r.best.gamma == 0.01);
        CHECK(r.seed == 3);
    }
    SUBCASE("best is the brute-force maximum with the documented tie-break") {
        const std::vector<double> c{0.1, 1.0, 10.0};
        const std::vector<GammaPolicy> g{GammaPolicy::scale(0.1), GammaPolicy::scale(), GammaPolicy::scale(10)};
        const GridSearchResult r = grid_search(f.dataset, f.setup, f.cfg, c, g, spec);
        REQUIRE(r.points.size() == 9);
        CHECK(r.points[1].c == 0.1);
        CHECK(r.points[3].c == 1.0);
        const GridPoint* best = &r.points[0];
        for (const auto& p : r.points) {
            const bool better = p.image_accuracy > best->image_accuracy ||
                                (p.image_accuracy == best->image_accuracy &&
                                 (p.c < best->c || (p.c == best->c && p.gamma < best->gamma)));
            if (better) best = &p;
        }
        CHECK(r.best.c == best->c);
        CHECK(r.best.gamma == best->gamma);
        CHECK(r.best.image_accuracy == best->image_accuracy);

        const GridSearchResult again = grid_search(f.dataset, f.setup, f.cfg, c, g, spec, 2);
        for (std::size_t i = 0; i < 9; ++i) {
            CHECK(again.points[i].image_accuracy == r.points[i].image_accuracy);
            CHECK(again.points[i].gamma == r.points[i].gamma);
        }
        const std::string csv = format_grid_csv(r);
        CHECK(csv.starts_with("C,gamma_policy,gamma,image_accuracy,block_accuracy,best\n"));
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
    }
    CHECK(default_c_grid() == std::vector<double>{0.1, 1.0, 10.0, 100.0});
    CHECK(default_gamma_grid().size() == 3);
    CHECK(error_code_of([&] { grid_search(f.dataset, f.setup, f.cfg, std::vector<double>{}, default_gamma_grid(), spec); })
              .has_value());
}
