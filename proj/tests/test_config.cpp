#include <doctest.h>

#include <set>

#include "ctxpath/config.hpp"
#include "ctxpath/labels.hpp"
#include "ctxpath/manifest.hpp"
#include "support/test_support.hpp"

using namespace ctxpath;
using test_support::error_code_of;

TEST_CASE("default config") {
    const PipelineConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    CHECK(cfg.effective_stride() == 512);
    CHECK(cfg.augmentation_ops().size() == 8);
    CHECK(cfg.augmentation_ops()[5] == DihedralOp(5));
}

TEST_CASE("gamma policy text") {
    CHECK(parse_gamma("scale") == GammaPolicy::scale());
    CHECK(parse_gamma("scale*0.1") == GammaPolicy::scale(0.1));
    CHECK(parse_gamma("0.25") == GammaPolicy::fixed(0.25));
    CHECK(format_gamma(GammaPolicy::scale()) == "scale");
    for (const auto& g : {GammaPolicy::scale(0.1), GammaPolicy::scale(10), GammaPolicy::fixed(0.125),
                          GammaPolicy::fixed(3e-5)})
        CHECK(parse_gamma(format_gamma(g)) == g);
    for (const char* bad : {"", "scale*", "scale*-1", "-2", "0", "abc", "scale*x"})
        CHECK(error_code_of([&] { parse_gamma(bad); }) == ErrorCode::ConfigError);
}

TEST_CASE("augmentation sets") {
    CHECK(parse_augmentations("all") == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(parse_augmentations("none") == std::vector<int>{0});
    CHECK(parse_augmentations("0,1,5") == std::vector<int>{0, 1, 5});
    CHECK(parse_augmentations(format_augmentations({0, 3, 6})) == std::vector<int>{0, 3, 6});
    CHECK(error_code_of([] { parse_augmentations("0,9"); }) == ErrorCode::ConfigError);
    CHECK(error_code_of([] { parse_augmentations("x"); }) == ErrorCode::ConfigError);

    PipelineConfig cfg;
    cfg.augmentations = {1, 2};
    CHECK(error_code_of([&] { validate(cfg); }) == ErrorCode::ConfigError);
    cfg.augmentations = {0, 0};
    CHECK(error_code_of([&] { validate(cfg); }) == ErrorCode::ConfigError);
}

TEST_CASE("settings and config files") {
    PipelineConfig cfg;
    apply_setting(cfg, "colorspace", "lab");
    apply_setting(cfg, "patch_size", "256");
    apply_setting(cfg, "stride", "128");
    apply_setting(cfg, "block_size", "3");
    apply_setting(cfg, "pca_components", "12");
    apply_setting(cfg, "svm_c", "10");
    apply_setting(cfg, "svm_gamma", "scale*0.1");
    apply_setting(cfg, "svm_tol", "0.0001");
    apply_setting(cfg, "svm_max_passes", "50");
    apply_setting(cfg, "augment", "none");
    apply_setting(cfg, "extractor", "store");
    apply_setting(cfg, "two_class", "true");
    CHECK(cfg.space == ColorSpace::CieLab);
    CHECK(cfg.patch_size == 256);
    CHECK(cfg.effective_stride() == 128);
    CHECK(cfg.block_size == 3);
    CHECK(cfg.pca == PcaTarget::fixed(12));
    CHECK(cfg.svm_c == 10.0);
    CHECK(cfg.gamma == GammaPolicy::scale(0.1));
    CHECK(cfg.svm_tol == 1e-4);
    CHECK(cfg.svm_max_passes == 50);
    CHECK(cfg.augmentations == std::vector<int>{0});
    CHECK(cfg.extractor == ExtractorKind::Store);
    CHECK(cfg.two_class);

    CHECK(parse_config(format_config(cfg)) == cfg);
    const PipelineConfig defaults;
    CHECK(parse_config(format_config(defaults)) == defaults);

    const PipelineConfig from_text = parse_config("# comment\n\n block_size = 1 \nsvm_c=0.5 # trailing\n");
    CHECK(from_text.block_size == 1);
    CHECK(from_text.svm_c == 0.5);
    CHECK(from_text.patch_size == 512);

    CHECK(error_code_of([] { parse_config("nonsense"); }) == ErrorCode::ConfigError);
    CHECK(error_code_of([] { parse_config("bogus_key=1"); }) == ErrorCode::ConfigError);
    CHECK(error_code_of([] { parse_config("patch_size=abc"); }) == ErrorCode::ConfigError);
    CHECK(error_code_of([] { parse_config("colorspace=hsv"); }).has_value());
    CHECK(error_code_of([] { read_config_file("/nonexistent/cfg.txt"); }) == ErrorCode::IoFailure);

    test_support::TempDir dir;
    test_support::write_text(dir / "c.cfg", "patch_size=64\n");
    CHECK(read_config_file(dir / "c.cfg").patch_size == 64);
}

TEST_CASE("validation rejects out-of-range values") {
    auto rejects = [](auto mutate) {
        PipelineConfig cfg;
        mutate(cfg);
        return error_code_of([&] { validate(cfg); }) == ErrorCode::ConfigError;
    };
    CHECK(rejects([](PipelineConfig& c) { c.patch_size = 0; }));
    CHECK(rejects([](PipelineConfig& c) { c.stride = -1; }));
    CHECK(rejects([](PipelineConfig& c) { c.block_size = 0; }));
    CHECK(rejects([](PipelineConfig& c) { c.svm_c = 0.0; }));
    CHECK(rejects([](PipelineConfig& c) { c.gamma = GammaPolicy::fixed(-1.0); }));
    CHECK(rejects([](PipelineConfig& c) { c.svm_tol = 0.0; }));
    CHECK(rejects([](PipelineConfig& c) { c.pca = PcaTarget::variance(1.5); }));
    CHECK(rejects([](PipelineConfig& c) { c.pca = PcaTarget::variance(0.0); }));
}

TEST_CASE("class labels") {
    const std::vector<ClassLabel> all{ClassLabel::Normal, ClassLabel::Benign, ClassLabel::InSitu,
                                      ClassLabel::Invasive};
    for (const ClassLabel l : all) CHECK(parse_class_label(to_string(l)) == l);
    CHECK(error_code_of([] { parse_class_label("Normal"); }) == ErrorCode::SchemaViolation);

    CHECK(to_two_class(ClassLabel::Normal) == BinaryLabel::NonCarcinoma);
    CHECK(to_two_class(ClassLabel::Benign) == BinaryLabel::NonCarcinoma);
    CHECK(to_two_class(ClassLabel::InSitu) == BinaryLabel::Carcinoma);
    CHECK(to_two_class(ClassLabel::Invasive) == BinaryLabel::Carcinoma);
    std::set<BinaryLabel> image;
    for (const ClassLabel l : all) image.insert(to_two_class(l));
    CHECK(image.size() == 2);

    CHECK(class_names(LabelScheme::FourClass) == std::vector<std::string>{"normal", "benign", "insitu", "invasive"});
    CHECK(class_names(LabelScheme::TwoClass) == std::vector<std::string>{"noncarcinoma", "carcinoma"});
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(scheme_index(all[i], LabelScheme::FourClass) == static_cast<int>(i));
        CHECK(class_names(LabelScheme::TwoClass)[static_cast<std::size_t>(scheme_index(all[i], LabelScheme::TwoClass))] ==
              to_string(to_two_class(all[i])));
    }
    CHECK(parse_label_scheme(to_string(LabelScheme::TwoClass)) == LabelScheme::TwoClass);
}

TEST_CASE("manifest parsing") {
    const auto m = parse_manifest("image_id,path,label\na,img/a.png,normal\n\nb,/abs/b.tif,invasive\n", "/data");
    REQUIRE(m.records().size() == 2);
    CHECK(m.records()[0].path == std::filesystem::path("/data/img/a.png"));
    CHECK(m.records()[1].path == std::filesystem::path("/abs/b.tif"));
    CHECK(m.at("b").label == ClassLabel::Invasive);
    CHECK(error_code_of([&] { m.at("zzz"); }) == ErrorCode::MissingRecord);
    const Dataset ds = m.dataset();
    CHECK(ds == Dataset{{"a", ClassLabel::Normal}, {"b", ClassLabel::Invasive}});

    for (const char* bad : {"id,path,label\na,x.png,normal\n", "image_id,path,label\na,x.png\n",
                            "image_id,path,label\na,x.png,normal,extra\n", "image_id,path,label\n,x.png,normal\n",
                            "image_id,path,label\na,,normal\n", "image_id,path,label\na,x.png,tumor\n",
                            "image_id,path,label\na,x.png,normal\na,y.png,benign\n", ""})
        CHECK(error_code_of([&] { parse_manifest(bad, "/"); }) == ErrorCode::ManifestSchema);
}

TEST_CASE("manifest files") {
    test_support::TempDir dir;
    std::filesystem::create_directories(dir / "imgs");
    test_support::write_text(dir / "imgs/a.png", "x");
    const std::vector<ManifestRecord> recs{{"a", dir / "imgs/a.png", ClassLabel::Benign}};
    write_manifest(dir / "m.csv", recs);
    CHECK(test_support::read_text(dir / "m.csv") == "image_id,path,label\na,imgs/a.png,benign\n");
    const auto back = read_manifest(dir / "m.csv");
    CHECK(back.records()[0].path == dir / "imgs/a.png");
    CHECK(back.records()[0].label == ClassLabel::Benign);

    test_support::write_text(dir / "missing.csv", "image_id,path,label\nq,nope.png,normal\n");
    CHECK(error_code_of([&] { read_manifest(dir / "missing.csv"); }) == ErrorCode::IoFailure);
    CHECK_NOTHROW(read_manifest(dir / "missing.csv", false));
    CHECK(error_code_of([&] { read_manifest(dir / "absent.csv"); }) == ErrorCode::IoFailure);
}
