// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ctxpath/color.hpp"
#include "ctxpath/eval.hpp"
#include "ctxpath/pca.hpp"
#include "ctxpath/pipeline.hpp"
#include "ctxpath/svm.hpp"
#include "ctxpath/synthetic.hpp"
#include "ctxpath/tiling.hpp"
#include "oracles/jacobi.hpp"
#include "oracles/svm_qp.hpp"
#include "support/test_support.hpp"

using namespace ctxpath;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

char buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- 1: SMO against the brute-force QP oracle -------------------------------

Outcome smo_oracle() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double cs[] = {0.1, 1.0, 10.0};
    const double gammas[] = {0.5, 1.0, 2.0};
    const int problems = 60;
    double worst_obj = 0.0;
    std::size_t mismatches = 0, compared = 0;
    for (int t = 0; t < problems; ++t) {
        const std::size_t n = 2 + rng() % 7, m = 1 + rng() % 4;
        Matrix x(n, m);
        for (auto& v : x.data()) v = u(rng);
        std::vector<int> y(n);
        for (auto& v : y) v = (rng() & 1) ? 1 : -1;
        // Both classes present: two distinct positions get fixed labels.
        const std::size_t pos = rng() % n, neg = (pos + 1 + rng() % (n - 1)) % n;
        y[pos] = 1;
        y[neg] = -1;
        SmoOptions o;
        o.C = cs[rng() % 3];
        o.kernel.gamma = gammas[rng() % 3];
        o.tol = 1e-9;
        o.max_passes = 100000;
        const BinarySvm model = smo_train(x, y, o);

        std::vector<std::vector<double>> rows;
        for (std::size_t r = 0; r < n; ++r) rows.emplace_back(x.row(r).begin(), x.row(r).end());
        const auto ref = oracle::solve_svm_dual(rows, y, o.C, o.kernel.gamma);
        worst_obj = std::max(worst_obj, std::abs(dual_objective(model) - ref.objective));

        std::vector<std::vector<double>> probes = rows;
        for (int p = 0; p < 50; ++p) {
            std::vector<double> q(m);
            for (auto& v : q) v = u(rng);
            probes.push_back(std::move(q));
        }
        for (const auto& q : probes) {
            const bool smo_pos = svm_decision(model, q) >= 0.0;
            const bool ref_pos = oracle::decision(ref, rows, y, o.kernel.gamma, q) >= 0.0;
            mismatches += smo_pos != ref_pos;
            ++compared;
        }
    }
    return {worst_obj <= 1e-6 && mismatches == 0,
            fmt("%d problems, max |dual gap| %.2e, prediction mismatches %zu/%zu", problems, worst_obj, mismatches,
                compared)};
}

// ---- 2: PCA against the Jacobi oracle ---------------------------------------

Outcome pca_oracle() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int matrices = 25;
    double worst_val = 0.0, worst_vec = 0.0, worst_ortho = 0.0;
    for (int t = 0; t < matrices; ++t) {
        const std::size_t n = 2 + rng() % 49, d = 1 + rng() % 20;
        Matrix x(n, d);
        // Column scales spread the spectrum so components are well separated.
        std::vector<double> scale(d);
        for (auto& s : scale) s = 0.2 + 2.0 * (u(rng) + 1.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) x(r, c) = u(rng) * scale[c];
        const std::size_t m = std::min(n - 1, d);
        const PcaModel model = pca_fit(x, PcaTarget::fixed(m));

        oracle::Dense rows(n, std::vector<double>(d));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) rows[r][c] = x(r, c);
        const auto ref = oracle::jacobi_eigen(oracle::covariance(rows));
        for (std::size_t k = 0; k < m; ++k) {
            worst_val = std::max(worst_val, std::abs(model.explained_variance[k] - ref.values[k]));
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) dot += model.components(k, j) * ref.vectors[k][j];
            const double sign = dot < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < d; ++j)
                worst_vec = std::max(worst_vec, std::abs(model.components(k, j) - sign * ref.vectors[k][j]));
            for (std::size_t l = 0; l < m; ++l) {
                double g = 0.0;
                for (std::size_t j = 0; j < d; ++j) g += model.components(k, j) * model.components(l, j);
                worst_ortho = std::max(worst_ortho, std::abs(g - (k == l ? 1.0 : 0.0)));
            }
        }
    }
    return {worst_val <= 1e-8 && worst_vec <= 1e-8 && worst_ortho <= 1e-8,
            fmt("%d matrices, max eigenvalue err %.2e, component err %.2e, orthonormality err %.2e", matrices,
                worst_val, worst_vec, worst_ortho)};
}

// ---- 3: stain normalization fidelity ----------------------------------------

bool clips(const ImageRGB& img) {
    for (const auto v : img.data())
        if (v == 0 || v == 255) return true;
    return false;
}

Outcome normalization_fidelity() {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_stat = 0.0;
    int images_done = 0, no_target = 0;
    for (const ColorSpace space : {ColorSpace::LAlphaBeta, ColorSpace::CieLab}) {
        for (int i = 0; i < 20; ++i) {
            const ImageRGB src = test_support::random_image(96, 64, rng(), 60, 200);
            const ChannelStats s = compute_stats(rgb_to_space(src, space));
            // In-gamut target: a mild transform of the source statistics whose
            // transferred image stays strictly inside the 8-bit range.
            bool found = false;
            for (int attempt = 0; attempt < 200 && !found; ++attempt) {
                ChannelStats target = s;
                for (int c = 0; c < 3; ++c) {
                    target.std[c] = s.std[c] * (0.8 + 0.4 * u(rng));
                    target.mean[c] = s.mean[c] + (u(rng) - 0.5) * 0.4 * s.std[c];
                }
                const ImageRGB out = reinhard_normalize(src, target, space);
                if (clips(out)) continue;
                found = true;
                const ChannelStats got = compute_stats(rgb_to_space(out, space));
                for (int c = 0; c < 3; ++c) {
                    worst_stat = std::max(worst_stat, std::abs(got.mean[c] - target.mean[c]));
                    worst_stat = std::max(worst_stat, std::abs(got.std[c] - target.std[c]));
                }
            }
            if (found) ++images_done;
            else ++no_target;
        }
    }

    // Exhaustive round trip over every 8-bit RGB triple.
    int worst_lab = 0, worst_lab_ab = 0;
    for (int r = 0; r < 256; ++r)
        for (int g = 0; g < 256; ++g)
            for (int b = 0; b < 256; ++b) {
                const Rgb8 p{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
                const Rgb8 q = lab_to_rgb(rgb_to_lab(p));
                const Rgb8 w = lalphabeta_to_rgb(rgb_to_lalphabeta(p));
                for (int c = 0; c < 3; ++c) {
                    worst_lab = std::max(worst_lab, std::abs(int(q[c]) - int(p[c])));
                    worst_lab_ab = std::max(worst_lab_ab, std::abs(int(w[c]) - int(p[c])));
                }
            }
    return {no_target == 0 && worst_stat <= 0.5 && worst_lab <= 1 && worst_lab_ab <= 1,
            fmt("%d image/space pairs, max stat err %.4f, round trip max err cielab %d lalphabeta %d", images_done,
                worst_stat, worst_lab, worst_lab_ab)};
}

// ---- 4: end-to-end four-class run -------------------------------------------

Outcome end_to_end() {
    synthetic::SignatureSpec train_spec;
    train_spec.per_class = 10;
    train_spec.seed = 11;
    train_spec.id_prefix = "train";
    synthetic::SignatureSpec test_spec = train_spec;
    test_spec.per_class = 5;
    test_spec.seed = 12;
    test_spec.id_prefix = "test";
    const auto train_images = synthetic::signature_corpus(train_spec);
    const auto test_images = synthetic::signature_corpus(test_spec);
    const Dataset train_set = synthetic::dataset_of(train_images);
    const Dataset test_set = synthetic::dataset_of(test_images);

    PipelineConfig cfg;
    cfg.patch_size = 256;
    cfg.block_size = 2;
    FeatureSetup setup;
    setup.loader = synthetic::memory_loader(train_images);
    const ChannelStats target = resolve_target(setup, train_set, cfg.space);
    TrainSummary summary;
    const TrainedModel model =
        train(train_set, *make_feature_source(setup, cfg, target), cfg, target, 1, nullptr, &summary);

    setup.loader = synthetic::memory_loader(test_images);
    const EvalReport report = evaluate(model, test_set, *make_feature_source(setup, model), 1);
    return {report.image_accuracy >= 0.95,
            fmt("train %zu / test %zu images, grid 4x3, pca dim %zu, test accuracy %.4f (%zu/%zu)", train_set.size(),
                test_set.size(), summary.pca_dim, report.image_accuracy, report.images_correct, report.images)};
}

// ---- 5: context trend ---------------------------------------------------------

Outcome context_trend() {
    synthetic::ContextSpec spec;
    spec.per_class = 20;
    const auto images = synthetic::context_corpus(spec);
    PipelineConfig cfg;
    cfg.patch_size = spec.patch_size;
    FeatureSetup setup;
    setup.loader = synthetic::memory_loader(images);
    const std::vector<int> ks{1, 2};
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const auto rows = sweep_block_size(synthetic::dataset_of(images), setup, cfg, ks, seeds, {}, 1);
    bool ok = rows.size() == 6;
    std::string detail;
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
        const double gap = rows[i + 1].image_accuracy - rows[i].image_accuracy;
        ok = ok && rows[i].k == 1 && rows[i + 1].k == 2 && gap >= 0.10 - 1e-12;
        detail += fmt("%sseed %llu: k=1 %.3f k=2 %.3f", i ? ", " : "", static_cast<unsigned long long>(rows[i].seed),
                      rows[i].image_accuracy, rows[i + 1].image_accuracy);
    }
    return {ok, detail};
}

// ---- 6: determinism and serialization -----------------------------------------

Outcome determinism() {
    synthetic::ContextSpec spec;
    spec.per_class = 4;
    spec.patch_size = 48;
    const auto images = synthetic::context_corpus(spec);
    const Dataset ds = synthetic::dataset_of(images);
    PipelineConfig cfg;
    cfg.patch_size = spec.patch_size;
    FeatureSetup setup;
    setup.loader = synthetic::memory_loader(images);
    const ChannelStats target = resolve_target(setup, ds, cfg.space);
    const auto source = make_feature_source(setup, cfg, target);

    test_support::TempDir dir("ctxpath-accept");
    auto run_once = [&](std::size_t threads, const std::string& tag) {
        const TrainedModel model = train(ds, *source, cfg, target, threads);
        save_model(model, dir / ("model_" + tag + ".json"));
        const EvalReport report = evaluate(model, ds, *source, threads);
        test_support::write_text(dir / ("pred_" + tag + ".csv"),
                                 format_predictions_csv(report.predictions, report.class_names));
        return report;
    };
    const EvalReport a = run_once(1, "a");
    run_once(2, "b");
    const bool models_equal =
        test_support::read_bytes(dir / "model_a.json") == test_support::read_bytes(dir / "model_b.json");
    const bool csv_equal = test_support::read_bytes(dir / "pred_a.csv") == test_support::read_bytes(dir / "pred_b.csv");

    const TrainedModel loaded = load_model(dir / "model_a.json");
    save_model(loaded, dir / "model_c.json");
    const bool resave_equal =
        test_support::read_bytes(dir / "model_a.json") == test_support::read_bytes(dir / "model_c.json");
    const EvalReport c = evaluate(loaded, ds, *source, 1);
    bool preds_equal = a.predictions.size() == c.predictions.size();
    for (std::size_t i = 0; preds_equal && i < a.predictions.size(); ++i) {
        const auto& p = a.predictions[i];
        const auto& q = c.predictions[i];
        preds_equal = p.label == q.label && p.tally == q.tally && p.score_sums == q.score_sums &&
                      p.blocks.size() == q.blocks.size();
        for (std::size_t b = 0; preds_equal && b < p.blocks.size(); ++b)
            preds_equal = p.blocks[b].label == q.blocks[b].label && p.blocks[b].scores == q.blocks[b].scores;
    }
    return {models_equal && csv_equal && resave_equal && preds_equal,
            fmt("model bytes equal %s, prediction CSV equal %s, reload re-save equal %s, reloaded predictions exact %s",
                models_equal ? "yes" : "no", csv_equal ? "yes" : "no", resave_equal ? "yes" : "no",
                preds_equal ? "yes" : "no")};
}

// ---- 7: tiling and voting -------------------------------------------------------

Outcome tiling_voting() {
    int failed = 0, checks = 0;
    auto expect = [&](bool ok) {
        ++checks;
        failed += !ok;
    };
    const PatchGrid grid = make_grid(2048, 1536, 512, 512);
    expect(grid.rows == 3 && grid.cols == 4 && grid.count() == 12);
    const auto blocks = enumerate_blocks(grid, 2);
    expect(blocks.size() == 6);
    expect(blocks.front().anchor == GridPos{0, 0} && blocks.back().anchor == GridPos{1, 2});
    expect(blocks.front().members == std::vector<GridPos>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    expect(enumerate_blocks(grid, 1).size() == 12);
    expect(enumerate_blocks(grid, 3).size() == 2);

    // Dihedral closure: compositions stay in the group, identity and inverses exist,
    // and the induced action on a non-square image agrees with composition.
    const auto ops = all_dihedral_ops();
    expect(ops.size() == 8);
    const ImageRGB img = test_support::gradient_image(5, 3);
    for (const DihedralOp a : ops) {
        expect(a.then(a.inverse()) == DihedralOp::identity());
        for (const DihedralOp b : ops) {
            const DihedralOp ab = a.then(b);
            expect(ab.id() >= 0 && ab.id() < 8);
            expect(apply_dihedral(apply_dihedral(img, a), b) == apply_dihedral(img, ab));
        }
    }

    auto block = [](int label, std::vector<double> scores) {
        BlockResult b;
        b.label = label;
        b.scores = std::move(scores);
        return b;
    };
    const std::vector<BlockResult> unanimous(6, block(3, {0, 0, 0, 1}));
    expect(majority_vote(unanimous, 4).label == 3);
    std::vector<BlockResult> tie;
    for (int i = 0; i < 3; ++i) tie.push_back(block(0, {0.4, 0.5, 0, 0}));
    for (int i = 0; i < 3; ++i) tie.push_back(block(1, {0.0, 0.5, 0, 0}));
    expect(majority_vote(tie, 4).label == 1);  // scores 1.2 vs 3.0
    const std::vector<BlockResult> even{block(2, {0, 0, 1, 1}), block(3, {0, 0, 1, 1})};
    expect(majority_vote(even, 4).label == 2);
    expect(vote_winner(std::vector<int>{1, 1, 1}, std::vector<double>{0.4, -0.3, -0.1}) == 0);
    return {failed == 0, fmt("%d/%d checks", checks - failed, checks)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        double limit_s;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria{
        {1, 10.0, smo_oracle},   {2, 5.0, pca_oracle},     {3, 30.0, normalization_fidelity},
        {4, 300.0, end_to_end},  {5, 600.0, context_trend}, {6, 0.0, determinism},
        {7, 0.0, tiling_voting},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0.0 && secs > c.limit_s) {
            o.pass = false;
            o.detail += fmt("; exceeded %.0f s limit", c.limit_s);
        }
        std::printf("criterion %d: %s (%s) [%.2f s]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
