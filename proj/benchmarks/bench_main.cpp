#include <benchmark/benchmark.h>

#include <random>

#include "ctxpath/color.hpp"
#include "ctxpath/features.hpp"
#include "ctxpath/pca.hpp"
#include "ctxpath/svm.hpp"

namespace {

using namespace ctxpath;

ImageRGB noise_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ImageRGB img(w, h);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng() & 0xff);
    return img;
}

Matrix noise_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix x(n, d);
    for (auto& v : x.data()) v = g(rng);
    return x;
}

void BM_rgb_to_space(benchmark::State& state) {
    const auto space = state.range(0) == 0 ? ColorSpace::LAlphaBeta : ColorSpace::CieLab;
    const ImageRGB img = noise_image(512, 512, 1);
    for (auto _ : state) benchmark::DoNotOptimize(rgb_to_space(img, space));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.pixel_count()));
}
BENCHMARK(BM_rgb_to_space)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_reinhard_normalize(benchmark::State& state) {
    const ImageRGB img = noise_image(512, 512, 2);
    const ChannelStats target = compute_stats(rgb_to_space(noise_image(64, 64, 3), ColorSpace::LAlphaBeta));
    for (auto _ : state) benchmark::DoNotOptimize(reinhard_normalize(img, target, ColorSpace::LAlphaBeta));
}
BENCHMARK(BM_reinhard_normalize)->Unit(benchmark::kMillisecond);

void BM_baseline_extract(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const ImageRGB patch = noise_image(p, p, 4);
    for (auto _ : state) benchmark::DoNotOptimize(baseline_extract(patch));
}
BENCHMARK(BM_baseline_extract)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_pca_fit(benchmark::State& state) {
    const Matrix x = noise_matrix(static_cast<std::size_t>(state.range(0)), 280, 5);
    for (auto _ : state) benchmark::DoNotOptimize(pca_fit(x, PcaTarget::variance(0.95)));
}
BENCHMARK(BM_pca_fit)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_smo_train(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Matrix x = noise_matrix(n, 8, 6);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x(i, 0) + 0.5 * x(i, 1) * x(i, 2) > 0 ? 1 : -1;
    SmoOptions opts;
    opts.kernel.gamma = scale_gamma(x);
    for (auto _ : state) benchmark::DoNotOptimize(smo_train(x, y, opts));
}
BENCHMARK(BM_smo_train)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
