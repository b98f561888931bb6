#include <benchmark/benchmark.h>

#include "prcodec/features.hpp"
#include "prcodec/huffman.hpp"
#include "prcodec/predictor.hpp"
#include "prcodec/quantizer.hpp"
#include "prcodec/rng.hpp"

using namespace prcodec;

namespace {

std::array<double, kWindowSize> make_frame() {
  Rng rng(1);
  std::array<double, kWindowSize> frame{};
  for (double& s : frame) s = 1000.0 * rng.uniform(-1.0, 1.0);
  return frame;
}

void BM_bark_cepstrum(benchmark::State& state) {
  const auto frame = make_frame();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bark_cepstrum(frame));
  }
}
BENCHMARK(BM_bark_cepstrum);

void BM_predict_step(benchmark::State& state) {
  const PredictorWeights w = init_weights(2);
  PredictorState ps;
  std::array<double, kNumCepstra> prev{};
  prev.fill(0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_step(w, ps, prev, {0.1, 0.5}));
  }
}
BENCHMARK(BM_predict_step);

void BM_vq_nearest_1024(benchmark::State& state) {
  Rng rng(3);
  Codebook book;
  book.dim = 17;
  book.size = 1024;
  book.centroids.resize(1024 * 17);
  for (double& c : book.centroids) c = rng.uniform(-0.3, 0.3);
  std::array<double, 17> query{};
  for (double& q : query) q = rng.uniform(-0.3, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nearest_centroid(book, query.data()));
  }
}
BENCHMARK(BM_vq_nearest_1024);

void BM_huffman_encode(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> freqs(1024);
  double total = 0.0;
  for (double& f : freqs) {
    f = rng.uniform(0.001, 1.0);
    total += f;
  }
  for (double& f : freqs) f /= total;
  const HuffmanTable table = build_huffman(freqs);
  std::vector<int> symbols(1000);
  for (int& s : symbols) s = static_cast<int>(rng.index(1024));
  for (auto _ : state) {
    benchmark::DoNotOptimize(huffman_encode(symbols, table));
  }
}
BENCHMARK(BM_huffman_encode);

void BM_pitch_estimate(benchmark::State& state) {
  Rng rng(5);
  PcmSignal pcm;
  pcm.samples.resize(16000);
  for (auto& s : pcm.samples) {
    s = static_cast<int16_t>(6000.0 * rng.uniform(-1.0, 1.0));
  }
  size_t frame = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_pitch(pcm, frame));
    frame = (frame + 1) % 90;
  }
}
BENCHMARK(BM_pitch_estimate);

}  // namespace

BENCHMARK_MAIN();
