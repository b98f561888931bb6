// Shared generators for deterministic synthetic test data.
#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "prcodec/bitstream.hpp"
#include "prcodec/codec.hpp"
#include "prcodec/quantizer.hpp"
#include "prcodec/rng.hpp"
#include "prcodec/types.hpp"

namespace testutil {

using namespace prcodec;

// Slowly varying sinusoidal cepstra (default period 20 frames) with a
// gently wandering pitch track.
inline FeatureStream sinusoidal_stream(size_t frames, uint64_t seed,
                                       double period_frames = 20.0) {
  Rng rng(seed);
  std::array<double, kNumCepstra> mean{}, amp{}, phase{};
  for (int d = 0; d < kNumCepstra; ++d) {
    mean[d] = rng.uniform(-2.0, 2.0);
    amp[d] = rng.uniform(0.5, 2.0);
    phase[d] = rng.uniform(0.0, 6.28318530717958647692);
  }
  const double pitch_base = rng.uniform(60.0, 200.0);
  FeatureStream stream;
  stream.frames.resize(frames);
  for (size_t n = 0; n < frames; ++n) {
    auto& frame = stream.frames[n];
    for (int d = 0; d < kNumCepstra; ++d) {
      frame.cepstrum[d] =
          mean[d] +
          amp[d] * std::sin(6.28318530717958647692 * n / period_frames + phase[d]);
    }
    frame.pitch_period = static_cast<int>(std::lround(
        std::clamp(pitch_base + 20.0 * std::sin(0.05 * n), 32.0, 256.0)));
    frame.pitch_correlation = 0.5 + 0.4 * std::sin(0.03 * n);
  }
  return stream;
}

inline FeatureStream random_stream(size_t frames, uint64_t seed) {
  Rng rng(seed);
  FeatureStream stream;
  stream.frames.resize(frames);
  for (auto& frame : stream.frames) {
    for (double& c : frame.cepstrum) c = rng.uniform(-8.0, 8.0);
    frame.pitch_period =
        kMinPitchLag +
        static_cast<int>(rng.index(kMaxPitchLag - kMinPitchLag + 1));
    frame.pitch_correlation = rng.uniform();
  }
  return stream;
}

inline Codebook random_codebook(int dim, int size, uint64_t seed,
                                double spread = 0.3) {
  Rng rng(seed);
  Codebook book;
  book.dim = dim;
  book.size = size;
  book.centroids.resize(static_cast<size_t>(size) * dim);
  for (double& c : book.centroids) c = rng.uniform(-spread, spread);
  return book;
}

struct TestArtifacts {
  BitrateProfile profile;
  CodebookSet books;
  HuffmanSet huffman;
};

// Random codebooks and uniform Huffman tables for a profile; thresholds
// set to fixed small values so both paths occur.
inline TestArtifacts make_artifacts(ProfileId id, uint64_t seed) {
  TestArtifacts art;
  art.profile = standard_profile(id);
  if (id != ProfileId::kHigh) {
    art.profile.theta_sq = 0.05;
    art.profile.theta_vq = 0.8;
  }
  uint64_t s = seed;
  for (Role role : {Role::kSqLarge, Role::kSqSmall, Role::kVqLarge1,
                    Role::kVqLarge2, Role::kVqSmall}) {
    if (!art.profile.has_role(role)) continue;
    const int size = art.profile.role_size(role);
    art.books[role] = random_codebook(art.profile.role_dim(role), size, ++s);
    std::vector<double> freqs(size, 1.0 / size);
    art.huffman[role] = build_huffman(freqs);
  }
  return art;
}

// Pulse-train utterance through a swept two-pole resonator with a slow
// amplitude envelope; produces smooth, predictable cepstra.
inline PcmSignal pulse_train_utterance(double seconds, uint64_t seed) {
  Rng rng(seed);
  const size_t total = static_cast<size_t>(seconds * kSampleRate);
  const double period0 = rng.uniform(80.0, 180.0);
  const double period_wobble = rng.uniform(5.0, 25.0);
  const double env_rate = rng.uniform(0.8, 2.0);       // Hz
  const double sweep_rate = rng.uniform(0.2, 0.7);     // Hz
  const double center0 = rng.uniform(500.0, 1500.0);
  const double phase0 = rng.uniform(0.0, 6.28);

  PcmSignal pcm;
  pcm.sample_rate = kSampleRate;
  pcm.samples.resize(total);
  double phase = 0.0;
  double y1 = 0.0, y2 = 0.0;
  for (size_t t = 0; t < total; ++t) {
    const double sec = static_cast<double>(t) / kSampleRate;
    const double period =
        period0 + period_wobble * std::sin(2.0 * 3.14159265 * 0.4 * sec + phase0);
    phase += 1.0;
    double x = 0.02 * rng.normal();
    if (phase >= period) {
      phase -= period;
      x += std::sqrt(period);
    }
    // Two-pole resonator, center frequency swept sinusoidally.
    const double fc =
        center0 * (1.0 + 0.3 * std::sin(2.0 * 3.14159265 * sweep_rate * sec));
    const double r = 0.95;
    const double c1 = 2.0 * r * std::cos(2.0 * 3.14159265 * fc / kSampleRate);
    const double c2 = -r * r;
    const double y = x + c1 * y1 + c2 * y2;
    y2 = y1;
    y1 = y;
    const double env =
        std::exp(0.6 * std::sin(2.0 * 3.14159265 * env_rate * sec));
    const double out = 1500.0 * env * y;
    pcm.samples[t] = static_cast<int16_t>(
        std::lround(std::clamp(out, -32768.0, 32767.0)));
  }
  return pcm;
}

inline std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("prcodec_" + name);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace testutil
