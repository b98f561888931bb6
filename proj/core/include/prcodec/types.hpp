// Core domain types shared across the codec: PCM containers, the 20-dim
// frame feature (18 Bark cepstra + pitch period/correlation), and the
// error taxonomy used for CLI exit codes.
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace prcodec {

inline constexpr int kSampleRate = 16000;
inline constexpr int kWindowSize = 320;   // 20 ms analysis window
inline constexpr int kHopSize = 160;      // 10 ms hop -> 100 frames/s
inline constexpr int kNumBands = 18;
inline constexpr int kNumCepstra = 18;
inline constexpr int kNumPitchParams = 2;
inline constexpr int kFeatureDim = kNumCepstra + kNumPitchParams;
inline constexpr int kMinPitchLag = 32;
inline constexpr int kMaxPitchLag = 256;

// Malformed or corrupt files/bitstreams. CLI exit code 2.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failures (NaN loss, degenerate inputs). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PcmSignal {
  std::vector<int16_t> samples;
  int sample_rate = kSampleRate;
};

struct FeatureFrame {
  std::array<double, kNumCepstra> cepstrum{};
  int pitch_period = kMinPitchLag;        // samples, in [32, 256]
  double pitch_correlation = 0.0;         // in [0, 1]
};

struct FeatureStream {
  std::vector<FeatureFrame> frames;

  bool empty() const { return frames.empty(); }
  size_t size() const { return frames.size(); }
};

using Vec = std::vector<double>;

}  // namespace prcodec
