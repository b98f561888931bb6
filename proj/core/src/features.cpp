#include "prcodec/features.hpp"

#include <algorithm>
#include <cmath>

namespace prcodec {

namespace {

constexpr int kNumBins = kWindowSize / 2 + 1;  // 161
constexpr double kPi = 3.14159265358979323846;

struct DftTables {
  // cos/sin twiddles for bins 0..160 of a 320-point DFT.
  std::vector<double> cos_table;  // [bin][n]
  std::vector<double> sin_table;
  std::array<double, kWindowSize> window;
  double window_energy = 0.0;

  DftTables() {
    cos_table.resize(static_cast<size_t>(kNumBins) * kWindowSize);
    sin_table.resize(static_cast<size_t>(kNumBins) * kWindowSize);
    for (int k = 0; k < kNumBins; ++k) {
      for (int n = 0; n < kWindowSize; ++n) {
        const double phase = 2.0 * kPi * k * n / kWindowSize;
        cos_table[static_cast<size_t>(k) * kWindowSize + n] = std::cos(phase);
        sin_table[static_cast<size_t>(k) * kWindowSize + n] = std::sin(phase);
      }
    }
    for (int n = 0; n < kWindowSize; ++n) {
      window[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * n / kWindowSize));
      window_energy += window[n] * window[n];
    }
  }
};

const DftTables& tables() {
  static const DftTables t;
  return t;
}

// Triangular weight mass per band; normalizes band sums into averages.
const std::array<double, kNumBands>& band_mass() {
  static const std::array<double, kNumBands> mass = [] {
    std::array<double, kNumBands> m{};
    for (int i = 0; i + 1 < kNumBands; ++i) {
      const int width = kBandBins[i + 1] - kBandBins[i];
      for (int j = 0; j < width; ++j) {
        const double frac = static_cast<double>(j) / width;
        m[i] += 1.0 - frac;
        m[i + 1] += frac;
      }
    }
    m[kNumBands - 1] += 1.0;  // Nyquist bin belongs wholly to the top band
    return m;
  }();
  return mass;
}

}  // namespace

std::vector<std::array<double, kWindowSize>> frame_signal(const PcmSignal& pcm) {
  if (pcm.samples.size() < static_cast<size_t>(kWindowSize)) {
    throw FormatError("signal shorter than one analysis window (" +
                      std::to_string(pcm.samples.size()) + " < " +
                      std::to_string(kWindowSize) + " samples)");
  }
  const size_t count = (pcm.samples.size() - kWindowSize) / kHopSize + 1;
  const auto& t = tables();
  std::vector<std::array<double, kWindowSize>> frames(count);
  for (size_t f = 0; f < count; ++f) {
    const int16_t* src = pcm.samples.data() + f * kHopSize;
    for (int n = 0; n < kWindowSize; ++n) {
      frames[f][n] = static_cast<double>(src[n]) * t.window[n];
    }
  }
  return frames;
}

std::array<double, kNumBins> power_spectrum(
    const std::array<double, kWindowSize>& frame) {
  const auto& t = tables();
  std::array<double, kNumBins> power{};
  for (int k = 0; k < kNumBins; ++k) {
    const double* ct = t.cos_table.data() + static_cast<size_t>(k) * kWindowSize;
    const double* st = t.sin_table.data() + static_cast<size_t>(k) * kWindowSize;
    double re = 0.0, im = 0.0;
    for (int n = 0; n < kWindowSize; ++n) {
      re += frame[n] * ct[n];
      im -= frame[n] * st[n];
    }
    power[k] = (re * re + im * im) / t.window_energy;
  }
  return power;
}

std::array<double, kNumBands> band_energies(
    const std::array<double, kNumBins>& spectrum) {
  std::array<double, kNumBands> sum{};
  for (int i = 0; i + 1 < kNumBands; ++i) {
    const int width = kBandBins[i + 1] - kBandBins[i];
    for (int j = 0; j < width; ++j) {
      const double frac = static_cast<double>(j) / width;
      const double p = spectrum[kBandBins[i] + j];
      sum[i] += (1.0 - frac) * p;
      sum[i + 1] += frac * p;
    }
  }
  sum[kNumBands - 1] += spectrum[kNumBins - 1];
  const auto& mass = band_mass();
  for (int i = 0; i < kNumBands; ++i) sum[i] /= mass[i];
  return sum;
}

std::array<double, kNumBands> dct18(const std::array<double, kNumBands>& x) {
  constexpr int n = kNumBands;
  std::array<double, kNumBands> c{};
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += x[i] * std::cos(kPi * k * (2 * i + 1) / (2.0 * n));
    }
    const double scale = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    c[k] = scale * acc;
  }
  return c;
}

std::array<double, kNumBands> idct18(const std::array<double, kNumBands>& c) {
  constexpr int n = kNumBands;
  std::array<double, kNumBands> x{};
  for (int i = 0; i < n; ++i) {
    double acc = std::sqrt(1.0 / n) * c[0];
    for (int k = 1; k < n; ++k) {
      acc += std::sqrt(2.0 / n) * c[k] * std::cos(kPi * k * (2 * i + 1) / (2.0 * n));
    }
    x[i] = acc;
  }
  return x;
}

std::array<double, kNumCepstra> bark_cepstrum(
    const std::array<double, kWindowSize>& frame) {
  const auto energies = band_energies(power_spectrum(frame));
  std::array<double, kNumBands> log_e{};
  for (int i = 0; i < kNumBands; ++i) {
    log_e[i] = std::log(energies[i] + kEnergyFloor);
  }
  return dct18(log_e);
}

PitchEstimate estimate_pitch(const PcmSignal& pcm, size_t frame_index) {
  constexpr int kBufLen = 2 * kWindowSize;  // 640-sample look-back buffer
  const size_t frame_count = (pcm.samples.size() - kWindowSize) / kHopSize + 1;
  if (pcm.samples.size() < static_cast<size_t>(kWindowSize) ||
      frame_index >= frame_count) {
    throw FormatError("pitch frame index out of bounds");
  }

  // Buffer ends at the frame's last sample; zero-padded at stream start.
  const long end = static_cast<long>(frame_index) * kHopSize + kWindowSize;
  std::array<double, kBufLen> buf{};
  for (int i = 0; i < kBufLen; ++i) {
    const long src = end - kBufLen + i;
    buf[i] = (src >= 0) ? static_cast<double>(pcm.samples[src]) : 0.0;
  }

  const int frame_off = kBufLen - kWindowSize;
  double frame_energy = 0.0;
  for (int t = 0; t < kWindowSize; ++t) {
    frame_energy += buf[frame_off + t] * buf[frame_off + t];
  }

  double best_corr = -1.0;
  int best_lag = kMinPitchLag;
  std::array<double, kMaxPitchLag + 1> corr_at{};
  for (int lag = kMinPitchLag; lag <= kMaxPitchLag; ++lag) {
    double dot = 0.0, lag_energy = 0.0;
    const double* cur = buf.data() + frame_off;
    const double* past = buf.data() + frame_off - lag;
    for (int t = 0; t < kWindowSize; ++t) {
      dot += cur[t] * past[t];
      lag_energy += past[t] * past[t];
    }
    const double denom = std::sqrt(frame_energy * lag_energy);
    const double c = denom > 0.0 ? dot / denom : 0.0;
    corr_at[lag] = c;
    if (c > best_corr) {
      best_corr = c;
      best_lag = lag;
    }
  }
  // Prefer the smallest lag among near-ties (a pure tone correlates equally
  // at every multiple of its period).
  for (int lag = kMinPitchLag; lag < best_lag; ++lag) {
    if (corr_at[lag] >= best_corr - 1e-9) {
      best_lag = lag;
      best_corr = corr_at[lag];
      break;
    }
  }

  PitchEstimate est;
  est.period = best_lag;
  est.correlation = std::clamp(best_corr, 0.0, 1.0);
  return est;
}

FeatureStream analyze(const PcmSignal& pcm) {
  const auto frames = frame_signal(pcm);
  FeatureStream stream;
  stream.frames.resize(frames.size());
  for (size_t f = 0; f < frames.size(); ++f) {
    stream.frames[f].cepstrum = bark_cepstrum(frames[f]);
    const PitchEstimate pitch = estimate_pitch(pcm, f);
    stream.frames[f].pitch_period = pitch.period;
    stream.frames[f].pitch_correlation = pitch.correlation;
  }
  return stream;
}

}  // namespace prcodec
