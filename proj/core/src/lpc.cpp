#include "prcodec/lpc.hpp"

#include <algorithm>
#include <cmath>

#include "prcodec/features.hpp"

namespace prcodec {

namespace {

constexpr int kNumBins = kWindowSize / 2 + 1;
constexpr double kPi = 3.14159265358979323846;
constexpr double kLagWindowHz = 60.0;
constexpr double kNoiseFloorRel = 1e-4;

}  // namespace

std::array<double, kNumBands> band_energies_from_cepstrum(
    const std::array<double, kNumCepstra>& cepstrum_raw) {
  const auto log_e = idct18(cepstrum_raw);
  std::array<double, kNumBands> energies{};
  for (int i = 0; i < kNumBands; ++i) energies[i] = std::exp(log_e[i]);
  return energies;
}

std::array<double, kNumBands> cepstrum_to_band_energies(
    const std::array<double, kNumCepstra>& cepstrum_scaled,
    const FeatureScaler& scaler) {
  return band_energies_from_cepstrum(scaler.unscale_cepstrum(cepstrum_scaled));
}

namespace {

// Band-averaging a piecewise-linear spectrum with the analysis window's
// triangular weights is a linear map knots -> band energies. Inverting it
// recovers interpolation knots whose band averages reproduce the input
// exactly; interpolating the energies directly would smooth every
// spectral peak twice.
struct BandSystem {
  std::array<double, kNumBands * kNumBands> m{};

  BandSystem() {
    std::array<double, kNumBands> mass{};
    auto at = [this](int r, int c) -> double& { return m[r * kNumBands + c]; };
    for (int i = 0; i + 1 < kNumBands; ++i) {
      const int width = kBandBins[i + 1] - kBandBins[i];
      for (int j = 0; j < width; ++j) {
        const double frac = static_cast<double>(j) / width;
        // Interpolated bin value (1-frac)*v_i + frac*v_{i+1} contributes
        // (1-frac) to band i and frac to band i+1.
        at(i, i) += (1.0 - frac) * (1.0 - frac);
        at(i, i + 1) += (1.0 - frac) * frac;
        at(i + 1, i) += frac * (1.0 - frac);
        at(i + 1, i + 1) += frac * frac;
        mass[i] += 1.0 - frac;
        mass[i + 1] += frac;
      }
    }
    at(kNumBands - 1, kNumBands - 1) += 1.0;  // Nyquist bin
    mass[kNumBands - 1] += 1.0;
    for (int r = 0; r < kNumBands; ++r) {
      for (int c = 0; c < kNumBands; ++c) at(r, c) /= mass[r];
    }
  }
};

std::array<double, kNumBands> solve_band_knots(
    const std::array<double, kNumBands>& energies) {
  static const BandSystem system;
  std::array<double, kNumBands * kNumBands> a = system.m;
  std::array<double, kNumBands> x = energies;
  // Gaussian elimination with partial pivoting on the 18x18 system.
  for (int col = 0; col < kNumBands; ++col) {
    int pivot = col;
    for (int r = col + 1; r < kNumBands; ++r) {
      if (std::abs(a[r * kNumBands + col]) >
          std::abs(a[pivot * kNumBands + col])) {
        pivot = r;
      }
    }
    if (pivot != col) {
      for (int c = 0; c < kNumBands; ++c) {
        std::swap(a[col * kNumBands + c], a[pivot * kNumBands + c]);
      }
      std::swap(x[col], x[pivot]);
    }
    const double diag = a[col * kNumBands + col];
    for (int r = col + 1; r < kNumBands; ++r) {
      const double factor = a[r * kNumBands + col] / diag;
      if (factor == 0.0) continue;
      for (int c = col; c < kNumBands; ++c) {
        a[r * kNumBands + c] -= factor * a[col * kNumBands + c];
      }
      x[r] -= factor * x[col];
    }
  }
  for (int r = kNumBands - 1; r >= 0; --r) {
    double acc = x[r];
    for (int c = r + 1; c < kNumBands; ++c) acc -= a[r * kNumBands + c] * x[c];
    x[r] = acc / a[r * kNumBands + r];
  }
  // The inverse can undershoot for spiky inputs; keep knots positive.
  for (int i = 0; i < kNumBands; ++i) {
    x[i] = std::max(x[i], 1e-4 * energies[i]);
  }
  return x;
}

}  // namespace

std::array<double, kNumBins> interpolate_band_spectrum(
    const std::array<double, kNumBands>& energies) {
  const auto knots = solve_band_knots(energies);
  std::array<double, kNumBins> spectrum{};
  for (int i = 0; i + 1 < kNumBands; ++i) {
    const int lo = kBandBins[i];
    const int hi = kBandBins[i + 1];
    for (int bin = lo; bin < hi; ++bin) {
      const double frac = static_cast<double>(bin - lo) / (hi - lo);
      spectrum[bin] = (1.0 - frac) * knots[i] + frac * knots[i + 1];
    }
  }
  spectrum[kNumBins - 1] = knots[kNumBands - 1];
  return spectrum;
}

LpcModel levinson_durbin(const std::array<double, kLpcOrder + 1>& autocorr) {
  LpcModel model;
  double error = autocorr[0];
  if (!(error > 0.0)) throw NumericError("autocorrelation r(0) must be positive");

  std::array<double, kLpcOrder> a{};
  for (int i = 1; i <= kLpcOrder; ++i) {
    double acc = autocorr[i];
    for (int j = 1; j < i; ++j) acc -= a[j - 1] * autocorr[i - j];
    const double k = acc / error;
    if (!(std::abs(k) < 1.0)) {
      throw NumericError("unstable reflection coefficient from Levinson-Durbin");
    }
    model.reflection[i - 1] = k;

    std::array<double, kLpcOrder> updated = a;
    updated[i - 1] = k;
    for (int j = 1; j < i; ++j) updated[j - 1] = a[j - 1] - k * a[i - j - 1];
    a = updated;
    error *= (1.0 - k * k);
  }
  model.coeffs = a;
  model.gain = std::sqrt(error);
  return model;
}

LpcModel band_energies_to_lpc(const std::array<double, kNumBands>& energies) {
  for (double e : energies) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw NumericError("band energies must be positive and finite");
    }
  }
  const auto spectrum = interpolate_band_spectrum(energies);

  // Inverse transform of the (mirrored) power spectrum: 17 lags suffice.
  std::array<double, kLpcOrder + 1> autocorr{};
  for (int k = 0; k <= kLpcOrder; ++k) {
    double acc = spectrum[0] + spectrum[kNumBins - 1] * std::cos(kPi * k);
    for (int j = 1; j < kNumBins - 1; ++j) {
      acc += 2.0 * spectrum[j] * std::cos(2.0 * kPi * j * k / kWindowSize);
    }
    autocorr[k] = acc / kWindowSize;
  }

  // Gaussian lag window plus a relative white-noise floor keep the
  // sequence positive definite.
  for (int k = 1; k <= kLpcOrder; ++k) {
    const double arg = 2.0 * kPi * kLagWindowHz * k / kSampleRate;
    autocorr[k] *= std::exp(-0.5 * arg * arg);
  }
  autocorr[0] *= 1.0 + kNoiseFloorRel;
  return levinson_durbin(autocorr);
}

std::array<double, kHopSize> synthesize_frame(const LpcModel& model,
                                              double pitch_period,
                                              double pitch_correlation,
                                              SynthState& state) {
  const double period = std::clamp(pitch_period, 32.0, 256.0);
  const double corr = std::clamp(pitch_correlation, 0.0, 1.0);
  const double pulse_amp = std::sqrt(corr) * std::sqrt(period);
  const double noise_amp = std::sqrt(1.0 - corr);

  std::array<double, kHopSize> out{};
  for (int t = 0; t < kHopSize; ++t) {
    double excitation = noise_amp * state.noise.normal();
    state.pulse_phase += 1.0;
    if (state.pulse_phase >= period) {
      state.pulse_phase -= period;
      excitation += pulse_amp;
    }
    excitation *= model.gain;

    double pred = 0.0;
    for (int tau = 0; tau < kLpcOrder; ++tau) {
      pred += model.coeffs[tau] * state.history[tau];
    }
    const double sample = pred + excitation;
    for (int tau = kLpcOrder - 1; tau > 0; --tau) {
      state.history[tau] = state.history[tau - 1];
    }
    state.history[0] = sample;
    out[t] = sample;
  }
  return out;
}

PcmSignal synthesize_stream(const FeatureStream& features, uint64_t seed) {
  PcmSignal pcm;
  pcm.sample_rate = kSampleRate;
  pcm.samples.reserve(features.frames.size() * kHopSize);
  SynthState state(seed);
  for (const FeatureFrame& frame : features.frames) {
    const auto energies = band_energies_from_cepstrum(frame.cepstrum);
    const LpcModel model = band_energies_to_lpc(energies);
    const auto chunk = synthesize_frame(model, frame.pitch_period,
                                        frame.pitch_correlation, state);
    for (double s : chunk) {
      const double clamped = std::clamp(s, -32768.0, 32767.0);
      pcm.samples.push_back(static_cast<int16_t>(std::lround(clamped)));
    }
  }
  return pcm;
}

}  // namespace prcodec
