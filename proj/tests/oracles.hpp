// Independent reference implementations used as test oracles. These are
// written directly from the defining formulas, deliberately sharing no
// code path with the library.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "prcodec/predictor.hpp"
#include "prcodec/types.hpp"

namespace oracle {

// Plain complex DFT of a windowed 320-sample frame, bins 0..160,
// normalized by the Hann window energy.
inline std::vector<double> reference_power_spectrum(
    const std::array<double, 320>& windowed_frame) {
  constexpr double pi = 3.14159265358979323846;
  std::vector<double> power(161);
  double window_energy = 0.0;
  for (int n = 0; n < 320; ++n) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * pi * n / 320.0));
    window_energy += w * w;
  }
  for (int k = 0; k <= 160; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int n = 0; n < 320; ++n) {
      acc += windowed_frame[n] *
             std::exp(std::complex<double>(0.0, -2.0 * pi * k * n / 320.0));
    }
    power[k] = std::norm(acc) / window_energy;
  }
  return power;
}

// Triangular band integration over the LPCNet band centers, normalized to
// a weighted average per band.
inline std::array<double, 18> reference_band_energies(
    const std::vector<double>& power) {
  constexpr std::array<int, 18> centers = {0,  4,  8,  12, 16, 20,  24,  28, 32,
                                           40, 48, 56, 64, 80, 96, 112, 136, 160};
  std::array<double, 18> sums{};
  std::array<double, 18> mass{};
  for (int i = 0; i < 17; ++i) {
    const int width = centers[i + 1] - centers[i];
    for (int j = 0; j < width; ++j) {
      const double frac = static_cast<double>(j) / width;
      sums[i] += (1.0 - frac) * power[centers[i] + j];
      sums[i + 1] += frac * power[centers[i] + j];
      mass[i] += 1.0 - frac;
      mass[i + 1] += frac;
    }
  }
  sums[17] += power[160];
  mass[17] += 1.0;
  for (int i = 0; i < 18; ++i) sums[i] /= mass[i];
  return sums;
}

// Brute-force normalized autocorrelation straight over the raw signal.
struct PitchResult {
  int lag = 0;
  double corr = 0.0;
};

inline PitchResult reference_pitch(const std::vector<int16_t>& samples,
                                   size_t frame_index) {
  const long end = static_cast<long>(frame_index) * 160 + 320;
  auto sample_at = [&](long i) -> double {
    return (i >= 0 && i < static_cast<long>(samples.size()))
               ? static_cast<double>(samples[i])
               : 0.0;
  };
  PitchResult best;
  best.corr = -2.0;
  for (int lag = 32; lag <= 256; ++lag) {
    double dot = 0.0, e0 = 0.0, e1 = 0.0;
    for (int t = 0; t < 320; ++t) {
      const double a = sample_at(end - 320 + t);
      const double b = sample_at(end - 320 + t - lag);
      dot += a * b;
      e0 += a * a;
      e1 += b * b;
    }
    const double denom = std::sqrt(e0 * e1);
    const double c = denom > 0.0 ? dot / denom : 0.0;
    if (c > best.corr + 1e-9) {
      best.corr = c;
      best.lag = lag;
    }
  }
  if (best.corr < 0.0) best.corr = 0.0;
  if (best.corr > 1.0) best.corr = 1.0;
  return best;
}

// Textbook GRU step written independently from the gate equations.
inline void reference_gru_step(const prcodec::GruLayer& layer,
                               const std::vector<double>& x,
                               const std::vector<double>& h,
                               std::vector<double>& h_next) {
  const int hid = layer.hidden_dim;
  const int in = layer.input_dim;
  h_next.assign(hid, 0.0);
  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (int i = 0; i < hid; ++i) {
    double ar = layer.b_ir[i] + layer.b_hr[i];
    double az = layer.b_iz[i] + layer.b_hz[i];
    double an_x = layer.b_in[i];
    double an_h = layer.b_hn[i];
    for (int j = 0; j < in; ++j) {
      ar += layer.w_ir[static_cast<size_t>(i) * in + j] * x[j];
      az += layer.w_iz[static_cast<size_t>(i) * in + j] * x[j];
      an_x += layer.w_in[static_cast<size_t>(i) * in + j] * x[j];
    }
    for (int j = 0; j < hid; ++j) {
      ar += layer.w_hr[static_cast<size_t>(i) * hid + j] * h[j];
      az += layer.w_hz[static_cast<size_t>(i) * hid + j] * h[j];
      an_h += layer.w_hn[static_cast<size_t>(i) * hid + j] * h[j];
    }
    const double r = sigmoid(ar);
    const double z = sigmoid(az);
    const double n = std::tanh(an_x + r * an_h);
    h_next[i] = (1.0 - z) * n + z * h[i];
  }
}

// Full reference prediction: two GRU layers + tanh output head.
inline std::array<double, 18> reference_predict(
    const prcodec::PredictorWeights& w, std::vector<double>& h1,
    std::vector<double>& h2, const std::array<double, 20>& input) {
  std::vector<double> x(input.begin(), input.end());
  std::vector<double> h1_next, h2_next;
  reference_gru_step(w.gru1, x, h1, h1_next);
  reference_gru_step(w.gru2, h1_next, h2, h2_next);
  std::array<double, 18> y{};
  for (int d = 0; d < 18; ++d) {
    double acc = w.out_b[d];
    for (int j = 0; j < 128; ++j) {
      acc += w.out_w[static_cast<size_t>(d) * 128 + j] * h2_next[j];
    }
    y[d] = std::tanh(acc);
  }
  h1 = h1_next;
  h2 = h2_next;
  return y;
}

// Analytic band energies of an AR(2) process driven by unit-variance
// noise: P(w) = 1 / |1 - a1 e^{-iw} - a2 e^{-2iw}|^2 sampled on the
// 50 Hz bin grid, then band-averaged with the triangular weights.
inline std::array<double, 18> ar2_band_energies(double a1, double a2) {
  constexpr double pi = 3.14159265358979323846;
  std::vector<double> power(161);
  for (int k = 0; k <= 160; ++k) {
    const double w = 2.0 * pi * k / 320.0;
    const std::complex<double> denom =
        1.0 - a1 * std::exp(std::complex<double>(0.0, -w)) -
        a2 * std::exp(std::complex<double>(0.0, -2.0 * w));
    power[k] = 1.0 / std::norm(denom);
  }
  return reference_band_energies(power);
}

}  // namespace oracle
