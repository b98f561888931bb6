// Frame-level feature analysis: 20 ms Hann-windowed frames at a 10 ms hop,
// 18-band Bark-scale log-energy cepstrum (orthonormal DCT-II), and
// normalized-autocorrelation pitch over integer lags [32, 256].
//
// Band layout follows LPCNet's 18 band centers over 0..8 kHz:
//   {0,200,400,600,800,1000,1200,1400,1600,2000,2400,2800,
//    3200,4000,4800,5600,6800,8000} Hz
// with triangular interband interpolation on a 320-point spectrum.
#pragma once

#include <array>
#include <vector>

#include "prcodec/types.hpp"

namespace prcodec {

// Band centers in 50 Hz DFT bins (320-point transform at 16 kHz).
inline constexpr std::array<int, kNumBands> kBandBins = {
    0, 4, 8, 12, 16, 20, 24, 28, 32, 40, 48, 56, 64, 80, 96, 112, 136, 160};

inline constexpr double kEnergyFloor = 1e-10;

// Slices pcm into Hann-windowed 320-sample frames, 160-sample hop.
// Throws FormatError if the signal is shorter than one window.
std::vector<std::array<double, kWindowSize>> frame_signal(const PcmSignal& pcm);

// Power spectrum bins 0..160 of one windowed frame, normalized by the
// window energy so a white signal of variance v reads ~v per bin.
std::array<double, kWindowSize / 2 + 1> power_spectrum(
    const std::array<double, kWindowSize>& frame);

// Weighted-average band energies from a power spectrum (triangular weights).
std::array<double, kNumBands> band_energies(
    const std::array<double, kWindowSize / 2 + 1>& spectrum);

// 18 Bark cepstral coefficients of one windowed frame: DCT-II (orthonormal)
// of the floored log band energies.
std::array<double, kNumCepstra> bark_cepstrum(
    const std::array<double, kWindowSize>& frame);

// Orthonormal 18-point DCT-II and its inverse (DCT-III), used by both the
// analysis and the synthesis side.
std::array<double, kNumBands> dct18(const std::array<double, kNumBands>& x);
std::array<double, kNumBands> idct18(const std::array<double, kNumBands>& c);

struct PitchEstimate {
  int period = kMinPitchLag;
  double correlation = 0.0;
};

// Normalized autocorrelation over a 640-sample look-back buffer ending at
// the frame's last sample. Period is the arg max over integer lags
// [32, 256] (smallest lag wins near-ties); correlation is clamped to [0,1].
PitchEstimate estimate_pitch(const PcmSignal& pcm, size_t frame_index);

// Full analysis: framing + cepstra + pitch, 100 frames/s.
FeatureStream analyze(const PcmSignal& pcm);

}  // namespace prcodec
