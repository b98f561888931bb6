// Classical synthesis back end: reconstructed Bark cepstra are inverted to
// band energies, interpolated to a 161-point power spectrum, turned into
// autocorrelation, and fitted with an order-16 all-pole model via
// Levinson-Durbin. Excitation is a correlation-weighted mix of a pitch
// pulse train and white noise. This is a quality-floor vocoder stand-in:
// codec fidelity is measured in the feature domain, not here.
#pragma once

#include <array>

#include "prcodec/rng.hpp"
#include "prcodec/scaler.hpp"
#include "prcodec/types.hpp"

namespace prcodec {

inline constexpr int kLpcOrder = 16;

struct LpcModel {
  std::array<double, kLpcOrder> coeffs{};      // prediction p_t = sum a_tau s_{t-tau}
  std::array<double, kLpcOrder> reflection{};  // |k_i| < 1 for a stable model
  double gain = 0.0;                           // sqrt(final prediction error)
};

// Inverse of the analysis cepstrum: unscale, inverse DCT, exponentiate.
std::array<double, kNumBands> cepstrum_to_band_energies(
    const std::array<double, kNumCepstra>& cepstrum_scaled,
    const FeatureScaler& scaler);

// Same, for raw (already unscaled) cepstra such as decoder output.
std::array<double, kNumBands> band_energies_from_cepstrum(
    const std::array<double, kNumCepstra>& cepstrum_raw);

// Band energies -> interpolated power spectrum -> lag-windowed
// autocorrelation -> Levinson-Durbin. Throws NumericError on non-positive
// energies; the returned model always satisfies |k_i| < 1.
LpcModel band_energies_to_lpc(const std::array<double, kNumBands>& energies);

// Exposed for testing: the 161-point interpolated spectrum and the
// Levinson-Durbin recursion itself.
std::array<double, kWindowSize / 2 + 1> interpolate_band_spectrum(
    const std::array<double, kNumBands>& energies);
LpcModel levinson_durbin(const std::array<double, kLpcOrder + 1>& autocorr);

struct SynthState {
  std::array<double, kLpcOrder> history{};  // last synthesized samples
  double pulse_phase = 0.0;                 // excitation phase accumulator
  Rng noise;

  explicit SynthState(uint64_t seed = 0x5eed) : noise(seed) {}
};

// One 10 ms hop of output. Excitation energy splits sqrt(correlation) to
// the pulse train and sqrt(1-correlation) to noise; frames are continuous
// across calls through state.history.
std::array<double, kHopSize> synthesize_frame(const LpcModel& model,
                                              double pitch_period,
                                              double pitch_correlation,
                                              SynthState& state);

// Full stream synthesis to 16-bit PCM (clamped).
PcmSignal synthesize_stream(const FeatureStream& features, uint64_t seed = 0x5eed);

}  // namespace prcodec
