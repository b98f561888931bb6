#include "prcodec/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace prcodec {

FeatureScaler FeatureScaler::fit(const std::vector<FeatureStream>& corpus) {
  std::array<double, 20> lo{};
  std::array<double, 20> hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());

  size_t total = 0;
  for (const auto& stream : corpus) {
    for (const auto& frame : stream.frames) {
      for (int d = 0; d < kNumCepstra; ++d) {
        lo[d] = std::min(lo[d], frame.cepstrum[d]);
        hi[d] = std::max(hi[d], frame.cepstrum[d]);
      }
      lo[18] = std::min(lo[18], static_cast<double>(frame.pitch_period));
      hi[18] = std::max(hi[18], static_cast<double>(frame.pitch_period));
      lo[19] = std::min(lo[19], frame.pitch_correlation);
      hi[19] = std::max(hi[19], frame.pitch_correlation);
      ++total;
    }
  }
  if (total == 0) throw NumericError("cannot fit scaler on an empty corpus");

  FeatureScaler s;
  for (int d = 0; d < 20; ++d) {
    if (hi[d] > lo[d]) {
      s.offsets[d] = -0.5 * (lo[d] + hi[d]);
      s.gains[d] = 2.0 / (hi[d] - lo[d]);
    } else {
      s.offsets[d] = -lo[d];
      s.gains[d] = 1.0;
    }
  }
  s.fitted = true;
  return s;
}

void FeatureScaler::require_fitted() const {
  if (!fitted) throw NumericError("feature scaler is not fitted");
}

double FeatureScaler::scale_dim(int dim, double raw) const {
  require_fitted();
  return std::clamp((raw + offsets[dim]) * gains[dim], -1.0, 1.0);
}

double FeatureScaler::unscale_dim(int dim, double scaled) const {
  require_fitted();
  return scaled / gains[dim] - offsets[dim];
}

std::array<double, kFeatureDim> FeatureScaler::scale(
    const FeatureFrame& frame) const {
  std::array<double, kFeatureDim> out{};
  for (int d = 0; d < kNumCepstra; ++d) out[d] = scale_dim(d, frame.cepstrum[d]);
  out[18] = scale_dim(18, static_cast<double>(frame.pitch_period));
  out[19] = scale_dim(19, frame.pitch_correlation);
  return out;
}

std::array<double, kNumCepstra> FeatureScaler::scale_cepstrum(
    const std::array<double, kNumCepstra>& c) const {
  std::array<double, kNumCepstra> out{};
  for (int d = 0; d < kNumCepstra; ++d) out[d] = scale_dim(d, c[d]);
  return out;
}

std::array<double, 2> FeatureScaler::scale_pitch(double period,
                                                 double correlation) const {
  return {scale_dim(18, period), scale_dim(19, correlation)};
}

std::array<double, kNumCepstra> FeatureScaler::unscale_cepstrum(
    const std::array<double, kNumCepstra>& scaled) const {
  std::array<double, kNumCepstra> out{};
  for (int d = 0; d < kNumCepstra; ++d) out[d] = unscale_dim(d, scaled[d]);
  return out;
}

}  // namespace prcodec
