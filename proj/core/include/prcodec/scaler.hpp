// Per-dimension affine feature scaling into [-1, 1]. Fitted from corpus
// min/max; degenerate dimensions (max == min) map to 0.
#pragma once

#include <array>

#include "prcodec/types.hpp"

namespace prcodec {

class FeatureScaler {
 public:
  // scaled = (raw + offset) * gain, clamped to [-1, 1].
  std::array<double, 20> offsets{};
  std::array<double, 20> gains{};
  bool fitted = false;

  static FeatureScaler fit(const std::vector<FeatureStream>& corpus);

  std::array<double, kFeatureDim> scale(const FeatureFrame& frame) const;
  std::array<double, kNumCepstra> scale_cepstrum(
      const std::array<double, kNumCepstra>& c) const;
  // Pitch dims are indices 18 (period) and 19 (correlation).
  std::array<double, 2> scale_pitch(double period, double correlation) const;

  std::array<double, kNumCepstra> unscale_cepstrum(
      const std::array<double, kNumCepstra>& scaled) const;

  double scale_dim(int dim, double raw) const;
  double unscale_dim(int dim, double scaled) const;

 private:
  void require_fitted() const;
};

}  // namespace prcodec
