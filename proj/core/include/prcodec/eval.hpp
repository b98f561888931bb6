// Corpus evaluation: measured vs predicted bitrate, feature-domain
// distortion, Q_L fractions, and the residual-vs-feature variance ratio.
#pragma once

#include <string>

#include "prcodec/bundle.hpp"

namespace prcodec {

inline constexpr double kAlgorithmicDelayMs = 15.0;  // 10 ms frame + 5 ms look-ahead

struct EvalReport {
  std::string profile;
  size_t utterances = 0;
  size_t total_frames = 0;

  double measured_payload_bps = 0.0;  // packet bits only, headers excluded
  double predicted_formula_bps = 0.0;
  double predicted_flag_bps = 0.0;
  double predicted_total_bps = 0.0;
  double pitch_bps = 0.0;

  double cepstral_mse_mean = 0.0;  // per-frame MSE, scaled units
  double cepstral_mse_p95 = 0.0;

  double fraction_sq_ql = 0.0;  // measured on this corpus
  double fraction_vq_ql = 0.0;

  double residual_variance = 0.0;  // scaled units, pooled over dims
  double feature_variance = 0.0;
  double variance_ratio = 0.0;

  double algorithmic_delay_ms = kAlgorithmicDelayMs;
};

// Encodes every utterance with the bundle. When trace_dir is non-empty a
// per-utterance CSV (frame, l1_r0, l1_rvec, sq_flag, vq_flag) lands there.
EvalReport evaluate_corpus(const std::vector<FeatureStream>& corpus,
                           const CodecBundle& bundle,
                           const std::string& trace_dir = "");

std::string eval_report_json(const EvalReport& report);

}  // namespace prcodec
