// Bitrate accounting: codeword frequency estimation from coded segments
// and the frame_rate * sum(fraction * bits-per-frame) + pitch formula.
// The formula itself carries no flag cost; the flag overhead (2 bits per
// frame where flags are transmitted) is reported separately.
#pragma once

#include <map>

#include "prcodec/codec.hpp"

namespace prcodec {

inline constexpr double kFrameRateHz = 100.0;
inline constexpr double kPitchRateBps = 275.0;  // 11 bits per 40 ms packet

struct FrequencyEstimate {
  std::map<Role, std::vector<double>> frequencies;  // normalized, smoothed
  double fraction_sq_ql = 0.0;  // measured share of frames on the Q_L path
  double fraction_vq_ql = 0.0;
  size_t frames_coded = 0;
};

// Runs the full encoder over one randomly placed segment per utterance
// (2 s by default) and tallies the emitted indices per quantizer role.
// Zero counts are Laplace-smoothed with 1.
FrequencyEstimate estimate_frequencies(const std::vector<FeatureStream>& corpus,
                                       const BitrateProfile& profile,
                                       const CodebookSet& books,
                                       const PredictorWeights& weights,
                                       int segment_frames, uint64_t seed);

// rate = 100 * [ f_sq * bpf(SQ_L) + (1-f_sq) * bpf(SQ_S)
//              + f_vq * (bpf(VQ_L1) + bpf(VQ_L2)) + (1-f_vq) * bpf(VQ_S) ]
//      + 275
// with the Q_S terms present only where the profile defines them.
double rate_formula_bps(const BitrateProfile& profile,
                        const std::map<Role, double>& bits_per_frame,
                        double fraction_sq_ql, double fraction_vq_ql);

struct RatePrediction {
  double formula_bps = 0.0;        // the accounting formula above
  double flag_overhead_bps = 0.0;  // 200 for low/mid, 0 for high
  double total_bps = 0.0;          // formula + flags
  std::map<Role, BitsPerFrame> per_role;
};

RatePrediction rate_report(const BitrateProfile& profile,
                           const FrequencyEstimate& estimate);

}  // namespace prcodec
