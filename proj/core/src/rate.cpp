#include "prcodec/rate.hpp"

#include <algorithm>

#include "prcodec/rng.hpp"

namespace prcodec {

FrequencyEstimate estimate_frequencies(const std::vector<FeatureStream>& corpus,
                                       const BitrateProfile& profile,
                                       const CodebookSet& books,
                                       const PredictorWeights& weights,
                                       int segment_frames, uint64_t seed) {
  FrequencyEstimate est;
  std::map<Role, std::vector<double>> counts;
  for (Role role : {Role::kSqLarge, Role::kSqSmall, Role::kVqLarge1,
                    Role::kVqLarge2, Role::kVqSmall}) {
    if (profile.has_role(role)) {
      counts[role].assign(profile.role_size(role), 0.0);
    }
  }

  Rng rng(seed);
  size_t sq_ql = 0, vq_ql = 0;
  for (const FeatureStream& stream : corpus) {
    if (stream.empty()) continue;
    const size_t total = stream.frames.size();
    const size_t seg_len = std::min<size_t>(segment_frames, total);
    const size_t max_start = total - seg_len;
    const size_t start = max_start > 0 ? rng.index(max_start + 1) : 0;

    FeatureStream segment;
    segment.frames.assign(stream.frames.begin() + start,
                          stream.frames.begin() + start + seg_len);
    const auto pitch_codes = pitch_packet_codes(segment);
    EncoderState state;
    for (size_t i = 0; i < segment.frames.size(); ++i) {
      const PitchValue pitch = dequantize_pitch(pitch_codes[i / kFramesPerPacket]);
      const CodedFrame coded =
          encode_frame(state, segment.frames[i].cepstrum, pitch, profile, books,
                       weights);
      if (coded.sq_flag) {
        ++sq_ql;
        counts[Role::kSqLarge][coded.sq_index] += 1.0;
      } else if (profile.has_role(Role::kSqSmall)) {
        counts[Role::kSqSmall][coded.sq_index] += 1.0;
      }
      if (coded.vq_flag) {
        ++vq_ql;
        counts[Role::kVqLarge1][coded.vq_indices[0]] += 1.0;
        counts[Role::kVqLarge2][coded.vq_indices[1]] += 1.0;
      } else if (profile.has_role(Role::kVqSmall)) {
        counts[Role::kVqSmall][coded.vq_indices[0]] += 1.0;
      }
      ++est.frames_coded;
    }
  }
  if (est.frames_coded == 0) {
    throw NumericError("no frames available for frequency estimation");
  }

  for (auto& [role, table] : counts) {
    for (double& c : table) {
      if (c == 0.0) c = 1.0;  // Laplace-smooth unseen codewords
    }
    double total = 0.0;
    for (double c : table) total += c;
    for (double& c : table) c /= total;
    est.frequencies[role] = table;
  }
  est.fraction_sq_ql = static_cast<double>(sq_ql) / est.frames_coded;
  est.fraction_vq_ql = static_cast<double>(vq_ql) / est.frames_coded;
  return est;
}

double rate_formula_bps(const BitrateProfile& profile,
                        const std::map<Role, double>& bits_per_frame,
                        double fraction_sq_ql, double fraction_vq_ql) {
  auto bpf = [&](Role role) {
    const auto it = bits_per_frame.find(role);
    if (it == bits_per_frame.end()) {
      throw NumericError(std::string("missing bits-per-frame for ") +
                         role_name(role));
    }
    return it->second;
  };

  double per_frame = fraction_sq_ql * bpf(Role::kSqLarge) +
                     fraction_vq_ql * (bpf(Role::kVqLarge1) + bpf(Role::kVqLarge2));
  if (profile.has_role(Role::kSqSmall)) {
    per_frame += (1.0 - fraction_sq_ql) * bpf(Role::kSqSmall);
  }
  if (profile.has_role(Role::kVqSmall)) {
    per_frame += (1.0 - fraction_vq_ql) * bpf(Role::kVqSmall);
  }
  return kFrameRateHz * per_frame + kPitchRateBps;
}

RatePrediction rate_report(const BitrateProfile& profile,
                           const FrequencyEstimate& estimate) {
  RatePrediction pred;
  std::map<Role, double> avg;
  for (const auto& [role, freqs] : estimate.frequencies) {
    pred.per_role[role] = bits_per_frame(freqs);
    avg[role] = pred.per_role[role].huffman_avg;
  }
  pred.formula_bps = rate_formula_bps(profile, avg, estimate.fraction_sq_ql,
                                      estimate.fraction_vq_ql);
  pred.flag_overhead_bps = profile.transmit_flags ? 2.0 * kFrameRateHz : 0.0;
  pred.total_bps = pred.formula_bps + pred.flag_overhead_bps;
  return pred;
}

}  // namespace prcodec
