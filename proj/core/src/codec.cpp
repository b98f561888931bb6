#include "prcodec/codec.hpp"

#include <algorithm>
#include <cmath>

namespace prcodec {

CodedFrame encode_frame(EncoderState& state,
                        const std::array<double, kNumCepstra>& cepstrum_raw,
                        const PitchValue& pitch, const BitrateProfile& profile,
                        const CodebookSet& books, const PredictorWeights& weights,
                        std::array<double, kNumCepstra>* residual_out) {
  const auto pitch_scaled =
      weights.scaler.scale_pitch(pitch.period, pitch.correlation);
  const auto prediction = grid_snap(predict_step(
      weights, state.predictor_state, state.last_reconstruction, pitch_scaled));
  const auto target = grid_snap(weights.scaler.scale_cepstrum(cepstrum_raw));

  std::array<double, kNumCepstra> residual{};
  for (int d = 0; d < kNumCepstra; ++d) residual[d] = target[d] - prediction[d];
  if (residual_out != nullptr) *residual_out = residual;

  const CodedFrame coded = quantize_residual(residual, profile, books);
  const auto coded_residual = dequantize_residual(coded, profile, books);
  for (int d = 0; d < kNumCepstra; ++d) {
    state.last_reconstruction[d] = prediction[d] + coded_residual[d];
  }
  ++state.frame_index;
  return coded;
}

FeatureFrame decode_frame(DecoderState& state, const CodedFrame& coded,
                          const PitchValue& pitch, const BitrateProfile& profile,
                          const CodebookSet& books,
                          const PredictorWeights& weights) {
  const auto pitch_scaled =
      weights.scaler.scale_pitch(pitch.period, pitch.correlation);
  const auto prediction = grid_snap(predict_step(
      weights, state.predictor_state, state.last_reconstruction, pitch_scaled));
  const auto coded_residual = dequantize_residual(coded, profile, books);
  for (int d = 0; d < kNumCepstra; ++d) {
    state.last_reconstruction[d] = prediction[d] + coded_residual[d];
  }
  ++state.frame_index;

  FeatureFrame frame;
  frame.cepstrum = weights.scaler.unscale_cepstrum(state.last_reconstruction);
  frame.pitch_period = std::clamp(
      static_cast<int>(std::lround(pitch.period)), kMinPitchLag, kMaxPitchLag);
  frame.pitch_correlation = pitch.correlation;
  return frame;
}

EncodeResult encode_stream(const FeatureStream& stream,
                           const PredictorWeights& weights,
                           const CodecConfig& config) {
  EncodeResult result;
  result.pitch_codes = pitch_packet_codes(stream);
  const size_t n = stream.frames.size();
  result.coded.reserve(n);
  result.reconstructions.reserve(n);
  result.residuals.reserve(n);

  EncoderState state;
  for (size_t i = 0; i < n; ++i) {
    const PitchValue pitch =
        dequantize_pitch(result.pitch_codes[i / kFramesPerPacket]);
    std::array<double, kNumCepstra> residual{};
    result.coded.push_back(encode_frame(state, stream.frames[i].cepstrum, pitch,
                                        config.profile, config.books, weights,
                                        &residual));
    result.residuals.push_back(residual);
    result.reconstructions.push_back(state.last_reconstruction);
  }

  result.bitstream =
      pack(result.coded, result.pitch_codes, config.profile, config.huffman,
           config.weights_hash, config.codebook_hash);
  return result;
}

DecodeResult decode_stream(const std::vector<uint8_t>& bytes,
                           const PredictorWeights& weights,
                           const CodecConfig& config) {
  const StreamHeader header = read_header(bytes);
  if (header.weights_hash != config.weights_hash) {
    throw FormatError("bitstream was encoded with different predictor weights");
  }
  if (header.codebook_hash != config.codebook_hash) {
    throw FormatError("bitstream was encoded with a different codebook file");
  }
  const UnpackedStream unpacked = unpack(bytes, config.profile, config.huffman);

  DecodeResult result;
  result.features.frames.reserve(unpacked.frames.size());
  result.reconstructions.reserve(unpacked.frames.size());
  DecoderState state;
  for (size_t i = 0; i < unpacked.frames.size(); ++i) {
    const PitchValue pitch =
        dequantize_pitch(unpacked.pitch_codes[i / kFramesPerPacket]);
    result.features.frames.push_back(decode_frame(state, unpacked.frames[i],
                                                  pitch, config.profile,
                                                  config.books, weights));
    result.reconstructions.push_back(state.last_reconstruction);
  }
  return result;
}

}  // namespace prcodec
