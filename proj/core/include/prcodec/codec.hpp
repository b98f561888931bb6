// Encoder/decoder residual recursion. Both sides run the same predictor on
// the same reconstructed history: the encoder quantizes its prediction
// residual and feeds the *noisy* reconstruction back, so its state stays
// bit-identical to the decoder's.
//
//   prediction = F_pred(last_reconstruction, pitch)
//   residual   = scaled_cepstrum - prediction
//   coded      = quantize(residual)
//   last_reconstruction = prediction + dequantize(coded)
#pragma once

#include "prcodec/bitstream.hpp"
#include "prcodec/predictor.hpp"
#include "prcodec/quantizer.hpp"
#include "prcodec/types.hpp"

namespace prcodec {

using CodedFrame = QuantizedResidual;

struct EncoderState {
  PredictorState predictor_state;
  std::array<double, kNumCepstra> last_reconstruction{};  // scaled, starts at 0
  size_t frame_index = 0;

  void reset() {
    predictor_state.reset();
    last_reconstruction.fill(0.0);
    frame_index = 0;
  }
};

// The decoder keeps exactly the same state and initialization.
using DecoderState = EncoderState;

// Everything encoder and decoder must agree on.
struct CodecConfig {
  BitrateProfile profile;
  CodebookSet books;
  HuffmanSet huffman;
  uint64_t weights_hash = 0;
  uint64_t codebook_hash = 0;
};

// One frame forward. `pitch` carries the packet-dequantized values both
// sides condition on. After the call state.last_reconstruction equals
// prediction + dequantize(coded) exactly. `residual_out`, when given,
// receives the unquantized scaled residual.
CodedFrame encode_frame(EncoderState& state,
                        const std::array<double, kNumCepstra>& cepstrum_raw,
                        const PitchValue& pitch, const BitrateProfile& profile,
                        const CodebookSet& books, const PredictorWeights& weights,
                        std::array<double, kNumCepstra>* residual_out = nullptr);

// Mirror image; returns the reconstructed frame (unscaled cepstra, packet
// pitch). state.last_reconstruction holds the scaled reconstruction.
FeatureFrame decode_frame(DecoderState& state, const CodedFrame& coded,
                          const PitchValue& pitch, const BitrateProfile& profile,
                          const CodebookSet& books, const PredictorWeights& weights);

struct EncodeResult {
  Bitstream bitstream;
  std::vector<CodedFrame> coded;
  std::vector<uint16_t> pitch_codes;
  // Per-frame internals in scaled units, for symmetry checks and reports.
  std::vector<std::array<double, kNumCepstra>> reconstructions;
  std::vector<std::array<double, kNumCepstra>> residuals;
};

EncodeResult encode_stream(const FeatureStream& stream,
                           const PredictorWeights& weights,
                           const CodecConfig& config);

struct DecodeResult {
  FeatureStream features;
  std::vector<std::array<double, kNumCepstra>> reconstructions;  // scaled
};

// Validates header hashes against the config before decoding.
DecodeResult decode_stream(const std::vector<uint8_t>& bytes,
                           const PredictorWeights& weights,
                           const CodecConfig& config);

}  // namespace prcodec
