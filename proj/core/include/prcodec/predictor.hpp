// Frame-level feature predictor: two GRU layers (384, 128 hidden units)
// followed by a tanh linear head that maps the second hidden state to the
// 18 predicted cepstral coefficients. Inputs are the previous frame's
// scaled cepstra concatenated with the current frame's scaled pitch.
//
// GRU convention (reset gate applied inside the candidate's recurrent
// term, the common "v3" formulation):
//   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r .* (W_hn h + b_hn))
//   h' = (1 - z) .* n + z .* h
#pragma once

#include <array>
#include <string>

#include "prcodec/scaler.hpp"
#include "prcodec/types.hpp"

namespace prcodec {

inline constexpr int kPredictorInputDim = kFeatureDim;  // 18 cepstra + 2 pitch
inline constexpr int kGru1Hidden = 384;
inline constexpr int kGru2Hidden = 128;

struct GruLayer {
  int input_dim = 0;
  int hidden_dim = 0;
  // Row-major [hidden, input] and [hidden, hidden] matrices.
  Vec w_ir, w_iz, w_in;
  Vec w_hr, w_hz, w_hn;
  Vec b_ir, b_iz, b_in;
  Vec b_hr, b_hz, b_hn;

  void resize(int input, int hidden);
};

struct PredictorWeights {
  GruLayer gru1;  // 20 -> 384
  GruLayer gru2;  // 384 -> 128
  Vec out_w;      // [18, 128]
  Vec out_b;      // [18]
  FeatureScaler scaler;

  size_t parameter_count() const;
};

struct PredictorState {
  std::array<double, kGru1Hidden> h1{};
  std::array<double, kGru2Hidden> h2{};

  void reset() {
    h1.fill(0.0);
    h2.fill(0.0);
  }
};

// Per-step activations kept for backpropagation.
struct GruActivations {
  Vec r, z, n, g;  // g = W_hn h + b_hn (pre-reset recurrent candidate)
};

// One GRU step. h_in and h_out may not alias. When acts is non-null the
// gate values are recorded for the trainer.
void gru_step(const GruLayer& layer, const double* x, const double* h_in,
              double* h_out, GruActivations* acts = nullptr);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init, values rounded through
// float32 so that save/load roundtrips bit-exactly.
PredictorWeights init_weights(uint64_t seed);

// Predicts the scaled cepstrum of the next frame and advances the state.
// Every output entry is strictly inside (-1, 1).
std::array<double, kNumCepstra> predict_step(
    const PredictorWeights& weights, PredictorState& state,
    const std::array<double, kNumCepstra>& prev_cepstra_scaled,
    const std::array<double, 2>& pitch_scaled);

// Named views over all 26 parameter blocks, in serialization order.
std::vector<std::pair<std::string, Vec*>> weight_blocks(PredictorWeights& w);

// Little-endian "PRDW" container: per-tensor name/shape/f32 data, then the
// scaler as two 20-entry float arrays. load(save(w)) is bit-identical for
// float-valued weights.
void save_weights(const PredictorWeights& weights, const std::string& path);
PredictorWeights load_weights(const std::string& path);

// Human-readable tensor listing (magic, version, shapes, norms).
std::string describe_weights_file(const std::string& path);

}  // namespace prcodec
