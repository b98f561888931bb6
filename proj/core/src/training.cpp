#include "prcodec/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prcodec/bitstream.hpp"
#include "prcodec/linalg.hpp"
#include "prcodec/rng.hpp"

namespace prcodec {

namespace {

// Gradient storage shaped like the weights (GruLayer doubles as a plain
// tensor container here).
struct Gradients {
  PredictorWeights store;

  explicit Gradients(const PredictorWeights& like) {
    store.gru1.resize(like.gru1.input_dim, like.gru1.hidden_dim);
    store.gru2.resize(like.gru2.input_dim, like.gru2.hidden_dim);
    store.out_w.assign(like.out_w.size(), 0.0);
    store.out_b.assign(like.out_b.size(), 0.0);
  }

  void zero() {
    for (auto& [name, vec] : weight_blocks(store)) {
      std::fill(vec->begin(), vec->end(), 0.0);
    }
  }
};

struct PreparedStream {
  std::vector<std::array<double, kNumCepstra>> cepstra;  // scaled targets
  std::vector<std::array<double, 2>> pitch;              // scaled conditioning
};

PreparedStream prepare_stream(const FeatureStream& stream,
                              const FeatureScaler& scaler) {
  PreparedStream prep;
  const auto pitch = conditioned_pitch_values(stream);
  prep.cepstra.resize(stream.frames.size());
  prep.pitch.resize(stream.frames.size());
  for (size_t n = 0; n < stream.frames.size(); ++n) {
    prep.cepstra[n] = scaler.scale_cepstrum(stream.frames[n].cepstrum);
    const auto p = scaler.scale_pitch(pitch[n].period, pitch[n].correlation);
    prep.pitch[n] = {p[0], p[1]};
  }
  return prep;
}

struct Segment {
  std::vector<std::array<double, kPredictorInputDim>> inputs;
  std::vector<std::array<double, kNumCepstra>> targets;
  size_t length() const { return targets.size(); }
};

// Inputs are the previous ground-truth scaled cepstra (zeros at stream
// start) with optional Gaussian noise on the cepstral slots, plus the
// current frame's conditioned pitch.
Segment build_segment(const PreparedStream& prep, size_t start, size_t length,
                      double noise_std, Rng* noise_rng) {
  Segment seg;
  seg.inputs.resize(length);
  seg.targets.resize(length);
  for (size_t t = 0; t < length; ++t) {
    const size_t n = start + t;
    auto& x = seg.inputs[t];
    if (n == 0) {
      for (int d = 0; d < kNumCepstra; ++d) x[d] = 0.0;
    } else {
      for (int d = 0; d < kNumCepstra; ++d) x[d] = prep.cepstra[n - 1][d];
    }
    if (noise_rng != nullptr && noise_std > 0.0) {
      for (int d = 0; d < kNumCepstra; ++d) x[d] += noise_std * noise_rng->normal();
    }
    x[18] = prep.pitch[n][0];
    x[19] = prep.pitch[n][1];
    seg.targets[t] = prep.cepstra[n];
  }
  return seg;
}

struct LayerCache {
  std::vector<Vec> h;  // h[t] after step t; h_prev of step t is h[t-1] or zeros
  std::vector<GruActivations> acts;
};

struct ForwardCache {
  LayerCache l1, l2;
  std::vector<std::array<double, kNumCepstra>> y;
};

double forward(const PredictorWeights& w, const Segment& seg,
               ForwardCache* cache) {
  const size_t T = seg.length();
  Vec h1(kGru1Hidden, 0.0), h2(kGru2Hidden, 0.0);
  Vec h1_next(kGru1Hidden), h2_next(kGru2Hidden);
  if (cache != nullptr) {
    cache->l1.h.resize(T);
    cache->l1.acts.resize(T);
    cache->l2.h.resize(T);
    cache->l2.acts.resize(T);
    cache->y.resize(T);
  }
  double loss = 0.0;
  for (size_t t = 0; t < T; ++t) {
    GruActivations* a1 = cache ? &cache->l1.acts[t] : nullptr;
    GruActivations* a2 = cache ? &cache->l2.acts[t] : nullptr;
    gru_step(w.gru1, seg.inputs[t].data(), h1.data(), h1_next.data(), a1);
    gru_step(w.gru2, h1_next.data(), h2.data(), h2_next.data(), a2);

    std::array<double, kNumCepstra> y{};
    matvec(w.out_w.data(), h2_next.data(), kNumCepstra, kGru2Hidden, y.data());
    for (int d = 0; d < kNumCepstra; ++d) {
      y[d] = std::tanh(y[d] + w.out_b[d]);
      const double err = y[d] - seg.targets[t][d];
      loss += err * err;
    }
    h1.swap(h1_next);
    h2.swap(h2_next);
    if (cache != nullptr) {
      cache->l1.h[t] = h1;
      cache->l2.h[t] = h2;
      cache->y[t] = y;
    }
  }
  return loss / (static_cast<double>(T) * kNumCepstra);
}

// Backward through one GRU step. dh is the gradient w.r.t. this step's
// output state; on return dh_prev has the carry for step t-1 and dx the
// gradient w.r.t. the step input.
void gru_backward(const GruLayer& layer, const double* x, const double* h_prev,
                  const GruActivations& acts, const Vec& dh, GruLayer& grads,
                  Vec& dx, Vec& dh_prev) {
  const int h = layer.hidden_dim;
  const int in = layer.input_dim;
  Vec da_n(h), da_z(h), da_r(h), dg(h);
  for (int i = 0; i < h; ++i) {
    const double r = acts.r[i], z = acts.z[i], n = acts.n[i], g = acts.g[i];
    const double dz = dh[i] * (h_prev[i] - n);
    const double dn = dh[i] * (1.0 - z);
    dh_prev[i] = dh[i] * z;
    da_n[i] = dn * (1.0 - n * n);
    const double dr = da_n[i] * g;
    dg[i] = da_n[i] * r;
    da_z[i] = dz * z * (1.0 - z);
    da_r[i] = dr * r * (1.0 - r);
  }

  outer_add(da_n.data(), x, h, in, grads.w_in.data());
  outer_add(dg.data(), h_prev, h, h, grads.w_hn.data());
  outer_add(da_z.data(), x, h, in, grads.w_iz.data());
  outer_add(da_z.data(), h_prev, h, h, grads.w_hz.data());
  outer_add(da_r.data(), x, h, in, grads.w_ir.data());
  outer_add(da_r.data(), h_prev, h, h, grads.w_hr.data());
  for (int i = 0; i < h; ++i) {
    grads.b_in[i] += da_n[i];
    grads.b_hn[i] += dg[i];
    grads.b_iz[i] += da_z[i];
    grads.b_hz[i] += da_z[i];
    grads.b_ir[i] += da_r[i];
    grads.b_hr[i] += da_r[i];
  }

  std::fill(dx.begin(), dx.end(), 0.0);
  matvec_transpose_add(layer.w_in.data(), da_n.data(), h, in, dx.data());
  matvec_transpose_add(layer.w_iz.data(), da_z.data(), h, in, dx.data());
  matvec_transpose_add(layer.w_ir.data(), da_r.data(), h, in, dx.data());
  matvec_transpose_add(layer.w_hn.data(), dg.data(), h, h, dh_prev.data());
  matvec_transpose_add(layer.w_hz.data(), da_z.data(), h, h, dh_prev.data());
  matvec_transpose_add(layer.w_hr.data(), da_r.data(), h, h, dh_prev.data());
}

double forward_backward(const PredictorWeights& w, const Segment& seg,
                        Gradients& grads) {
  ForwardCache cache;
  const double loss = forward(w, seg, &cache);
  const size_t T = seg.length();
  const double scale = 2.0 / (static_cast<double>(T) * kNumCepstra);

  const Vec zeros1(kGru1Hidden, 0.0), zeros2(kGru2Hidden, 0.0);
  Vec dh1_carry(kGru1Hidden, 0.0), dh2_carry(kGru2Hidden, 0.0);
  Vec dh2(kGru2Hidden), dh1(kGru1Hidden);
  Vec dx2(kGru1Hidden), dx1(kPredictorInputDim);
  Vec da_y(kNumCepstra);

  for (size_t t = T; t-- > 0;) {
    const auto& y = cache.y[t];
    for (int d = 0; d < kNumCepstra; ++d) {
      const double dy = scale * (y[d] - seg.targets[t][d]);
      da_y[d] = dy * (1.0 - y[d] * y[d]);
      grads.store.out_b[d] += da_y[d];
    }
    const Vec& h2_t = cache.l2.h[t];
    outer_add(da_y.data(), h2_t.data(), kNumCepstra, kGru2Hidden,
              grads.store.out_w.data());

    dh2 = dh2_carry;
    matvec_transpose_add(w.out_w.data(), da_y.data(), kNumCepstra, kGru2Hidden,
                         dh2.data());
    const Vec& h2_prev = (t == 0) ? zeros2 : cache.l2.h[t - 1];
    const Vec& h1_t = cache.l1.h[t];
    std::fill(dh2_carry.begin(), dh2_carry.end(), 0.0);
    gru_backward(w.gru2, h1_t.data(), h2_prev.data(), cache.l2.acts[t], dh2,
                 grads.store.gru2, dx2, dh2_carry);

    dh1 = dh1_carry;
    for (int i = 0; i < kGru1Hidden; ++i) dh1[i] += dx2[i];
    const Vec& h1_prev = (t == 0) ? zeros1 : cache.l1.h[t - 1];
    std::fill(dh1_carry.begin(), dh1_carry.end(), 0.0);
    gru_backward(w.gru1, seg.inputs[t].data(), h1_prev.data(), cache.l1.acts[t],
                 dh1, grads.store.gru1, dx1, dh1_carry);
  }
  return loss;
}

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate <= 0.0 || epochs < 0 || truncation_length <= 0 ||
      noise_std < 0.0 || batch_size <= 0 || clip_norm <= 0.0 ||
      momentum < 0.0 || momentum >= 1.0) {
    throw NumericError("invalid training configuration");
  }
}

std::vector<std::array<double, 2>> conditioned_pitch(
    const FeatureStream& stream, const FeatureScaler& scaler) {
  const auto values = conditioned_pitch_values(stream);
  std::vector<std::array<double, 2>> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const auto p = scaler.scale_pitch(values[i].period, values[i].correlation);
    out[i] = {p[0], p[1]};
  }
  return out;
}

TrainResult train_predictor(const std::vector<FeatureStream>& corpus,
                            const FeatureScaler& scaler,
                            const TrainConfig& config) {
  config.validate();
  if (!scaler.fitted) throw NumericError("scaler must be fitted before training");
  std::vector<const FeatureStream*> usable;
  for (const auto& s : corpus) {
    if (!s.empty()) usable.push_back(&s);
  }
  if (usable.empty()) throw NumericError("training corpus is empty");

  TrainResult result;
  result.weights = init_weights(config.seed);
  result.weights.scaler = scaler;
  if (config.epochs == 0) return result;

  std::vector<PreparedStream> prepared;
  prepared.reserve(usable.size());
  for (const auto* s : usable) prepared.push_back(prepare_stream(*s, scaler));

  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  Gradients grads(result.weights);
  Gradients velocity(result.weights);

  auto grad_vecs = weight_blocks(grads.store);
  auto vel_vecs = weight_blocks(velocity.store);
  auto weight_vecs = weight_blocks(result.weights);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Random fixed-length segments, roughly covering each stream once.
    std::vector<std::pair<size_t, size_t>> segments;  // (stream, start)
    for (size_t s = 0; s < prepared.size(); ++s) {
      const size_t total = prepared[s].cepstra.size();
      const size_t seg_len =
          std::min<size_t>(config.truncation_length, total);
      const size_t count = (total + seg_len - 1) / seg_len;
      const size_t max_start = total - seg_len;
      for (size_t k = 0; k < count; ++k) {
        const size_t start = max_start > 0 ? rng.index(max_start + 1) : 0;
        segments.emplace_back(s, start);
      }
    }
    for (size_t i = segments.size(); i > 1; --i) {
      std::swap(segments[i - 1], segments[rng.index(i)]);
    }

    double epoch_loss = 0.0;
    size_t seg_count = 0;
    for (size_t batch_start = 0; batch_start < segments.size();
         batch_start += config.batch_size) {
      const size_t batch_end =
          std::min(segments.size(), batch_start + static_cast<size_t>(config.batch_size));
      grads.zero();
      double batch_loss = 0.0;
      for (size_t i = batch_start; i < batch_end; ++i) {
        const auto& [stream_idx, start] = segments[i];
        const PreparedStream& prep = prepared[stream_idx];
        const size_t seg_len =
            std::min<size_t>(config.truncation_length, prep.cepstra.size());
        const Segment seg =
            build_segment(prep, start, seg_len, config.noise_std, &rng);
        batch_loss += forward_backward(result.weights, seg, grads);
      }
      const double inv = 1.0 / static_cast<double>(batch_end - batch_start);
      batch_loss *= inv;
      if (!std::isfinite(batch_loss)) {
        throw NumericError("training loss is not finite at epoch " +
                           std::to_string(epoch + 1));
      }
      epoch_loss += batch_loss * static_cast<double>(batch_end - batch_start);
      seg_count += batch_end - batch_start;

      // Average, clip by global norm, then momentum step.
      double norm_sq = 0.0;
      for (auto& [name, g] : grad_vecs) {
        for (double& v : *g) {
          v *= inv;
          norm_sq += v * v;
        }
      }
      const double norm = std::sqrt(norm_sq);
      const double clip_scale =
          norm > config.clip_norm ? config.clip_norm / norm : 1.0;
      for (size_t b = 0; b < grad_vecs.size(); ++b) {
        Vec& g = *grad_vecs[b].second;
        Vec& v = *vel_vecs[b].second;
        Vec& w = *weight_vecs[b].second;
        for (size_t j = 0; j < g.size(); ++j) {
          v[j] = config.momentum * v[j] - config.learning_rate * clip_scale * g[j];
          w[j] += v[j];
        }
      }
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(seg_count));
  }
  return result;
}

GradCheckReport grad_check(const PredictorWeights& weights,
                           const FeatureStream& sequence, uint64_t seed) {
  if (sequence.empty()) throw NumericError("grad_check needs a non-empty sequence");
  if (!weights.scaler.fitted) throw NumericError("grad_check needs a fitted scaler");

  const PreparedStream prep = prepare_stream(sequence, weights.scaler);
  const size_t length = std::min<size_t>(prep.cepstra.size(), 10);
  const Segment seg = build_segment(prep, 0, length, 0.0, nullptr);

  PredictorWeights work = weights;
  Gradients analytic(work);
  forward_backward(work, seg, analytic);

  auto weight_vecs = weight_blocks(work);
  auto grad_vecs = weight_blocks(analytic.store);

  constexpr double kStep = 1e-5;
  constexpr int kDirections = 3;
  constexpr int kEntries = 4;
  Rng rng(seed);
  GradCheckReport report;

  auto relative = [](double a, double f) {
    return std::abs(a - f) / std::max(1e-6, std::abs(a) + std::abs(f));
  };

  for (size_t b = 0; b < weight_vecs.size(); ++b) {
    Vec& w = *weight_vecs[b].second;
    const Vec& g = *grad_vecs[b].second;
    double block_max = 0.0;

    // Rademacher directions probe the whole block at once.
    std::vector<int8_t> dir(w.size());
    for (int rep = 0; rep < kDirections; ++rep) {
      double analytic_dd = 0.0;
      for (size_t j = 0; j < w.size(); ++j) {
        dir[j] = (rng.raw() & 1) ? 1 : -1;
        analytic_dd += g[j] * dir[j];
      }
      for (size_t j = 0; j < w.size(); ++j) w[j] += kStep * dir[j];
      const double loss_plus = forward(work, seg, nullptr);
      for (size_t j = 0; j < w.size(); ++j) w[j] -= 2.0 * kStep * dir[j];
      const double loss_minus = forward(work, seg, nullptr);
      for (size_t j = 0; j < w.size(); ++j) w[j] += kStep * dir[j];
      const double fd = (loss_plus - loss_minus) / (2.0 * kStep);
      block_max = std::max(block_max, relative(analytic_dd, fd));
    }

    // A few individual entries.
    double entry_max = 0.0;
    for (int rep = 0; rep < kEntries; ++rep) {
      const size_t j = rng.index(w.size());
      const double saved = w[j];
      w[j] = saved + kStep;
      const double loss_plus = forward(work, seg, nullptr);
      w[j] = saved - kStep;
      const double loss_minus = forward(work, seg, nullptr);
      w[j] = saved;
      const double fd = (loss_plus - loss_minus) / (2.0 * kStep);
      entry_max = std::max(entry_max, relative(g[j], fd));
    }
    block_max = std::max(block_max, entry_max);

    report.per_block[weight_vecs[b].first] = block_max;
    report.per_block_entries[weight_vecs[b].first] = entry_max;
    report.max_relative_error = std::max(report.max_relative_error, block_max);
  }
  return report;
}

}  // namespace prcodec
