#include "prcodec/predictor.hpp"

#include <cmath>
#include <sstream>

#include "prcodec/binio.hpp"
#include "prcodec/linalg.hpp"
#include "prcodec/rng.hpp"

namespace prcodec {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TensorRef {
  std::string name;
  std::vector<uint32_t> dims;
  Vec* data;
};

std::vector<TensorRef> tensor_table(PredictorWeights& w) {
  auto layer = [](const std::string& prefix, GruLayer& g) {
    const uint32_t h = static_cast<uint32_t>(g.hidden_dim);
    const uint32_t i = static_cast<uint32_t>(g.input_dim);
    return std::vector<TensorRef>{
        {prefix + ".w_ir", {h, i}, &g.w_ir}, {prefix + ".w_iz", {h, i}, &g.w_iz},
        {prefix + ".w_in", {h, i}, &g.w_in}, {prefix + ".w_hr", {h, h}, &g.w_hr},
        {prefix + ".w_hz", {h, h}, &g.w_hz}, {prefix + ".w_hn", {h, h}, &g.w_hn},
        {prefix + ".b_ir", {h}, &g.b_ir},    {prefix + ".b_iz", {h}, &g.b_iz},
        {prefix + ".b_in", {h}, &g.b_in},    {prefix + ".b_hr", {h}, &g.b_hr},
        {prefix + ".b_hz", {h}, &g.b_hz},    {prefix + ".b_hn", {h}, &g.b_hn}};
  };
  std::vector<TensorRef> refs = layer("gru1", w.gru1);
  auto l2 = layer("gru2", w.gru2);
  refs.insert(refs.end(), l2.begin(), l2.end());
  refs.push_back({"out.w",
                  {static_cast<uint32_t>(kNumCepstra),
                   static_cast<uint32_t>(kGru2Hidden)},
                  &w.out_w});
  refs.push_back({"out.b", {static_cast<uint32_t>(kNumCepstra)}, &w.out_b});
  return refs;
}

constexpr uint32_t kWeightsVersion = 1;
constexpr char kWeightsMagic[4] = {'P', 'R', 'D', 'W'};

}  // namespace

void GruLayer::resize(int input, int hidden) {
  input_dim = input;
  hidden_dim = hidden;
  const size_t hi = static_cast<size_t>(hidden) * input;
  const size_t hh = static_cast<size_t>(hidden) * hidden;
  w_ir.assign(hi, 0.0);
  w_iz.assign(hi, 0.0);
  w_in.assign(hi, 0.0);
  w_hr.assign(hh, 0.0);
  w_hz.assign(hh, 0.0);
  w_hn.assign(hh, 0.0);
  b_ir.assign(hidden, 0.0);
  b_iz.assign(hidden, 0.0);
  b_in.assign(hidden, 0.0);
  b_hr.assign(hidden, 0.0);
  b_hz.assign(hidden, 0.0);
  b_hn.assign(hidden, 0.0);
}

size_t PredictorWeights::parameter_count() const {
  size_t n = 0;
  auto refs = tensor_table(const_cast<PredictorWeights&>(*this));
  for (const auto& t : refs) n += t.data->size();
  return n;
}

void gru_step(const GruLayer& layer, const double* x, const double* h_in,
              double* h_out, GruActivations* acts) {
  const int h = layer.hidden_dim;
  const int in = layer.input_dim;
  if (h == 0 || in == 0) throw NumericError("gru_step on unsized layer");

  Vec r(h), z(h), n(h), g(h);
  matvec(layer.w_ir.data(), x, h, in, r.data());
  matvec(layer.w_iz.data(), x, h, in, z.data());
  matvec(layer.w_in.data(), x, h, in, n.data());
  matvec_add(layer.w_hr.data(), h_in, h, h, r.data());
  matvec_add(layer.w_hz.data(), h_in, h, h, z.data());
  matvec(layer.w_hn.data(), h_in, h, h, g.data());

  for (int i = 0; i < h; ++i) {
    r[i] = sigmoid(r[i] + layer.b_ir[i] + layer.b_hr[i]);
    z[i] = sigmoid(z[i] + layer.b_iz[i] + layer.b_hz[i]);
    g[i] += layer.b_hn[i];
    n[i] = std::tanh(n[i] + layer.b_in[i] + r[i] * g[i]);
    h_out[i] = (1.0 - z[i]) * n[i] + z[i] * h_in[i];
  }
  if (acts != nullptr) {
    acts->r = std::move(r);
    acts->z = std::move(z);
    acts->n = std::move(n);
    acts->g = std::move(g);
  }
}

PredictorWeights init_weights(uint64_t seed) {
  PredictorWeights w;
  w.gru1.resize(kPredictorInputDim, kGru1Hidden);
  w.gru2.resize(kGru1Hidden, kGru2Hidden);
  w.out_w.assign(static_cast<size_t>(kNumCepstra) * kGru2Hidden, 0.0);
  w.out_b.assign(kNumCepstra, 0.0);

  Rng rng(seed);
  auto fill = [&rng](Vec& v, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& e : v) {
      e = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
    }
  };
  auto fill_layer = [&fill](GruLayer& g) {
    fill(g.w_ir, g.input_dim);
    fill(g.w_iz, g.input_dim);
    fill(g.w_in, g.input_dim);
    fill(g.w_hr, g.hidden_dim);
    fill(g.w_hz, g.hidden_dim);
    fill(g.w_hn, g.hidden_dim);
    fill(g.b_ir, g.hidden_dim);
    fill(g.b_iz, g.hidden_dim);
    fill(g.b_in, g.hidden_dim);
    fill(g.b_hr, g.hidden_dim);
    fill(g.b_hz, g.hidden_dim);
    fill(g.b_hn, g.hidden_dim);
  };
  fill_layer(w.gru1);
  fill_layer(w.gru2);
  fill(w.out_w, kGru2Hidden);
  fill(w.out_b, kGru2Hidden);
  return w;
}

std::array<double, kNumCepstra> predict_step(
    const PredictorWeights& weights, PredictorState& state,
    const std::array<double, kNumCepstra>& prev_cepstra_scaled,
    const std::array<double, 2>& pitch_scaled) {
  if (weights.gru1.input_dim != kPredictorInputDim ||
      weights.gru1.hidden_dim != kGru1Hidden ||
      weights.gru2.input_dim != kGru1Hidden ||
      weights.gru2.hidden_dim != kGru2Hidden) {
    throw NumericError("predictor weight dimensions do not match the state");
  }

  std::array<double, kPredictorInputDim> x{};
  for (int d = 0; d < kNumCepstra; ++d) x[d] = prev_cepstra_scaled[d];
  x[18] = pitch_scaled[0];
  x[19] = pitch_scaled[1];

  std::array<double, kGru1Hidden> h1_next{};
  gru_step(weights.gru1, x.data(), state.h1.data(), h1_next.data());
  std::array<double, kGru2Hidden> h2_next{};
  gru_step(weights.gru2, h1_next.data(), state.h2.data(), h2_next.data());

  std::array<double, kNumCepstra> out{};
  matvec(weights.out_w.data(), h2_next.data(), kNumCepstra, kGru2Hidden,
         out.data());
  for (int d = 0; d < kNumCepstra; ++d) {
    out[d] = std::tanh(out[d] + weights.out_b[d]);
  }

  state.h1 = h1_next;
  state.h2 = h2_next;
  return out;
}

std::vector<std::pair<std::string, Vec*>> weight_blocks(PredictorWeights& w) {
  std::vector<std::pair<std::string, Vec*>> out;
  for (const auto& t : tensor_table(w)) out.emplace_back(t.name, t.data);
  return out;
}

void save_weights(const PredictorWeights& weights, const std::string& path) {
  if (!weights.scaler.fitted) {
    throw NumericError("refusing to save weights without a fitted scaler");
  }
  BinWriter out;
  out.raw(kWeightsMagic, 4);
  out.u32(kWeightsVersion);
  auto refs = tensor_table(const_cast<PredictorWeights&>(weights));
  out.u32(static_cast<uint32_t>(refs.size()));
  for (const auto& t : refs) {
    out.str(t.name);
    out.u32(static_cast<uint32_t>(t.dims.size()));
    size_t expect = 1;
    for (uint32_t d : t.dims) {
      out.u32(d);
      expect *= d;
    }
    if (expect != t.data->size()) {
      throw NumericError("tensor size mismatch for " + t.name);
    }
    for (double v : *t.data) out.f32(static_cast<float>(v));
  }
  for (double v : weights.scaler.offsets) out.f32(static_cast<float>(v));
  for (double v : weights.scaler.gains) out.f32(static_cast<float>(v));
  out.write_file(path);
}

PredictorWeights load_weights(const std::string& path) {
  BinReader in = BinReader::from_file(path);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(in.u8());
  if (std::memcmp(magic, kWeightsMagic, 4) != 0) {
    throw FormatError(path + ": bad magic, not a predictor weights file");
  }
  const uint32_t version = in.u32();
  if (version != kWeightsVersion) {
    throw FormatError(path + ": unsupported weights version " +
                      std::to_string(version));
  }

  PredictorWeights w;
  w.gru1.resize(kPredictorInputDim, kGru1Hidden);
  w.gru2.resize(kGru1Hidden, kGru2Hidden);
  w.out_w.assign(static_cast<size_t>(kNumCepstra) * kGru2Hidden, 0.0);
  w.out_b.assign(kNumCepstra, 0.0);
  auto refs = tensor_table(w);

  const uint32_t count = in.u32();
  if (count != refs.size()) {
    throw FormatError(path + ": unexpected tensor count " + std::to_string(count));
  }
  for (auto& t : refs) {
    const std::string name = in.str();
    if (name != t.name) {
      throw FormatError(path + ": expected tensor " + t.name + ", found " + name);
    }
    const uint32_t rank = in.u32();
    if (rank != t.dims.size()) throw FormatError(path + ": bad rank for " + name);
    size_t total = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      const uint32_t d = in.u32();
      if (d != t.dims[r]) throw FormatError(path + ": bad shape for " + name);
      total *= d;
    }
    for (size_t i = 0; i < total; ++i) {
      (*t.data)[i] = static_cast<double>(in.f32());
    }
  }
  for (double& v : w.scaler.offsets) v = static_cast<double>(in.f32());
  for (double& v : w.scaler.gains) v = static_cast<double>(in.f32());
  w.scaler.fitted = true;
  if (!in.at_end()) throw FormatError(path + ": trailing bytes");
  return w;
}

std::string describe_weights_file(const std::string& path) {
  PredictorWeights w = load_weights(path);
  std::ostringstream os;
  os << "PRDW v" << kWeightsVersion << ", " << w.parameter_count()
     << " parameters\n";
  for (const auto& t : tensor_table(w)) {
    double sumsq = 0.0;
    for (double v : *t.data) sumsq += v * v;
    os << "  " << t.name << " [";
    for (size_t i = 0; i < t.dims.size(); ++i) {
      os << (i ? "x" : "") << t.dims[i];
    }
    os << "] l2=" << std::sqrt(sumsq) << "\n";
  }
  os << "  scaler offsets/gains: 20+20 entries\n";
  return os.str();
}

}  // namespace prcodec
