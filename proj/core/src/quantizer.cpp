#include "prcodec/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "prcodec/bitstream.hpp"
#include "prcodec/rng.hpp"

namespace prcodec {

const char* profile_name(ProfileId id) {
  switch (id) {
    case ProfileId::kLow: return "low";
    case ProfileId::kMid: return "mid";
    case ProfileId::kHigh: return "high";
  }
  return "?";
}

ProfileId profile_from_name(const std::string& name) {
  if (name == "low") return ProfileId::kLow;
  if (name == "mid") return ProfileId::kMid;
  if (name == "high") return ProfileId::kHigh;
  throw FormatError("unknown profile name: " + name);
}

const char* role_name(Role role) {
  switch (role) {
    case Role::kSqLarge: return "SQ_L";
    case Role::kSqSmall: return "SQ_S";
    case Role::kVqLarge1: return "VQ_L1";
    case Role::kVqLarge2: return "VQ_L2";
    case Role::kVqSmall: return "VQ_S";
  }
  return "?";
}

bool BitrateProfile::has_role(Role role) const {
  switch (role) {
    case Role::kSqLarge: return true;
    case Role::kSqSmall: return sq_small_size.has_value();
    case Role::kVqLarge1: return !vq_large_stages.empty();
    case Role::kVqLarge2: return vq_large_stages.size() > 1;
    case Role::kVqSmall: return !vq_small_stages.empty();
  }
  return false;
}

int BitrateProfile::role_size(Role role) const {
  switch (role) {
    case Role::kSqLarge: return sq_large_size;
    case Role::kSqSmall: return sq_small_size.value();
    case Role::kVqLarge1: return vq_large_stages.at(0);
    case Role::kVqLarge2: return vq_large_stages.at(1);
    case Role::kVqSmall: return vq_small_stages.at(0);
  }
  return 0;
}

int BitrateProfile::role_dim(Role role) const {
  return (role == Role::kSqLarge || role == Role::kSqSmall) ? 1 : 17;
}

BitrateProfile standard_profile(ProfileId id) {
  BitrateProfile p;
  p.id = id;
  p.sq_large_size = 256;          // 8 bits
  p.vq_large_stages = {1024, 1024};  // 10 + 10 bits
  switch (id) {
    case ProfileId::kLow:
      p.ql_fraction_sq = 0.25;
      p.ql_fraction_vq = 0.25;
      p.transmit_flags = true;
      p.sq_small_discard = true;
      p.vq_small_discard = true;
      p.theta_sq = std::numeric_limits<double>::quiet_NaN();  // calibrated later
      p.theta_vq = std::numeric_limits<double>::quiet_NaN();
      break;
    case ProfileId::kMid:
      p.ql_fraction_sq = 0.07;
      p.ql_fraction_vq = 0.07;
      p.transmit_flags = true;
      p.sq_small_size = 16;       // 4 bits
      p.vq_small_stages = {512};  // 9 bits
      p.theta_sq = std::numeric_limits<double>::quiet_NaN();
      p.theta_vq = std::numeric_limits<double>::quiet_NaN();
      break;
    case ProfileId::kHigh:
      p.ql_fraction_sq = 1.0;
      p.ql_fraction_vq = 1.0;
      p.transmit_flags = false;   // Q_L always, nothing to signal
      p.theta_sq = -std::numeric_limits<double>::infinity();
      p.theta_vq = -std::numeric_limits<double>::infinity();
      break;
  }
  return p;
}

ResidualSplit ResidualSplit::from_residual(
    const std::array<double, kNumCepstra>& r) {
  ResidualSplit s;
  s.r0 = r[0];
  for (int d = 0; d < 17; ++d) s.r_vec[d] = r[d + 1];
  return s;
}

std::array<double, kNumCepstra> ResidualSplit::join() const {
  std::array<double, kNumCepstra> r{};
  r[0] = r0;
  for (int d = 0; d < 17; ++d) r[d + 1] = r_vec[d];
  return r;
}

double ResidualSplit::l1_scalar() const { return std::abs(r0); }

double ResidualSplit::l1_vector() const {
  double sum = 0.0;
  for (double v : r_vec) sum += std::abs(v);
  return sum;
}

namespace {

double sq_dist(const double* a, const double* b, int dim) {
  double sum = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return sum;
}

}  // namespace

int nearest_centroid(const Codebook& book, const double* x) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < book.size; ++i) {
    const double d = sq_dist(book.centroid(i), x, book.dim);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

double kmeans_distortion(const std::vector<Vec>& points, const Codebook& book) {
  double total = 0.0;
  for (const Vec& p : points) {
    const int idx = nearest_centroid(book, p.data());
    total += sq_dist(book.centroid(idx), p.data(), book.dim);
  }
  return total / static_cast<double>(points.size());
}

Codebook kmeans_train(const std::vector<Vec>& points, int k, int max_iters,
                      uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (n < k) {
    throw NumericError("k-means needs at least K points (" + std::to_string(n) +
                       " < " + std::to_string(k) + ")");
  }
  const int dim = static_cast<int>(points.front().size());
  Rng rng(seed);

  Codebook book;
  book.dim = dim;
  book.size = k;
  book.centroids.assign(static_cast<size_t>(k) * dim, 0.0);

  // k-means++ seeding.
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  {
    const int first = static_cast<int>(rng.index(n));
    std::copy_n(points[first].data(), dim, book.centroids.begin());
    for (int c = 1; c < k; ++c) {
      const double* prev = book.centroid(c - 1);
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        min_dist[i] = std::min(min_dist[i], sq_dist(points[i].data(), prev, dim));
        total += min_dist[i];
      }
      int pick = 0;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        pick = n - 1;
        for (int i = 0; i < n; ++i) {
          acc += min_dist[i];
          if (acc >= target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<int>(rng.index(n));
      }
      std::copy_n(points[pick].data(), dim, book.centroids.begin() +
                                                static_cast<size_t>(c) * dim);
    }
  }

  std::vector<int> assignment(n, 0);
  double prev_distortion = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    // Assignment step.
    double distortion = 0.0;
    for (int i = 0; i < n; ++i) {
      assignment[i] = nearest_centroid(book, points[i].data());
      distortion += sq_dist(book.centroid(assignment[i]), points[i].data(), dim);
    }
    distortion /= static_cast<double>(n);
    if (distortion > prev_distortion * (1.0 + 1e-12) + 1e-300) {
      throw NumericError("k-means distortion increased between iterations");
    }
    const bool converged =
        prev_distortion < std::numeric_limits<double>::infinity() &&
        prev_distortion - distortion <= 1e-6 * std::max(prev_distortion, 1e-30);
    prev_distortion = distortion;
    if (converged) break;

    // Update step.
    std::vector<double> sums(static_cast<size_t>(k) * dim, 0.0);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      double* dst = sums.data() + static_cast<size_t>(assignment[i]) * dim;
      for (int d = 0; d < dim; ++d) dst[d] += points[i][d];
      ++counts[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        double* dst = book.centroids.data() + static_cast<size_t>(c) * dim;
        for (int d = 0; d < dim; ++d) {
          dst[d] = sums[static_cast<size_t>(c) * dim + d] / counts[c];
        }
      }
    }
    // Re-seed empty clusters from the point farthest from its centroid.
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      int farthest = 0;
      double worst = -1.0;
      for (int i = 0; i < n; ++i) {
        const double d =
            sq_dist(points[i].data(), book.centroid(assignment[i]), dim);
        if (d > worst) {
          worst = d;
          farthest = i;
        }
      }
      std::copy_n(points[farthest].data(), dim,
                  book.centroids.begin() + static_cast<size_t>(c) * dim);
      assignment[farthest] = c;
    }
  }
  return book;
}

double calibrate_threshold(std::vector<double> norms, double target_fraction) {
  if (norms.empty()) throw NumericError("cannot calibrate threshold on empty set");
  if (!(target_fraction > 0.0) || target_fraction > 1.0) {
    throw NumericError("threshold target fraction must be in (0, 1]");
  }
  if (target_fraction >= 1.0) {
    return -std::numeric_limits<double>::infinity();
  }
  std::sort(norms.begin(), norms.end());
  const double n = static_cast<double>(norms.size());
  // Smallest norm such that the >= fraction does not exceed the target.
  size_t idx = static_cast<size_t>(std::ceil((1.0 - target_fraction) * n));
  idx = std::min(idx, norms.size() - 1);
  return norms[idx];
}

QuantizedResidual quantize_residual(const std::array<double, kNumCepstra>& r,
                                    const BitrateProfile& profile,
                                    const CodebookSet& books) {
  if (std::isnan(profile.theta_sq) || std::isnan(profile.theta_vq)) {
    throw NumericError("profile thresholds are not calibrated");
  }
  const ResidualSplit split = ResidualSplit::from_residual(r);
  QuantizedResidual q;

  q.sq_flag = split.l1_scalar() >= profile.theta_sq ? 1 : 0;
  q.vq_flag = split.l1_vector() >= profile.theta_vq ? 1 : 0;

  auto book = [&](Role role) -> const Codebook& {
    const auto it = books.find(role);
    if (it == books.end()) {
      throw NumericError(std::string("missing codebook for ") + role_name(role));
    }
    if (it->second.size != profile.role_size(role) ||
        it->second.dim != profile.role_dim(role)) {
      throw NumericError(std::string("codebook/profile mismatch for ") +
                         role_name(role));
    }
    return it->second;
  };

  if (q.sq_flag) {
    q.sq_index = nearest_centroid(book(Role::kSqLarge), &split.r0);
  } else if (!profile.sq_small_discard) {
    q.sq_index = nearest_centroid(book(Role::kSqSmall), &split.r0);
  }

  if (q.vq_flag) {
    const Codebook& stage1 = book(Role::kVqLarge1);
    q.vq_indices[0] = nearest_centroid(stage1, split.r_vec.data());
    const double* c1 = stage1.centroid(q.vq_indices[0]);
    std::array<double, 17> remainder{};
    for (int d = 0; d < 17; ++d) remainder[d] = split.r_vec[d] - c1[d];
    q.vq_indices[1] = nearest_centroid(book(Role::kVqLarge2), remainder.data());
  } else if (!profile.vq_small_discard) {
    q.vq_indices[0] = nearest_centroid(book(Role::kVqSmall), split.r_vec.data());
  }
  return q;
}

std::array<double, kNumCepstra> dequantize_residual(
    const QuantizedResidual& q, const BitrateProfile& profile,
    const CodebookSet& books) {
  auto book = [&](Role role) -> const Codebook& {
    const auto it = books.find(role);
    if (it == books.end()) {
      throw NumericError(std::string("missing codebook for ") + role_name(role));
    }
    return it->second;
  };
  auto checked_centroid = [](const Codebook& b, int index) {
    if (index < 0 || index >= b.size) {
      throw FormatError("corrupt stream: codeword index out of range");
    }
    return b.centroid(index);
  };

  // Reconstructed residuals live on the scaled grid so downstream sums
  // stay exact.
  ResidualSplit split;
  if (q.sq_flag) {
    split.r0 = grid_snap(*checked_centroid(book(Role::kSqLarge), q.sq_index));
  } else if (!profile.sq_small_discard) {
    split.r0 = grid_snap(*checked_centroid(book(Role::kSqSmall), q.sq_index));
  }

  if (q.vq_flag) {
    const double* c1 = checked_centroid(book(Role::kVqLarge1), q.vq_indices[0]);
    const double* c2 = checked_centroid(book(Role::kVqLarge2), q.vq_indices[1]);
    for (int d = 0; d < 17; ++d) {
      split.r_vec[d] = grid_snap(c1[d]) + grid_snap(c2[d]);
    }
  } else if (!profile.vq_small_discard) {
    const double* c = checked_centroid(book(Role::kVqSmall), q.vq_indices[0]);
    for (int d = 0; d < 17; ++d) split.r_vec[d] = grid_snap(c[d]);
  }
  return split.join();
}

ResidualNorms teacher_forced_residual_norms(
    const std::vector<FeatureStream>& corpus, const PredictorWeights& weights) {
  ResidualNorms norms;
  for (const FeatureStream& stream : corpus) {
    if (stream.empty()) continue;
    const auto pitch = conditioned_pitch_values(stream);
    PredictorState state;
    std::array<double, kNumCepstra> last_recon{};
    for (size_t n = 0; n < stream.frames.size(); ++n) {
      const auto pitch_scaled = weights.scaler.scale_pitch(
          pitch[n].period, pitch[n].correlation);
      const auto prediction =
          grid_snap(predict_step(weights, state, last_recon, pitch_scaled));
      const auto target =
          grid_snap(weights.scaler.scale_cepstrum(stream.frames[n].cepstrum));
      std::array<double, kNumCepstra> residual{};
      for (int d = 0; d < kNumCepstra; ++d) residual[d] = target[d] - prediction[d];
      const ResidualSplit split = ResidualSplit::from_residual(residual);
      norms.scalar.push_back(split.l1_scalar());
      norms.vector.push_back(split.l1_vector());
      last_recon = target;  // full add-back: teacher forcing
    }
  }
  if (norms.scalar.empty()) {
    throw NumericError("no frames available for threshold calibration");
  }
  return norms;
}

ResidualTrainingSets generate_codebook_training_residuals(
    const std::vector<FeatureStream>& corpus, const PredictorWeights& weights,
    const BitrateProfile& profile, const ResidualGenConfig& config) {
  if (std::isnan(profile.theta_sq) || std::isnan(profile.theta_vq)) {
    throw NumericError("profile thresholds are not calibrated");
  }
  ResidualTrainingSets sets;
  Rng rng(config.seed);
  for (const FeatureStream& stream : corpus) {
    if (stream.empty()) continue;
    const auto pitch = conditioned_pitch_values(stream);
    for (int s = 0; s < config.segments_per_utterance; ++s) {
      const size_t total = stream.frames.size();
      const size_t seg_len = std::min<size_t>(config.segment_frames, total);
      const size_t max_start = total - seg_len;
      const size_t start = max_start > 0 ? rng.index(max_start + 1) : 0;

      PredictorState state;
      std::array<double, kNumCepstra> last_recon{};
      for (size_t n = start; n < start + seg_len; ++n) {
        const auto pitch_scaled = weights.scaler.scale_pitch(
            pitch[n].period, pitch[n].correlation);
        const auto prediction =
            grid_snap(predict_step(weights, state, last_recon, pitch_scaled));
        const auto target =
            grid_snap(weights.scaler.scale_cepstrum(stream.frames[n].cepstrum));
        std::array<double, kNumCepstra> residual{};
        for (int d = 0; d < kNumCepstra; ++d) {
          residual[d] = target[d] - prediction[d];
        }
        const ResidualSplit split = ResidualSplit::from_residual(residual);
        const bool sq_gate = split.l1_scalar() >= profile.theta_sq;
        const bool vq_gate = split.l1_vector() >= profile.theta_vq;

        (sq_gate ? sets.sq_large : sets.sq_small).push_back(Vec{split.r0});
        Vec rv(split.r_vec.begin(), split.r_vec.end());
        (vq_gate ? sets.vq_large : sets.vq_small).push_back(std::move(rv));

        // Gated, unquantized add-back.
        last_recon = prediction;
        if (sq_gate) last_recon[0] += split.r0;
        if (vq_gate) {
          for (int d = 0; d < 17; ++d) last_recon[d + 1] += split.r_vec[d];
        }
      }
    }
  }
  return sets;
}

}  // namespace prcodec
