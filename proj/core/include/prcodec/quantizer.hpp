// Discriminative residual quantization: L1-threshold dispatch between a
// large scheme Q_L and a small scheme Q_S (or outright discard), applied
// independently to the scalar residual r_0 and the 17-dim vector residual
// r_1..17. Codebooks come from k-means over encoder residuals.
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prcodec/predictor.hpp"
#include "prcodec/types.hpp"

namespace prcodec {

// Scaled-space values snap to a fixed 2^-24 grid before any residual
// arithmetic. Sums and differences of grid values are exact in doubles,
// so the reconstruction algebra (recon - target == coded - residual)
// holds bit-exactly and both codec sides stay in lockstep.
inline constexpr double kScaledGrid = 16777216.0;  // 2^24

inline double grid_snap(double x) {
  return std::nearbyint(x * kScaledGrid) / kScaledGrid;
}

inline std::array<double, kNumCepstra> grid_snap(
    const std::array<double, kNumCepstra>& x) {
  std::array<double, kNumCepstra> out{};
  for (int d = 0; d < kNumCepstra; ++d) out[d] = grid_snap(x[d]);
  return out;
}

enum class ProfileId : uint8_t { kLow = 0, kMid = 1, kHigh = 2 };

const char* profile_name(ProfileId id);
ProfileId profile_from_name(const std::string& name);

enum class Role : uint8_t {
  kSqLarge = 0,
  kSqSmall = 1,
  kVqLarge1 = 2,
  kVqLarge2 = 3,
  kVqSmall = 4,
};

const char* role_name(Role role);

struct Codebook {
  int dim = 0;  // 1 for the scalar quantizer, 17 for the vector quantizer
  int size = 0;
  Vec centroids;  // row-major [size, dim]

  const double* centroid(int i) const { return centroids.data() + static_cast<size_t>(i) * dim; }
};

// Per-target-bitrate configuration. Thresholds are the -inf sentinel when
// the profile never dispatches to Q_S (high) and are calibrated from
// training residuals otherwise.
struct BitrateProfile {
  ProfileId id = ProfileId::kLow;
  double theta_sq = 0.0;
  double theta_vq = 0.0;
  double ql_fraction_sq = 1.0;  // calibration target for |r0| >= theta
  double ql_fraction_vq = 1.0;
  bool transmit_flags = true;      // high profile sends none
  bool sq_small_discard = false;   // Q_S(r0) = 0
  bool vq_small_discard = false;   // Q_S(r_1:17) = 0
  int sq_large_size = 256;
  std::optional<int> sq_small_size;       // mid: 16
  std::vector<int> vq_large_stages = {1024, 1024};
  std::vector<int> vq_small_stages;       // mid: {512}

  bool has_role(Role role) const;
  int role_size(Role role) const;
  int role_dim(Role role) const;
};

// Table-1 bitrate ladder: low ~0.93 kbps (top 25% Q_L, rest discarded),
// mid ~1.47 kbps (top 7% Q_L, rest Q_S), high ~2.87 kbps (all Q_L).
BitrateProfile standard_profile(ProfileId id);

using CodebookSet = std::map<Role, Codebook>;

struct ResidualSplit {
  double r0 = 0.0;
  std::array<double, 17> r_vec{};

  static ResidualSplit from_residual(const std::array<double, kNumCepstra>& r);
  std::array<double, kNumCepstra> join() const;
  double l1_scalar() const;
  double l1_vector() const;
};

struct QuantizedResidual {
  uint8_t sq_flag = 0;  // 1 = Q_L path
  uint8_t vq_flag = 0;
  int sq_index = -1;                     // -1 when the path emits no index
  std::array<int, 2> vq_indices = {-1, -1};
};

// Lloyd's algorithm with k-means++ seeding. Deterministic for a fixed
// seed; distortion is checked non-increasing every iteration; empty
// clusters are re-seeded from the point farthest from its centroid.
// Throws NumericError when points.size() < k.
Codebook kmeans_train(const std::vector<Vec>& points, int k, int max_iters,
                      uint64_t seed);

// Distortion helper (mean squared distance to the nearest centroid).
double kmeans_distortion(const std::vector<Vec>& points, const Codebook& book);

// theta such that a fraction `target_fraction` of the given L1 norms
// satisfies norm >= theta. target_fraction == 1 yields -infinity.
double calibrate_threshold(std::vector<double> norms, double target_fraction);

// Nearest-centroid index; ties break to the lowest index.
int nearest_centroid(const Codebook& book, const double* x);

QuantizedResidual quantize_residual(const std::array<double, kNumCepstra>& r,
                                    const BitrateProfile& profile,
                                    const CodebookSet& books);

std::array<double, kNumCepstra> dequantize_residual(
    const QuantizedResidual& q, const BitrateProfile& profile,
    const CodebookSet& books);

struct ResidualTrainingSets {
  std::vector<Vec> sq_large, sq_small;  // dim-1 points
  std::vector<Vec> vq_large, vq_small;  // dim-17 points
};

struct ResidualGenConfig {
  int segment_frames = 200;       // 2-second segments
  int segments_per_utterance = 1;
  uint64_t seed = 42;
};

// Pass 1 of threshold calibration: teacher-forced recursion (full residual
// add-back, no gating) over every frame of the corpus; returns the |r0|
// and ||r_1:17||_1 norm sequences.
struct ResidualNorms {
  std::vector<double> scalar;
  std::vector<double> vector;
};
ResidualNorms teacher_forced_residual_norms(
    const std::vector<FeatureStream>& corpus, const PredictorWeights& weights);

// Pass 2: recursion with unquantized, threshold-gated add-back on randomly
// picked segments; residuals land in the Q_L or Q_S training set of their
// component depending on the gate.
ResidualTrainingSets generate_codebook_training_residuals(
    const std::vector<FeatureStream>& corpus, const PredictorWeights& weights,
    const BitrateProfile& profile, const ResidualGenConfig& config);

}  // namespace prcodec
