#include "prcodec/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "prcodec/binio.hpp"
#include "prcodec/features.hpp"
#include "prcodec/rng.hpp"
#include "prcodec/wav.hpp"

namespace prcodec {

namespace {

// Duplicate-with-jitter padding so k-means stays well-posed when a desk
// scale corpus leaves a Q_L/Q_S split with fewer residuals than K.
bool ensure_at_least(std::vector<Vec>& points, size_t k, uint64_t seed) {
  if (points.size() >= k) return false;
  if (points.empty()) {
    throw NumericError("no residuals collected for a quantizer training set");
  }
  const int dim = static_cast<int>(points.front().size());
  Vec stddev(dim, 0.0);
  {
    Vec mean(dim, 0.0);
    for (const Vec& p : points) {
      for (int d = 0; d < dim; ++d) mean[d] += p[d];
    }
    for (double& m : mean) m /= static_cast<double>(points.size());
    for (const Vec& p : points) {
      for (int d = 0; d < dim; ++d) {
        const double diff = p[d] - mean[d];
        stddev[d] += diff * diff;
      }
    }
    for (double& s : stddev) {
      s = std::sqrt(s / static_cast<double>(points.size()));
    }
  }
  Rng rng(seed);
  const size_t base = points.size();
  while (points.size() < k) {
    Vec copy = points[rng.index(base)];
    for (int d = 0; d < dim; ++d) {
      copy[d] += 1e-4 * (stddev[d] + 1e-9) * rng.normal();
    }
    points.push_back(std::move(copy));
  }
  return true;
}

// Residual L1 norms as the real encoder sees them: quantized residual
// add-back, packet-quantized pitch conditioning.
ResidualNorms coding_residual_norms(const std::vector<FeatureStream>& corpus,
                                    const BitrateProfile& profile,
                                    const CodebookSet& books,
                                    const PredictorWeights& weights) {
  ResidualNorms norms;
  for (const FeatureStream& stream : corpus) {
    if (stream.empty()) continue;
    const auto pitch_codes = pitch_packet_codes(stream);
    EncoderState state;
    std::array<double, kNumCepstra> residual{};
    for (size_t n = 0; n < stream.frames.size(); ++n) {
      const PitchValue pitch = dequantize_pitch(pitch_codes[n / kFramesPerPacket]);
      encode_frame(state, stream.frames[n].cepstrum, pitch, profile, books,
                   weights, &residual);
      const ResidualSplit split = ResidualSplit::from_residual(residual);
      norms.scalar.push_back(split.l1_scalar());
      norms.vector.push_back(split.l1_vector());
    }
  }
  return norms;
}

QuantizerReportRow make_row(Role role, int k, size_t points, bool augmented,
                            const FrequencyEstimate& est) {
  QuantizerReportRow row;
  row.role = role;
  row.codebook_bits = static_cast<int>(std::lround(std::log2(k)));
  row.train_points = points;
  row.augmented = augmented;
  const BitsPerFrame bpf = bits_per_frame(est.frequencies.at(role));
  row.huffman_avg = bpf.huffman_avg;
  row.entropy = bpf.entropy;
  return row;
}

}  // namespace

std::vector<FeatureStream> load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw FormatError("corpus directory not found: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".wav" || ext == ".prfs") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw FormatError("no .wav or .prfs files under " + dir);
  }

  std::vector<FeatureStream> corpus;
  corpus.reserve(files.size());
  for (const auto& path : files) {
    if (path.extension() == ".wav") {
      corpus.push_back(analyze(read_wav(path.string())));
    } else {
      corpus.push_back(load_feature_stream(path.string()));
    }
  }
  return corpus;
}

TrainSummary train_bundle(const std::vector<FeatureStream>& corpus, ProfileId id,
                          const PipelineConfig& config,
                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  TrainSummary summary;
  summary.profile = id;
  summary.bundle_dir = out_dir;

  // 1. Scaler, 2. predictor.
  PredictorWeights weights;
  if (config.reuse_weights_path.has_value()) {
    weights = load_weights(*config.reuse_weights_path);
  } else {
    const FeatureScaler scaler = FeatureScaler::fit(corpus);
    TrainConfig train_config = config.train;
    train_config.seed = config.seed;
    TrainResult trained = train_predictor(corpus, scaler, train_config);
    weights = std::move(trained.weights);
    summary.epoch_losses = std::move(trained.epoch_losses);
  }

  // 3. Threshold calibration on the teacher-forced residual norms.
  BitrateProfile profile = standard_profile(id);
  if (id != ProfileId::kHigh) {
    const ResidualNorms norms = teacher_forced_residual_norms(corpus, weights);
    profile.theta_sq = calibrate_threshold(norms.scalar, profile.ql_fraction_sq);
    profile.theta_vq = calibrate_threshold(norms.vector, profile.ql_fraction_vq);
  }

  // 4/5. Gated residual generation and k-means codebooks, then threshold
  // refinement rounds against real coding residuals.
  ProfileArtifacts art;
  std::map<Role, std::pair<size_t, bool>> train_stats;

  auto rebuild_codebooks = [&](uint64_t round_salt) {
    ResidualGenConfig gen;
    gen.segment_frames = config.residual_segment_frames;
    gen.segments_per_utterance = config.residual_segments_per_utterance;
    gen.seed = config.seed ^ 0xA5A5A5A5ull ^ round_salt;
    ResidualTrainingSets sets =
        generate_codebook_training_residuals(corpus, weights, profile, gen);

    art.books.clear();
    auto train_book = [&](Role role, std::vector<Vec>& points) {
      const int k = profile.role_size(role);
      const bool augmented = ensure_at_least(
          points, static_cast<size_t>(k),
          config.seed ^ (0x1000ull + static_cast<uint64_t>(role)) ^ round_salt);
      train_stats[role] = {points.size(), augmented};
      art.books[role] = kmeans_train(
          points, k, config.kmeans_iters,
          config.seed ^ (0x2000ull + static_cast<uint64_t>(role)) ^ round_salt);
    };

    train_book(Role::kSqLarge, sets.sq_large);
    if (profile.has_role(Role::kSqSmall)) {
      train_book(Role::kSqSmall, sets.sq_small);
    }
    train_book(Role::kVqLarge1, sets.vq_large);
    {
      std::vector<Vec> remainders;
      remainders.reserve(sets.vq_large.size());
      const Codebook& stage1 = art.books[Role::kVqLarge1];
      for (const Vec& v : sets.vq_large) {
        const int idx = nearest_centroid(stage1, v.data());
        const double* c = stage1.centroid(idx);
        Vec rem(v.size());
        for (size_t d = 0; d < v.size(); ++d) rem[d] = v[d] - c[d];
        remainders.push_back(std::move(rem));
      }
      train_book(Role::kVqLarge2, remainders);
    }
    if (profile.has_role(Role::kVqSmall)) {
      train_book(Role::kVqSmall, sets.vq_small);
    }
  };

  rebuild_codebooks(0);
  if (id != ProfileId::kHigh) {
    // The threshold/codebook feedback loop: iterate theta on coding
    // norms with the codebooks held fixed (cheap), then retrain the
    // codebooks under the settled thresholds.
    constexpr int kThetaItersPerRound = 3;
    auto settle_thetas = [&]() {
      for (int iter = 0; iter < kThetaItersPerRound; ++iter) {
        const ResidualNorms norms =
            coding_residual_norms(corpus, profile, art.books, weights);
        profile.theta_sq =
            calibrate_threshold(norms.scalar, profile.ql_fraction_sq);
        profile.theta_vq =
            calibrate_threshold(norms.vector, profile.ql_fraction_vq);
      }
    };
    for (int round = 0; round < config.calibration_rounds; ++round) {
      settle_thetas();
      rebuild_codebooks(0x77ull * (round + 1));
    }
    // Final settle against the shipped codebooks so the coding-time Q_L
    // fractions land on the profile targets.
    settle_thetas();
  }
  art.profile = profile;
  summary.theta_sq = profile.theta_sq;
  summary.theta_vq = profile.theta_vq;

  // 6. Codeword frequencies from re-coding random segments, 7. tables.
  art.train_estimate =
      estimate_frequencies(corpus, profile, art.books, weights,
                           config.freq_segment_frames, config.seed ^ 0xF00Dull);
  for (const auto& [role, freqs] : art.train_estimate.frequencies) {
    art.huffman[role] = build_huffman(freqs);
  }
  summary.fraction_sq_ql = art.train_estimate.fraction_sq_ql;
  summary.fraction_vq_ql = art.train_estimate.fraction_vq_ql;

  // 8. Bundle on disk.
  const fs::path weights_path = fs::path(out_dir) / "weights.prdw";
  const fs::path codebook_path = fs::path(out_dir) / "codebook.prcb";
  save_weights(weights, weights_path.string());
  save_codebook_file(codebook_path.string(), art);
  const uint64_t weights_hash = fnv1a64_file(weights_path.string());
  const uint64_t codebook_hash = fnv1a64_file(codebook_path.string());
  save_bundle_manifest(out_dir, "weights.prdw", "codebook.prcb", id,
                       weights_hash, codebook_hash);

  for (const auto& [role, stats] : train_stats) {
    summary.rows.push_back(make_row(role, profile.role_size(role), stats.first,
                                    stats.second, art.train_estimate));
  }
  summary.predicted = rate_report(profile, art.train_estimate);
  return summary;
}

std::string format_train_summary(const TrainSummary& summary) {
  std::ostringstream os;
  os << "profile " << profile_name(summary.profile) << "\n";
  if (!summary.epoch_losses.empty()) {
    os << "  predictor loss per epoch:";
    for (double l : summary.epoch_losses) os << " " << l;
    os << "\n";
  }
  os << "  theta_sq " << summary.theta_sq << ", theta_vq " << summary.theta_vq
     << "\n";
  os << "  measured Q_L fractions: sq " << summary.fraction_sq_ql << ", vq "
     << summary.fraction_vq_ql << "\n";
  os << "  quantizer            bits  huffman  entropy  points\n";
  for (const auto& row : summary.rows) {
    os << "  " << role_name(row.role);
    for (size_t pad = std::string(role_name(row.role)).size(); pad < 19; ++pad) {
      os << ' ';
    }
    os << "  " << row.codebook_bits << "  " << row.huffman_avg << "  "
       << row.entropy << "  " << row.train_points
       << (row.augmented ? " (padded)" : "") << "\n";
  }
  os << "  predicted rate: " << summary.predicted.formula_bps << " bps (+"
     << summary.predicted.flag_overhead_bps << " flag bps = "
     << summary.predicted.total_bps << ")\n";
  return os.str();
}

}  // namespace prcodec
