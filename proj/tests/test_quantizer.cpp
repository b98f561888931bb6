#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "prcodec/quantizer.hpp"
#include "prcodec/rng.hpp"
#include "test_util.hpp"

using namespace prcodec;

TEST_CASE("kmeans: N == K distinct points reproduce themselves") {
  std::vector<Vec> points;
  for (int i = 0; i < 8; ++i) points.push_back(Vec{static_cast<double>(i), -i * 0.5});
  const Codebook book = kmeans_train(points, 8, 20, 1);
  CHECK(kmeans_distortion(points, book) == doctest::Approx(0.0).epsilon(1e-15));
  for (const Vec& p : points) {
    const int idx = nearest_centroid(book, p.data());
    CHECK(book.centroid(idx)[0] == doctest::Approx(p[0]));
    CHECK(book.centroid(idx)[1] == doctest::Approx(p[1]));
  }
}

TEST_CASE("kmeans: K = 1 gives the mean") {
  Rng rng(3);
  std::vector<Vec> points;
  Vec mean(3, 0.0);
  for (int i = 0; i < 100; ++i) {
    Vec p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (int d = 0; d < 3; ++d) mean[d] += p[d] / 100.0;
    points.push_back(p);
  }
  const Codebook book = kmeans_train(points, 1, 10, 9);
  for (int d = 0; d < 3; ++d) {
    CHECK(book.centroid(0)[d] == doctest::Approx(mean[d]).epsilon(1e-12));
  }
}

TEST_CASE("kmeans: four separated blobs") {
  Rng rng(7);
  const double blob_means[4][2] = {{5, 5}, {-5, 5}, {5, -5}, {-5, -5}};
  std::vector<Vec> points;
  for (int b = 0; b < 4; ++b) {
    for (int i = 0; i < 200; ++i) {
      points.push_back(Vec{blob_means[b][0] + 0.2 * rng.normal(),
                           blob_means[b][1] + 0.2 * rng.normal()});
    }
  }
  const Codebook book = kmeans_train(points, 4, 50, 11);
  // Oracle: each centroid must sit within 0.1 of the nearest blob mean.
  for (int c = 0; c < 4; ++c) {
    double best = 1e9;
    for (const auto& m : blob_means) {
      const double d = std::hypot(book.centroid(c)[0] - m[0],
                                  book.centroid(c)[1] - m[1]);
      best = std::min(best, d);
    }
    CHECK(best < 0.1);
  }
}

TEST_CASE("kmeans: N < K is an error") {
  std::vector<Vec> points = {{1.0}, {2.0}};
  CHECK_THROWS_AS(kmeans_train(points, 3, 10, 1), NumericError);
}

TEST_CASE("threshold calibration") {
  CHECK(calibrate_threshold({1, 2, 3, 4}, 0.25) == 4.0);
  CHECK(calibrate_threshold({4, 2, 1, 3}, 0.5) == 3.0);
  CHECK(calibrate_threshold({1, 2, 3, 4}, 1.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(calibrate_threshold({}, 0.5), NumericError);

  // Held-out exceedance near the target.
  Rng rng(13);
  std::vector<double> calib(20000), held(20000);
  for (double& v : calib) v = rng.uniform();
  for (double& v : held) v = rng.uniform();
  const double theta = calibrate_threshold(calib, 0.07);
  size_t above = 0;
  for (double v : held) above += (v >= theta);
  const double fraction = static_cast<double>(above) / held.size();
  CHECK(fraction == doctest::Approx(0.07).epsilon(0.15));

  // On the calibration set itself: within 1/N of the target.
  for (double target : {0.25, 0.07, 0.5}) {
    std::vector<double> norms(1000);
    for (double& v : norms) v = rng.uniform();
    const double t = calibrate_threshold(norms, target);
    size_t count = 0;
    for (double v : norms) count += (v >= t);
    CHECK(std::abs(static_cast<double>(count) / norms.size() - target) <=
          1.0 / norms.size() + 1e-12);
  }
}

TEST_CASE("profile table conformance") {
  const BitrateProfile low = standard_profile(ProfileId::kLow);
  CHECK(low.sq_large_size == 256);
  CHECK_FALSE(low.sq_small_size.has_value());
  CHECK(low.vq_large_stages == std::vector<int>{1024, 1024});
  CHECK(low.vq_small_stages.empty());
  CHECK(low.sq_small_discard);
  CHECK(low.vq_small_discard);
  CHECK(low.transmit_flags);
  CHECK(low.ql_fraction_sq == 0.25);

  const BitrateProfile mid = standard_profile(ProfileId::kMid);
  CHECK(mid.sq_large_size == 256);
  CHECK(mid.sq_small_size.value() == 16);
  CHECK(mid.vq_large_stages == std::vector<int>{1024, 1024});
  CHECK(mid.vq_small_stages == std::vector<int>{512});
  CHECK_FALSE(mid.sq_small_discard);
  CHECK(mid.ql_fraction_sq == 0.07);

  const BitrateProfile high = standard_profile(ProfileId::kHigh);
  CHECK(high.sq_large_size == 256);
  CHECK_FALSE(high.transmit_flags);
  CHECK(high.theta_sq == -std::numeric_limits<double>::infinity());
  CHECK(high.theta_vq == -std::numeric_limits<double>::infinity());
  CHECK(high.ql_fraction_sq == 1.0);
}

TEST_CASE("quantize: stage-1 centroid hit leaves zero remainder") {
  auto art = testutil::make_artifacts(ProfileId::kHigh, 21);
  std::array<double, kNumCepstra> r{};
  r[0] = 0.04;
  const double* c1 = art.books[Role::kVqLarge1].centroid(77);
  for (int d = 0; d < 17; ++d) r[d + 1] = c1[d];
  const QuantizedResidual q = quantize_residual(r, art.profile, art.books);
  CHECK(q.vq_indices[0] == 77);
  // Stage 2 must pick its centroid nearest the zero vector.
  Vec zero(17, 0.0);
  CHECK(q.vq_indices[1] == nearest_centroid(art.books[Role::kVqLarge2], zero.data()));
}

TEST_CASE("quantize: low profile discards below both thresholds") {
  auto art = testutil::make_artifacts(ProfileId::kLow, 23);
  art.profile.theta_sq = 0.5;
  art.profile.theta_vq = 2.0;
  std::array<double, kNumCepstra> r{};
  r[0] = 0.1;  // |r0| < 0.5
  for (int d = 1; d < 18; ++d) r[d] = 0.05;  // L1 = 0.85 < 2.0
  const QuantizedResidual q = quantize_residual(r, art.profile, art.books);
  CHECK(q.sq_flag == 0);
  CHECK(q.vq_flag == 0);
  CHECK(q.sq_index == -1);
  CHECK(q.vq_indices[0] == -1);
  const auto back = dequantize_residual(q, art.profile, art.books);
  for (double v : back) CHECK(v == 0.0);
}

TEST_CASE("quantize: centroids are fixed points per scheme") {
  for (auto id : {ProfileId::kLow, ProfileId::kMid, ProfileId::kHigh}) {
    auto art = testutil::make_artifacts(id, 31);
    for (const auto& [role, book] : art.books) {
      for (int i = 0; i < book.size; i += std::max(1, book.size / 37)) {
        const int hit = nearest_centroid(book, book.centroid(i));
        // Duplicates tie to the lowest index; the dequantized value must
        // be identical either way.
        for (int d = 0; d < book.dim; ++d) {
          CHECK(book.centroid(hit)[d] == book.centroid(i)[d]);
        }
      }
    }
  }
}

TEST_CASE("quantize: dequantize rejects out-of-range indices") {
  auto art = testutil::make_artifacts(ProfileId::kHigh, 37);
  QuantizedResidual q;
  q.sq_flag = 1;
  q.vq_flag = 1;
  q.sq_index = art.profile.sq_large_size;  // one past the end
  q.vq_indices = {0, 0};
  CHECK_THROWS_AS(dequantize_residual(q, art.profile, art.books), FormatError);
}

TEST_CASE("two-stage beats one-stage on trained codebooks") {
  // Train both stages on Gaussian residuals, then compare on fresh draws.
  Rng rng(41);
  auto draw = [&rng]() {
    Vec v(17);
    for (double& x : v) x = 0.1 * rng.normal();
    return v;
  };
  std::vector<Vec> train(4000);
  for (auto& v : train) v = draw();
  const Codebook stage1 = kmeans_train(train, 64, 25, 5);
  std::vector<Vec> remainders;
  for (const auto& v : train) {
    const int idx = nearest_centroid(stage1, v.data());
    Vec rem(17);
    for (int d = 0; d < 17; ++d) rem[d] = v[d] - stage1.centroid(idx)[d];
    remainders.push_back(rem);
  }
  const Codebook stage2 = kmeans_train(remainders, 64, 25, 6);

  double one_stage = 0.0, two_stage = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Vec v = draw();
    const int i1 = nearest_centroid(stage1, v.data());
    Vec rem(17);
    double err1 = 0.0;
    for (int d = 0; d < 17; ++d) {
      rem[d] = v[d] - stage1.centroid(i1)[d];
      err1 += rem[d] * rem[d];
    }
    const int i2 = nearest_centroid(stage2, rem.data());
    double err2 = 0.0;
    for (int d = 0; d < 17; ++d) {
      const double e = rem[d] - stage2.centroid(i2)[d];
      err2 += e * e;
    }
    one_stage += err1;
    two_stage += err2;
  }
  CHECK(two_stage < one_stage);
}

TEST_CASE("residual generation: high profile equals teacher forcing") {
  const std::vector<FeatureStream> corpus = {testutil::sinusoidal_stream(120, 51)};
  PredictorWeights w = init_weights(51);
  w.scaler = FeatureScaler::fit(corpus);

  const BitrateProfile high = standard_profile(ProfileId::kHigh);
  ResidualGenConfig gen;
  gen.segment_frames = 200;  // longer than the stream: one full-length pass
  gen.segments_per_utterance = 1;
  const ResidualTrainingSets sets =
      generate_codebook_training_residuals(corpus, w, high, gen);
  CHECK(sets.sq_small.empty());
  CHECK(sets.vq_small.empty());
  CHECK(sets.sq_large.size() == 120);
  CHECK(sets.vq_large.size() == 120);

  const ResidualNorms norms = teacher_forced_residual_norms(corpus, w);
  REQUIRE(norms.scalar.size() == 120);
  for (size_t i = 0; i < 120; ++i) {
    CHECK(std::abs(sets.sq_large[i][0]) ==
          doctest::Approx(norms.scalar[i]).epsilon(1e-12));
  }
}

TEST_CASE("residual generation: calibrated low profile splits ~25/75") {
  std::vector<FeatureStream> corpus;
  for (int u = 0; u < 4; ++u) {
    corpus.push_back(testutil::sinusoidal_stream(300, 61 + u));
  }
  PredictorWeights w = init_weights(61);
  w.scaler = FeatureScaler::fit(corpus);

  BitrateProfile low = standard_profile(ProfileId::kLow);
  const ResidualNorms norms = teacher_forced_residual_norms(corpus, w);
  low.theta_sq = calibrate_threshold(norms.scalar, low.ql_fraction_sq);
  low.theta_vq = calibrate_threshold(norms.vector, low.ql_fraction_vq);

  ResidualGenConfig gen;
  gen.segment_frames = 300;
  gen.segments_per_utterance = 1;
  const ResidualTrainingSets sets =
      generate_codebook_training_residuals(corpus, w, low, gen);
  const double total = static_cast<double>(sets.sq_large.size() + sets.sq_small.size());
  const double fraction = static_cast<double>(sets.sq_large.size()) / total;
  CHECK(fraction > 0.15);
  CHECK(fraction < 0.40);
}

TEST_CASE("residual generation: segment capped at stream length") {
  const std::vector<FeatureStream> corpus = {testutil::sinusoidal_stream(99, 71)};
  PredictorWeights w = init_weights(71);
  w.scaler = FeatureScaler::fit(corpus);
  const BitrateProfile high = standard_profile(ProfileId::kHigh);
  ResidualGenConfig gen;
  gen.segment_frames = 200;
  gen.segments_per_utterance = 1;
  const auto sets = generate_codebook_training_residuals(corpus, w, high, gen);
  CHECK(sets.vq_large.size() == 99);
}

TEST_CASE("uncalibrated thresholds are rejected") {
  auto art = testutil::make_artifacts(ProfileId::kLow, 81);
  art.profile.theta_sq = std::numeric_limits<double>::quiet_NaN();
  std::array<double, kNumCepstra> r{};
  CHECK_THROWS_AS(quantize_residual(r, art.profile, art.books), NumericError);
}
