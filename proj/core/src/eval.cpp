#include "prcodec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace prcodec {

EvalReport evaluate_corpus(const std::vector<FeatureStream>& corpus,
                           const CodecBundle& bundle,
                           const std::string& trace_dir) {
  const CodecConfig config = bundle.codec_config();
  EvalReport report;
  report.profile = profile_name(config.profile.id);

  if (!trace_dir.empty()) {
    std::filesystem::create_directories(trace_dir);
  }

  size_t payload_bits = 0;
  size_t pitch_bits = 0;
  size_t sq_ql = 0, vq_ql = 0;
  std::vector<double> frame_mse;

  // Pooled variances use per-dimension means over the whole corpus.
  std::array<double, kNumCepstra> res_sum{}, res_sumsq{};
  std::array<double, kNumCepstra> feat_sum{}, feat_sumsq{};

  for (size_t u = 0; u < corpus.size(); ++u) {
    const FeatureStream& stream = corpus[u];
    if (stream.empty()) continue;
    const EncodeResult enc = encode_stream(stream, bundle.weights, config);
    payload_bits += enc.bitstream.payload_bits;
    pitch_bits += enc.pitch_codes.size() * (kPitchPeriodBits + kPitchCorrBits);
    report.total_frames += stream.frames.size();
    ++report.utterances;

    std::ofstream trace;
    if (!trace_dir.empty()) {
      const auto path = std::filesystem::path(trace_dir) /
                        ("trace_" + std::to_string(u) + ".csv");
      trace.open(path);
      trace << "frame,l1_r0,l1_rvec,sq_flag,vq_flag\n";
    }

    for (size_t n = 0; n < stream.frames.size(); ++n) {
      const auto target =
          bundle.weights.scaler.scale_cepstrum(stream.frames[n].cepstrum);
      const auto& recon = enc.reconstructions[n];
      const auto& residual = enc.residuals[n];

      double mse = 0.0;
      for (int d = 0; d < kNumCepstra; ++d) {
        const double err = recon[d] - target[d];
        mse += err * err;
        res_sum[d] += residual[d];
        res_sumsq[d] += residual[d] * residual[d];
        feat_sum[d] += target[d];
        feat_sumsq[d] += target[d] * target[d];
      }
      frame_mse.push_back(mse / kNumCepstra);

      sq_ql += enc.coded[n].sq_flag;
      vq_ql += enc.coded[n].vq_flag;
      if (trace.is_open()) {
        const ResidualSplit split = ResidualSplit::from_residual(residual);
        trace << n << ',' << split.l1_scalar() << ',' << split.l1_vector() << ','
              << static_cast<int>(enc.coded[n].sq_flag) << ','
              << static_cast<int>(enc.coded[n].vq_flag) << "\n";
      }
    }
  }
  if (report.total_frames == 0) throw NumericError("evaluation corpus is empty");

  const double duration_s = static_cast<double>(report.total_frames) / kFrameRateHz;
  report.measured_payload_bps = static_cast<double>(payload_bits) / duration_s;
  report.pitch_bps = static_cast<double>(pitch_bits) / duration_s;

  const RatePrediction pred =
      rate_report(config.profile, bundle.artifacts.train_estimate);
  report.predicted_formula_bps = pred.formula_bps;
  report.predicted_flag_bps = pred.flag_overhead_bps;
  report.predicted_total_bps = pred.total_bps;

  std::sort(frame_mse.begin(), frame_mse.end());
  double mse_sum = 0.0;
  for (double m : frame_mse) mse_sum += m;
  report.cepstral_mse_mean = mse_sum / static_cast<double>(frame_mse.size());
  report.cepstral_mse_p95 =
      frame_mse[std::min(frame_mse.size() - 1,
                         static_cast<size_t>(0.95 * frame_mse.size()))];

  report.fraction_sq_ql = static_cast<double>(sq_ql) / report.total_frames;
  report.fraction_vq_ql = static_cast<double>(vq_ql) / report.total_frames;

  const double n = static_cast<double>(report.total_frames);
  double res_var = 0.0, feat_var = 0.0;
  for (int d = 0; d < kNumCepstra; ++d) {
    const double rm = res_sum[d] / n;
    const double fm = feat_sum[d] / n;
    res_var += res_sumsq[d] / n - rm * rm;
    feat_var += feat_sumsq[d] / n - fm * fm;
  }
  report.residual_variance = res_var / kNumCepstra;
  report.feature_variance = feat_var / kNumCepstra;
  report.variance_ratio = report.residual_variance /
                          std::max(report.feature_variance, 1e-300);
  return report;
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json j;
  j["profile"] = report.profile;
  j["utterances"] = report.utterances;
  j["total_frames"] = report.total_frames;
  j["measured_payload_bps"] = report.measured_payload_bps;
  j["predicted_formula_bps"] = report.predicted_formula_bps;
  j["predicted_flag_bps"] = report.predicted_flag_bps;
  j["predicted_total_bps"] = report.predicted_total_bps;
  j["pitch_bps"] = report.pitch_bps;
  j["cepstral_mse_mean"] = report.cepstral_mse_mean;
  j["cepstral_mse_p95"] = report.cepstral_mse_p95;
  j["fraction_sq_ql"] = report.fraction_sq_ql;
  j["fraction_vq_ql"] = report.fraction_vq_ql;
  j["residual_variance"] = report.residual_variance;
  j["feature_variance"] = report.feature_variance;
  j["variance_ratio"] = report.variance_ratio;
  j["algorithmic_delay_ms"] = report.algorithmic_delay_ms;
  return j.dump(2);
}

}  // namespace prcodec
