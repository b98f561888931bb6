// Command-line harness: extract features, train bundles, encode/decode
// bitstreams, synthesize audio, and report rates.
//
// Exit codes: 0 ok, 1 usage, 2 format/corruption, 3 numeric failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "prcodec/bundle.hpp"
#include "prcodec/eval.hpp"
#include "prcodec/features.hpp"
#include "prcodec/lpc.hpp"
#include "prcodec/pipeline.hpp"
#include "prcodec/training.hpp"
#include "prcodec/wav.hpp"

namespace {

using namespace prcodec;

std::vector<uint8_t> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void write_binary(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

FeatureStream load_input_features(const std::string& path, bool raw_pcm) {
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".prfs") return load_feature_stream(path);
  if (raw_pcm) return analyze(read_raw_pcm(path));
  return analyze(read_wav(path));
}

// Reference per-quantizer Huffman averages for the three ladder points,
// used to show the nominal operating rates of each profile.
struct NominalPoint {
  ProfileId id;
  std::map<Role, double> bits;
  double fraction;
};

const std::vector<NominalPoint>& nominal_points() {
  static const std::vector<NominalPoint> points = {
      {ProfileId::kLow,
       {{Role::kSqLarge, 7.0}, {Role::kVqLarge1, 9.8}, {Role::kVqLarge2, 9.9}},
       0.25},
      {ProfileId::kMid,
       {{Role::kSqLarge, 7.4},
        {Role::kSqSmall, 2.9},
        {Role::kVqLarge1, 9.2},
        {Role::kVqLarge2, 9.4},
        {Role::kVqSmall, 8.0}},
       0.07},
      {ProfileId::kHigh,
       {{Role::kSqLarge, 7.2}, {Role::kVqLarge1, 9.2}, {Role::kVqLarge2, 9.6}},
       1.0},
  };
  return points;
}

int cmd_extract(const std::string& in, const std::string& out, bool raw) {
  const PcmSignal pcm = raw ? read_raw_pcm(in) : read_wav(in);
  const FeatureStream stream = analyze(pcm);
  save_feature_stream(out, stream);
  std::cout << "extracted " << stream.frames.size() << " frames -> " << out
            << "\n";
  return 0;
}

int cmd_train(const std::string& corpus_dir, const std::string& profile,
              const std::string& out_dir, const PipelineConfig& config) {
  const auto corpus = load_corpus(corpus_dir);
  std::cout << "corpus: " << corpus.size() << " utterances\n" << std::flush;
  const TrainSummary summary =
      train_bundle(corpus, profile_from_name(profile), config, out_dir);
  std::cout << format_train_summary(summary);
  std::cout << "bundle written to " << out_dir << "\n";
  return 0;
}

int cmd_encode(const std::string& input, const std::string& bundle_dir,
               const std::string& out, bool raw) {
  const CodecBundle bundle = load_bundle(bundle_dir);
  const FeatureStream stream = load_input_features(input, raw);
  const EncodeResult result =
      encode_stream(stream, bundle.weights, bundle.codec_config());
  write_binary(out, result.bitstream.bytes);
  const double duration = static_cast<double>(stream.frames.size()) / kFrameRateHz;
  std::cout << "encoded " << stream.frames.size() << " frames, payload "
            << result.bitstream.payload_bits << " bits";
  if (duration > 0) {
    std::cout << " (" << static_cast<double>(result.bitstream.payload_bits) / duration
              << " bps)";
  }
  std::cout << " -> " << out << "\n";
  return 0;
}

int cmd_decode(const std::string& input, const std::string& bundle_dir,
               const std::string& features_out, const std::string& wav_out,
               uint64_t seed) {
  const CodecBundle bundle = load_bundle(bundle_dir);
  const DecodeResult result =
      decode_stream(read_binary(input), bundle.weights, bundle.codec_config());
  save_feature_stream(features_out, result.features);
  std::cout << "decoded " << result.features.frames.size() << " frames -> "
            << features_out << "\n";
  if (!wav_out.empty()) {
    write_wav(wav_out, synthesize_stream(result.features, seed));
    std::cout << "synthesized " << result.features.frames.size() * kHopSize
              << " samples -> " << wav_out << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& corpus_dir, const std::string& bundle_dir,
             const std::string& json_out, const std::string& trace_dir) {
  const CodecBundle bundle = load_bundle(bundle_dir);
  const auto corpus = load_corpus(corpus_dir);
  const EvalReport report = evaluate_corpus(corpus, bundle, trace_dir);
  const std::string json = eval_report_json(report);
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    if (!out) throw FormatError("cannot write " + json_out);
    out << json << "\n";
  }
  std::cout << json << "\n";
  return 0;
}

int cmd_profile_report(const std::string& bundle_dir) {
  if (!bundle_dir.empty()) {
    const CodecBundle bundle = load_bundle(bundle_dir);
    const RatePrediction pred =
        rate_report(bundle.artifacts.profile, bundle.artifacts.train_estimate);
    std::cout << "bundle profile " << profile_name(bundle.artifacts.profile.id)
              << "\n  theta_sq " << bundle.artifacts.profile.theta_sq
              << "  theta_vq " << bundle.artifacts.profile.theta_vq << "\n";
    for (const auto& [role, bpf] : pred.per_role) {
      std::cout << "  " << role_name(role) << ": huffman " << bpf.huffman_avg
                << " bits/frame, entropy " << bpf.entropy << "\n";
    }
    std::cout << "  predicted " << pred.formula_bps << " bps (+"
              << pred.flag_overhead_bps << " flag bps)\n";
    return 0;
  }
  std::cout << "bitrate ladder (nominal bits/frame and resulting rates):\n";
  for (const auto& point : nominal_points()) {
    const BitrateProfile profile = standard_profile(point.id);
    const double rate =
        rate_formula_bps(profile, point.bits, point.fraction, point.fraction);
    std::cout << "  " << profile_name(point.id) << ": Q_L fraction "
              << point.fraction << ", codebook bits [SQ_L 8";
    if (profile.has_role(Role::kSqSmall)) std::cout << ", SQ_S 4";
    std::cout << ", VQ_L 10+10";
    if (profile.has_role(Role::kVqSmall)) std::cout << ", VQ_S 9";
    std::cout << "] -> " << rate << " bps + "
              << (profile.transmit_flags ? 200 : 0) << " flag bps\n";
  }
  std::cout << "pitch side info: 275 bps; algorithmic delay "
            << kAlgorithmicDelayMs << " ms\n";
  return 0;
}

int cmd_grad_check(uint64_t seed, int frames) {
  // Synthetic sequence with a fitted scaler; weights freshly initialized.
  Rng rng(seed);
  FeatureStream stream;
  stream.frames.resize(frames);
  for (auto& frame : stream.frames) {
    for (double& c : frame.cepstrum) c = rng.uniform(-5.0, 5.0);
    frame.pitch_period =
        kMinPitchLag + static_cast<int>(rng.index(kMaxPitchLag - kMinPitchLag));
    frame.pitch_correlation = rng.uniform();
  }
  PredictorWeights weights = init_weights(seed);
  weights.scaler = FeatureScaler::fit({stream});

  const GradCheckReport report = grad_check(weights, stream, seed + 1);
  for (const auto& [block, err] : report.per_block) {
    std::cout << "  " << block << ": " << err << "\n";
  }
  std::cout << "max relative error: " << report.max_relative_error << "\n";
  if (report.max_relative_error >= 1e-4) {
    std::cerr << "gradient check FAILED (>= 1e-4)\n";
    return 3;
  }
  std::cout << "gradient check ok\n";
  return 0;
}

int cmd_weights_dump(const std::string& path) {
  std::cout << describe_weights_file(path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"predictive residual speech codec"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file; flags win");

  std::string in_path, out_path, bundle_dir, corpus_dir, profile = "low";
  std::string features_out, wav_out, json_out, trace_dir;
  bool raw = false;
  uint64_t seed = 42;
  int frames = 10;

  PipelineConfig pipeline;

  auto* extract = app.add_subcommand("extract", "WAV -> feature stream file");
  extract->add_option("input", in_path, "input .wav (or raw s16le with --raw)")
      ->required();
  extract->add_option("output", out_path, "output .prfs")->required();
  extract->add_flag("--raw", raw, "treat input as headerless s16le 16 kHz PCM");

  auto* train = app.add_subcommand("train", "train a codec bundle");
  train->add_option("corpus", corpus_dir, "directory of .wav/.prfs files")
      ->required();
  train->add_option("--profile", profile, "low|mid|high")->required();
  train->add_option("--out", out_path, "bundle output directory")->required();
  train->add_option("--seed", pipeline.seed, "master seed");
  train->add_option("--epochs", pipeline.train.epochs, "training epochs");
  train->add_option("--learning-rate", pipeline.train.learning_rate, "SGD step");
  train->add_option("--momentum", pipeline.train.momentum, "SGD momentum");
  train->add_option("--batch", pipeline.train.batch_size, "segments per update");
  train->add_option("--truncation", pipeline.train.truncation_length,
                    "BPTT window, frames");
  train->add_option("--noise-std", pipeline.train.noise_std,
                    "input noise std, scaled units");
  train->add_option("--segment-frames", pipeline.residual_segment_frames,
                    "residual-generation segment length");
  train->add_option("--segments-per-utterance",
                    pipeline.residual_segments_per_utterance,
                    "residual-generation segments per utterance");
  train->add_option("--kmeans-iters", pipeline.kmeans_iters, "Lloyd iterations");
  std::string reuse_weights;
  train->add_option("--reuse-weights", reuse_weights,
                    "skip predictor training, reuse this .prdw");

  auto* encode = app.add_subcommand("encode", "features/WAV -> bitstream");
  encode->add_option("input", in_path, ".wav or .prfs input")->required();
  encode->add_option("--bundle", bundle_dir, "bundle directory")->required();
  encode->add_option("--out", out_path, "output bitstream file")->required();
  encode->add_flag("--raw", raw, "treat input as headerless s16le PCM");

  auto* decode = app.add_subcommand("decode", "bitstream -> features [+ WAV]");
  decode->add_option("input", in_path, "bitstream file")->required();
  decode->add_option("--bundle", bundle_dir, "bundle directory")->required();
  decode->add_option("--features-out", features_out, "output .prfs")->required();
  decode->add_option("--wav-out", wav_out, "optional synthesized .wav");
  decode->add_option("--seed", seed, "excitation noise seed");

  auto* eval = app.add_subcommand("eval", "rate/distortion report over a corpus");
  eval->add_option("corpus", corpus_dir, "directory of .wav/.prfs files")
      ->required();
  eval->add_option("--bundle", bundle_dir, "bundle directory")->required();
  eval->add_option("--json-out", json_out, "write the JSON report here");
  eval->add_option("--trace-dir", trace_dir, "per-utterance residual CSV dumps");

  auto* report = app.add_subcommand("profile-report",
                                    "bitrate ladder / trained bundle report");
  report->add_option("--bundle", bundle_dir, "report on a trained bundle");

  auto* gradcheck = app.add_subcommand("grad-check",
                                       "verify BPTT gradients numerically");
  gradcheck->add_option("--seed", seed, "random seed");
  gradcheck->add_option("--frames", frames, "sequence length (<= 10 used)");

  auto* dump = app.add_subcommand("weights-dump", "describe a weights file");
  dump->add_option("input", in_path, ".prdw file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed()) return cmd_extract(in_path, out_path, raw);
    if (train->parsed()) {
      if (!reuse_weights.empty()) pipeline.reuse_weights_path = reuse_weights;
      return cmd_train(corpus_dir, profile, out_path, pipeline);
    }
    if (encode->parsed()) return cmd_encode(in_path, bundle_dir, out_path, raw);
    if (decode->parsed()) {
      return cmd_decode(in_path, bundle_dir, features_out, wav_out, seed);
    }
    if (eval->parsed()) return cmd_eval(corpus_dir, bundle_dir, json_out, trace_dir);
    if (report->parsed()) return cmd_profile_report(bundle_dir);
    if (gradcheck->parsed()) return cmd_grad_check(seed, frames);
    if (dump->parsed()) return cmd_weights_dump(in_path);
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
