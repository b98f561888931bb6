// End-to-end checks of the command-line harness: exit codes, file
// contracts, determinism, and hash discipline.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "prcodec/bundle.hpp"
#include "prcodec/wav.hpp"
#include "test_util.hpp"

using namespace prcodec;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PRCODEC_CLI_PATH) + " " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct CliFixture {
  std::string dir;

  CliFixture() {
    dir = testutil::temp_dir("cli");
    fs::remove_all(dir);
    fs::create_directories(dir + "/corpus");
    for (int u = 0; u < 4; ++u) {
      write_wav(dir + "/corpus/u" + std::to_string(u) + ".wav",
                testutil::pulse_train_utterance(1.0, 700 + u));
    }
  }

  std::string train_args(const std::string& out, int seed) const {
    return "train " + dir + "/corpus --profile mid --out " + out +
           " --epochs 1 --seed " + std::to_string(seed) +
           " --segments-per-utterance 2 --kmeans-iters 3";
  }
};

}  // namespace

TEST_CASE("cli: full pipeline, determinism, and failure modes") {
  CliFixture fx;

  // extract
  CHECK(run_cli("extract " + fx.dir + "/corpus/u0.wav " + fx.dir + "/u0.prfs") == 0);
  const FeatureStream feats = load_feature_stream(fx.dir + "/u0.prfs");
  CHECK(feats.frames.size() == 99);

  // extract rejects a non-16k file with exit code 2
  {
    fs::copy_file(fx.dir + "/corpus/u0.wav", fx.dir + "/bad.wav");
    std::fstream f(fx.dir + "/bad.wav",
                   std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(24);
    const uint32_t rate = 48000;
    f.write(reinterpret_cast<const char*>(&rate), 4);
  }
  CHECK(run_cli("extract " + fx.dir + "/bad.wav " + fx.dir + "/bad.prfs") == 2);

  // missing subcommand is a usage error
  CHECK(run_cli("") == 1);
  CHECK(run_cli("train " + fx.dir + "/corpus") == 1);  // missing required flags

  // empty corpus directory: format error
  fs::create_directories(fx.dir + "/empty");
  CHECK(run_cli("train " + fx.dir + "/empty --profile low --out " + fx.dir +
                "/none") == 2);

  // train twice with the same seed: identical bundle manifests
  REQUIRE(run_cli(fx.train_args(fx.dir + "/bundle_a", 11)) == 0);
  REQUIRE(run_cli(fx.train_args(fx.dir + "/bundle_b", 11)) == 0);
  CHECK(read_text(fx.dir + "/bundle_a/bundle.json") ==
        read_text(fx.dir + "/bundle_b/bundle.json"));

  // a different seed gives different artifacts
  REQUIRE(run_cli(fx.train_args(fx.dir + "/bundle_c", 12)) == 0);
  CHECK(read_text(fx.dir + "/bundle_a/bundle.json") !=
        read_text(fx.dir + "/bundle_c/bundle.json"));

  // encode from wav and from features: identical bitstreams
  CHECK(run_cli("encode " + fx.dir + "/corpus/u0.wav --bundle " + fx.dir +
                "/bundle_a --out " + fx.dir + "/u0.prbs") == 0);
  CHECK(run_cli("encode " + fx.dir + "/u0.prfs --bundle " + fx.dir +
                "/bundle_a --out " + fx.dir + "/u0b.prbs") == 0);
  // Feature files round through f32, so the two streams may differ; both
  // must decode cleanly. Decode twice for determinism.
  CHECK(run_cli("decode " + fx.dir + "/u0.prbs --bundle " + fx.dir +
                "/bundle_a --features-out " + fx.dir + "/dec1.prfs") == 0);
  CHECK(run_cli("decode " + fx.dir + "/u0.prbs --bundle " + fx.dir +
                "/bundle_a --features-out " + fx.dir + "/dec2.prfs --wav-out " +
                fx.dir + "/dec2.wav") == 0);
  CHECK(read_text(fx.dir + "/dec1.prfs") == read_text(fx.dir + "/dec2.prfs"));
  CHECK(read_wav(fx.dir + "/dec2.wav").samples.size() == 99 * kHopSize);

  // decoding with the wrong bundle is refused (hash mismatch), exit 2
  CHECK(run_cli("decode " + fx.dir + "/u0.prbs --bundle " + fx.dir +
                "/bundle_c --features-out " + fx.dir + "/x.prfs") == 2);

  // truncated bitstream: diagnostic, not silent success
  {
    const auto bytes = read_text(fx.dir + "/u0.prbs");
    std::ofstream out(fx.dir + "/trunc.prbs", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 3));
  }
  CHECK(run_cli("decode " + fx.dir + "/trunc.prbs --bundle " + fx.dir +
                "/bundle_a --features-out " + fx.dir + "/y.prfs") == 2);

  // empty-ish input: a 320-sample wav encodes to a single-frame stream
  {
    PcmSignal tiny;
    tiny.samples.assign(320, 1000);
    write_wav(fx.dir + "/tiny.wav", tiny);
  }
  CHECK(run_cli("encode " + fx.dir + "/tiny.wav --bundle " + fx.dir +
                "/bundle_a --out " + fx.dir + "/tiny.prbs") == 0);

  // eval emits a JSON report
  CHECK(run_cli("eval " + fx.dir + "/corpus --bundle " + fx.dir +
                "/bundle_a --json-out " + fx.dir + "/report.json --trace-dir " +
                fx.dir + "/traces") == 0);
  const std::string report = read_text(fx.dir + "/report.json");
  CHECK(report.find("measured_payload_bps") != std::string::npos);
  CHECK(fs::exists(fx.dir + "/traces/trace_0.csv"));
  {
    std::ifstream trace(fx.dir + "/traces/trace_0.csv");
    std::string header;
    std::getline(trace, header);
    CHECK(header == "frame,l1_r0,l1_rvec,sq_flag,vq_flag");
    size_t rows = 0;
    std::string line;
    while (std::getline(trace, line)) rows += !line.empty();
    CHECK(rows == 99);
  }

  // profile-report shows the ladder and the bundle view works
  CHECK(run_cli("profile-report") == 0);
  CHECK(run_cli("profile-report --bundle " + fx.dir + "/bundle_a") == 0);

  // weights-dump
  CHECK(run_cli("weights-dump " + fx.dir + "/bundle_a/weights.prdw") == 0);
  CHECK(run_cli("weights-dump " + fx.dir + "/bundle_a/codebook.prcb") == 2);

  // config file support: flags from file, command line wins
  {
    std::ofstream cfg(fx.dir + "/train.cfg");
    cfg << "[train]\nepochs = 1\nkmeans-iters = 3\nsegments-per-utterance = 2\n";
  }
  CHECK(run_cli("--config " + fx.dir + "/train.cfg train " + fx.dir +
                "/corpus --profile mid --out " + fx.dir + "/bundle_cfg --seed 11") == 0);
  CHECK(read_text(fx.dir + "/bundle_cfg/bundle.json") ==
        read_text(fx.dir + "/bundle_a/bundle.json"));
}
