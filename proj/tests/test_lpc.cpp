#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prcodec/features.hpp"
#include "prcodec/lpc.hpp"
#include "prcodec/rng.hpp"
#include "test_util.hpp"

using namespace prcodec;

namespace {

std::array<double, 18> smooth_random_energies(Rng& rng, double level = 1.0) {
  std::array<double, 18> e{};
  double walk = std::log(level);
  for (int i = 0; i < 18; ++i) {
    walk += 0.4 * rng.normal();
    walk = std::clamp(walk, std::log(level) - 4.0, std::log(level) + 4.0);
    e[i] = std::exp(walk);
  }
  return e;
}

}  // namespace

TEST_CASE("cepstrum <-> band energies roundtrip") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto energies = smooth_random_energies(rng, 100.0);
    std::array<double, 18> log_e{};
    for (int i = 0; i < 18; ++i) log_e[i] = std::log(energies[i] + kEnergyFloor);
    const auto cepstrum = dct18(log_e);
    const auto back = band_energies_from_cepstrum(cepstrum);
    for (int i = 0; i < 18; ++i) {
      CHECK(back[i] == doctest::Approx(energies[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("scaled cepstrum roundtrip through the scaler") {
  const FeatureStream corpus = testutil::random_stream(100, 5);
  const FeatureScaler scaler = FeatureScaler::fit({corpus});
  const auto& frame = corpus.frames[7];
  const auto scaled = scaler.scale_cepstrum(frame.cepstrum);
  const auto energies = cepstrum_to_band_energies(scaled, scaler);
  const auto direct = band_energies_from_cepstrum(frame.cepstrum);
  for (int i = 0; i < 18; ++i) {
    CHECK(energies[i] == doctest::Approx(direct[i]).epsilon(1e-9));
  }
}

TEST_CASE("band energies recovered from a real frame's cepstrum") {
  Rng rng(31);
  PcmSignal pcm;
  pcm.samples.resize(1600);
  for (auto& s : pcm.samples) {
    s = static_cast<int16_t>(6000.0 * rng.uniform(-1.0, 1.0));
  }
  const auto frames = frame_signal(pcm);
  for (size_t f = 0; f < frames.size(); f += 3) {
    const auto original = band_energies(power_spectrum(frames[f]));
    const auto recovered = band_energies_from_cepstrum(bark_cepstrum(frames[f]));
    for (int i = 0; i < 18; ++i) {
      CHECK(recovered[i] == doctest::Approx(original[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("all-zero cepstrum gives flat unit energies") {
  std::array<double, 18> zero{};
  const auto energies = band_energies_from_cepstrum(zero);
  for (double e : energies) CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("band energies from cepstra are always positive") {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    std::array<double, 18> c{};
    for (double& v : c) v = rng.uniform(-20.0, 20.0);
    for (double e : band_energies_from_cepstrum(c)) CHECK(e > 0.0);
  }
}

TEST_CASE("flat spectrum: zero coefficients, gain = sqrt(mean energy)") {
  std::array<double, 18> flat{};
  flat.fill(4.0);
  const LpcModel model = band_energies_to_lpc(flat);
  for (double a : model.coeffs) CHECK(std::abs(a) < 1e-9);
  CHECK(model.gain == doctest::Approx(std::sqrt(4.0)).epsilon(1e-3));
}

TEST_CASE("AR(2) recovery within 0.05") {
  const double radius = 0.95;
  const double angle = 3.14159265358979323846 / 4.0;
  const double a1 = 2.0 * radius * std::cos(angle);
  const double a2 = -radius * radius;
  const auto energies = oracle::ar2_band_energies(a1, a2);
  const LpcModel model = band_energies_to_lpc(energies);
  CHECK(std::abs(model.coeffs[0] - a1) < 0.05);
  CHECK(std::abs(model.coeffs[1] - a2) < 0.05);
}

TEST_CASE("reflection coefficients stay inside the unit circle") {
  Rng rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto energies = smooth_random_energies(rng, rng.uniform(0.01, 100.0));
    const LpcModel model = band_energies_to_lpc(energies);
    for (double k : model.reflection) CHECK(std::abs(k) < 1.0);
  }
}

TEST_CASE("non-positive band energy is rejected") {
  std::array<double, 18> energies{};
  energies.fill(1.0);
  energies[9] = 0.0;
  CHECK_THROWS_AS(band_energies_to_lpc(energies), NumericError);
}

TEST_CASE("synthesis: zero gain is silence") {
  LpcModel model;
  model.gain = 0.0;
  SynthState state(1);
  const auto out = synthesize_frame(model, 100.0, 0.8, state);
  for (double s : out) CHECK(s == 0.0);
}

TEST_CASE("synthesis: flat LPC, correlation 1, period 160 is an impulse train") {
  LpcModel model;
  model.gain = 2.0;
  SynthState state(1);
  std::vector<double> samples;
  for (int f = 0; f < 10; ++f) {
    const auto chunk = synthesize_frame(model, 160.0, 1.0, state);
    samples.insert(samples.end(), chunk.begin(), chunk.end());
  }
  std::vector<size_t> pulses;
  for (size_t t = 0; t < samples.size(); ++t) {
    if (samples[t] != 0.0) {
      pulses.push_back(t);
      CHECK(samples[t] == doctest::Approx(2.0 * std::sqrt(160.0)));
    }
  }
  REQUIRE(pulses.size() >= 9);
  for (size_t i = 1; i < pulses.size(); ++i) {
    CHECK(pulses[i] - pulses[i - 1] == 160);
  }
}

TEST_CASE("synthesis: output scales linearly and monotonically with gain") {
  Rng rng(13);
  const auto energies = smooth_random_energies(rng, 1.0);
  LpcModel model = band_energies_to_lpc(energies);

  auto rms_for_gain = [&](double gain) {
    LpcModel m = model;
    m.gain = gain;
    SynthState state(99);
    double sum = 0.0;
    size_t count = 0;
    for (int f = 0; f < 20; ++f) {
      const auto chunk = synthesize_frame(m, 90.0, 0.5, state);
      for (double s : chunk) {
        sum += s * s;
        ++count;
      }
    }
    return std::sqrt(sum / static_cast<double>(count));
  };

  const double r1 = rms_for_gain(1.0);
  const double r2 = rms_for_gain(2.0);
  const double r4 = rms_for_gain(4.0);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));  // same noise stream
  CHECK(r1 < r2);
  CHECK(r2 < r4);
}

TEST_CASE("synthesis: chunked output equals a single long run") {
  Rng rng(17);
  const auto energies = smooth_random_energies(rng, 1.0);
  const LpcModel model = band_energies_to_lpc(energies);

  SynthState chunked(7);
  std::vector<double> a;
  for (int f = 0; f < 10; ++f) {
    const auto chunk = synthesize_frame(model, 123.0, 0.6, chunked);
    a.insert(a.end(), chunk.begin(), chunk.end());
  }

  // Independent long-run recursion with the same excitation stream.
  Rng noise(7);
  std::vector<double> b;
  std::array<double, 16> hist{};
  double phase = 0.0;
  const double pulse_amp = std::sqrt(0.6) * std::sqrt(123.0);
  const double noise_amp = std::sqrt(1.0 - 0.6);
  for (int t = 0; t < 1600; ++t) {
    double e = noise_amp * noise.normal();
    phase += 1.0;
    if (phase >= 123.0) {
      phase -= 123.0;
      e += pulse_amp;
    }
    e *= model.gain;
    double pred = 0.0;
    for (int tau = 0; tau < 16; ++tau) pred += model.coeffs[tau] * hist[tau];
    const double s = pred + e;
    for (int tau = 15; tau > 0; --tau) hist[tau] = hist[tau - 1];
    hist[0] = s;
    b.push_back(s);
  }
  REQUIRE(a.size() == b.size());
  for (size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t] == doctest::Approx(b[t]).epsilon(1e-9));
  }
}

TEST_CASE("synthesis: bounded over long runs") {
  Rng rng(19);
  for (int rep = 0; rep < 30; ++rep) {
    const auto energies = smooth_random_energies(rng, rng.uniform(0.1, 10.0));
    const LpcModel model = band_energies_to_lpc(energies);
    SynthState state(rep);
    const double period = rng.uniform(32.0, 256.0);
    const double corr = rng.uniform();
    double first_half_max = 0.0, second_half_max = 0.0;
    const int frames = 1000;  // 10 s
    for (int f = 0; f < frames; ++f) {
      const auto chunk = synthesize_frame(model, period, corr, state);
      for (double s : chunk) {
        CHECK(std::isfinite(s));
        double& slot = (f < frames / 2) ? first_half_max : second_half_max;
        slot = std::max(slot, std::abs(s));
      }
    }
    // Headroom: the largest excitation impulse is gain*sqrt(period); a
    // stable filter must not blow past 10x that. No divergence either.
    const double headroom = 10.0 * model.gain * std::sqrt(256.0);
    CHECK(first_half_max <= headroom);
    CHECK(second_half_max <= headroom);
    CHECK(second_half_max <= 4.0 * std::max(first_half_max, model.gain));
  }
}

TEST_CASE("synthesis: noise-driven output matches target bands within 3 dB") {
  Rng rng(23);
  for (int rep = 0; rep < 3; ++rep) {
    // Gentle spectra: per-band random walk of 0.2 in log domain.
    std::array<double, 18> energies{};
    double walk = std::log(5e5);
    for (int i = 0; i < 18; ++i) {
      walk += 0.2 * rng.normal();
      energies[i] = std::exp(walk);
    }
    const LpcModel model = band_energies_to_lpc(energies);
    SynthState state(rep + 100);
    PcmSignal pcm;
    pcm.samples.reserve(16000 * 12);
    for (int f = 0; f < 1200; ++f) {  // 12 s, noise only
      const auto chunk = synthesize_frame(model, 100.0, 0.0, state);
      for (double s : chunk) {
        pcm.samples.push_back(static_cast<int16_t>(
            std::lround(std::clamp(s, -32768.0, 32767.0))));
      }
    }
    const auto frames = frame_signal(pcm);
    std::array<double, 18> mean_bands{};
    for (const auto& frame : frames) {
      const auto bands = band_energies(power_spectrum(frame));
      for (int i = 0; i < 18; ++i) mean_bands[i] += bands[i] / frames.size();
    }
    for (int i = 0; i < 18; ++i) {
      const double ratio_db = 10.0 * std::log10(mean_bands[i] / energies[i]);
      CHECK(std::abs(ratio_db) <= 3.0);
    }
  }
}

TEST_CASE("synthesize_stream produces clamped 16-bit output") {
  FeatureStream stream = testutil::sinusoidal_stream(30, 29);
  const PcmSignal pcm = synthesize_stream(stream, 7);
  CHECK(pcm.samples.size() == 30 * kHopSize);
  CHECK(pcm.sample_rate == 16000);
}
