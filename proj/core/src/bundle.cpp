#include "prcodec/bundle.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "prcodec/binio.hpp"

namespace prcodec {

namespace {

constexpr char kFeatureMagic[4] = {'P', 'R', 'F', 'S'};
constexpr char kCodebookMagic[4] = {'P', 'R', 'C', 'B'};
constexpr uint32_t kFeatureVersion = 1;
constexpr uint32_t kCodebookVersion = 1;

void expect_magic(BinReader& in, const char (&magic)[4], const std::string& path,
                  const char* what) {
  for (char c : magic) {
    if (in.u8() != static_cast<uint8_t>(c)) {
      throw FormatError(path + ": bad magic, not a " + std::string(what) + " file");
    }
  }
}

}  // namespace

void save_feature_stream(const std::string& path, const FeatureStream& stream) {
  BinWriter out;
  out.raw(kFeatureMagic, 4);
  out.u32(kFeatureVersion);
  out.u32(static_cast<uint32_t>(stream.frames.size()));
  for (const FeatureFrame& frame : stream.frames) {
    for (double c : frame.cepstrum) out.f32(static_cast<float>(c));
    out.f32(static_cast<float>(frame.pitch_period));
    out.f32(static_cast<float>(frame.pitch_correlation));
  }
  out.write_file(path);
}

FeatureStream load_feature_stream(const std::string& path) {
  BinReader in = BinReader::from_file(path);
  expect_magic(in, kFeatureMagic, path, "feature stream");
  const uint32_t version = in.u32();
  if (version != kFeatureVersion) {
    throw FormatError(path + ": unsupported feature stream version");
  }
  const uint32_t count = in.u32();
  FeatureStream stream;
  stream.frames.resize(count);
  for (FeatureFrame& frame : stream.frames) {
    for (double& c : frame.cepstrum) c = static_cast<double>(in.f32());
    frame.pitch_period = static_cast<int>(std::lround(in.f32()));
    frame.pitch_correlation = static_cast<double>(in.f32());
  }
  if (!in.at_end()) throw FormatError(path + ": trailing bytes");
  return stream;
}

void save_codebook_file(const std::string& path, const ProfileArtifacts& art) {
  BinWriter out;
  out.raw(kCodebookMagic, 4);
  out.u32(kCodebookVersion);
  out.u8(static_cast<uint8_t>(art.profile.id));
  out.str(profile_name(art.profile.id));

  uint8_t count = 0;
  for (const auto& [role, book] : art.books) {
    (void)book;
    ++count;
  }
  out.u8(count);
  for (const auto& [role, book] : art.books) {
    out.u8(static_cast<uint8_t>(role));
    out.u16(static_cast<uint16_t>(book.dim));
    out.u32(static_cast<uint32_t>(book.size));
    for (double c : book.centroids) out.f32(static_cast<float>(c));
    const auto& table = art.huffman.at(role);
    if (table.symbol_count() != book.size) {
      throw NumericError("huffman table size mismatch in codebook file");
    }
    for (uint8_t len : table.lengths) out.u8(len);
    const auto& freqs = art.train_estimate.frequencies.at(role);
    for (double f : freqs) out.f64(f);
  }
  out.f64(art.profile.theta_sq);
  out.f64(art.profile.theta_vq);
  out.f64(art.train_estimate.fraction_sq_ql);
  out.f64(art.train_estimate.fraction_vq_ql);
  out.write_file(path);
}

ProfileArtifacts load_codebook_file(const std::string& path) {
  BinReader in = BinReader::from_file(path);
  expect_magic(in, kCodebookMagic, path, "codebook");
  const uint32_t version = in.u32();
  if (version != kCodebookVersion) {
    throw FormatError(path + ": unsupported codebook version");
  }
  const uint8_t profile_id = in.u8();
  if (profile_id > 2) throw FormatError(path + ": unknown profile id");
  const std::string name = in.str();

  ProfileArtifacts art;
  art.profile = standard_profile(static_cast<ProfileId>(profile_id));
  if (name != profile_name(art.profile.id)) {
    throw FormatError(path + ": profile name/id mismatch");
  }

  const uint8_t count = in.u8();
  for (int q = 0; q < count; ++q) {
    const uint8_t role_raw = in.u8();
    if (role_raw > 4) throw FormatError(path + ": unknown quantizer role");
    const Role role = static_cast<Role>(role_raw);
    Codebook book;
    book.dim = in.u16();
    book.size = static_cast<int>(in.u32());
    if (!art.profile.has_role(role) || book.dim != art.profile.role_dim(role) ||
        book.size != art.profile.role_size(role)) {
      throw FormatError(path + ": codebook shape disagrees with the profile");
    }
    book.centroids.resize(static_cast<size_t>(book.size) * book.dim);
    for (double& c : book.centroids) c = static_cast<double>(in.f32());

    std::vector<uint8_t> lengths(book.size);
    for (uint8_t& len : lengths) len = in.u8();
    std::vector<double> freqs(book.size);
    for (double& f : freqs) f = in.f64();

    art.huffman[role] = huffman_from_lengths(std::move(lengths));
    art.train_estimate.frequencies[role] = std::move(freqs);
    art.books[role] = std::move(book);
  }
  art.profile.theta_sq = in.f64();
  art.profile.theta_vq = in.f64();
  art.train_estimate.fraction_sq_ql = in.f64();
  art.train_estimate.fraction_vq_ql = in.f64();
  if (!in.at_end()) throw FormatError(path + ": trailing bytes");
  return art;
}

CodecConfig CodecBundle::codec_config() const {
  CodecConfig config;
  config.profile = artifacts.profile;
  config.books = artifacts.books;
  config.huffman = artifacts.huffman;
  config.weights_hash = weights_hash;
  config.codebook_hash = codebook_hash;
  return config;
}

void save_bundle_manifest(const std::string& dir, const std::string& weights_file,
                          const std::string& codebook_file, ProfileId profile,
                          uint64_t weights_hash, uint64_t codebook_hash) {
  nlohmann::json j;
  j["profile"] = profile_name(profile);
  j["profile_id"] = static_cast<int>(profile);
  j["weights"] = weights_file;
  j["codebook"] = codebook_file;
  j["weights_hash"] = weights_hash;
  j["codebook_hash"] = codebook_hash;
  std::ofstream out(std::filesystem::path(dir) / "bundle.json");
  if (!out) throw FormatError("cannot write bundle manifest in " + dir);
  out << j.dump(2) << "\n";
}

CodecBundle load_bundle(const std::string& dir) {
  const std::filesystem::path root(dir);
  const std::filesystem::path manifest = root / "bundle.json";
  std::ifstream in(manifest);
  if (!in) throw FormatError("missing bundle manifest: " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest.string() + ": " + e.what());
  }

  CodecBundle bundle;
  const std::string weights_path = (root / j.at("weights").get<std::string>()).string();
  const std::string codebook_path = (root / j.at("codebook").get<std::string>()).string();
  bundle.weights = load_weights(weights_path);
  bundle.artifacts = load_codebook_file(codebook_path);
  bundle.weights_hash = fnv1a64_file(weights_path);
  bundle.codebook_hash = fnv1a64_file(codebook_path);

  if (j.contains("weights_hash") &&
      j.at("weights_hash").get<uint64_t>() != bundle.weights_hash) {
    throw FormatError("bundle weights hash mismatch (file was modified?)");
  }
  if (j.contains("codebook_hash") &&
      j.at("codebook_hash").get<uint64_t>() != bundle.codebook_hash) {
    throw FormatError("bundle codebook hash mismatch (file was modified?)");
  }
  const std::string name = j.at("profile").get<std::string>();
  if (profile_from_name(name) != bundle.artifacts.profile.id) {
    throw FormatError("bundle profile disagrees with codebook file");
  }
  return bundle;
}

}  // namespace prcodec
