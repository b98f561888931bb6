// On-disk artifacts: "PRFS" feature streams, "PRCB" codebook files
// (codebooks + thresholds + Huffman lengths + frequency tables), and the
// bundle directory (weights + codebooks + bundle.json) a codec run needs.
#pragma once

#include <string>

#include "prcodec/codec.hpp"
#include "prcodec/rate.hpp"

namespace prcodec {

void save_feature_stream(const std::string& path, const FeatureStream& stream);
FeatureStream load_feature_stream(const std::string& path);

// Everything trained for one bitrate profile.
struct ProfileArtifacts {
  BitrateProfile profile;  // thresholds calibrated
  CodebookSet books;
  HuffmanSet huffman;
  FrequencyEstimate train_estimate;  // frequencies + measured Q_L fractions
};

void save_codebook_file(const std::string& path, const ProfileArtifacts& art);
ProfileArtifacts load_codebook_file(const std::string& path);

struct CodecBundle {
  PredictorWeights weights;
  ProfileArtifacts artifacts;
  uint64_t weights_hash = 0;
  uint64_t codebook_hash = 0;

  CodecConfig codec_config() const;
};

// bundle.json in `dir` names the weight and codebook files and pins their
// hashes; decode refuses streams whose header hashes differ.
void save_bundle_manifest(const std::string& dir, const std::string& weights_file,
                          const std::string& codebook_file, ProfileId profile,
                          uint64_t weights_hash, uint64_t codebook_hash);
CodecBundle load_bundle(const std::string& dir);

}  // namespace prcodec
