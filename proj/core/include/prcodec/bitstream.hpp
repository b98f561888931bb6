// Wire format: MSB-first bit packing, 4-frame packets carrying one 11-bit
// pitch code (7-bit log-scale period + 4-bit correlation) plus per-frame
// threshold flags and Huffman-coded quantizer indices.
//
// Stream layout:
//   header: "PRBS" magic, u16 version, u8 profile id, u64 weights hash,
//           u64 codebook hash, u32 frame count
//   per packet: [11 pitch bits][per frame: flags (low/mid only)]
//               [per real frame: SQ code, VQ stage-1 code, VQ stage-2 code,
//                as dictated by the flags and profile]
//   zero padding to a byte boundary at stream end only.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "prcodec/huffman.hpp"
#include "prcodec/quantizer.hpp"
#include "prcodec/types.hpp"

namespace prcodec {

inline constexpr int kFramesPerPacket = 4;
inline constexpr int kPitchPeriodBits = 7;
inline constexpr int kPitchCorrBits = 4;
inline constexpr uint32_t kBitstreamVersion = 1;

class BitWriter {
 public:
  void put_bit(int bit);
  void put_bits(uint64_t value, int count);  // MSB of value's low `count` bits first
  void align_to_byte();
  size_t bit_count() const { return bit_count_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
  size_t bit_count_ = 0;
};

class BitReader {
 public:
  BitReader(const uint8_t* data, size_t byte_count)
      : data_(data), bit_limit_(byte_count * 8) {}
  explicit BitReader(const std::vector<uint8_t>& bytes)
      : BitReader(bytes.data(), bytes.size()) {}

  int get_bit();  // throws FormatError past the end
  uint64_t get_bits(int count);
  size_t bit_position() const { return bit_pos_; }
  size_t bits_left() const { return bit_limit_ - bit_pos_; }

 private:
  const uint8_t* data_;
  size_t bit_limit_;
  size_t bit_pos_ = 0;
};

struct PitchValue {
  double period = kMinPitchLag;  // samples; log-scale grid point
  double correlation = 0.0;      // cell-center of a uniform 16-cell grid
};

// 7-bit log-uniform period index over [32, 256] plus 4-bit uniform
// correlation index over [0, 1], packed as (period << 4) | corr.
uint16_t quantize_pitch(double period, double correlation);
PitchValue dequantize_pitch(uint16_t code);

// One code per packet: lower-median period and mean correlation over the
// packet's (up to 4) frames.
std::vector<uint16_t> pitch_packet_codes(const FeatureStream& stream);

// Per-frame dequantized pitch after packet aggregation; this is what both
// codec sides (and the trainer) condition the predictor on.
std::vector<PitchValue> conditioned_pitch_values(const FeatureStream& stream);

struct StreamHeader {
  ProfileId profile = ProfileId::kLow;
  uint64_t weights_hash = 0;
  uint64_t codebook_hash = 0;
  uint32_t frame_count = 0;
};

using HuffmanSet = std::map<Role, HuffmanTable>;

struct Bitstream {
  StreamHeader header;
  std::vector<uint8_t> bytes;  // full serialized stream, header included
  size_t payload_bits = 0;     // packet bits only (no header, no padding)
};

// Frames are QuantizedResidual payloads; pitch codes are per packet.
Bitstream pack(const std::vector<QuantizedResidual>& frames,
               const std::vector<uint16_t>& pitch_codes,
               const BitrateProfile& profile, const HuffmanSet& tables,
               uint64_t weights_hash, uint64_t codebook_hash);

struct UnpackedStream {
  StreamHeader header;
  std::vector<QuantizedResidual> frames;
  std::vector<uint16_t> pitch_codes;
};

UnpackedStream unpack(const std::vector<uint8_t>& bytes,
                      const BitrateProfile& profile, const HuffmanSet& tables);

// Reads only the fixed-size header (for hash checks before full decode).
StreamHeader read_header(const std::vector<uint8_t>& bytes);

}  // namespace prcodec
