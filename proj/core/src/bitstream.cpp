#include "prcodec/bitstream.hpp"

#include <algorithm>
#include <cmath>

namespace prcodec {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'B', 'S'};
constexpr size_t kHeaderBytes = 4 + 2 + 1 + 8 + 8 + 4;

const double kLogPeriodSpan = std::log(256.0 / 32.0);
constexpr int kPeriodLevels = 128;  // 7 bits, grid points 0..127
constexpr int kCorrLevels = 16;     // 4 bits

}  // namespace

void BitWriter::put_bit(int bit) {
  const size_t byte = bit_count_ / 8;
  if (byte == bytes_.size()) bytes_.push_back(0);
  if (bit) bytes_[byte] |= static_cast<uint8_t>(0x80u >> (bit_count_ % 8));
  ++bit_count_;
}

void BitWriter::put_bits(uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) {
    put_bit(static_cast<int>((value >> i) & 1u));
  }
}

void BitWriter::align_to_byte() {
  while (bit_count_ % 8 != 0) put_bit(0);
}

int BitReader::get_bit() {
  if (bit_pos_ >= bit_limit_) {
    throw FormatError("corrupt stream: ran past end of bitstream");
  }
  const int bit = (data_[bit_pos_ / 8] >> (7 - bit_pos_ % 8)) & 1;
  ++bit_pos_;
  return bit;
}

uint64_t BitReader::get_bits(int count) {
  uint64_t v = 0;
  for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<uint64_t>(get_bit());
  return v;
}

uint16_t quantize_pitch(double period, double correlation) {
  const double clamped = std::clamp(period, 32.0, 256.0);
  const double pos = std::log(clamped / 32.0) / kLogPeriodSpan;  // [0, 1]
  int period_idx = static_cast<int>(std::lround(pos * (kPeriodLevels - 1)));
  period_idx = std::clamp(period_idx, 0, kPeriodLevels - 1);

  int corr_idx = static_cast<int>(std::floor(correlation * kCorrLevels));
  corr_idx = std::clamp(corr_idx, 0, kCorrLevels - 1);
  return static_cast<uint16_t>((period_idx << kPitchCorrBits) | corr_idx);
}

PitchValue dequantize_pitch(uint16_t code) {
  const int period_idx = (code >> kPitchCorrBits) & (kPeriodLevels - 1);
  const int corr_idx = code & (kCorrLevels - 1);
  PitchValue v;
  v.period = 32.0 * std::exp(static_cast<double>(period_idx) /
                             (kPeriodLevels - 1) * kLogPeriodSpan);
  v.correlation = (corr_idx + 0.5) / kCorrLevels;
  return v;
}

std::vector<uint16_t> pitch_packet_codes(const FeatureStream& stream) {
  std::vector<uint16_t> codes;
  const size_t n = stream.frames.size();
  codes.reserve((n + kFramesPerPacket - 1) / kFramesPerPacket);
  for (size_t start = 0; start < n; start += kFramesPerPacket) {
    const size_t end = std::min(n, start + kFramesPerPacket);
    std::vector<int> periods;
    double corr_sum = 0.0;
    for (size_t i = start; i < end; ++i) {
      periods.push_back(stream.frames[i].pitch_period);
      corr_sum += stream.frames[i].pitch_correlation;
    }
    std::sort(periods.begin(), periods.end());
    const int median = periods[(periods.size() - 1) / 2];  // lower median
    const double mean_corr = corr_sum / static_cast<double>(periods.size());
    codes.push_back(quantize_pitch(static_cast<double>(median), mean_corr));
  }
  return codes;
}

std::vector<PitchValue> conditioned_pitch_values(const FeatureStream& stream) {
  const auto codes = pitch_packet_codes(stream);
  std::vector<PitchValue> values(stream.frames.size());
  for (size_t i = 0; i < values.size(); ++i) {
    values[i] = dequantize_pitch(codes[i / kFramesPerPacket]);
  }
  return values;
}

namespace {

void write_header(BitWriter& out, const StreamHeader& header) {
  for (char c : kMagic) out.put_bits(static_cast<uint8_t>(c), 8);
  out.put_bits(kBitstreamVersion, 16);
  out.put_bits(static_cast<uint8_t>(header.profile), 8);
  out.put_bits(header.weights_hash, 64);
  out.put_bits(header.codebook_hash, 64);
  out.put_bits(header.frame_count, 32);
}

StreamHeader parse_header(BitReader& in) {
  for (char c : kMagic) {
    if (in.get_bits(8) != static_cast<uint8_t>(c)) {
      throw FormatError("bad magic: not a coded bitstream");
    }
  }
  const uint64_t version = in.get_bits(16);
  if (version != kBitstreamVersion) {
    throw FormatError("unsupported bitstream version " + std::to_string(version));
  }
  StreamHeader header;
  const uint64_t profile = in.get_bits(8);
  if (profile > 2) throw FormatError("unknown profile id in bitstream header");
  header.profile = static_cast<ProfileId>(profile);
  header.weights_hash = in.get_bits(64);
  header.codebook_hash = in.get_bits(64);
  header.frame_count = static_cast<uint32_t>(in.get_bits(32));
  return header;
}

const HuffmanTable& table_for(const HuffmanSet& tables, Role role) {
  const auto it = tables.find(role);
  if (it == tables.end()) {
    throw NumericError(std::string("missing huffman table for ") + role_name(role));
  }
  return it->second;
}

}  // namespace

Bitstream pack(const std::vector<QuantizedResidual>& frames,
               const std::vector<uint16_t>& pitch_codes,
               const BitrateProfile& profile, const HuffmanSet& tables,
               uint64_t weights_hash, uint64_t codebook_hash) {
  const size_t n = frames.size();
  const size_t packets = (n + kFramesPerPacket - 1) / kFramesPerPacket;
  if (pitch_codes.size() != packets) {
    throw NumericError("pitch code count does not match packet count");
  }

  Bitstream stream;
  stream.header.profile = profile.id;
  stream.header.weights_hash = weights_hash;
  stream.header.codebook_hash = codebook_hash;
  stream.header.frame_count = static_cast<uint32_t>(n);

  BitWriter out;
  write_header(out, stream.header);
  const size_t payload_start = out.bit_count();

  for (size_t p = 0; p < packets; ++p) {
    out.put_bits(pitch_codes[p], kPitchPeriodBits + kPitchCorrBits);
    const size_t start = p * kFramesPerPacket;
    for (size_t f = start; f < start + kFramesPerPacket; ++f) {
      const bool real = f < n;
      const QuantizedResidual frame = real ? frames[f] : QuantizedResidual{};
      if (profile.transmit_flags) {
        out.put_bit(frame.sq_flag);
        out.put_bit(frame.vq_flag);
      }
      if (!real) continue;  // pad frames carry only (zero) flags

      if (frame.sq_flag) {
        huffman_encode_symbol(table_for(tables, Role::kSqLarge), frame.sq_index, out);
      } else if (!profile.sq_small_discard) {
        huffman_encode_symbol(table_for(tables, Role::kSqSmall), frame.sq_index, out);
      }
      if (frame.vq_flag) {
        huffman_encode_symbol(table_for(tables, Role::kVqLarge1), frame.vq_indices[0], out);
        huffman_encode_symbol(table_for(tables, Role::kVqLarge2), frame.vq_indices[1], out);
      } else if (!profile.vq_small_discard) {
        huffman_encode_symbol(table_for(tables, Role::kVqSmall), frame.vq_indices[0], out);
      }
    }
  }
  stream.payload_bits = out.bit_count() - payload_start;
  out.align_to_byte();
  stream.bytes = out.bytes();
  return stream;
}

UnpackedStream unpack(const std::vector<uint8_t>& bytes,
                      const BitrateProfile& profile, const HuffmanSet& tables) {
  BitReader in(bytes);
  UnpackedStream result;
  result.header = parse_header(in);
  if (result.header.profile != profile.id) {
    throw FormatError("bitstream profile does not match the loaded profile");
  }

  const size_t n = result.header.frame_count;
  const size_t packets = (n + kFramesPerPacket - 1) / kFramesPerPacket;
  // Every packet carries at least its pitch bits; a frame count that
  // cannot fit in the remaining payload is corruption, not allocation.
  if (packets * (kPitchPeriodBits + kPitchCorrBits) > in.bits_left()) {
    throw FormatError("corrupt stream: frame count exceeds the payload");
  }
  result.frames.reserve(n);
  for (size_t p = 0; p < packets; ++p) {
    result.pitch_codes.push_back(
        static_cast<uint16_t>(in.get_bits(kPitchPeriodBits + kPitchCorrBits)));
    const size_t start = p * kFramesPerPacket;
    for (size_t f = start; f < start + kFramesPerPacket; ++f) {
      const bool real = f < n;
      QuantizedResidual frame;
      if (profile.transmit_flags) {
        frame.sq_flag = static_cast<uint8_t>(in.get_bit());
        frame.vq_flag = static_cast<uint8_t>(in.get_bit());
        if (!real && (frame.sq_flag || frame.vq_flag)) {
          throw FormatError("corrupt stream: nonzero padding flags");
        }
      } else {
        frame.sq_flag = 1;
        frame.vq_flag = 1;
      }
      if (!real) continue;

      if (frame.sq_flag) {
        frame.sq_index = huffman_decode_symbol(table_for(tables, Role::kSqLarge), in);
      } else if (!profile.sq_small_discard) {
        frame.sq_index = huffman_decode_symbol(table_for(tables, Role::kSqSmall), in);
      }
      if (frame.vq_flag) {
        frame.vq_indices[0] =
            huffman_decode_symbol(table_for(tables, Role::kVqLarge1), in);
        frame.vq_indices[1] =
            huffman_decode_symbol(table_for(tables, Role::kVqLarge2), in);
      } else if (!profile.vq_small_discard) {
        frame.vq_indices[0] =
            huffman_decode_symbol(table_for(tables, Role::kVqSmall), in);
      }
      result.frames.push_back(frame);
    }
  }
  return result;
}

StreamHeader read_header(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated bitstream header");
  BitReader in(bytes);
  return parse_header(in);
}

}  // namespace prcodec
