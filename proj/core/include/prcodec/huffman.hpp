// Canonical Huffman coding over codeword indices. Tables are rebuilt
// deterministically from code lengths (shorter codes first, ties by
// symbol id), so the encoder and decoder need only share lengths.
#pragma once

#include <cstdint>
#include <vector>

#include "prcodec/types.hpp"

namespace prcodec {

class BitWriter;
class BitReader;

struct HuffmanTable {
  std::vector<uint8_t> lengths;  // code length per symbol
  std::vector<uint32_t> codes;   // canonical codes (MSB-first)

  // Decode acceleration, derived from lengths by finalize().
  int max_len = 0;
  std::vector<uint64_t> first_code;   // per length
  std::vector<int> count_at_len;
  std::vector<int> offset_at_len;    // into sorted_symbols
  std::vector<int> sorted_symbols;   // by (length, symbol id)

  int symbol_count() const { return static_cast<int>(lengths.size()); }
  double kraft_sum() const;  // sum of 2^-len
  void finalize();
};

// Two-queue construction over the frequency table, then canonicalization.
// A single-symbol alphabet gets a zero-length code. Frequencies must be
// positive and sum to ~1 (they are normalized internally).
HuffmanTable build_huffman(const std::vector<double>& frequencies);

// Rebuild canonical codes from stored lengths (decoder side).
HuffmanTable huffman_from_lengths(std::vector<uint8_t> lengths);

void huffman_encode_symbol(const HuffmanTable& table, int symbol, BitWriter& out);
int huffman_decode_symbol(const HuffmanTable& table, BitReader& in);

std::vector<uint8_t> huffman_encode(const std::vector<int>& symbols,
                                    const HuffmanTable& table);
std::vector<int> huffman_decode(const std::vector<uint8_t>& bits,
                                const HuffmanTable& table, size_t count);

struct BitsPerFrame {
  double entropy = 0.0;      // -sum p log2 p
  double huffman_avg = 0.0;  // sum p * len
};

// Rate accounting for one frequency table. entropy <= huffman_avg <
// entropy + 1 always holds.
BitsPerFrame bits_per_frame(const std::vector<double>& frequencies);

}  // namespace prcodec
