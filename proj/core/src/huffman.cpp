#include "prcodec/huffman.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "prcodec/bitstream.hpp"

namespace prcodec {

namespace {

constexpr int kMaxCodeLen = 57;

}  // namespace

double HuffmanTable::kraft_sum() const {
  double sum = 0.0;
  for (uint8_t len : lengths) sum += std::ldexp(1.0, -static_cast<int>(len));
  return sum;
}

// Canonical code assignment from lengths (shorter codes first, ties by
// symbol id) plus the per-length decode tables.
void HuffmanTable::finalize() {
  const int n = symbol_count();
  codes.assign(n, 0);
  sorted_symbols.resize(n);
  std::iota(sorted_symbols.begin(), sorted_symbols.end(), 0);
  std::sort(sorted_symbols.begin(), sorted_symbols.end(), [&](int a, int b) {
    if (lengths[a] != lengths[b]) return lengths[a] < lengths[b];
    return a < b;
  });

  max_len = 0;
  for (uint8_t len : lengths) max_len = std::max<int>(max_len, len);
  first_code.assign(max_len + 1, 0);
  count_at_len.assign(max_len + 1, 0);
  offset_at_len.assign(max_len + 1, 0);
  for (uint8_t len : lengths) ++count_at_len[len];

  uint64_t code = 0;
  int prev_len = lengths.empty() ? 0 : lengths[sorted_symbols[0]];
  int index = 0;
  int last_seen_len = -1;
  for (int sym : sorted_symbols) {
    const int len = lengths[sym];
    code <<= (len - prev_len);
    codes[sym] = static_cast<uint32_t>(code);
    if (len != last_seen_len) {
      first_code[len] = code;
      offset_at_len[len] = index;
      last_seen_len = len;
    }
    ++code;
    prev_len = len;
    ++index;
  }
}

HuffmanTable build_huffman(const std::vector<double>& frequencies) {
  const int n = static_cast<int>(frequencies.size());
  if (n == 0) throw NumericError("empty frequency table");
  for (double f : frequencies) {
    if (!(f > 0.0)) throw NumericError("huffman frequencies must be positive");
  }

  HuffmanTable table;
  table.lengths.assign(n, 0);
  if (n == 1) {  // degenerate alphabet: zero-length code
    table.finalize();
    return table;
  }

  // Two-queue merge over leaves sorted by ascending frequency.
  struct Node {
    double weight;
    int left = -1, right = -1;
    int symbol = -1;
  };
  std::vector<Node> nodes;
  nodes.reserve(2 * n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (frequencies[a] != frequencies[b]) return frequencies[a] < frequencies[b];
    return a < b;
  });
  std::deque<int> leaves, merged;
  for (int s : order) {
    nodes.push_back({frequencies[s], -1, -1, s});
    leaves.push_back(static_cast<int>(nodes.size()) - 1);
  }
  auto pop_min = [&]() {
    int pick;
    if (merged.empty() ||
        (!leaves.empty() &&
         nodes[leaves.front()].weight <= nodes[merged.front()].weight)) {
      pick = leaves.front();
      leaves.pop_front();
    } else {
      pick = merged.front();
      merged.pop_front();
    }
    return pick;
  };
  while (leaves.size() + merged.size() > 1) {
    const int a = pop_min();
    const int b = pop_min();
    nodes.push_back({nodes[a].weight + nodes[b].weight, a, b, -1});
    merged.push_back(static_cast<int>(nodes.size()) - 1);
  }

  std::vector<std::pair<int, int>> stack{{merged.front(), 0}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    const Node& node = nodes[id];
    if (node.symbol >= 0) {
      table.lengths[node.symbol] = static_cast<uint8_t>(depth);
    } else {
      stack.push_back({node.left, depth + 1});
      stack.push_back({node.right, depth + 1});
    }
  }
  table.finalize();
  return table;
}

HuffmanTable huffman_from_lengths(std::vector<uint8_t> lengths) {
  HuffmanTable table;
  table.lengths = std::move(lengths);
  if (table.lengths.size() == 1) {
    table.finalize();
    return table;
  }
  double kraft = 0.0;
  for (uint8_t len : table.lengths) {
    if (len == 0 || len > kMaxCodeLen) {
      throw FormatError("invalid huffman code length");
    }
    kraft += std::ldexp(1.0, -static_cast<int>(len));
  }
  if (kraft > 1.0 + 1e-12) throw FormatError("huffman lengths violate Kraft");
  table.finalize();
  return table;
}

void huffman_encode_symbol(const HuffmanTable& table, int symbol, BitWriter& out) {
  if (symbol < 0 || symbol >= table.symbol_count()) {
    throw NumericError("huffman symbol out of range");
  }
  const int len = table.lengths[symbol];
  if (len > 0) out.put_bits(table.codes[symbol], len);
}

int huffman_decode_symbol(const HuffmanTable& table, BitReader& in) {
  if (table.symbol_count() == 1) return 0;
  uint64_t code = 0;
  for (int len = 1; len <= table.max_len; ++len) {
    code = (code << 1) | static_cast<uint64_t>(in.get_bit());
    if (table.count_at_len[len] == 0) continue;
    const uint64_t first = table.first_code[len];
    if (code >= first && code - first < static_cast<uint64_t>(table.count_at_len[len])) {
      return table.sorted_symbols[table.offset_at_len[len] +
                                  static_cast<int>(code - first)];
    }
  }
  throw FormatError("corrupt stream: invalid huffman code");
}

std::vector<uint8_t> huffman_encode(const std::vector<int>& symbols,
                                    const HuffmanTable& table) {
  BitWriter out;
  for (int s : symbols) huffman_encode_symbol(table, s, out);
  out.align_to_byte();
  return out.bytes();
}

std::vector<int> huffman_decode(const std::vector<uint8_t>& bits,
                                const HuffmanTable& table, size_t count) {
  BitReader in(bits);
  std::vector<int> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    out.push_back(huffman_decode_symbol(table, in));
  }
  return out;
}

BitsPerFrame bits_per_frame(const std::vector<double>& frequencies) {
  const HuffmanTable table = build_huffman(frequencies);
  double total = 0.0;
  for (double f : frequencies) total += f;
  BitsPerFrame result;
  for (size_t s = 0; s < frequencies.size(); ++s) {
    const double p = frequencies[s] / total;
    result.entropy -= p * std::log2(p);
    result.huffman_avg += p * table.lengths[s];
  }
  return result;
}

}  // namespace prcodec
