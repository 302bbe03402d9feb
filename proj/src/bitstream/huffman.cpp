#include "advc/bitstream/huffman.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace advc::bitstream {

namespace {

using Lengths = HuffmanCodebook::Lengths;

// Unconstrained Huffman. Ties in the merge queue go to the node created
// first (leaves in slot order before any internal node).
Lengths huffman_lengths(std::span<const std::uint64_t> freq, const std::vector<int>& used) {
  struct Node {
    std::uint64_t weight;
    int id;
  };
  auto later = [](const Node& a, const Node& b) {
    return std::tie(a.weight, a.id) > std::tie(b.weight, b.id);
  };
  std::priority_queue<Node, std::vector<Node>, decltype(later)> queue(later);
  std::vector<int> parent(2 * HuffmanCodebook::kAlphabetSize, -1);
  for (int s : used) queue.push({freq[s], s});
  int next_id = HuffmanCodebook::kAlphabetSize;
  while (queue.size() > 1) {
    const Node a = queue.top();
    queue.pop();
    const Node b = queue.top();
    queue.pop();
    parent[a.id] = next_id;
    parent[b.id] = next_id;
    queue.push({a.weight + b.weight, next_id++});
  }
  Lengths lengths{};
  for (int s : used) {
    int depth = 0;
    for (int n = s; parent[n] >= 0; n = parent[n]) ++depth;
    lengths[s] = static_cast<std::uint8_t>(std::min(depth, 255));
  }
  return lengths;
}

// Package-merge: optimal code lengths subject to a maximum length.
Lengths limited_lengths(std::span<const std::uint64_t> freq, std::vector<int> used,
                        int max_length) {
  std::stable_sort(used.begin(), used.end(),
                   [&](int a, int b) { return freq[a] < freq[b]; });
  const std::size_t n = used.size();
  struct Item {
    std::uint64_t weight;
    std::vector<std::uint16_t> counts;
  };
  std::vector<Item> leaves;
  for (std::size_t i = 0; i < n; ++i) {
    Item it{freq[used[i]], std::vector<std::uint16_t>(n, 0)};
    it.counts[i] = 1;
    leaves.push_back(std::move(it));
  }
  std::vector<Item> list = leaves;
  for (int level = 1; level < max_length; ++level) {
    std::vector<Item> packages;
    for (std::size_t i = 0; i + 1 < list.size(); i += 2) {
      Item p{list[i].weight + list[i + 1].weight, list[i].counts};
      for (std::size_t k = 0; k < n; ++k) p.counts[k] += list[i + 1].counts[k];
      packages.push_back(std::move(p));
    }
    std::vector<Item> merged;
    merged.reserve(leaves.size() + packages.size());
    std::size_t a = 0, b = 0;
    while (a < leaves.size() || b < packages.size()) {
      if (b >= packages.size() || (a < leaves.size() && leaves[a].weight <= packages[b].weight)) {
        merged.push_back(leaves[a++]);
      } else {
        merged.push_back(std::move(packages[b++]));
      }
    }
    list = std::move(merged);
  }
  Lengths lengths{};
  for (std::size_t i = 0; i < 2 * n - 2; ++i) {
    for (std::size_t k = 0; k < n; ++k) lengths[used[k]] += static_cast<std::uint8_t>(list[i].counts[k]);
  }
  return lengths;
}

}  // namespace

HuffmanCodebook HuffmanCodebook::build(std::span<const std::int32_t> symbols) {
  if (symbols.empty()) throw Error(ErrorKind::invalid_argument, "cannot build a codebook from no symbols");
  std::array<std::uint64_t, kAlphabetSize> freq{};
  for (auto v : symbols) ++freq[slot(v)];
  return from_frequencies(freq);
}

HuffmanCodebook HuffmanCodebook::from_frequencies(std::span<const std::uint64_t> frequencies) {
  if (frequencies.size() != kAlphabetSize) {
    throw Error(ErrorKind::invalid_argument, "frequency table must cover the alphabet");
  }
  std::vector<int> used;
  for (int s = 0; s < kAlphabetSize; ++s) {
    if (frequencies[s] > 0) used.push_back(s);
  }
  if (used.empty()) throw Error(ErrorKind::invalid_argument, "cannot build a codebook from no symbols");
  Lengths lengths{};
  if (used.size() == 1) {
    lengths[used[0]] = 1;
  } else {
    lengths = huffman_lengths(frequencies, used);
    if (*std::max_element(lengths.begin(), lengths.end()) > kMaxLength) {
      lengths = limited_lengths(frequencies, used, kMaxLength);
    }
  }
  return from_lengths(lengths);
}

HuffmanCodebook HuffmanCodebook::from_lengths(const Lengths& lengths) {
  HuffmanCodebook cb;
  cb.lengths_ = lengths;
  for (auto len : lengths) {
    if (len > kMaxLength) throw Error(ErrorKind::invalid_code, "code length exceeds 15 bits");
  }
  if (cb.kraft_sum() > 1.0) throw Error(ErrorKind::invalid_code, "code lengths violate the Kraft inequality");
  cb.assign_codes();
  return cb;
}

double HuffmanCodebook::kraft_sum() const {
  double sum = 0.0;
  for (auto len : lengths_) {
    if (len) sum += std::ldexp(1.0, -len);
  }
  return sum;
}

void HuffmanCodebook::assign_codes() {
  sorted_slots_.clear();
  count_.fill(0);
  for (int s = 0; s < kAlphabetSize; ++s) {
    if (lengths_[s]) ++count_[lengths_[s]];
  }
  // Canonical order: by length, then slot.
  for (int len = 1; len <= kMaxLength; ++len) {
    for (int s = 0; s < kAlphabetSize; ++s) {
      if (lengths_[s] == len) sorted_slots_.push_back(s);
    }
  }
  std::uint32_t code = 0;
  std::uint32_t index = 0;
  for (int len = 1; len <= kMaxLength; ++len) {
    first_code_[len] = code;
    first_slot_[len] = index;
    for (std::uint32_t k = 0; k < count_[len]; ++k) codes_[sorted_slots_[index + k]] = code + k;
    code = (code + count_[len]) << 1;
    index += count_[len];
  }
}

void HuffmanCodebook::serialize(ByteWriter& out) const {
  for (int s = 0; s < kAlphabetSize; s += 2) {
    out.u8(static_cast<std::uint8_t>((lengths_[s] << 4) | lengths_[s + 1]));
  }
}

HuffmanCodebook HuffmanCodebook::deserialize(ByteReader& in) {
  Lengths lengths{};
  const auto raw = in.raw(kSerializedBytes);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    lengths[2 * i] = raw[i] >> 4;
    lengths[2 * i + 1] = raw[i] & 0x0f;
  }
  return from_lengths(lengths);
}

int HuffmanCodebook::decode_slot(BitReader& in) const {
  std::uint32_t code = 0;
  for (int len = 1; len <= kMaxLength; ++len) {
    code = (code << 1) | in.bit();
    if (count_[len] && code >= first_code_[len] && code - first_code_[len] < count_[len]) {
      return sorted_slots_[first_slot_[len] + (code - first_code_[len])];
    }
  }
  throw Error(ErrorKind::invalid_code, "bit sequence is not a valid code");
}

void entropy_encode(std::span<const std::int32_t> symbols, const HuffmanCodebook& codebook,
                    BitWriter& out) {
  for (auto v : symbols) {
    const int s = HuffmanCodebook::slot(v);
    if (codebook.length(s) == 0) {
      throw Error(ErrorKind::invalid_argument, "symbol " + std::to_string(v) + " has no code");
    }
    out.put(codebook.code(s), codebook.length(s));
    if (s == HuffmanCodebook::kEscape) {
      if (v < -32768 || v > 32767) {
        throw Error(ErrorKind::invalid_argument, "escaped symbol exceeds 16 bits");
      }
      out.put(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)), HuffmanCodebook::kEscapeBits);
    }
  }
}

EncodedBits entropy_encode(std::span<const std::int32_t> symbols,
                           const HuffmanCodebook& codebook) {
  BitWriter out;
  entropy_encode(symbols, codebook, out);
  return {out.bytes(), out.bit_count()};
}

std::vector<std::int32_t> entropy_decode(BitReader& in, const HuffmanCodebook& codebook,
                                         std::size_t count) {
  std::vector<std::int32_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int s = codebook.decode_slot(in);
    if (s == HuffmanCodebook::kEscape) {
      out.push_back(static_cast<std::int16_t>(in.get(HuffmanCodebook::kEscapeBits)));
    } else {
      out.push_back(s - HuffmanCodebook::kMaxValue);
    }
  }
  return out;
}

std::vector<std::int32_t> entropy_decode(const EncodedBits& bits,
                                         const HuffmanCodebook& codebook, std::size_t count) {
  BitReader in(bits.bytes, bits.bit_count);
  return entropy_decode(in, codebook, count);
}

}  // namespace advc::bitstream
