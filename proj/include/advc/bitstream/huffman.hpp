#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "advc/byte_io.hpp"

namespace advc::bitstream {

/// Canonical Huffman code over the scalar alphabet -127..127 plus an escape
/// symbol. Values outside the alphabet are sent as the escape code followed
/// by 16 raw two's-complement bits. Code lengths are limited to 15 so the
/// table serializes as 256 four-bit lengths.
class HuffmanCodebook {
 public:
  static constexpr int kAlphabetSize = 256;
  static constexpr int kEscape = 255;
  static constexpr int kMaxValue = 127;
  static constexpr int kMaxLength = 15;
  static constexpr int kEscapeBits = 16;
  static constexpr std::size_t kSerializedBytes = kAlphabetSize / 2;

  using Lengths = std::array<std::uint8_t, kAlphabetSize>;

  /// Alphabet slot of a value: value + 127 inside the alphabet, else escape.
  static int slot(std::int32_t value) noexcept {
    return value >= -kMaxValue && value <= kMaxValue ? value + kMaxValue : kEscape;
  }

  /// Optimal code for the empirical distribution of `symbols` (length-limited
  /// only when unconstrained Huffman would exceed 15 bits).
  static HuffmanCodebook build(std::span<const std::int32_t> symbols);
  static HuffmanCodebook from_frequencies(std::span<const std::uint64_t> frequencies);
  /// Rebuilds the canonical code; rejects lengths over 15 or a Kraft sum above 1.
  static HuffmanCodebook from_lengths(const Lengths& lengths);

  const Lengths& lengths() const noexcept { return lengths_; }
  int length(int slot) const { return lengths_[slot]; }
  std::uint32_t code(int slot) const { return codes_[slot]; }
  double kraft_sum() const;

  void serialize(ByteWriter& out) const;
  static HuffmanCodebook deserialize(ByteReader& in);

  /// Reads one alphabet slot; throws invalid_code or truncated.
  int decode_slot(BitReader& in) const;

  friend bool operator==(const HuffmanCodebook& a, const HuffmanCodebook& b) {
    return a.lengths_ == b.lengths_;
  }

 private:
  HuffmanCodebook() = default;
  void assign_codes();

  Lengths lengths_{};
  std::array<std::uint32_t, kAlphabetSize> codes_{};
  // Canonical decoding tables indexed by code length.
  std::array<std::uint32_t, kMaxLength + 2> first_code_{};
  std::array<std::uint32_t, kMaxLength + 2> count_{};
  std::array<std::uint32_t, kMaxLength + 2> first_slot_{};
  std::vector<int> sorted_slots_;
};

struct EncodedBits {
  std::vector<std::uint8_t> bytes;
  std::uint64_t bit_count = 0;
};

void entropy_encode(std::span<const std::int32_t> symbols, const HuffmanCodebook& codebook,
                    BitWriter& out);
EncodedBits entropy_encode(std::span<const std::int32_t> symbols,
                           const HuffmanCodebook& codebook);

std::vector<std::int32_t> entropy_decode(BitReader& in, const HuffmanCodebook& codebook,
                                         std::size_t count);
std::vector<std::int32_t> entropy_decode(const EncodedBits& bits,
                                         const HuffmanCodebook& codebook, std::size_t count);

}  // namespace advc::bitstream
