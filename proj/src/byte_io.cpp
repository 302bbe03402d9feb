#include "advc/byte_io.hpp"

#include <fstream>
#include <iterator>

#include <zlib.h>

namespace advc {

void ByteWriter::varint(std::uint64_t v) {
  while (v >= 0x80) {
    bytes_.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  bytes_.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t ByteReader::varint() {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const std::uint8_t b = u8();
    v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    if (!(b & 0x80)) return v;
  }
  throw Error(ErrorKind::malformed, "varint longer than 64 bits");
}

void BitWriter::put(std::uint32_t value, int nbits) {
  for (int i = nbits - 1; i >= 0; --i) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> i) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
    ++bits_;
  }
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_count)
    : bytes_(bytes), bit_count_(bit_count) {
  if (bit_count > static_cast<std::uint64_t>(bytes.size()) * 8) {
    throw Error(ErrorKind::truncated, "bit payload shorter than its declared length");
  }
}

std::uint32_t BitReader::bit() {
  if (pos_ >= bit_count_) throw Error(ErrorKind::truncated, "bitstream exhausted");
  const std::uint32_t b = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
  ++pos_;
  return b;
}

std::uint32_t BitReader::get(int nbits) {
  std::uint32_t v = 0;
  for (int i = 0; i < nbits; ++i) v = (v << 1) | bit();
  return v;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(
      ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace advc
