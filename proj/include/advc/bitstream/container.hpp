#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "advc/bitstream/huffman.hpp"
#include "advc/bitstream/keyframe_codec.hpp"
#include "advc/bitstream/trajectory_coding.hpp"
#include "advc/core.hpp"

namespace advc::bitstream {

// Layout, little-endian:
//
//   header:  "ADVC" | u16 version | u32 W | u32 H | u32 frames | f64 fps |
//            f64 quant_step | f64 theta_occ | f64 theta_perc | u32 hysteresis |
//            u32 budget | u32 t_max | u8 codec | u32 segments | u32 crc
//   record:  varint T | u8 flags | [start keyframe] | end keyframe |
//            f64 sigma | varint N | N x (u16 x, u16 y) | codebook (128 B) |
//            varint payload bits | payload | u32 crc
//   keyframe: u8 codec tag | varint length | payload
//
// Flag bit 0 marks a record carrying its own start keyframe. Only the first
// record does; every later segment starts on the previous record's end
// keyframe.

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint8_t kCarriesStartKeyframe = 0x01;

struct ContainerHeader {
  int width = 0;
  int height = 0;
  int total_frames = 0;
  double fps = 30.0;
  double quant_step = 0.5;
  double theta_occ = 0.8;
  double theta_perc = 0.85;
  int hysteresis = 1;
  int budget = 300;
  int t_max = 121;
  KeyframeCodecTag codec = KeyframeCodecTag::lossless_pred;

  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

ContainerHeader make_header(int width, int height, int total_frames, double fps,
                            const CodecConfig& config, KeyframeCodecTag codec);

struct KeyframeBlob {
  KeyframeCodecTag tag = KeyframeCodecTag::lossless_pred;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const KeyframeBlob&, const KeyframeBlob&) = default;
};

struct SegmentRecord {
  int length = 2;                         // T_k, frames including both keyframes
  std::optional<KeyframeBlob> start_key;  // first record only
  KeyframeBlob end_key;
  double sigma = 0.0;
  std::vector<PixelCoord> coords;
  HuffmanCodebook codebook = HuffmanCodebook::from_lengths({});
  EncodedBits payload;

  friend bool operator==(const SegmentRecord& a, const SegmentRecord& b) {
    return a.length == b.length && a.start_key == b.start_key && a.end_key == b.end_key &&
           a.sigma == b.sigma && a.coords == b.coords && a.codebook == b.codebook &&
           a.payload.bytes == b.payload.bytes && a.payload.bit_count == b.payload.bit_count;
  }
};

/// Entropy codes a quantized stream into a record.
SegmentRecord make_segment_record(const DeltaSymbolStream& stream, double sigma,
                                  std::optional<KeyframeBlob> start_key, KeyframeBlob end_key);

struct Container {
  ContainerHeader header;
  std::vector<SegmentRecord> segments;

  /// Absolute frame spans implied by the segment lengths.
  std::vector<SegmentPlan> plans() const;
  /// Every distinct keyframe in display order (segments + 1 entries).
  std::vector<const KeyframeBlob*> keyframes() const;

  friend bool operator==(const Container&, const Container&) = default;
};

/// Decodes and dequantizes one record's trajectories.
TrajectorySet decode_segment_trajectories(const SegmentRecord& record,
                                          const ContainerHeader& header);
DeltaSymbolStream decode_segment_symbols(const SegmentRecord& record,
                                         const ContainerHeader& header);

struct SegmentBytes {
  std::uint64_t keyframe = 0;
  std::uint64_t trajectory = 0;
  std::uint64_t codebook = 0;
  std::uint64_t side_info = 0;

  std::uint64_t total() const noexcept { return keyframe + trajectory + codebook + side_info; }
};

/// Every byte of a container file assigned to exactly one category.
/// keyframe: codec payloads; trajectory: coded deltas; codebook: length
/// tables; side_info: everything else in a record (lengths, tags,
/// coordinates, sigma, CRCs); header: the global header.
struct ByteAccounting {
  std::uint64_t header = 0;
  std::vector<SegmentBytes> segments;

  std::uint64_t keyframe() const;
  std::uint64_t trajectory() const;
  std::uint64_t codebook() const;
  std::uint64_t side_info() const;
  std::uint64_t total() const;
};

struct BppBreakdown {
  std::uint64_t total_bits = 0;
  double pixels = 0.0;  // frames * W * H
  double total = 0.0;
  double header = 0.0;
  double keyframe = 0.0;
  double trajectory = 0.0;
  double codebook = 0.0;
  double side_info = 0.0;
};

BppBreakdown bpp_breakdown(const ByteAccounting& accounting, const ContainerHeader& header);
nlohmann::json to_json(const BppBreakdown& bpp);

struct SerializeOptions {
  // Also write each interior keyframe a second time as the next record's
  // start keyframe. Only useful to measure what deduplication saves.
  bool duplicate_keyframes = false;
};

std::vector<std::uint8_t> serialize_container(const Container& container,
                                              ByteAccounting* accounting = nullptr,
                                              const SerializeOptions& options = {});
/// Errors raised inside a record carry its index.
Container parse_container(std::span<const std::uint8_t> bytes,
                          ByteAccounting* accounting = nullptr);

std::uint64_t write_container(const Container& container, const std::filesystem::path& path);
Container read_container(const std::filesystem::path& path);

/// Accounting of the serialized form of `container`.
BppBreakdown bpp_accounting(const Container& container);

}  // namespace advc::bitstream
