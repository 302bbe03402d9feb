#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "advc/core.hpp"

namespace advc::bitstream {

enum class KeyframeCodecTag : std::uint8_t {
  lossless_pred = 1,
  external_blob = 2,
};

const char* to_string(KeyframeCodecTag tag) noexcept;
/// Accepts "lossless_pred" / "external_blob"; throws invalid_argument otherwise.
KeyframeCodecTag parse_codec_tag(const std::string& name);
/// Validates a raw tag byte read from a file.
KeyframeCodecTag codec_tag_from_byte(std::uint8_t value);

/// Compresses keyframes. `frame_index` is the absolute index of the keyframe
/// in the video; codecs that only pass data through use it to find the data.
class KeyframeCodec {
 public:
  virtual ~KeyframeCodec() = default;
  virtual KeyframeCodecTag tag() const noexcept = 0;
  virtual std::vector<std::uint8_t> encode(const Frame& frame, int frame_index) const = 0;
  virtual Frame decode(std::span<const std::uint8_t> payload, int frame_index, int width,
                       int height) const = 0;
};

/// Paeth prediction per channel (zero outside the image), residuals taken
/// mod 256 as signed bytes and Huffman coded with the trajectory alphabet.
///
///   varint W | varint H | u8 channels | codebook (128 B) | varint bits | bits
class LosslessPredCodec final : public KeyframeCodec {
 public:
  KeyframeCodecTag tag() const noexcept override { return KeyframeCodecTag::lossless_pred; }
  std::vector<std::uint8_t> encode(const Frame& frame, int frame_index = 0) const override;
  Frame decode(std::span<const std::uint8_t> payload, int frame_index, int width,
               int height) const override;
};

/// Opaque bytes produced by some external codec. Encoding fetches the blob
/// for a keyframe; decoding ignores the payload contents and returns the
/// matching already-decoded frame from a sidecar source.
class ExternalBlobCodec final : public KeyframeCodec {
 public:
  using BlobSource = std::function<std::vector<std::uint8_t>(int frame_index)>;
  using FrameSource = std::function<Frame(int frame_index)>;

  ExternalBlobCodec(BlobSource blobs, FrameSource sidecar);

  /// Blobs from `<blob_dir>/%06d.bin` and sidecar frames from
  /// `<sidecar_dir>/%06d.ppm`. Either directory may be empty when only one
  /// direction is needed.
  static ExternalBlobCodec from_directories(std::filesystem::path blob_dir,
                                            std::filesystem::path sidecar_dir);

  KeyframeCodecTag tag() const noexcept override { return KeyframeCodecTag::external_blob; }
  std::vector<std::uint8_t> encode(const Frame& frame, int frame_index) const override;
  Frame decode(std::span<const std::uint8_t> payload, int frame_index, int width,
               int height) const override;

 private:
  BlobSource blobs_;
  FrameSource sidecar_;
};

/// Paeth predictor on three neighbours (left, up, upper-left).
int paeth_predict(int left, int up, int upper_left) noexcept;

std::vector<std::uint8_t> keyframe_encode(const Frame& frame, KeyframeCodecTag tag);
Frame keyframe_decode(std::span<const std::uint8_t> bytes, KeyframeCodecTag tag);

}  // namespace advc::bitstream
