#include "advc/bitstream/keyframe_codec.hpp"

#include <cstdio>
#include <cstdlib>

#include "advc/bitstream/huffman.hpp"
#include "advc/byte_io.hpp"
#include "advc/motion_io.hpp"

namespace advc::bitstream {

const char* to_string(KeyframeCodecTag tag) noexcept {
  switch (tag) {
    case KeyframeCodecTag::lossless_pred: return "lossless_pred";
    case KeyframeCodecTag::external_blob: return "external_blob";
  }
  return "unknown";
}

KeyframeCodecTag parse_codec_tag(const std::string& name) {
  if (name == "lossless_pred") return KeyframeCodecTag::lossless_pred;
  if (name == "external_blob") return KeyframeCodecTag::external_blob;
  throw Error(ErrorKind::invalid_argument, "unknown keyframe codec '" + name + "'");
}

KeyframeCodecTag codec_tag_from_byte(std::uint8_t value) {
  if (value == 1 || value == 2) return static_cast<KeyframeCodecTag>(value);
  throw Error(ErrorKind::malformed, "unknown keyframe codec tag " + std::to_string(value));
}

int paeth_predict(int left, int up, int upper_left) noexcept {
  const int p = left + up - upper_left;
  const int pa = std::abs(p - left);
  const int pb = std::abs(p - up);
  const int pc = std::abs(p - upper_left);
  if (pa <= pb && pa <= pc) return left;
  if (pb <= pc) return up;
  return upper_left;
}

namespace {

// Visits samples in raster order with their Paeth prediction. `value(i)`
// must return the reconstructed sample i, which is already known for every
// neighbour by the time it is needed.
template <class Value, class Visit>
void paeth_scan(int w, int h, int ch, Value&& value, Visit&& visit) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        const std::size_t i = (static_cast<std::size_t>(y) * w + x) * ch + c;
        const int left = x > 0 ? value(i - ch) : 0;
        const int up = y > 0 ? value(i - static_cast<std::size_t>(w) * ch) : 0;
        const int ul = x > 0 && y > 0 ? value(i - static_cast<std::size_t>(w + 1) * ch) : 0;
        visit(i, paeth_predict(left, up, ul));
      }
    }
  }
}

}  // namespace

std::vector<std::uint8_t> LosslessPredCodec::encode(const Frame& frame, int) const {
  const auto samples = frame.samples();
  std::vector<std::int32_t> residuals(samples.size());
  paeth_scan(frame.width(), frame.height(), frame.channels(),
             [&](std::size_t i) { return static_cast<int>(samples[i]); },
             [&](std::size_t i, int pred) {
               residuals[i] = static_cast<std::int8_t>(static_cast<std::uint8_t>(samples[i] - pred));
             });
  const auto codebook = HuffmanCodebook::build(residuals);
  const auto bits = entropy_encode(residuals, codebook);
  ByteWriter out;
  out.varint(static_cast<std::uint64_t>(frame.width()));
  out.varint(static_cast<std::uint64_t>(frame.height()));
  out.u8(static_cast<std::uint8_t>(frame.channels()));
  codebook.serialize(out);
  out.varint(bits.bit_count);
  out.raw(bits.bytes);
  return out.take();
}

Frame LosslessPredCodec::decode(std::span<const std::uint8_t> payload, int, int width,
                                int height) const {
  ByteReader in(payload);
  const auto w = in.varint();
  const auto h = in.varint();
  const int ch = in.u8();
  if (w > 65535 || h > 65535 || (ch != 1 && ch != 3)) {
    throw Error(ErrorKind::malformed, "implausible keyframe geometry");
  }
  if ((width > 0 && static_cast<int>(w) != width) || (height > 0 && static_cast<int>(h) != height)) {
    throw Error(ErrorKind::dimension_mismatch, "keyframe size disagrees with the container");
  }
  const auto codebook = HuffmanCodebook::deserialize(in);
  const auto bit_count = in.varint();
  if (bit_count > in.remaining() * 8 || (bit_count + 7) / 8 != in.remaining()) {
    throw Error(ErrorKind::malformed, "keyframe bit length disagrees with its payload");
  }
  const auto bytes = in.raw(in.remaining());
  BitReader bits(bytes, bit_count);
  const std::size_t n = static_cast<std::size_t>(w) * h * ch;
  const auto residuals = entropy_decode(bits, codebook, n);
  if (bits.remaining() != 0) throw Error(ErrorKind::malformed, "trailing keyframe bits");
  std::vector<std::uint8_t> samples(n);
  paeth_scan(static_cast<int>(w), static_cast<int>(h), ch,
             [&](std::size_t i) { return static_cast<int>(samples[i]); },
             [&](std::size_t i, int pred) {
               samples[i] = static_cast<std::uint8_t>(pred + residuals[i]);
             });
  return Frame(static_cast<int>(w), static_cast<int>(h), ch, std::move(samples));
}

ExternalBlobCodec::ExternalBlobCodec(BlobSource blobs, FrameSource sidecar)
    : blobs_(std::move(blobs)), sidecar_(std::move(sidecar)) {}

ExternalBlobCodec ExternalBlobCodec::from_directories(std::filesystem::path blob_dir,
                                                      std::filesystem::path sidecar_dir) {
  auto name = [](int index, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06d.%s", index, ext);
    return std::string(buf);
  };
  BlobSource blobs;
  if (!blob_dir.empty()) {
    blobs = [blob_dir, name](int index) { return read_file(blob_dir / name(index, "bin")); };
  }
  FrameSource sidecar;
  if (!sidecar_dir.empty()) {
    sidecar = [sidecar_dir, name](int index) {
      return motion_io::decode_ppm(read_file(sidecar_dir / name(index, "ppm")));
    };
  }
  return ExternalBlobCodec(std::move(blobs), std::move(sidecar));
}

std::vector<std::uint8_t> ExternalBlobCodec::encode(const Frame&, int frame_index) const {
  if (!blobs_) throw Error(ErrorKind::invalid_argument, "external codec has no blob source");
  return blobs_(frame_index);
}

Frame ExternalBlobCodec::decode(std::span<const std::uint8_t>, int frame_index, int width,
                                int height) const {
  if (!sidecar_) {
    throw Error(ErrorKind::invalid_argument, "external keyframes need a sidecar frame source");
  }
  Frame frame = sidecar_(frame_index);
  if ((width > 0 && frame.width() != width) || (height > 0 && frame.height() != height)) {
    throw Error(ErrorKind::dimension_mismatch,
                "sidecar frame " + std::to_string(frame_index) + " does not match the container");
  }
  return frame;
}

std::vector<std::uint8_t> keyframe_encode(const Frame& frame, KeyframeCodecTag tag) {
  if (tag != KeyframeCodecTag::lossless_pred) {
    throw Error(ErrorKind::invalid_argument, "external blobs are supplied, not encoded");
  }
  return LosslessPredCodec().encode(frame, 0);
}

Frame keyframe_decode(std::span<const std::uint8_t> bytes, KeyframeCodecTag tag) {
  if (tag != KeyframeCodecTag::lossless_pred) {
    throw Error(ErrorKind::invalid_argument, "external blobs decode through a sidecar source");
  }
  return LosslessPredCodec().decode(bytes, 0, 0, 0);
}

}  // namespace advc::bitstream
