#include "advc/bitstream/container.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "advc/byte_io.hpp"

namespace advc::bitstream {

namespace {

constexpr char kMagic[] = "ADVC";

std::uint32_t checked_u32(long long v, const char* what) {
  if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::invalid_argument, std::string(what) + " out of range");
  }
  return static_cast<std::uint32_t>(v);
}

int to_int(std::uint64_t v, const char* what) {
  if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw Error(ErrorKind::malformed, std::string(what) + " out of range");
  }
  return static_cast<int>(v);
}

double finite_f64(ByteReader& in, const char* what) {
  const double v = in.f64();
  if (!std::isfinite(v)) throw Error(ErrorKind::non_finite, std::string(what) + " is not finite");
  return v;
}

// Record writer that attributes each byte to a category as it goes.
struct RecordWriter {
  ByteWriter out;
  SegmentBytes counts;

  void side(auto&& fn) {
    const auto before = out.size();
    fn(out);
    counts.side_info += out.size() - before;
  }
  void keyframe(const KeyframeBlob& blob) {
    side([&](ByteWriter& w) {
      w.u8(static_cast<std::uint8_t>(blob.tag));
      w.varint(blob.payload.size());
    });
    out.raw(blob.payload);
    counts.keyframe += blob.payload.size();
  }
};

void write_header(ByteWriter& out, const ContainerHeader& h, std::size_t segments) {
  ByteWriter body;
  body.tag(kMagic);
  body.u16(kContainerVersion);
  body.u32(checked_u32(h.width, "width"));
  body.u32(checked_u32(h.height, "height"));
  body.u32(checked_u32(h.total_frames, "frame count"));
  body.f64(h.fps);
  body.f64(h.quant_step);
  body.f64(h.theta_occ);
  body.f64(h.theta_perc);
  body.u32(checked_u32(h.hysteresis, "hysteresis"));
  body.u32(checked_u32(h.budget, "budget"));
  body.u32(checked_u32(h.t_max, "t_max"));
  body.u8(static_cast<std::uint8_t>(h.codec));
  body.u32(checked_u32(static_cast<long long>(segments), "segment count"));
  const auto crc = crc32(body.bytes());
  out.raw(body.bytes());
  out.u32(crc);
}

KeyframeBlob read_keyframe(ByteReader& in, SegmentBytes& counts) {
  const auto before = in.position();
  KeyframeBlob blob;
  blob.tag = codec_tag_from_byte(in.u8());
  const auto size = in.varint();
  if (size > in.remaining()) throw Error(ErrorKind::truncated, "keyframe blob runs past the end");
  counts.side_info += in.position() - before;
  const auto raw = in.raw(static_cast<std::size_t>(size));
  blob.payload.assign(raw.begin(), raw.end());
  counts.keyframe += size;
  return blob;
}

}  // namespace

ContainerHeader make_header(int width, int height, int total_frames, double fps,
                            const CodecConfig& config, KeyframeCodecTag codec) {
  ContainerHeader h;
  h.width = width;
  h.height = height;
  h.total_frames = total_frames;
  h.fps = fps;
  h.quant_step = config.quant_step;
  h.theta_occ = config.theta_occ;
  h.theta_perc = config.theta_perc;
  h.hysteresis = config.hysteresis;
  h.budget = config.budget;
  h.t_max = config.t_max;
  h.codec = codec;
  return h;
}

SegmentRecord make_segment_record(const DeltaSymbolStream& stream, double sigma,
                                  std::optional<KeyframeBlob> start_key, KeyframeBlob end_key) {
  SegmentRecord r;
  r.length = stream.length;
  r.start_key = std::move(start_key);
  r.end_key = std::move(end_key);
  r.sigma = sigma;
  r.coords = stream.coords;
  if (!stream.symbols.empty()) {
    r.codebook = HuffmanCodebook::build(stream.symbols);
    r.payload = entropy_encode(stream.symbols, r.codebook);
  }
  return r;
}

std::vector<SegmentPlan> Container::plans() const {
  std::vector<SegmentPlan> out;
  int start = 0;
  for (const auto& s : segments) {
    out.emplace_back(start, start + s.length - 1);
    start += s.length - 1;
  }
  return out;
}

std::vector<const KeyframeBlob*> Container::keyframes() const {
  std::vector<const KeyframeBlob*> out;
  if (segments.empty()) return out;
  if (!segments.front().start_key) {
    throw Error(ErrorKind::malformed, "first segment lacks its start keyframe", 0);
  }
  out.push_back(&*segments.front().start_key);
  for (const auto& s : segments) out.push_back(&s.end_key);
  return out;
}

DeltaSymbolStream decode_segment_symbols(const SegmentRecord& record,
                                         const ContainerHeader& header) {
  DeltaSymbolStream s;
  s.width = header.width;
  s.height = header.height;
  s.length = record.length;
  s.quant_step = header.quant_step;
  s.coords = record.coords;
  const std::size_t count = record.coords.size() * 2 * static_cast<std::size_t>(record.length - 1);
  BitReader bits(record.payload.bytes, record.payload.bit_count);
  if (count > 0) s.symbols = entropy_decode(bits, record.codebook, count);
  if (bits.remaining() != 0) throw Error(ErrorKind::malformed, "trailing trajectory bits");
  return s;
}

TrajectorySet decode_segment_trajectories(const SegmentRecord& record,
                                          const ContainerHeader& header) {
  return dequantize_trajectories(decode_segment_symbols(record, header));
}

std::uint64_t ByteAccounting::keyframe() const {
  return std::accumulate(segments.begin(), segments.end(), std::uint64_t{0},
                         [](auto a, const SegmentBytes& s) { return a + s.keyframe; });
}
std::uint64_t ByteAccounting::trajectory() const {
  return std::accumulate(segments.begin(), segments.end(), std::uint64_t{0},
                         [](auto a, const SegmentBytes& s) { return a + s.trajectory; });
}
std::uint64_t ByteAccounting::codebook() const {
  return std::accumulate(segments.begin(), segments.end(), std::uint64_t{0},
                         [](auto a, const SegmentBytes& s) { return a + s.codebook; });
}
std::uint64_t ByteAccounting::side_info() const {
  return std::accumulate(segments.begin(), segments.end(), std::uint64_t{0},
                         [](auto a, const SegmentBytes& s) { return a + s.side_info; });
}
std::uint64_t ByteAccounting::total() const {
  return header + keyframe() + trajectory() + codebook() + side_info();
}

BppBreakdown bpp_breakdown(const ByteAccounting& a, const ContainerHeader& h) {
  BppBreakdown b;
  b.total_bits = a.total() * 8;
  b.pixels = static_cast<double>(h.total_frames) * h.width * h.height;
  if (b.pixels <= 0.0) return b;
  auto bpp = [&](std::uint64_t bytes) { return static_cast<double>(bytes * 8) / b.pixels; };
  b.total = bpp(a.total());
  b.header = bpp(a.header);
  b.keyframe = bpp(a.keyframe());
  b.trajectory = bpp(a.trajectory());
  b.codebook = bpp(a.codebook());
  b.side_info = bpp(a.side_info());
  return b;
}

nlohmann::json to_json(const BppBreakdown& b) {
  return {{"total_bits", b.total_bits}, {"bpp", b.total},       {"header", b.header},
          {"keyframe", b.keyframe},     {"trajectory", b.trajectory},
          {"codebook", b.codebook},     {"side_info", b.side_info}};
}

std::vector<std::uint8_t> serialize_container(const Container& c, ByteAccounting* accounting,
                                              const SerializeOptions& options) {
  const auto& h = c.header;
  if (c.segments.empty()) throw Error(ErrorKind::invalid_argument, "container has no segments");
  validate_plan_chain(c.plans(), h.total_frames);
  ByteAccounting acct;
  ByteWriter out;
  write_header(out, h, c.segments.size());
  acct.header = out.size();

  for (std::size_t k = 0; k < c.segments.size(); ++k) {
    const auto& s = c.segments[k];
    const KeyframeBlob* start = nullptr;
    if (k == 0) {
      if (!s.start_key) throw Error(ErrorKind::invalid_argument, "first segment needs a start keyframe", 0);
      start = &*s.start_key;
    } else if (options.duplicate_keyframes) {
      start = &c.segments[k - 1].end_key;
    }
    for (const auto& p : s.coords) {
      if (p.x < 0 || p.y < 0 || p.x >= h.width || p.y >= h.height || p.x > 65535 || p.y > 65535) {
        throw Error(ErrorKind::invalid_argument, "trajectory origin outside the frame", static_cast<int>(k));
      }
    }
    RecordWriter rec;
    rec.side([&](ByteWriter& w) {
      w.varint(static_cast<std::uint64_t>(s.length));
      w.u8(start ? kCarriesStartKeyframe : 0);
    });
    if (start) rec.keyframe(*start);
    rec.keyframe(s.end_key);
    rec.side([&](ByteWriter& w) {
      w.f64(s.sigma);
      w.varint(s.coords.size());
      for (const auto& p : s.coords) {
        w.u16(static_cast<std::uint16_t>(p.x));
        w.u16(static_cast<std::uint16_t>(p.y));
      }
    });
    s.codebook.serialize(rec.out);
    rec.counts.codebook += HuffmanCodebook::kSerializedBytes;
    rec.side([&](ByteWriter& w) { w.varint(s.payload.bit_count); });
    rec.out.raw(s.payload.bytes);
    rec.counts.trajectory += s.payload.bytes.size();
    const auto crc = crc32(rec.out.bytes());
    rec.side([&](ByteWriter& w) { w.u32(crc); });
    out.raw(rec.out.bytes());
    acct.segments.push_back(rec.counts);
  }
  if (accounting) *accounting = std::move(acct);
  return out.take();
}

Container parse_container(std::span<const std::uint8_t> bytes, ByteAccounting* accounting) {
  ByteReader in(bytes);
  Container c;
  ByteAccounting acct;
  auto& h = c.header;
  std::uint32_t segment_count = 0;
  {
    if (in.remaining() < 4) throw Error(ErrorKind::truncated, "file shorter than its magic");
    const auto magic = in.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) {
      throw Error(ErrorKind::bad_magic, "not an ADVC container");
    }
    const auto version = in.u16();
    if (version != kContainerVersion) {
      throw Error(ErrorKind::version_mismatch,
                  "container version " + std::to_string(version) + " is not supported");
    }
    h.width = to_int(in.u32(), "width");
    h.height = to_int(in.u32(), "height");
    h.total_frames = to_int(in.u32(), "frame count");
    h.fps = finite_f64(in, "fps");
    h.quant_step = finite_f64(in, "quant_step");
    h.theta_occ = finite_f64(in, "theta_occ");
    h.theta_perc = finite_f64(in, "theta_perc");
    h.hysteresis = to_int(in.u32(), "hysteresis");
    h.budget = to_int(in.u32(), "budget");
    h.t_max = to_int(in.u32(), "t_max");
    h.codec = codec_tag_from_byte(in.u8());
    segment_count = in.u32();
    const auto body_end = in.position();
    if (in.u32() != crc32(bytes.first(body_end))) {
      throw Error(ErrorKind::checksum, "header checksum mismatch");
    }
    acct.header = in.position();
    if (h.width < Frame::kMinSide || h.height < Frame::kMinSide || h.total_frames < 2 ||
        !(h.quant_step > 0.0) || segment_count == 0 ||
        segment_count > static_cast<std::uint32_t>(h.total_frames - 1)) {
      throw Error(ErrorKind::malformed, "implausible container header");
    }
  }

  int start = 0;
  for (std::uint32_t k = 0; k < segment_count; ++k) {
    const int index = static_cast<int>(k);
    try {
      const auto record_begin = in.position();
      SegmentBytes counts;
      auto side_from = [&](std::size_t before) { counts.side_info += in.position() - before; };
      SegmentRecord r;
      auto pos = in.position();
      r.length = to_int(in.varint(), "segment length");
      const auto flags = in.u8();
      side_from(pos);
      if (r.length < 2 || start + r.length > h.total_frames) {
        throw Error(ErrorKind::malformed, "segment length outside the video");
      }
      if (flags & ~kCarriesStartKeyframe) throw Error(ErrorKind::malformed, "unknown record flags");
      if (k == 0 && !(flags & kCarriesStartKeyframe)) {
        throw Error(ErrorKind::malformed, "first record lacks its start keyframe");
      }
      if (flags & kCarriesStartKeyframe) {
        auto blob = read_keyframe(in, counts);
        if (k == 0) {
          r.start_key = std::move(blob);
        } else if (blob != c.segments.back().end_key) {
          throw Error(ErrorKind::malformed, "repeated keyframe differs from the stored one");
        }
      }
      r.end_key = read_keyframe(in, counts);
      pos = in.position();
      r.sigma = finite_f64(in, "sigma");
      const auto n = in.varint();
      if (n > in.remaining() / 4) throw Error(ErrorKind::truncated, "point list runs past the end");
      r.coords.reserve(static_cast<std::size_t>(n));
      for (std::uint64_t i = 0; i < n; ++i) {
        const int x = in.u16();
        const int y = in.u16();
        r.coords.push_back({x, y});
      }
      side_from(pos);
      r.codebook = HuffmanCodebook::deserialize(in);
      counts.codebook += HuffmanCodebook::kSerializedBytes;
      pos = in.position();
      r.payload.bit_count = in.varint();
      side_from(pos);
      const auto payload_bytes = (r.payload.bit_count + 7) / 8;
      if (payload_bytes > in.remaining()) throw Error(ErrorKind::truncated, "payload runs past the end");
      const auto payload = in.raw(static_cast<std::size_t>(payload_bytes));
      r.payload.bytes.assign(payload.begin(), payload.end());
      counts.trajectory += payload_bytes;
      const auto record_end = in.position();
      pos = record_end;
      if (in.u32() != crc32(bytes.subspan(record_begin, record_end - record_begin))) {
        throw Error(ErrorKind::checksum, "record checksum mismatch");
      }
      side_from(pos);
      // Validates coordinates and symbol count against the header.
      decode_segment_trajectories(r, h);
      start += r.length - 1;
      c.segments.push_back(std::move(r));
      acct.segments.push_back(counts);
    } catch (const Error& e) {
      if (e.record()) throw;
      throw Error(e.kind(), "segment record " + std::to_string(index) + ": " + e.what(), index);
    }
  }
  if (start != h.total_frames - 1) {
    throw Error(ErrorKind::malformed, "segments do not cover the declared frame count");
  }
  if (in.remaining() != 0) throw Error(ErrorKind::malformed, "trailing bytes after the last record");
  if (accounting) *accounting = std::move(acct);
  return c;
}

std::uint64_t write_container(const Container& container, const std::filesystem::path& path) {
  const auto bytes = serialize_container(container);
  write_file(path, bytes);
  return bytes.size();
}

Container read_container(const std::filesystem::path& path) {
  return parse_container(read_file(path));
}

BppBreakdown bpp_accounting(const Container& container) {
  ByteAccounting acct;
  serialize_container(container, &acct);
  return bpp_breakdown(acct, container.header);
}

}  // namespace advc::bitstream
