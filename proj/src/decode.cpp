#include "advc/decode.hpp"

#include <cmath>
#include <string>

#include "advc/image.hpp"
#include "advc/rbf.hpp"

namespace advc::decode {

const char* to_string(HoleFill fill) noexcept {
  switch (fill) {
    case HoleFill::nearest: return "nearest";
    case HoleFill::blend_with_end: return "blend_with_end";
  }
  return "unknown";
}

HoleFill parse_hole_fill(const std::string& name) {
  if (name == "nearest") return HoleFill::nearest;
  if (name == "blend_with_end") return HoleFill::blend_with_end;
  throw Error(ErrorKind::invalid_argument, "unknown hole fill '" + name + "'");
}

void ReconstructionConfig::validate() const {
  if (!(blend >= 0.0) || !std::isfinite(blend)) {
    throw Error(ErrorKind::invalid_argument, "blend exponent must be finite and >= 0");
  }
  if (rectangle_half_size < 0) {
    throw Error(ErrorKind::invalid_argument, "rectangle half-size must be >= 0");
  }
}

MotionField reconstruct_field(const TrajectorySet& set, double sigma, int width, int height) {
  if (set.width() != width || set.height() != height) {
    throw Error(ErrorKind::dimension_mismatch, "trajectory set and frame size disagree");
  }
  if (set.empty()) return MotionField::zeros(width, height, set.length());
  return rbf::interpolate_field(rbf::RbfModel(set, sigma), width, height, set.length());
}

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

std::vector<Frame> synthesize_segment(const Frame& key_start, const Frame& key_end,
                                      const MotionField& field,
                                      const ReconstructionConfig& config) {
  config.validate();
  const int w = key_start.width();
  const int h = key_start.height();
  const int ch = key_start.channels();
  if (key_end.width() != w || key_end.height() != h || key_end.channels() != ch ||
      field.width() != w || field.height() != h) {
    throw Error(ErrorKind::dimension_mismatch, "keyframes and field disagree in shape");
  }
  const int T = field.length();
  if (T < 2) throw Error(ErrorKind::invalid_argument, "a segment spans at least two frames");

  std::vector<Frame> out;
  out.reserve(T);
  out.push_back(key_start);
  const auto end_samples = key_end.samples();
  for (int t = 1; t < T - 1; ++t) {
    const SplatResult splat = forward_splat(key_start, field.slice(t));
    const auto nearest = nearest_occupied(splat.occupancy, w, h);
    const double end_weight = config.hole_fill == HoleFill::blend_with_end
                                  ? std::pow(static_cast<double>(t) / (T - 1), config.blend)
                                  : 0.0;
    std::vector<std::uint8_t> samples(static_cast<std::size_t>(w) * h * ch);
    for (std::size_t i = 0; i < splat.occupancy.size(); ++i) {
      for (int c = 0; c < ch; ++c) {
        const std::size_t k = i * ch + c;
        if (splat.occupancy[i]) {
          samples[k] = to_byte(splat.image[k]);
          continue;
        }
        const double near = nearest[i] >= 0
                                ? splat.image[static_cast<std::size_t>(nearest[i]) * ch + c]
                                : end_samples[k];
        samples[k] = to_byte((1.0 - end_weight) * near + end_weight * end_samples[k]);
      }
    }
    out.emplace_back(w, h, ch, std::move(samples));
  }
  out.push_back(key_end);
  return out;
}

DecodedVideo decode_container(const bitstream::Container& container,
                              const ReconstructionConfig& config,
                              const bitstream::KeyframeCodec* codec) {
  config.validate();
  const auto& header = container.header;
  const bitstream::LosslessPredCodec lossless;
  if (!codec) codec = &lossless;
  if (codec->tag() != header.codec) {
    throw Error(ErrorKind::invalid_argument,
                std::string("container keyframes use ") + bitstream::to_string(header.codec));
  }
  const auto plans = container.plans();
  const auto blobs = container.keyframes();
  DecodedVideo video;
  video.fps = header.fps;

  auto decode_key = [&](std::size_t k, int frame_index, int record) {
    try {
      if (blobs[k]->tag != header.codec) {
        throw Error(ErrorKind::malformed, "keyframe codec differs from the header");
      }
      return codec->decode(blobs[k]->payload, frame_index, header.width, header.height);
    } catch (const Error& e) {
      if (e.record()) throw;
      throw Error(e.kind(), "segment record " + std::to_string(record) + ": " + e.what(), record);
    }
  };

  Frame previous_end = decode_key(0, 0, 0);
  for (std::size_t k = 0; k < container.segments.size(); ++k) {
    const int record = static_cast<int>(k);
    const auto& plan = plans[k];
    Frame key_end = decode_key(k + 1, plan.end(), record);
    try {
      if (key_end.channels() != previous_end.channels()) {
        throw Error(ErrorKind::dimension_mismatch, "keyframes disagree in channel count");
      }
      auto set = bitstream::decode_segment_trajectories(container.segments[k], header);
      auto field = reconstruct_field(set, container.segments[k].sigma, header.width, header.height);
      auto frames = synthesize_segment(previous_end, key_end, field, config);
      // Consecutive segments share their boundary frame.
      const std::size_t first = k == 0 ? 0 : 1;
      for (std::size_t i = first; i < frames.size(); ++i) video.frames.push_back(std::move(frames[i]));
      video.segments.push_back({plan, std::move(set), std::move(field)});
    } catch (const Error& e) {
      if (e.record()) throw;
      throw Error(e.kind(), "segment record " + std::to_string(record) + ": " + e.what(), record);
    }
    previous_end = std::move(key_end);
  }
  if (static_cast<int>(video.frames.size()) != header.total_frames) {
    throw Error(ErrorKind::malformed, "decoded frame count disagrees with the header");
  }
  return video;
}

DecodedVideo decode_container(const std::filesystem::path& path,
                              const ReconstructionConfig& config,
                              const bitstream::KeyframeCodec* codec) {
  return decode_container(bitstream::read_container(path), config, codec);
}

std::array<std::uint8_t, 3> point_color(PixelCoord q) noexcept {
  // splitmix64 finalizer over the packed coordinate.
  std::uint64_t z = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(q.x)) << 32) |
                    static_cast<std::uint32_t>(q.y);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  // Keep every channel away from black so points stay visible.
  return {static_cast<std::uint8_t>(64 + (z & 0xff) % 192),
          static_cast<std::uint8_t>(64 + ((z >> 8) & 0xff) % 192),
          static_cast<std::uint8_t>(64 + ((z >> 16) & 0xff) % 192)};
}

std::vector<Frame> render_trajectory_video(const TrajectorySet& set, int width, int height,
                                           const ReconstructionConfig& config) {
  config.validate();
  if (set.width() != width || set.height() != height) {
    throw Error(ErrorKind::dimension_mismatch, "trajectory set and frame size disagree");
  }
  const int r = config.rectangle_half_size;
  std::vector<Frame> out;
  out.reserve(set.length());
  for (int t = 0; t < set.length(); ++t) {
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3, 0);
    for (const auto& p : set.points()) {
      const auto color = point_color(p.q);
      const long cx = std::lround(p.q.x + p.track[t].dx);
      const long cy = std::lround(p.q.y + p.track[t].dy);
      const long x0 = std::max(0L, cx - r), x1 = std::min<long>(width - 1, cx + r);
      const long y0 = std::max(0L, cy - r), y1 = std::min<long>(height - 1, cy + r);
      for (long y = y0; y <= y1; ++y) {
        for (long x = x0; x <= x1; ++x) {
          const std::size_t k = (static_cast<std::size_t>(y) * width + x) * 3;
          rgb[k] = color[0];
          rgb[k + 1] = color[1];
          rgb[k + 2] = color[2];
        }
      }
    }
    out.emplace_back(width, height, 3, std::move(rgb));
  }
  return out;
}

}  // namespace advc::decode
