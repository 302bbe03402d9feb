#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "advc/bitstream/container.hpp"
#include "advc/bitstream/keyframe_codec.hpp"
#include "advc/core.hpp"

namespace advc::decode {

enum class HoleFill {
  nearest,         // copy the nearest covered pixel of the warped start keyframe
  blend_with_end,  // take uncovered pixels from the end keyframe
};

const char* to_string(HoleFill fill) noexcept;
HoleFill parse_hole_fill(const std::string& name);

struct ReconstructionConfig {
  HoleFill hole_fill = HoleFill::blend_with_end;
  // For blend_with_end, hole pixels mix nearest-fill and the end keyframe
  // with end weight (t / (T - 1))^blend. 0 gives the end keyframe alone.
  double blend = 0.0;
  int rectangle_half_size = 2;

  void validate() const;
};

/// Dense field from transmitted trajectories; the same evaluation the
/// encoder uses, so both sides agree bit for bit.
MotionField reconstruct_field(const TrajectorySet& set, double sigma, int width, int height);

/// T frames: the two keyframes verbatim at the ends, the start keyframe
/// forward-warped by `field` in between with holes filled per `config`.
std::vector<Frame> synthesize_segment(const Frame& key_start, const Frame& key_end,
                                      const MotionField& field,
                                      const ReconstructionConfig& config = {});

struct DecodedSegment {
  SegmentPlan plan;
  TrajectorySet trajectories;
  MotionField field;
};

struct DecodedVideo {
  std::vector<Frame> frames;
  std::vector<DecodedSegment> segments;
  double fps = 30.0;
};

/// Full decode. Keyframes go through `codec` when given, else the built-in
/// lossless codec. Errors raised while decoding a segment carry its index.
DecodedVideo decode_container(const bitstream::Container& container,
                              const ReconstructionConfig& config = {},
                              const bitstream::KeyframeCodec* codec = nullptr);
DecodedVideo decode_container(const std::filesystem::path& path,
                              const ReconstructionConfig& config = {},
                              const bitstream::KeyframeCodec* codec = nullptr);

/// Deterministic RGB color for a trajectory with origin q.
std::array<std::uint8_t, 3> point_color(PixelCoord q) noexcept;

/// One RGB frame per trajectory offset: black background with a filled
/// square of half-size rectangle_half_size at round(q + u_t(q)) for every
/// point, later points drawn over earlier ones.
std::vector<Frame> render_trajectory_video(const TrajectorySet& set, int width, int height,
                                           const ReconstructionConfig& config = {});

}  // namespace advc::decode
