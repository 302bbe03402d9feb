#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "advc/bitstream/container.hpp"
#include "advc/bitstream/keyframe_codec.hpp"
#include "advc/core.hpp"
#include "advc/gop.hpp"
#include "advc/sampler.hpp"

namespace advc {

struct EncodeOptions {
  CodecConfig config;
  double fps = 30.0;
  bitstream::KeyframeCodecTag codec = bitstream::KeyframeCodecTag::lossless_pred;
  // Needed for external blobs; the built-in lossless codec otherwise.
  const bitstream::KeyframeCodec* keyframe_codec = nullptr;
  // Fixed segmentation. Skips the boundary search; tracking is still
  // requested per segment.
  std::optional<std::vector<SegmentPlan>> plans;
  const gop::SimilarityMetric* metric = nullptr;
};

/// Wall-clock seconds per stage.
struct StageTimings {
  double segmentation = 0.0;
  double tracking = 0.0;
  double selection = 0.0;
  double coding = 0.0;
  double total = 0.0;
};

nlohmann::json to_json(const StageTimings& timings);

struct SegmentEncoding {
  SegmentPlan plan;
  MotionField field;           // tracking field the selection ran on
  sampler::Selection selection;
  TrajectorySet transmitted;   // dequantized, what the decoder sees
  MotionField reconstruction;  // decoder-side dense estimate
  double r_initial = 0.0;      // weighted error of the initial grid
  double r_final = 0.0;        // weighted error of the final selection
};

struct EncodeResult {
  bitstream::Container container;
  std::vector<std::uint8_t> bytes;
  bitstream::ByteAccounting accounting;
  std::vector<SegmentEncoding> segments;
  // Per-frame scores, empty when the plans were supplied.
  gop::Segmentation segmentation;
  StageTimings timings;
};

/// Segments the video (unless plans are fixed), selects and quantizes
/// trajectories per segment, codes keyframes, and serializes the container.
EncodeResult encode_video(std::span<const Frame> frames, TrackingProvider& tracker,
                          const EncodeOptions& options = {});

}  // namespace advc
