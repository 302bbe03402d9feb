#pragma once

#include <span>
#include <string>
#include <vector>

#include "advc/core.hpp"
#include "advc/image.hpp"

namespace advc::gop {

using advc::forward_splat;
using advc::SplatResult;

/// Fraction of set entries in an occupancy mask.
double occupancy_fraction(std::span<const std::uint8_t> occupancy);

/// Similarity between a splatted keyframe and the true frame, in [0, 1],
/// restricted to the splat's covered region.
class SimilarityMetric {
 public:
  virtual ~SimilarityMetric() = default;
  virtual double similarity(const SplatResult& splat, const Frame& target) const = 0;
};

/// Mean SSIM over 8x8 windows (stride 4) of the occupancy-masked luma planes,
/// counting only windows at least 75% covered; 0 when none qualifies.
class MaskedSsim final : public SimilarityMetric {
 public:
  double similarity(const SplatResult& splat, const Frame& target) const override;
};

const SimilarityMetric& default_similarity();

double perceptual_similarity(const SplatResult& splat, const Frame& target);

struct FrameScore {
  int t = 0;  // absolute frame index
  double occ = 0.0;
  double sim = 0.0;
  double theta = 0.0;
};

/// min(occ / theta_occ, sim / theta_perc), guaranteed to be below 1 exactly
/// when occ < theta_occ or sim < theta_perc.
double validity_score(double occ, double sim, double theta_occ, double theta_perc);

/// Scores frame offset `t` (>= 1) of a segment whose keyframe is offset 0.
FrameScore score_frame(const Frame& keyframe, const MotionField& field, const Frame& target,
                       int t, const CodecConfig& config,
                       const SimilarityMetric& metric = default_similarity());

/// First frame of the earliest run of `hysteresis` consecutive frames with
/// score below 1, searched over (start, cap] with
/// cap = min(last frame, start + t_max - 1); `cap` when no run exists.
/// `field` is anchored at `start` and must reach `cap`. Every evaluated score
/// is appended to `scores` when given.
int find_segment_end(std::span<const Frame> frames, const MotionField& field, int start,
                     const CodecConfig& config,
                     const SimilarityMetric& metric = default_similarity(),
                     std::vector<FrameScore>* scores = nullptr);

struct Segmentation {
  std::vector<SegmentPlan> plans;
  // Scores for frames start+1 .. end of each plan.
  std::vector<std::vector<FrameScore>> scores;
};

/// Splits a video into one-frame-overlapping segments, re-requesting a
/// t_max-frame tracking horizon from each new keyframe. When `fields` is
/// given it receives each segment's tracking field cut to the segment.
Segmentation segment_video(std::span<const Frame> frames, TrackingProvider& tracker,
                           const CodecConfig& config,
                           const SimilarityMetric& metric = default_similarity(),
                           std::vector<MotionField>* fields = nullptr);

/// CSV with header `segment,t,occ,sim,theta`.
std::string scores_to_csv(const Segmentation& segmentation);

}  // namespace advc::gop
