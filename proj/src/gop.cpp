#include "advc/gop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace advc::gop {

double occupancy_fraction(std::span<const std::uint8_t> occupancy) {
  if (occupancy.empty()) return 0.0;
  const auto covered = std::count_if(occupancy.begin(), occupancy.end(),
                                     [](std::uint8_t v) { return v != 0; });
  return static_cast<double>(covered) / static_cast<double>(occupancy.size());
}

double MaskedSsim::similarity(const SplatResult& splat, const Frame& target) const {
  if (splat.width != target.width() || splat.height != target.height()) {
    throw Error(ErrorKind::dimension_mismatch, "splat and target differ in size");
  }
  return windowed_ssim(splat.gray(), to_gray(target), splat.width, splat.height,
                       splat.occupancy);
}

const SimilarityMetric& default_similarity() {
  static const MaskedSsim metric;
  return metric;
}

double perceptual_similarity(const SplatResult& splat, const Frame& target) {
  return default_similarity().similarity(splat, target);
}

double validity_score(double occ, double sim, double theta_occ, double theta_perc) {
  // A quotient of a < b can round up to exactly 1; keep it strictly below.
  auto ratio = [](double value, double threshold) {
    double r = value / threshold;
    if (value < threshold && r >= 1.0) r = std::nextafter(1.0, 0.0);
    return r;
  };
  return std::min(ratio(occ, theta_occ), ratio(sim, theta_perc));
}

FrameScore score_frame(const Frame& keyframe, const MotionField& field, const Frame& target,
                       int t, const CodecConfig& config, const SimilarityMetric& metric) {
  if (t < 1 || t >= field.length()) {
    throw Error(ErrorKind::invalid_argument, "score offset outside the tracking field");
  }
  const SplatResult splat = forward_splat(keyframe, field.slice(t));
  FrameScore s;
  s.t = t;
  s.occ = occupancy_fraction(splat.occupancy);
  s.sim = std::clamp(metric.similarity(splat, target), 0.0, 1.0);
  s.theta = validity_score(s.occ, s.sim, config.theta_occ, config.theta_perc);
  return s;
}

int find_segment_end(std::span<const Frame> frames, const MotionField& field, int start,
                     const CodecConfig& config, const SimilarityMetric& metric,
                     std::vector<FrameScore>* scores) {
  const int last = static_cast<int>(frames.size()) - 1;
  if (start < 0 || start >= last) {
    throw Error(ErrorKind::invalid_argument, "segment search needs at least two frames");
  }
  const int cap = std::min(last, start + config.t_max - 1);
  if (field.length() < cap - start + 1) {
    throw Error(ErrorKind::dimension_mismatch, "tracking field does not reach the search cap");
  }
  const Frame& keyframe = frames[start];
  int run = 0;
  for (int t = start + 1; t <= cap; ++t) {
    FrameScore s = score_frame(keyframe, field, frames[t], t - start, config, metric);
    s.t = t;
    if (scores) scores->push_back(s);
    run = s.theta < 1.0 ? run + 1 : 0;
    if (run == config.hysteresis) return t - config.hysteresis + 1;
  }
  return cap;
}

Segmentation segment_video(std::span<const Frame> frames, TrackingProvider& tracker,
                           const CodecConfig& config, const SimilarityMetric& metric,
                           std::vector<MotionField>* fields) {
  config.validate();
  const int count = static_cast<int>(frames.size());
  if (count < 2) throw Error(ErrorKind::invalid_argument, "segmentation needs at least two frames");
  Segmentation out;
  int start = 0;
  while (start < count - 1) {
    const int horizon = std::min(config.t_max, count - start);
    const MotionField field = tracker.track(start, horizon);
    std::vector<FrameScore> scores;
    const int end = find_segment_end(frames, field, start, config, metric, &scores);
    std::erase_if(scores, [end](const FrameScore& s) { return s.t > end; });
    out.plans.emplace_back(start, end);
    out.scores.push_back(std::move(scores));
    if (fields) fields->push_back(field.head(end - start + 1));
    start = end;
  }
  return out;
}

std::string scores_to_csv(const Segmentation& segmentation) {
  std::string out = "segment,t,occ,sim,theta\n";
  char line[160];
  for (std::size_t k = 0; k < segmentation.scores.size(); ++k) {
    for (const auto& s : segmentation.scores[k]) {
      std::snprintf(line, sizeof line, "%zu,%d,%.6f,%.6f,%.6f\n", k, s.t, s.occ, s.sim, s.theta);
      out += line;
    }
  }
  return out;
}

}  // namespace advc::gop
