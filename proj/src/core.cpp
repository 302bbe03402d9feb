#include "advc/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace advc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::io: return "io";
    case ErrorKind::bad_magic: return "bad_magic";
    case ErrorKind::version_mismatch: return "version_mismatch";
    case ErrorKind::truncated: return "truncated";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::checksum: return "checksum";
    case ErrorKind::invalid_code: return "invalid_code";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::malformed: return "malformed";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what, std::optional<int> record)
    : std::runtime_error(what), kind_(kind), record_(record) {}

bool Displacement::finite() const noexcept {
  return std::isfinite(dx) && std::isfinite(dy);
}

Frame::Frame(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  if (width < kMinSide || height < kMinSide) {
    throw Error(ErrorKind::invalid_argument,
                "frame must be at least 8x8, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorKind::invalid_argument, "frame channels must be 1 or 3");
  }
  if (samples_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    throw Error(ErrorKind::dimension_mismatch, "frame sample count does not match dimensions");
  }
}

Frame Frame::filled(int width, int height, int channels, std::uint8_t value) {
  std::vector<std::uint8_t> samples(
      static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) *
          std::max(channels, 0),
      value);
  return Frame(width, height, channels, std::move(samples));
}

std::vector<double> to_gray(const Frame& frame) {
  std::vector<double> gray(frame.pixel_count());
  const auto s = frame.samples();
  if (frame.channels() == 1) {
    std::copy(s.begin(), s.end(), gray.begin());
    return gray;
  }
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = 0.299 * s[3 * i] + 0.587 * s[3 * i + 1] + 0.114 * s[3 * i + 2];
  }
  return gray;
}

MotionField::MotionField(int width, int height, int length,
                         std::vector<Displacement> data,
                         std::vector<std::uint8_t> visibility)
    : width_(width),
      height_(height),
      length_(length),
      data_(std::move(data)),
      visibility_(std::move(visibility)) {
  if (width < 1 || height < 1 || length < 1) {
    throw Error(ErrorKind::invalid_argument, "motion field dimensions must be positive");
  }
  const std::size_t expected = pixel_count() * static_cast<std::size_t>(length);
  if (data_.size() != expected) {
    throw Error(ErrorKind::dimension_mismatch, "motion field data length mismatch");
  }
  if (!visibility_.empty() && visibility_.size() != expected) {
    throw Error(ErrorKind::dimension_mismatch, "visibility plane length mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!data_[i].finite()) {
      throw Error(ErrorKind::non_finite, "motion field contains a non-finite displacement");
    }
    if (i < pixel_count() && (data_[i].dx != 0.0 || data_[i].dy != 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "motion field first frame must have zero displacement");
    }
  }
}

MotionField MotionField::zeros(int width, int height, int length) {
  std::vector<Displacement> data(static_cast<std::size_t>(std::max(width, 0)) *
                                 std::max(height, 0) * std::max(length, 0));
  return MotionField(width, height, length, std::move(data));
}

std::vector<Displacement> MotionField::track(int x, int y) const {
  std::vector<Displacement> out(length_);
  for (int t = 0; t < length_; ++t) out[t] = at(t, x, y);
  return out;
}

MotionField MotionField::head(int length) const {
  if (length < 1 || length > length_) {
    throw Error(ErrorKind::invalid_argument, "head length out of range");
  }
  const std::size_t n = pixel_count() * static_cast<std::size_t>(length);
  std::vector<Displacement> data(data_.begin(), data_.begin() + n);
  std::vector<std::uint8_t> vis;
  if (!visibility_.empty()) vis.assign(visibility_.begin(), visibility_.begin() + n);
  return MotionField(width_, height_, length, std::move(data), std::move(vis));
}

TrajectorySet::TrajectorySet(int width, int height, int length,
                             std::vector<Trajectory> points)
    : width_(width), height_(height), length_(length), points_(std::move(points)) {
  if (width < 1 || height < 1 || length < 1) {
    throw Error(ErrorKind::invalid_argument, "trajectory set dimensions must be positive");
  }
  std::set<PixelCoord> seen;
  for (const auto& p : points_) {
    if (p.q.x < 0 || p.q.x >= width || p.q.y < 0 || p.q.y >= height) {
      throw Error(ErrorKind::invalid_argument, "trajectory origin out of bounds");
    }
    if (!seen.insert(p.q).second) {
      throw Error(ErrorKind::invalid_argument, "duplicate trajectory origin");
    }
    if (static_cast<int>(p.track.size()) != length) {
      throw Error(ErrorKind::dimension_mismatch, "trajectory length mismatch");
    }
    if (p.track[0].dx != 0.0 || p.track[0].dy != 0.0) {
      throw Error(ErrorKind::invalid_argument, "trajectory must start at (0, 0)");
    }
    for (const auto& d : p.track) {
      if (!d.finite()) throw Error(ErrorKind::non_finite, "non-finite trajectory value");
    }
  }
}

TrajectorySet TrajectorySet::sample(const MotionField& field,
                                    std::span<const PixelCoord> locations) {
  std::vector<Trajectory> points;
  points.reserve(locations.size());
  for (const auto& q : locations) {
    if (q.x < 0 || q.x >= field.width() || q.y < 0 || q.y >= field.height()) {
      throw Error(ErrorKind::invalid_argument, "sample location out of bounds");
    }
    points.push_back({q, field.track(q.x, q.y)});
  }
  return TrajectorySet(field.width(), field.height(), field.length(), std::move(points));
}

std::vector<PixelCoord> TrajectorySet::locations() const {
  std::vector<PixelCoord> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.q);
  return out;
}

SegmentPlan::SegmentPlan(int start, int end) : start_(start), end_(end) {
  if (start < 0 || end - start + 1 < 2) {
    throw Error(ErrorKind::invalid_argument,
                "segment must span at least two frames: [" + std::to_string(start) +
                    ", " + std::to_string(end) + "]");
  }
}

void validate_plan_chain(std::span<const SegmentPlan> plans, int total_frames) {
  if (plans.empty()) throw Error(ErrorKind::invalid_argument, "empty segment plan");
  if (plans.front().start() != 0) {
    throw Error(ErrorKind::invalid_argument, "first segment must start at frame 0");
  }
  for (std::size_t k = 1; k < plans.size(); ++k) {
    if (plans[k].start() != plans[k - 1].end()) {
      throw Error(ErrorKind::invalid_argument,
                  "segments must overlap by exactly one frame", static_cast<int>(k));
    }
  }
  if (plans.back().end() != total_frames - 1) {
    throw Error(ErrorKind::invalid_argument, "last segment must end at the final frame");
  }
}

void CodecConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); };
  if (!(theta_occ > 0.0 && theta_occ <= 1.0)) fail("theta_occ must be in (0, 1]");
  if (!(theta_perc > 0.0 && theta_perc <= 1.0)) fail("theta_perc must be in (0, 1]");
  if (hysteresis < 1) fail("hysteresis must be >= 1");
  if (budget < 1) fail("budget must be >= 1");
  if (sigma_candidates.empty()) fail("sigma_candidates must not be empty");
  for (double s : sigma_candidates) {
    if (!(std::isfinite(s) && s > 0.0)) fail("sigma candidates must be finite and positive");
  }
  if (!(std::isfinite(quant_step) && quant_step > 0.0)) fail("quant_step must be > 0");
  if (grid_cells) {
    if (grid_cells->rows < 1 || grid_cells->cols < 1) fail("grid cells must be >= 1");
    if (grid_cells->rows * grid_cells->cols > budget) {
      fail("budget must be at least the number of grid cells");
    }
  }
  if (t_max < 2) fail("t_max must be >= 2");
  if (!(residual_tolerance >= 0.0)) fail("residual_tolerance must be >= 0");
  if (points_per_iteration < 1) fail("points_per_iteration must be >= 1");
  if (nms_radius && *nms_radius < 0) fail("nms_radius must be >= 0");
  if (rbf_top_k && *rbf_top_k < 1) fail("rbf_top_k must be >= 1");
}

}  // namespace advc
