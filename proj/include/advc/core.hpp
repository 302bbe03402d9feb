#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace advc {

enum class ErrorKind {
  invalid_argument,
  io,
  bad_magic,
  version_mismatch,
  truncated,
  non_finite,
  checksum,
  invalid_code,
  dimension_mismatch,
  malformed,
};

const char* to_string(ErrorKind kind) noexcept;

// All library failures are reported through this type. `record()` is set
// when the failure can be pinned to a container record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<int> record = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<int> record() const noexcept { return record_; }

 private:
  ErrorKind kind_;
  std::optional<int> record_;
};

struct PixelCoord {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

// +x rightward, +y downward.
struct Displacement {
  double dx = 0.0;
  double dy = 0.0;

  bool finite() const noexcept;
  friend bool operator==(const Displacement&, const Displacement&) = default;
};

inline Displacement operator+(Displacement a, Displacement b) {
  return {a.dx + b.dx, a.dy + b.dy};
}
inline Displacement operator-(Displacement a, Displacement b) {
  return {a.dx - b.dx, a.dy - b.dy};
}

/// 8-bit interleaved image, row-major. Channels is 1 (gray) or 3 (RGB).
class Frame {
 public:
  static constexpr int kMinSide = 8;

  Frame(int width, int height, int channels, std::vector<std::uint8_t> samples);
  static Frame filled(int width, int height, int channels, std::uint8_t value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  std::uint8_t at(int x, int y, int c = 0) const {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::span<const std::uint8_t> samples() const noexcept { return samples_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> samples_;
};

/// Luma (BT.601 weights) for RGB frames, the sample itself for gray frames.
std::vector<double> to_gray(const Frame& frame);

/// Dense per-pixel trajectories for one segment. Frame offsets are 0-based:
/// offset 0 is the segment's first frame and its displacements are all zero.
class MotionField {
 public:
  MotionField(int width, int height, int length, std::vector<Displacement> data,
              std::vector<std::uint8_t> visibility = {});
  static MotionField zeros(int width, int height, int length);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int length() const noexcept { return length_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  const Displacement& at(int t, int x, int y) const {
    return data_[index(t, x, y)];
  }
  std::span<const Displacement> slice(int t) const {
    return std::span<const Displacement>(data_).subspan(
        static_cast<std::size_t>(t) * pixel_count(), pixel_count());
  }
  std::span<const Displacement> data() const noexcept { return data_; }

  bool has_visibility() const noexcept { return !visibility_.empty(); }
  bool visible(int t, int x, int y) const {
    return visibility_.empty() || visibility_[index(t, x, y)] != 0;
  }
  std::span<const std::uint8_t> visibility() const noexcept { return visibility_; }

  /// Trajectory of pixel (x, y) over all frames.
  std::vector<Displacement> track(int x, int y) const;

  /// The first `length` frames of this field.
  MotionField head(int length) const;

  friend bool operator==(const MotionField&, const MotionField&) = default;

 private:
  std::size_t index(int t, int x, int y) const {
    return (static_cast<std::size_t>(t) * height_ + y) * width_ + x;
  }

  int width_;
  int height_;
  int length_;
  std::vector<Displacement> data_;
  std::vector<std::uint8_t> visibility_;
};

struct Trajectory {
  PixelCoord q;
  std::vector<Displacement> track;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Sparse trajectory set: distinct in-bounds initial locations, each with one
/// displacement per frame starting at (0, 0).
class TrajectorySet {
 public:
  TrajectorySet(int width, int height, int length, std::vector<Trajectory> points);

  /// Samples the dense field at the given locations.
  static TrajectorySet sample(const MotionField& field,
                              std::span<const PixelCoord> locations);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int length() const noexcept { return length_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const std::vector<Trajectory>& points() const noexcept { return points_; }
  std::vector<PixelCoord> locations() const;

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;

 private:
  int width_;
  int height_;
  int length_;
  std::vector<Trajectory> points_;
};

/// One GOP over absolute frame indices [start, end], inclusive.
class SegmentPlan {
 public:
  SegmentPlan(int start, int end);

  int start() const noexcept { return start_; }
  int end() const noexcept { return end_; }
  int length() const noexcept { return end_ - start_ + 1; }

  friend bool operator==(const SegmentPlan&, const SegmentPlan&) = default;

 private:
  int start_;
  int end_;
};

/// Checks that plans tile [0, total_frames - 1] with one-frame overlaps.
void validate_plan_chain(std::span<const SegmentPlan> plans, int total_frames);

struct GridCells {
  int rows = 1;
  int cols = 1;

  friend bool operator==(const GridCells&, const GridCells&) = default;
};

struct CodecConfig {
  double theta_occ = 0.8;
  double theta_perc = 0.85;
  int hysteresis = 1;
  int budget = 300;
  std::vector<double> sigma_candidates{2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  double quant_step = 0.5;
  // Derived from frame size and budget when unset.
  std::optional<GridCells> grid_cells;
  int t_max = 121;
  double residual_tolerance = 1e-4;
  int points_per_iteration = 8;
  // Derived from the selected bandwidth when unset.
  std::optional<int> nms_radius;
  // Exclude candidates that are not visible in more than half the frames.
  bool exclude_occluded = false;
  // Truncated-kernel RBF evaluation; exact when unset.
  std::optional<int> rbf_top_k;

  void validate() const;
};

/// Supplies the dense tracking field anchored at any start frame.
class TrackingProvider {
 public:
  virtual ~TrackingProvider() = default;

  /// Field whose offset 0 is absolute frame `start`, covering `horizon` frames.
  virtual MotionField track(int start, int horizon) = 0;
};

}  // namespace advc
