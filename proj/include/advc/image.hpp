#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "advc/core.hpp"

namespace advc {

/// Forward-warped keyframe. `image` holds per-channel averages of every
/// source sample that landed on a pixel; it is zero where `occupancy` is 0.
struct SplatResult {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> image;
  std::vector<std::uint8_t> occupancy;

  double sample(int x, int y, int c = 0) const {
    return image[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool occupied(int x, int y) const {
    return occupancy[static_cast<std::size_t>(y) * width + x] != 0;
  }
  /// Grayscale of the accumulated image, zero on unoccupied pixels.
  std::vector<double> gray() const;
};

/// Scatters each source pixel p to round(p + u(p)) (half away from zero).
/// Targets outside the frame are discarded; collisions are averaged.
SplatResult forward_splat(const Frame& keyframe, std::span<const Displacement> displacements);

struct SsimWindowing {
  int window = 8;
  int stride = 4;
  // Windows whose mask coverage falls below this fraction are skipped.
  double min_coverage = 0.75;
};

/// Mean SSIM over square windows of two grayscale planes, clamped to [0, 1].
/// With a non-empty mask both planes are multiplied by it and only windows
/// meeting the coverage threshold contribute. Returns 0 if no window qualifies.
double windowed_ssim(std::span<const double> a, std::span<const double> b, int width,
                     int height, std::span<const std::uint8_t> mask = {},
                     const SsimWindowing& windowing = {});

/// For every pixel, the row-major index of the nearest occupied pixel by
/// Euclidean distance (itself when occupied), ties to the smallest index.
/// -1 everywhere when nothing is occupied.
std::vector<long> nearest_occupied(std::span<const std::uint8_t> occupancy, int width,
                                   int height);

}  // namespace advc
