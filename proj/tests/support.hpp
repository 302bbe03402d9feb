#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "advc/core.hpp"

namespace advc::test {

inline Frame random_frame(int w, int h, int ch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> s(static_cast<std::size_t>(w) * h * ch);
  for (auto& v : s) v = static_cast<std::uint8_t>(byte(rng));
  return Frame(w, h, ch, std::move(s));
}

/// Smooth, non-periodic texture with gradients everywhere.
inline Frame textured_frame(int w, int h, int ch = 3) {
  std::vector<std::uint8_t> s(static_cast<std::size_t>(w) * h * ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        const double v = 128 + 60 * std::sin(0.37 * x + 0.11 * c) * std::cos(0.23 * y - 0.05 * x) +
                         30 * std::sin(0.05 * x * y / 7.0 + c);
        s[(static_cast<std::size_t>(y) * w + x) * ch + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return Frame(w, h, ch, std::move(s));
}

inline Frame horizontal_gradient(int w, int h, int ch = 3) {
  std::vector<std::uint8_t> s(static_cast<std::size_t>(w) * h * ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        s[(static_cast<std::size_t>(y) * w + x) * ch + c] = static_cast<std::uint8_t>(x * 255 / (w - 1));
      }
    }
  }
  return Frame(w, h, ch, std::move(s));
}

/// Random field with zero first frame; values in [-amp, amp].
inline MotionField random_field(int w, int h, int T, double amp, std::uint64_t seed,
                                bool with_visibility = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<Displacement> data(static_cast<std::size_t>(w) * h * T);
  for (std::size_t i = static_cast<std::size_t>(w) * h; i < data.size(); ++i) data[i] = {u(rng), u(rng)};
  std::vector<std::uint8_t> vis;
  if (with_visibility) {
    vis.resize(data.size());
    for (auto& v : vis) v = static_cast<std::uint8_t>(rng() & 1);
  }
  return MotionField(w, h, T, std::move(data), std::move(vis));
}

/// Field whose every pixel follows the same track.
inline MotionField uniform_field(int w, int h, const std::vector<Displacement>& track) {
  const int T = static_cast<int>(track.size());
  std::vector<Displacement> data(static_cast<std::size_t>(w) * h * T);
  for (int t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) data[t * static_cast<std::size_t>(w) * h + i] = track[t];
  }
  return MotionField(w, h, T, std::move(data));
}

/// Every pixel moves by t * (vx, vy) from the keyframe, whatever the start.
class VelocityTracker final : public TrackingProvider {
 public:
  VelocityTracker(int w, int h, double vx, double vy) : w_(w), h_(h), vx_(vx), vy_(vy) {}
  MotionField track(int, int horizon) override {
    std::vector<Displacement> track(horizon);
    for (int t = 0; t < horizon; ++t) track[t] = {vx_ * t, vy_ * t};
    return uniform_field(w_, h_, track);
  }

 private:
  int w_, h_;
  double vx_, vy_;
};

/// Left half moves (a, 0) per frame, right half (b, 0).
inline MotionField two_region_field(int w, int h, int T, double a = 1.0, double b = -1.0) {
  std::vector<Displacement> data(static_cast<std::size_t>(w) * h * T);
  for (int t = 0; t < T; ++t) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        data[(static_cast<std::size_t>(t) * h + y) * w + x] = {(x < w / 2 ? a : b) * t, 0.0};
      }
    }
  }
  return MotionField(w, h, T, std::move(data));
}

/// Random trajectory set with distinct origins.
inline TrajectorySet random_trajectories(int w, int h, int T, int n, double amp,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> X(0, w - 1), Y(0, h - 1);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<Trajectory> pts;
  std::vector<PixelCoord> used;
  while (static_cast<int>(pts.size()) < n) {
    PixelCoord q{X(rng), Y(rng)};
    if (std::find(used.begin(), used.end(), q) != used.end()) continue;
    used.push_back(q);
    Trajectory tr{q, std::vector<Displacement>(T)};
    for (int t = 1; t < T; ++t) tr.track[t] = {u(rng), u(rng)};
    pts.push_back(std::move(tr));
  }
  return TrajectorySet(w, h, T, std::move(pts));
}

}  // namespace advc::test
