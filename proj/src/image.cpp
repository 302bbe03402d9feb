#include "advc/image.hpp"

#include <algorithm>
#include <cmath>

namespace advc {

std::vector<double> SplatResult::gray() const {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!occupancy[i]) continue;
    out[i] = channels == 1 ? image[i]
                           : 0.299 * image[3 * i] + 0.587 * image[3 * i + 1] +
                                 0.114 * image[3 * i + 2];
  }
  return out;
}

SplatResult forward_splat(const Frame& keyframe, std::span<const Displacement> displacements) {
  const int w = keyframe.width();
  const int h = keyframe.height();
  const int ch = keyframe.channels();
  const std::size_t n = keyframe.pixel_count();
  if (displacements.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "splat displacements do not match keyframe");
  }
  SplatResult out{w, h, ch, std::vector<double>(n * ch, 0.0), std::vector<std::uint8_t>(n, 0)};
  std::vector<std::uint32_t> hits(n, 0);
  const auto src = keyframe.samples();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double tx = std::round(x + displacements[i].dx);
      const double ty = std::round(y + displacements[i].dy);
      if (tx < 0 || ty < 0 || tx >= w || ty >= h) continue;
      const std::size_t j = static_cast<std::size_t>(ty) * w + static_cast<std::size_t>(tx);
      for (int c = 0; c < ch; ++c) out.image[j * ch + c] += src[i * ch + c];
      ++hits[j];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (hits[j] == 0) continue;
    out.occupancy[j] = 1;
    if (hits[j] > 1) {
      for (int c = 0; c < ch; ++c) out.image[j * ch + c] /= hits[j];
    }
  }
  return out;
}

double windowed_ssim(std::span<const double> a, std::span<const double> b, int width,
                     int height, std::span<const std::uint8_t> mask,
                     const SsimWindowing& windowing) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (a.size() != n || b.size() != n || (!mask.empty() && mask.size() != n)) {
    throw Error(ErrorKind::dimension_mismatch, "ssim planes do not match");
  }
  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  const int win = windowing.window;
  const double area = static_cast<double>(win) * win;

  double total = 0.0;
  long windows = 0;
  for (int y0 = 0; y0 + win <= height; y0 += windowing.stride) {
    for (int x0 = 0; x0 + win <= width; x0 += windowing.stride) {
      int covered = 0;
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int y = y0; y < y0 + win; ++y) {
        for (int x = x0; x < x0 + win; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * width + x;
          double va = a[i];
          double vb = b[i];
          if (!mask.empty()) {
            if (mask[i]) {
              ++covered;
            } else {
              va = 0.0;
              vb = 0.0;
            }
          }
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      }
      if (!mask.empty() && covered < windowing.min_coverage * area) continue;
      const double ma = sa / area;
      const double mb = sb / area;
      const double va = saa / area - ma * ma;
      const double vb = sbb / area - mb * mb;
      const double cov = sab / area - ma * mb;
      total += ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
      ++windows;
    }
  }
  if (windows == 0) return 0.0;
  return std::clamp(total / windows, 0.0, 1.0);
}

std::vector<long> nearest_occupied(std::span<const std::uint8_t> occupancy, int width,
                                   int height) {
  const long n = static_cast<long>(width) * height;
  if (static_cast<long>(occupancy.size()) != n) {
    throw Error(ErrorKind::dimension_mismatch, "occupancy plane does not match");
  }
  std::vector<long> out(n, -1);
  if (std::none_of(occupancy.begin(), occupancy.end(), [](auto v) { return v != 0; })) {
    return out;
  }
  const int max_radius = std::max(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const long i = static_cast<long>(y) * width + x;
      if (occupancy[i]) {
        out[i] = i;
        continue;
      }
      long best = -1;
      long best_d2 = 0;
      // Square rings of growing Chebyshev radius r; once r^2 exceeds the best
      // squared distance no farther ring can improve on it.
      for (int r = 1; r <= max_radius; ++r) {
        if (best >= 0 && static_cast<long>(r) * r > best_d2) break;
        const int y0 = std::max(0, y - r), y1 = std::min(height - 1, y + r);
        const int x0 = std::max(0, x - r), x1 = std::min(width - 1, x + r);
        for (int yy = y0; yy <= y1; ++yy) {
          const bool edge_row = (yy == y - r || yy == y + r);
          for (int xx = x0; xx <= x1; ++xx) {
            if (!edge_row && xx != x - r && xx != x + r) continue;
            const long j = static_cast<long>(yy) * width + xx;
            if (!occupancy[j]) continue;
            const long d2 = static_cast<long>(xx - x) * (xx - x) +
                            static_cast<long>(yy - y) * (yy - y);
            if (best < 0 || d2 < best_d2 || (d2 == best_d2 && j < best)) {
              best = j;
              best_d2 = d2;
            }
          }
        }
      }
      out[i] = best;
    }
  }
  return out;
}

}  // namespace advc
