#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "advc/bitstream/container.hpp"
#include "advc/core.hpp"

namespace advc::metrics {

/// Reported PSNR for identical inputs.
inline constexpr double kPsnrCap = 99.0;

/// Mean over frames and pixels of |u_truth - u_est|.
double endpoint_error(const MotionField& truth, const MotionField& estimate);

/// Over all samples and channels, 8-bit peak.
double mean_squared_error(const Frame& a, const Frame& b);
double psnr(const Frame& a, const Frame& b);
double psnr_from_mse(double mse);
/// Unmasked windowed SSIM of the luma planes.
double ssim(const Frame& a, const Frame& b);

/// Per-segment inputs for a report. Pointers may be null when the quantity
/// is unavailable (no ground-truth field, decode-only runs).
struct SegmentInputs {
  SegmentPlan plan;
  const MotionField* truth = nullptr;
  const MotionField* estimate = nullptr;
  std::optional<double> r_initial;
  std::optional<double> r_final;
  std::size_t points = 0;
  double sigma = 0.0;
};

struct SegmentReport {
  int index = 0;
  int start = 0;
  int length = 0;
  bitstream::SegmentBytes bytes;
  double bpp = 0.0;  // record bits over the segment's own new frames
  std::optional<double> epe;
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<double> r_initial;
  std::optional<double> r_final;
  std::size_t points = 0;
  double sigma = 0.0;
};

struct Summary {
  int frames = 0;
  int segments = 0;
  std::size_t points = 0;
  bitstream::BppBreakdown bpp;
  std::optional<double> epe;
  std::optional<double> psnr;
  std::optional<double> ssim;
};

struct Report {
  std::vector<SegmentReport> segments;
  Summary summary;
};

/// Quality columns are filled only when both frame lists are given. The
/// global bpp is the container accounting itself.
Report build_report(std::span<const Frame> original, std::span<const Frame> decoded,
                    std::span<const SegmentInputs> segments,
                    const bitstream::ByteAccounting& accounting,
                    const bitstream::ContainerHeader& header);

nlohmann::json to_json(const Report& report);
/// One row per segment, header
/// `segment,start,length,points,sigma,bpp,keyframe_bytes,trajectory_bytes,codebook_bytes,side_info_bytes,epe,psnr,ssim,r_initial,r_final`.
std::string to_csv(const Report& report);

}  // namespace advc::metrics
