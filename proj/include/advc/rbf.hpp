#pragma once

#include <optional>
#include <span>
#include <vector>

#include "advc/core.hpp"

namespace advc::rbf {

/// Normalized Gaussian-kernel interpolator over sparse trajectories.
///
/// The estimate at pixel p and frame t is sum_q alpha(p, q) * u_t(q) with
/// alpha(p, q) proportional to exp(-|p - q|^2 / (2 sigma^2)) and summing to 1.
/// With `top_k` set only the k nearest anchors (ties by anchor index)
/// contribute, with renormalized weights.
class RbfModel {
 public:
  RbfModel(TrajectorySet anchors, double sigma, std::optional<int> top_k = std::nullopt);

  const TrajectorySet& anchors() const noexcept { return anchors_; }
  double sigma() const noexcept { return sigma_; }
  std::optional<int> top_k() const noexcept { return top_k_; }
  int length() const noexcept { return anchors_.length(); }

  /// Value of anchor `i` at frame `t`.
  const Displacement& value(int i, int t) const {
    return values_[static_cast<std::size_t>(t) * anchors_.size() + i];
  }

 private:
  TrajectorySet anchors_;
  double sigma_;
  std::optional<int> top_k_;
  std::vector<Displacement> values_;  // [t][anchor]
};

/// Interpolation weights at one query point, in ascending anchor order.
/// `reference` is the anchor with the largest weight (lowest index on ties).
struct KernelWeights {
  std::vector<int> anchor;
  std::vector<double> alpha;
  int reference = 0;
};

KernelWeights kernel_weights(const RbfModel& model, PixelCoord p);

/// Estimate at pixel p and 0-based frame offset t.
Displacement interpolate(const RbfModel& model, PixelCoord p, int t);

/// Dense estimate; per pixel bit-identical to `interpolate`.
MotionField interpolate_field(const RbfModel& model, int width, int height, int length);

/// Weighted squared trajectory error summed over pixels and frames:
/// sum_p w(p) * sum_t |M_t(p) - Mhat_t(p)|^2.
double reconstruction_error(const MotionField& field, const MotionField& estimate,
                            std::span<const double> weights);
double reconstruction_error(const MotionField& field, const RbfModel& model,
                            std::span<const double> weights);

struct BandwidthSelection {
  double sigma = 0.0;
  // Error of every candidate, in the order given.
  std::vector<double> errors;
};

/// Candidate minimizing the reconstruction error with anchors sampled from
/// `field` at `anchors`; ties go to the smaller bandwidth.
BandwidthSelection select_bandwidth(const MotionField& field,
                                    std::span<const PixelCoord> anchors,
                                    std::span<const double> weights,
                                    std::span<const double> candidates,
                                    std::optional<int> top_k = std::nullopt);

}  // namespace advc::rbf
