#include "advc/rbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "advc/parallel.hpp"

namespace advc::rbf {

namespace {

// Neumaier compensated summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

// Reusable scratch for weight evaluation at one pixel.
struct WeightScratch {
  std::vector<double> exponent;
  std::vector<int> order;
};

void compute_weights(const RbfModel& model, double px, double py, WeightScratch& scratch,
                     KernelWeights& out) {
  const auto& points = model.anchors().points();
  const int n = static_cast<int>(points.size());
  const double inv_two_sigma2 = 1.0 / (2.0 * model.sigma() * model.sigma());

  scratch.exponent.resize(n);
  double best = -std::numeric_limits<double>::infinity();
  int reference = 0;
  for (int i = 0; i < n; ++i) {
    const double ddx = px - points[i].q.x;
    const double ddy = py - points[i].q.y;
    const double e = -(ddx * ddx + ddy * ddy) * inv_two_sigma2;
    scratch.exponent[i] = e;
    if (e > best) {
      best = e;
      reference = i;
    }
  }

  out.anchor.clear();
  out.alpha.clear();
  out.reference = reference;
  if (model.top_k() && *model.top_k() < n) {
    const int k = *model.top_k();
    scratch.order.resize(n);
    std::iota(scratch.order.begin(), scratch.order.end(), 0);
    auto nearer = [&](int a, int b) {
      const double ea = scratch.exponent[a], eb = scratch.exponent[b];
      return ea != eb ? ea > eb : a < b;
    };
    std::nth_element(scratch.order.begin(), scratch.order.begin() + (k - 1),
                     scratch.order.end(), nearer);
    std::sort(scratch.order.begin(), scratch.order.begin() + k);
    out.anchor.assign(scratch.order.begin(), scratch.order.begin() + k);
  } else {
    out.anchor.resize(n);
    std::iota(out.anchor.begin(), out.anchor.end(), 0);
  }

  // Shift by the largest exponent so the nearest anchor has weight exactly 1.
  CompensatedSum total;
  out.alpha.resize(out.anchor.size());
  for (std::size_t j = 0; j < out.anchor.size(); ++j) {
    out.alpha[j] = std::exp(scratch.exponent[out.anchor[j]] - best);
    total.add(out.alpha[j]);
  }
  const double norm = total.value();
  for (double& a : out.alpha) a /= norm;
}

// Written as u_ref + sum alpha_q (u_q - u_ref): identical to sum alpha_q u_q
// in exact arithmetic, and exact in floating point when all anchors agree.
Displacement evaluate(const RbfModel& model, const KernelWeights& w, int t) {
  const Displacement ref = model.value(w.reference, t);
  CompensatedSum sx, sy;
  for (std::size_t j = 0; j < w.anchor.size(); ++j) {
    const double a = w.alpha[j];
    if (a == 0.0) continue;
    const Displacement& u = model.value(w.anchor[j], t);
    sx.add(a * (u.dx - ref.dx));
    sy.add(a * (u.dy - ref.dy));
  }
  return {ref.dx + sx.value(), ref.dy + sy.value()};
}

}  // namespace

RbfModel::RbfModel(TrajectorySet anchors, double sigma, std::optional<int> top_k)
    : anchors_(std::move(anchors)), sigma_(sigma), top_k_(top_k) {
  if (anchors_.empty()) throw Error(ErrorKind::invalid_argument, "RBF model needs anchors");
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "RBF bandwidth must be finite and positive");
  }
  if (top_k && *top_k < 1) throw Error(ErrorKind::invalid_argument, "top_k must be >= 1");
  const std::size_t n = anchors_.size();
  values_.resize(n * anchors_.length());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& track = anchors_.points()[i].track;
    for (int t = 0; t < anchors_.length(); ++t) values_[t * n + i] = track[t];
  }
}

KernelWeights kernel_weights(const RbfModel& model, PixelCoord p) {
  WeightScratch scratch;
  KernelWeights out;
  compute_weights(model, p.x, p.y, scratch, out);
  return out;
}

Displacement interpolate(const RbfModel& model, PixelCoord p, int t) {
  if (t < 0 || t >= model.length()) {
    throw Error(ErrorKind::invalid_argument, "frame offset outside the model");
  }
  return evaluate(model, kernel_weights(model, p), t);
}

MotionField interpolate_field(const RbfModel& model, int width, int height, int length) {
  if (length < 1 || length > model.length()) {
    throw Error(ErrorKind::invalid_argument, "requested length exceeds the model");
  }
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  std::vector<Displacement> data(plane * length);
  parallel_for(0, height, [&](int y) {
    WeightScratch scratch;
    KernelWeights w;
    for (int x = 0; x < width; ++x) {
      compute_weights(model, x, y, scratch, w);
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      for (int t = 1; t < length; ++t) data[t * plane + i] = evaluate(model, w, t);
    }
  });
  // Offset 0 is zero for every valid anchor set, so it is left untouched.
  return MotionField(width, height, length, std::move(data));
}

double reconstruction_error(const MotionField& field, const MotionField& estimate,
                            std::span<const double> weights) {
  if (field.width() != estimate.width() || field.height() != estimate.height() ||
      field.length() != estimate.length() || weights.size() != field.pixel_count()) {
    throw Error(ErrorKind::dimension_mismatch, "reconstruction error operands disagree");
  }
  const std::size_t plane = field.pixel_count();
  const auto m = field.data();
  const auto mh = estimate.data();
  CompensatedSum total;
  for (std::size_t i = 0; i < plane; ++i) {
    if (weights[i] == 0.0) continue;
    double per_pixel = 0.0;
    for (int t = 0; t < field.length(); ++t) {
      const std::size_t k = t * plane + i;
      const double ex = m[k].dx - mh[k].dx;
      const double ey = m[k].dy - mh[k].dy;
      per_pixel += ex * ex + ey * ey;
    }
    total.add(weights[i] * per_pixel);
  }
  return total.value();
}

double reconstruction_error(const MotionField& field, const RbfModel& model,
                            std::span<const double> weights) {
  return reconstruction_error(
      field, interpolate_field(model, field.width(), field.height(), field.length()), weights);
}

BandwidthSelection select_bandwidth(const MotionField& field,
                                    std::span<const PixelCoord> anchors,
                                    std::span<const double> weights,
                                    std::span<const double> candidates,
                                    std::optional<int> top_k) {
  if (candidates.empty()) throw Error(ErrorKind::invalid_argument, "no bandwidth candidates");
  const TrajectorySet set = TrajectorySet::sample(field, anchors);
  BandwidthSelection out;
  double best_error = std::numeric_limits<double>::infinity();
  for (double sigma : candidates) {
    const double err = reconstruction_error(field, RbfModel(set, sigma, top_k), weights);
    out.errors.push_back(err);
    if (err < best_error || (err == best_error && sigma < out.sigma)) {
      best_error = err;
      out.sigma = sigma;
    }
  }
  return out;
}

}  // namespace advc::rbf
