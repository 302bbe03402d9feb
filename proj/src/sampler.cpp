#include "advc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace advc::sampler {

SketchMap sketch_weights(const Frame& frame) {
  const int w = frame.width();
  const int h = frame.height();
  const auto gray = to_gray(frame);
  auto g = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return gray[static_cast<std::size_t>(y) * w + x];
  };
  SketchMap out{w, h, std::vector<double>(frame.pixel_count())};
  double peak = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (g(x + 1, y - 1) + 2 * g(x + 1, y) + g(x + 1, y + 1)) -
                        (g(x - 1, y - 1) + 2 * g(x - 1, y) + g(x - 1, y + 1));
      const double gy = (g(x - 1, y + 1) + 2 * g(x, y + 1) + g(x + 1, y + 1)) -
                        (g(x - 1, y - 1) + 2 * g(x, y - 1) + g(x + 1, y - 1));
      const double mag = std::sqrt(gx * gx + gy * gy);
      out.weight[static_cast<std::size_t>(y) * w + x] = mag;
      peak = std::max(peak, mag);
    }
  }
  for (double& v : out.weight) v = peak > 0.0 ? std::max(kSketchFloor, v / peak) : kSketchFloor;
  return out;
}

GridCells default_grid(int width, int height, int budget) {
  const int target = std::max(1, budget / 2);
  int rows = static_cast<int>(std::lround(std::sqrt(static_cast<double>(target) * height / width)));
  rows = std::clamp(rows, 1, std::min(height, target));
  int cols = std::clamp(target / rows, 1, width);
  return {rows, cols};
}

std::vector<PixelCoord> init_grid(const SketchMap& sketch, GridCells cells) {
  if (cells.rows < 1 || cells.cols < 1 || cells.rows > sketch.height ||
      cells.cols > sketch.width) {
    throw Error(ErrorKind::invalid_argument, "grid does not fit the frame");
  }
  std::vector<PixelCoord> out;
  out.reserve(static_cast<std::size_t>(cells.rows) * cells.cols);
  for (int r = 0; r < cells.rows; ++r) {
    const int y0 = r * sketch.height / cells.rows;
    const int y1 = (r + 1) * sketch.height / cells.rows;
    for (int c = 0; c < cells.cols; ++c) {
      const int x0 = c * sketch.width / cells.cols;
      const int x1 = (c + 1) * sketch.width / cells.cols;
      PixelCoord best{x0, y0};
      double best_w = sketch.at(x0, y0);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          if (sketch.at(x, y) > best_w) {
            best_w = sketch.at(x, y);
            best = {x, y};
          }
        }
      }
      out.push_back(best);
    }
  }
  return out;
}

std::vector<double> residual_map(const MotionField& field, const MotionField& estimate,
                                 std::span<const double> weights) {
  if (field.width() != estimate.width() || field.height() != estimate.height() ||
      field.length() != estimate.length() || weights.size() != field.pixel_count()) {
    throw Error(ErrorKind::dimension_mismatch, "residual map operands disagree");
  }
  const std::size_t plane = field.pixel_count();
  const auto m = field.data();
  const auto mh = estimate.data();
  std::vector<double> r(plane, 0.0);
  for (std::size_t i = 0; i < plane; ++i) {
    double sum = 0.0;
    for (int t = 0; t < field.length(); ++t) {
      const std::size_t k = t * plane + i;
      const double ex = m[k].dx - mh[k].dx;
      const double ey = m[k].dy - mh[k].dy;
      sum += ex * ex + ey * ey;
    }
    r[i] = weights[i] * sum / field.length();
  }
  return r;
}

std::vector<double> residual_map(const MotionField& field, const rbf::RbfModel& model,
                                 const SketchMap& sketch) {
  return residual_map(
      field, rbf::interpolate_field(model, field.width(), field.height(), field.length()),
      sketch.weight);
}

std::vector<std::size_t> local_maxima(std::span<const double> map, int width, int height) {
  std::vector<std::size_t> out;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = map[static_cast<std::size_t>(y) * width + x];
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          if (!(v > map[static_cast<std::size_t>(ny) * width + nx])) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) out.push_back(static_cast<std::size_t>(y) * width + x);
    }
  }
  return out;
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::budget: return "budget";
    case Termination::tolerance: return "tolerance";
    case Termination::no_local_maxima: return "no_local_maxima";
  }
  return "unknown";
}

nlohmann::json to_json(const SelectionTrace& trace) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& it : trace.iterations) {
    nlohmann::json added = nlohmann::json::array();
    for (const auto& p : it.added) added.push_back({p.x, p.y});
    iterations.push_back({{"added", added}, {"error", it.error}});
  }
  return {{"grid", {trace.grid.rows, trace.grid.cols}},
          {"sigma_candidates", trace.sigma_candidates},
          {"bandwidth_errors", trace.bandwidth_errors},
          {"initial_error", trace.initial_error},
          {"initial_size", trace.initial_size},
          {"final_size", trace.final_size},
          {"termination", to_string(trace.termination)},
          {"iterations", iterations}};
}

Selection greedy_select(const MotionField& field, const SketchMap& sketch,
                        const CodecConfig& config) {
  config.validate();
  const int w = field.width();
  const int h = field.height();
  if (sketch.width != w || sketch.height != h) {
    throw Error(ErrorKind::dimension_mismatch, "sketch does not match the motion field");
  }
  SelectionTrace trace;
  trace.grid = config.grid_cells.value_or(default_grid(w, h, config.budget));
  if (static_cast<long>(trace.grid.rows) * trace.grid.cols > config.budget) {
    throw Error(ErrorKind::invalid_argument, "budget is smaller than the initial grid");
  }
  std::vector<PixelCoord> selected = init_grid(sketch, trace.grid);
  trace.initial_size = selected.size();
  trace.sigma_candidates = config.sigma_candidates;

  const auto bandwidth = rbf::select_bandwidth(field, selected, sketch.weight,
                                               config.sigma_candidates, config.rbf_top_k);
  trace.bandwidth_errors = bandwidth.errors;
  const double sigma = bandwidth.sigma;
  const int radius = config.nms_radius.value_or(
      std::max(2, static_cast<int>(std::lround(sigma / 2.0))));
  const long radius2 = static_cast<long>(radius) * radius;

  std::vector<std::uint8_t> eligible(field.pixel_count(), 1);
  if (config.exclude_occluded && field.has_visibility()) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int hidden = 0;
        for (int t = 0; t < field.length(); ++t) hidden += field.visible(t, x, y) ? 0 : 1;
        if (2 * hidden > field.length()) eligible[static_cast<std::size_t>(y) * w + x] = 0;
      }
    }
  }

  auto estimate_for = [&](const std::vector<PixelCoord>& points) {
    const rbf::RbfModel model(TrajectorySet::sample(field, points), sigma, config.rbf_top_k);
    return rbf::interpolate_field(model, w, h, field.length());
  };
  MotionField estimate = estimate_for(selected);
  trace.initial_error = rbf::reconstruction_error(field, estimate, sketch.weight);

  std::set<PixelCoord> taken(selected.begin(), selected.end());
  for (;;) {
    if (static_cast<int>(selected.size()) >= config.budget) {
      trace.termination = Termination::budget;
      break;
    }
    const auto residual = residual_map(field, estimate, sketch.weight);
    if (*std::max_element(residual.begin(), residual.end()) < config.residual_tolerance) {
      trace.termination = Termination::tolerance;
      break;
    }
    auto candidates = local_maxima(residual, w, h);
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return residual[a] > residual[b];
    });
    const std::size_t room = std::min<std::size_t>(config.points_per_iteration,
                                                   config.budget - selected.size());
    std::vector<PixelCoord> added;
    auto admissible = [&](PixelCoord p) {
      if (taken.count(p)) return false;
      auto far = [&](PixelCoord q) {
        const long dx = p.x - q.x, dy = p.y - q.y;
        return dx * dx + dy * dy > radius2;
      };
      return std::all_of(selected.begin(), selected.end(), far) &&
             std::all_of(added.begin(), added.end(), far);
    };
    for (std::size_t idx : candidates) {
      if (added.size() >= room) break;
      if (!eligible[idx]) continue;
      const PixelCoord p{static_cast<int>(idx % w), static_cast<int>(idx / w)};
      if (admissible(p)) added.push_back(p);
    }
    if (added.empty()) {
      trace.termination = Termination::no_local_maxima;
      break;
    }
    for (const auto& p : added) {
      selected.push_back(p);
      taken.insert(p);
    }
    estimate = estimate_for(selected);
    trace.iterations.push_back({added, rbf::reconstruction_error(field, estimate, sketch.weight)});
  }
  trace.final_size = selected.size();
  return {TrajectorySet::sample(field, selected), sigma, std::move(trace)};
}

}  // namespace advc::sampler
