#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "advc/core.hpp"
#include "advc/rbf.hpp"

namespace advc::sampler {

inline constexpr double kSketchFloor = 0.01;

/// Per-pixel importance from edge strength of a segment's first frame,
/// normalized to [kSketchFloor, 1].
struct SketchMap {
  int width = 0;
  int height = 0;
  std::vector<double> weight;

  double at(int x, int y) const { return weight[static_cast<std::size_t>(y) * width + x]; }
};

/// Sobel gradient magnitude of the luma plane (edge-replicated borders),
/// divided by its maximum and floored at kSketchFloor.
SketchMap sketch_weights(const Frame& frame);

/// Largest rows x cols with rows * cols <= budget / 2 whose cells roughly
/// follow the frame aspect ratio.
GridCells default_grid(int width, int height, int budget);

/// Highest-weight pixel of each grid cell (first in row-major order on
/// ties), cells in row-major order.
std::vector<PixelCoord> init_grid(const SketchMap& sketch, GridCells cells);

/// r(p) = (1/T) * sum_t w(p) * |M_t(p) - Mhat_t(p)|^2.
std::vector<double> residual_map(const MotionField& field, const MotionField& estimate,
                                 std::span<const double> weights);
std::vector<double> residual_map(const MotionField& field, const rbf::RbfModel& model,
                                 const SketchMap& sketch);

/// Strict local maxima of a map over the 8-neighborhood, as row-major indices.
std::vector<std::size_t> local_maxima(std::span<const double> map, int width, int height);

enum class Termination { budget, tolerance, no_local_maxima };
const char* to_string(Termination t) noexcept;

struct SelectionIteration {
  std::vector<PixelCoord> added;
  double error = 0.0;  // weighted reconstruction error after the additions
};

struct SelectionTrace {
  GridCells grid;
  std::vector<double> sigma_candidates;
  std::vector<double> bandwidth_errors;
  double initial_error = 0.0;
  std::vector<SelectionIteration> iterations;
  std::size_t initial_size = 0;
  std::size_t final_size = 0;
  Termination termination = Termination::budget;
};

nlohmann::json to_json(const SelectionTrace& trace);

struct Selection {
  TrajectorySet trajectories;
  double sigma = 0.0;
  SelectionTrace trace;
};

/// Grid initialization, bandwidth selection on the initial set, then
/// residual-driven refinement until the budget is spent, the residual drops
/// below tolerance everywhere, or no admissible local maximum remains.
/// Track values are sampled from `field` at the chosen locations.
Selection greedy_select(const MotionField& field, const SketchMap& sketch,
                        const CodecConfig& config);

}  // namespace advc::sampler
