#include "advc/bitstream/trajectory_coding.hpp"

#include <cmath>
#include <string>

namespace advc::bitstream {

namespace {

void check_step(double quant_step) {
  if (!(quant_step > 0.0) || !std::isfinite(quant_step)) {
    throw Error(ErrorKind::invalid_argument, "quant_step must be positive and finite");
  }
}

std::int32_t next_symbol(double value, std::int64_t& level, double quant_step) {
  if (!std::isfinite(value)) throw Error(ErrorKind::non_finite, "non-finite displacement");
  const double target = std::round(value / quant_step);
  const double delta = target - static_cast<double>(level);
  if (std::fabs(delta) > kMaxSymbol) {
    throw Error(ErrorKind::invalid_argument,
                "displacement step of " + std::to_string(delta) + " quanta exceeds 16 bits");
  }
  const auto s = static_cast<std::int32_t>(delta);
  level += s;
  return s;
}

}  // namespace

DeltaSymbolStream quantize_trajectories(const TrajectorySet& set, double quant_step) {
  check_step(quant_step);
  DeltaSymbolStream out;
  out.width = set.width();
  out.height = set.height();
  out.length = set.length();
  out.quant_step = quant_step;
  out.coords = set.locations();
  out.symbols.reserve(set.size() * 2 * (set.length() - 1));
  for (const auto& p : set.points()) {
    std::int64_t kx = 0, ky = 0;
    for (int t = 1; t < set.length(); ++t) {
      out.symbols.push_back(next_symbol(p.track[t].dx, kx, quant_step));
      out.symbols.push_back(next_symbol(p.track[t].dy, ky, quant_step));
    }
  }
  return out;
}

TrajectorySet dequantize_trajectories(const DeltaSymbolStream& stream) {
  check_step(stream.quant_step);
  if (stream.length < 1) throw Error(ErrorKind::malformed, "trajectory length must be positive");
  const std::size_t per_point = 2 * static_cast<std::size_t>(stream.length - 1);
  if (stream.symbols.size() != stream.coords.size() * per_point) {
    throw Error(ErrorKind::malformed, "symbol count does not match points and length");
  }
  std::vector<Trajectory> points;
  points.reserve(stream.coords.size());
  for (std::size_t i = 0; i < stream.coords.size(); ++i) {
    Trajectory tr{stream.coords[i], std::vector<Displacement>(stream.length)};
    std::int64_t kx = 0, ky = 0;
    const std::int32_t* s = stream.symbols.data() + i * per_point;
    for (int t = 1; t < stream.length; ++t) {
      kx += s[2 * (t - 1)];
      ky += s[2 * (t - 1) + 1];
      tr.track[t] = {static_cast<double>(kx) * stream.quant_step,
                     static_cast<double>(ky) * stream.quant_step};
    }
    points.push_back(std::move(tr));
  }
  return TrajectorySet(stream.width, stream.height, stream.length, std::move(points));
}

}  // namespace advc::bitstream
