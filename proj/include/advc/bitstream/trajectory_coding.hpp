#pragma once

#include <cstdint>
#include <vector>

#include "advc/core.hpp"

namespace advc::bitstream {

/// Quantized temporal differences of a trajectory set. For each point the
/// stream holds 2 * (length - 1) symbols: dx then dy for offsets 1 .. length-1.
struct DeltaSymbolStream {
  int width = 0;
  int height = 0;
  int length = 0;
  double quant_step = 0.5;
  std::vector<PixelCoord> coords;
  std::vector<std::int32_t> symbols;

  friend bool operator==(const DeltaSymbolStream&, const DeltaSymbolStream&) = default;
};

/// Largest magnitude the escape path can carry.
inline constexpr std::int32_t kMaxSymbol = 32767;

/// Quantize-in-the-loop: the running reconstruction is kept as an integer
/// multiple of quant_step, so the per-frame error never exceeds quant_step / 2.
DeltaSymbolStream quantize_trajectories(const TrajectorySet& set, double quant_step);

TrajectorySet dequantize_trajectories(const DeltaSymbolStream& stream);

}  // namespace advc::bitstream
