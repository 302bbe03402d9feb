#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "advc/core.hpp"

namespace advc::motion_io {

// ---------------------------------------------------------------------------
// TRKF tracking-field files
//
//   "TRKF" | version u16 = 1 | flags u16 (bit0: visibility) | T u32 | H u32 |
//   W u32 | T*H*W*2 float32 (t, y, x, [dx, dy]) | [T*H*W visibility bytes]
//
// Little-endian throughout.

inline constexpr std::uint16_t kTrkfVersion = 1;

std::vector<std::uint8_t> encode_tracking_field(const MotionField& field);
/// The first frame is forced to zero displacement.
MotionField decode_tracking_field(std::span<const std::uint8_t> bytes);

MotionField load_tracking_field(const std::filesystem::path& path);
void save_tracking_field(const MotionField& field, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Frame sequences: %06d.ppm (P6, or P5 for gray) plus index.json.

struct FrameSequence {
  std::vector<Frame> frames;
  double fps = 30.0;
};

std::vector<std::uint8_t> encode_ppm(const Frame& frame);
Frame decode_ppm(std::span<const std::uint8_t> bytes);

FrameSequence load_frames(const std::filesystem::path& dir);
void save_frames(std::span<const Frame> frames, const std::filesystem::path& dir,
                 double fps = 30.0);

// ---------------------------------------------------------------------------
// Synthetic scenes with analytically known motion.

struct WholeFrame {};
/// Half-open rectangle [x0, x1) x [y0, y1).
struct RectRegion {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
/// Points with nx*x + ny*y >= offset.
struct HalfPlaneRegion {
  double nx = 1.0, ny = 0.0, offset = 0.0;
};
using Region = std::variant<WholeFrame, RectRegion, HalfPlaneRegion>;

struct StaticMotion {};
/// Constant velocity in px/frame.
struct TranslationMotion {
  double vx = 0.0, vy = 0.0;
};
/// Per-frame map p' = [a b; c d] p + [tx; ty], stored as {a, b, tx, c, d, ty}.
struct AffineMotion {
  std::array<double, 6> m{1, 0, 0, 0, 1, 0};
};
using MotionModel = std::variant<StaticMotion, TranslationMotion, AffineMotion>;

enum class Texture { textured, flat };

struct SceneLayer {
  Region region = WholeFrame{};
  MotionModel motion = StaticMotion{};
  Texture texture = Texture::textured;
};

/// Layers are ordered front to back; the last layer is the background and
/// covers the frame regardless of its region. `cut_frame` is the 0-based index
/// of the first frame showing replaced content.
struct SyntheticSceneSpec {
  int width = 64;
  int height = 64;
  int length = 8;
  int channels = 3;
  double fps = 30.0;
  std::vector<SceneLayer> layers{SceneLayer{}};
  std::optional<int> cut_frame;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticVideo {
  std::vector<Frame> frames;
  MotionField field;
};

/// Ground-truth tracking for a synthetic scene from any start frame. Fields
/// carry a visibility plane: targets leaving the frame and frames past a cut
/// that the segment straddles are marked non-visible.
class SyntheticTracker final : public TrackingProvider {
 public:
  explicit SyntheticTracker(SyntheticSceneSpec spec);

  MotionField track(int start, int horizon) override;
  /// Noise-free variant.
  MotionField exact_track(int start, int horizon) const;

  const SyntheticSceneSpec& spec() const noexcept { return spec_; }
  /// Rendered frames; frame t is the start-of-epoch image forward-splatted by
  /// the exact field, with disoccluded pixels drawn from the owning layer.
  std::vector<Frame> render() const;

 private:
  MotionField build(int start, int horizon, bool noisy) const;

  SyntheticSceneSpec spec_;
};

SyntheticVideo generate_synthetic(const SyntheticSceneSpec& spec);

// ---------------------------------------------------------------------------
// Tracking providers over precomputed fields.

/// Directory of %06d.trkf files, one per start frame.
class FieldDirectoryTracker final : public TrackingProvider {
 public:
  explicit FieldDirectoryTracker(std::filesystem::path dir);
  MotionField track(int start, int horizon) override;

 private:
  std::filesystem::path dir_;
};

/// A single field anchored at frame 0, re-anchored to later start frames by
/// forward-mapping each source pixel and differencing its trajectory. Target
/// pixels no source lands on take the trajectory of the nearest one that does.
class ReanchoringTracker final : public TrackingProvider {
 public:
  explicit ReanchoringTracker(MotionField field);
  MotionField track(int start, int horizon) override;

 private:
  MotionField field_;
};

}  // namespace advc::motion_io
