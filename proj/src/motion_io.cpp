#include "advc/motion_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include <json.hpp>

#include "advc/byte_io.hpp"
#include "advc/image.hpp"

namespace advc::motion_io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// TRKF

std::vector<std::uint8_t> encode_tracking_field(const MotionField& field) {
  ByteWriter out;
  out.tag("TRKF");
  out.u16(kTrkfVersion);
  out.u16(field.has_visibility() ? 1 : 0);
  out.u32(static_cast<std::uint32_t>(field.length()));
  out.u32(static_cast<std::uint32_t>(field.height()));
  out.u32(static_cast<std::uint32_t>(field.width()));
  for (const auto& d : field.data()) {
    out.f32(static_cast<float>(d.dx));
    out.f32(static_cast<float>(d.dy));
  }
  if (field.has_visibility()) out.raw(field.visibility());
  return out.take();
}

MotionField decode_tracking_field(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  const auto magic = in.raw(4);
  if (!std::equal(magic.begin(), magic.end(), "TRKF")) {
    throw Error(ErrorKind::bad_magic, "not a TRKF file");
  }
  const std::uint16_t version = in.u16();
  if (version != kTrkfVersion) {
    throw Error(ErrorKind::version_mismatch,
                "unsupported TRKF version " + std::to_string(version));
  }
  const std::uint16_t flags = in.u16();
  const std::uint32_t t = in.u32();
  const std::uint32_t h = in.u32();
  const std::uint32_t w = in.u32();
  if (t == 0 || h == 0 || w == 0) throw Error(ErrorKind::malformed, "TRKF has a zero dimension");
  const std::uint64_t count = static_cast<std::uint64_t>(t) * h * w;
  if (count * 8 > in.remaining()) throw Error(ErrorKind::truncated, "TRKF payload truncated");

  const std::uint64_t plane = static_cast<std::uint64_t>(h) * w;
  std::vector<Displacement> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const float dx = in.f32();
    const float dy = in.f32();
    if (!std::isfinite(dx) || !std::isfinite(dy)) {
      throw Error(ErrorKind::non_finite, "TRKF contains a non-finite displacement");
    }
    if (i >= plane) data[i] = {dx, dy};
  }
  std::vector<std::uint8_t> vis;
  if (flags & 1u) {
    const auto raw = in.raw(count);
    vis.assign(raw.begin(), raw.end());
    for (auto v : vis) {
      if (v > 1) throw Error(ErrorKind::malformed, "TRKF visibility values must be 0 or 1");
    }
  }
  return MotionField(static_cast<int>(w), static_cast<int>(h), static_cast<int>(t),
                     std::move(data), std::move(vis));
}

MotionField load_tracking_field(const fs::path& path) {
  return decode_tracking_field(read_file(path));
}

void save_tracking_field(const MotionField& field, const fs::path& path) {
  write_file(path, encode_tracking_field(field));
}

// ---------------------------------------------------------------------------
// PPM

std::vector<std::uint8_t> encode_ppm(const Frame& frame) {
  const std::string header = std::string(frame.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(frame.width()) + " " +
                             std::to_string(frame.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.samples().begin(), frame.samples().end());
  return out;
}

namespace {

class PpmHeaderParser {
 public:
  explicit PpmHeaderParser(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    long v = 0;
    int digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (++digits > 9) throw Error(ErrorKind::malformed, "PPM header number too large");
    }
    if (digits == 0) throw Error(ErrorKind::malformed, "malformed PPM header");
    return static_cast<int>(v);
  }
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }
  std::size_t pos_ = 0;

 private:
  std::span<const std::uint8_t> bytes_;
};

}  // namespace

Frame decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
    throw Error(ErrorKind::malformed, "not a binary PPM/PGM file");
  }
  const int channels = bytes[1] == '6' ? 3 : 1;
  PpmHeaderParser p(bytes.subspan(2));
  const int w = p.next_int();
  const int h = p.next_int();
  const int maxval = p.next_int();
  if (maxval != 255) throw Error(ErrorKind::malformed, "only 8-bit PPM is supported");
  std::size_t pos = 2 + p.pos_;
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorKind::malformed, "malformed PPM header");
  }
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - pos < need) throw Error(ErrorKind::truncated, "PPM pixel data truncated");
  return Frame(w, h, channels,
               std::vector<std::uint8_t>(bytes.begin() + pos, bytes.begin() + pos + need));
}

namespace {

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d.ppm", index);
  return buf;
}

}  // namespace

FrameSequence load_frames(const fs::path& dir) {
  FrameSequence seq;
  int count = 0, w = 0, h = 0;
  try {
    const auto raw = read_file(dir / "index.json");
    const auto index = nlohmann::json::parse(raw.begin(), raw.end());
    count = index.at("frames").get<int>();
    w = index.at("width").get<int>();
    h = index.at("height").get<int>();
    seq.fps = index.value("fps", 30.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::malformed, std::string("bad index.json: ") + e.what());
  }
  for (int i = 0; i < count; ++i) {
    Frame f = decode_ppm(read_file(dir / frame_name(i)));
    if (f.width() != w || f.height() != h ||
        (!seq.frames.empty() && f.channels() != seq.frames.front().channels())) {
      throw Error(ErrorKind::dimension_mismatch,
                  "frame " + std::to_string(i) + " does not match the sequence dimensions");
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

void save_frames(std::span<const Frame> frames, const fs::path& dir, double fps) {
  if (frames.empty()) throw Error(ErrorKind::invalid_argument, "no frames to save");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].width() != frames[0].width() || frames[i].height() != frames[0].height()) {
      throw Error(ErrorKind::dimension_mismatch, "frames differ in size");
    }
    write_file(dir / frame_name(static_cast<int>(i)), encode_ppm(frames[i]));
  }
  const nlohmann::json index = {{"width", frames[0].width()},
                                {"height", frames[0].height()},
                                {"frames", frames.size()},
                                {"fps", fps}};
  const std::string text = index.dump(2) + "\n";
  write_file(dir / "index.json",
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// Synthetic scenes

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Row-major 3x3 with last row fixed to (0, 0, 1).
struct Affine {
  double a = 1, b = 0, tx = 0, c = 0, d = 1, ty = 0;

  Affine then(const Affine& o) const {  // o applied after this
    return {o.a * a + o.b * c, o.a * b + o.b * d, o.a * tx + o.b * ty + o.tx,
            o.c * a + o.d * c, o.c * b + o.d * d, o.c * tx + o.d * ty + o.ty};
  }
  std::pair<double, double> apply(double x, double y) const {
    return {a * x + b * y + tx, c * x + d * y + ty};
  }
  double det() const { return a * d - b * c; }
  Affine inverse() const {
    const double k = 1.0 / det();
    const double ia = d * k, ib = -b * k, ic = -c * k, id = a * k;
    return {ia, ib, -(ia * tx + ib * ty), ic, id, -(ic * tx + id * ty)};
  }
  bool finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(tx) && std::isfinite(c) &&
           std::isfinite(d) && std::isfinite(ty);
  }
};

// Map from epoch time 0 to epoch time n for one layer, and its inverse.
struct LayerMotion {
  std::vector<Affine> forward;
  std::vector<Affine> backward;
};

LayerMotion layer_motion(const MotionModel& model, int steps) {
  Affine step;
  if (const auto* tr = std::get_if<TranslationMotion>(&model)) {
    step.tx = tr->vx;
    step.ty = tr->vy;
  } else if (const auto* af = std::get_if<AffineMotion>(&model)) {
    step = {af->m[0], af->m[1], af->m[2], af->m[3], af->m[4], af->m[5]};
  }
  LayerMotion out;
  out.forward.resize(steps + 1);
  out.backward.resize(steps + 1);
  for (int n = 1; n <= steps; ++n) {
    if (std::holds_alternative<TranslationMotion>(model)) {
      // Closed form keeps integer velocities exact.
      out.forward[n] = {1, 0, step.tx * n, 0, 1, step.ty * n};
    } else {
      out.forward[n] = out.forward[n - 1].then(step);
    }
  }
  for (int n = 0; n <= steps; ++n) {
    if (!out.forward[n].finite() || !std::isfinite(1.0 / out.forward[n].det()) ||
        out.forward[n].det() == 0.0) {
      throw Error(ErrorKind::invalid_argument, "degenerate affine motion");
    }
    if (std::holds_alternative<TranslationMotion>(model)) {
      out.backward[n] = {1, 0, -out.forward[n].tx, 0, 1, -out.forward[n].ty};
    } else {
      out.backward[n] = out.forward[n].inverse();
    }
    if (!out.backward[n].finite()) throw Error(ErrorKind::invalid_argument, "degenerate affine motion");
  }
  return out;
}

bool contains(const Region& region, double x, double y) {
  if (std::holds_alternative<WholeFrame>(region)) return true;
  if (const auto* r = std::get_if<RectRegion>(&region)) {
    return x >= r->x0 && x < r->x1 && y >= r->y0 && y < r->y1;
  }
  const auto& hp = std::get<HalfPlaneRegion>(region);
  return hp.nx * x + hp.ny * y >= hp.offset;
}

struct SceneGeometry {
  std::vector<LayerMotion> motions;

  SceneGeometry(const SyntheticSceneSpec& spec) {
    for (const auto& layer : spec.layers) motions.push_back(layer_motion(layer.motion, spec.length));
  }

  // Frontmost layer whose content occupies (x, y) at epoch time n.
  int owner(const SyntheticSceneSpec& spec, int n, double x, double y) const {
    const int last = static_cast<int>(spec.layers.size()) - 1;
    for (int l = 0; l < last; ++l) {
      const auto [sx, sy] = motions[l].backward[n].apply(x, y);
      if (contains(spec.layers[l].region, sx, sy)) return l;
    }
    return last;
  }
};

std::uint64_t epoch_seed(std::uint64_t seed, int epoch) {
  return epoch == 0 ? seed : hash_combine(seed, 0xc0ffee00ull + static_cast<std::uint64_t>(epoch));
}

std::uint8_t texel(std::uint64_t seed, int layer, Texture kind, long x, long y, int c) {
  const std::uint64_t lh = hash_combine(seed, static_cast<std::uint64_t>(layer) + 1);
  const double base = 60.0 + 136.0 * unit(hash_combine(lh, 100 + c));
  if (kind == Texture::flat) return static_cast<std::uint8_t>(std::lround(base));
  const double fx = 0.02 + 0.06 * unit(hash_combine(lh, 1));
  const double fy = 0.02 + 0.06 * unit(hash_combine(lh, 2));
  const double phase = 2.0 * std::numbers::pi * unit(hash_combine(lh, 10 + c));
  const double wave = 45.0 * std::sin(2.0 * std::numbers::pi * (fx * x + fy * y) + phase);
  const std::uint64_t ph = hash_combine(hash_combine(lh, static_cast<std::uint64_t>(x)),
                                        static_cast<std::uint64_t>(y) * 0x100000001b3ull);
  const double speckle = static_cast<double>(ph % 81) - 40.0;
  return static_cast<std::uint8_t>(std::clamp(std::lround(base + wave + speckle), 0L, 255L));
}

// Gaussian deviates from a fixed 64-bit generator via Box-Muller, so noisy
// fields are reproducible across standard libraries.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

void SyntheticSceneSpec::validate() const {
  if (width < Frame::kMinSide || height < Frame::kMinSide) {
    throw Error(ErrorKind::invalid_argument, "synthetic scene must be at least 8x8");
  }
  if (length < 1) throw Error(ErrorKind::invalid_argument, "synthetic scene length must be >= 1");
  if (channels != 1 && channels != 3) throw Error(ErrorKind::invalid_argument, "channels must be 1 or 3");
  if (layers.empty()) throw Error(ErrorKind::invalid_argument, "scene needs at least one layer");
  if (cut_frame && (*cut_frame < 1 || *cut_frame >= length)) {
    throw Error(ErrorKind::invalid_argument, "cut_frame must lie in [1, length - 1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorKind::invalid_argument, "noise_sigma must be finite and >= 0");
  }
  if (!(fps > 0.0)) throw Error(ErrorKind::invalid_argument, "fps must be positive");
  for (const auto& layer : layers) {
    if (const auto* af = std::get_if<AffineMotion>(&layer.motion)) {
      for (double v : af->m) {
        if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "degenerate affine motion");
      }
    }
  }
  (void)SceneGeometry(*this);
}

SyntheticTracker::SyntheticTracker(SyntheticSceneSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

MotionField SyntheticTracker::track(int start, int horizon) {
  return build(start, horizon, spec_.noise_sigma > 0.0);
}

MotionField SyntheticTracker::exact_track(int start, int horizon) const {
  return build(start, horizon, false);
}

MotionField SyntheticTracker::build(int start, int horizon, bool noisy) const {
  if (start < 0 || horizon < 1 || start + horizon > spec_.length) {
    throw Error(ErrorKind::invalid_argument, "tracking request outside the synthetic video");
  }
  const SceneGeometry geo(spec_);
  const int w = spec_.width;
  const int h = spec_.height;
  const int epoch_start = spec_.cut_frame && start >= *spec_.cut_frame ? *spec_.cut_frame : 0;
  const int n0 = start - epoch_start;
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  std::vector<Displacement> data(plane * horizon);
  std::vector<std::uint8_t> vis(plane * horizon, 1);
  Gaussian noise(hash_combine(spec_.seed, 0x7a11ull + static_cast<std::uint64_t>(start)));

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const int l = geo.owner(spec_, n0, x, y);
      const auto& mo = geo.motions[l];
      // Position at epoch time 0 of the content now at (x, y).
      const auto [sx, sy] = mo.backward[n0].apply(x, y);
      for (int d = 1; d < horizon; ++d) {
        const auto [px, py] = mo.forward[n0 + d].apply(sx, sy);
        const Displacement u{px - x, py - y};
        const std::size_t k = static_cast<std::size_t>(d) * plane + i;
        data[k] = u;
        const double tx = std::round(x + u.dx);
        const double ty = std::round(y + u.dy);
        const bool inside = tx >= 0 && ty >= 0 && tx < w && ty < h;
        const bool past_cut = spec_.cut_frame && start < *spec_.cut_frame &&
                              start + d >= *spec_.cut_frame;
        vis[k] = inside && !past_cut ? 1 : 0;
      }
    }
  }
  if (noisy) {
    for (std::size_t k = plane; k < data.size(); ++k) {
      data[k].dx += spec_.noise_sigma * noise();
      data[k].dy += spec_.noise_sigma * noise();
    }
  }
  return MotionField(w, h, horizon, std::move(data), std::move(vis));
}

std::vector<Frame> SyntheticTracker::render() const {
  const SceneGeometry geo(spec_);
  const int w = spec_.width;
  const int h = spec_.height;
  const int ch = spec_.channels;
  std::vector<Frame> frames;
  frames.reserve(spec_.length);

  std::vector<int> epochs{0};
  if (spec_.cut_frame) epochs.push_back(*spec_.cut_frame);
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    const int first = epochs[e];
    const int last = e + 1 < epochs.size() ? epochs[e + 1] : spec_.length;
    const std::uint64_t seed = epoch_seed(spec_.seed, static_cast<int>(e));

    auto draw = [&](int n, int x, int y, std::uint8_t* px) {
      const int l = geo.owner(spec_, n, x, y);
      const auto [sx, sy] = geo.motions[l].backward[n].apply(x, y);
      const long tx = std::lround(sx);
      const long ty = std::lround(sy);
      for (int c = 0; c < ch; ++c) {
        px[c] = ch == 1 ? texel(seed, l, spec_.layers[l].texture, tx, ty, 1)
                        : texel(seed, l, spec_.layers[l].texture, tx, ty, c);
      }
    };

    std::vector<std::uint8_t> base(static_cast<std::size_t>(w) * h * ch);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) draw(0, x, y, &base[(static_cast<std::size_t>(y) * w + x) * ch]);
    const Frame keyframe(w, h, ch, base);
    frames.push_back(keyframe);

    const MotionField field = exact_track(first, last - first);
    for (int n = 1; n < last - first; ++n) {
      const SplatResult splat = forward_splat(keyframe, field.slice(n));
      std::vector<std::uint8_t> px(base.size());
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          if (splat.occupied(x, y)) {
            for (int c = 0; c < ch; ++c) {
              px[i * ch + c] = static_cast<std::uint8_t>(
                  std::clamp(std::lround(splat.sample(x, y, c)), 0L, 255L));
            }
          } else {
            draw(n, x, y, &px[i * ch]);
          }
        }
      }
      frames.emplace_back(w, h, ch, std::move(px));
    }
  }
  return frames;
}

SyntheticVideo generate_synthetic(const SyntheticSceneSpec& spec) {
  SyntheticTracker tracker(spec);
  return {tracker.render(), tracker.track(0, spec.length)};
}

// ---------------------------------------------------------------------------
// Providers over precomputed fields

FieldDirectoryTracker::FieldDirectoryTracker(fs::path dir) : dir_(std::move(dir)) {}

MotionField FieldDirectoryTracker::track(int start, int horizon) {
  char name[32];
  std::snprintf(name, sizeof name, "%06d.trkf", start);
  MotionField field = load_tracking_field(dir_ / name);
  if (field.length() < horizon) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string("tracking field ") + name + " covers fewer frames than requested");
  }
  return field.head(horizon);
}

ReanchoringTracker::ReanchoringTracker(MotionField field) : field_(std::move(field)) {}

MotionField ReanchoringTracker::track(int start, int horizon) {
  if (start < 0 || horizon < 1 || start + horizon > field_.length()) {
    throw Error(ErrorKind::invalid_argument, "tracking request outside the tracking field");
  }
  if (start == 0) return field_.head(horizon);
  const int w = field_.width();
  const int h = field_.height();
  const std::size_t plane = field_.pixel_count();
  // source[q] = first source pixel (row-major) landing on q at frame `start`.
  std::vector<long> source(plane, -1);
  std::vector<std::uint8_t> hit(plane, 0);
  const auto anchor = field_.slice(start);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double tx = std::round(x + anchor[i].dx);
      const double ty = std::round(y + anchor[i].dy);
      if (tx < 0 || ty < 0 || tx >= w || ty >= h) continue;
      const std::size_t j = static_cast<std::size_t>(ty) * w + static_cast<std::size_t>(tx);
      if (!hit[j]) {
        hit[j] = 1;
        source[j] = static_cast<long>(i);
      }
    }
  }
  const auto nearest = nearest_occupied(hit, w, h);
  std::vector<Displacement> data(plane * horizon);
  std::vector<std::uint8_t> vis;
  if (field_.has_visibility()) vis.assign(plane * horizon, 1);
  for (std::size_t q = 0; q < plane; ++q) {
    if (nearest[q] < 0) continue;  // nothing survives; the field stays zero
    const long p = source[nearest[q]];
    const int px = static_cast<int>(p % w);
    const int py = static_cast<int>(p / w);
    const Displacement base = field_.at(start, px, py);
    for (int d = 1; d < horizon; ++d) {
      data[static_cast<std::size_t>(d) * plane + q] = field_.at(start + d, px, py) - base;
      if (!vis.empty()) {
        vis[static_cast<std::size_t>(d) * plane + q] = field_.visible(start + d, px, py) ? 1 : 0;
      }
    }
  }
  return MotionField(w, h, horizon, std::move(data), std::move(vis));
}

}  // namespace advc::motion_io
