#include <doctest.h>

#include <filesystem>

#include "advc/byte_io.hpp"
#include "advc/image.hpp"
#include "advc/motion_io.hpp"
#include "support.hpp"

using namespace advc;
using namespace advc::motion_io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("advc_mio_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::io;
}

std::vector<std::uint8_t> trkf_bytes(const char* magic, std::uint16_t version, std::uint32_t T,
                                     std::uint32_t H, std::uint32_t W, std::vector<float> values) {
  ByteWriter w;
  w.tag(magic);
  w.u16(version);
  w.u16(0);
  w.u32(T);
  w.u32(H);
  w.u32(W);
  for (float v : values) w.f32(v);
  return w.take();
}

}  // namespace

TEST_SUITE("motion_io") {

TEST_CASE("zero TRKF file loads as a zero field") {
  const auto bytes = trkf_bytes("TRKF", 1, 3, 2, 2, std::vector<float>(24, 0.0f));
  const auto f = decode_tracking_field(bytes);
  CHECK(f.length() == 3);
  CHECK(f.height() == 2);
  CHECK(f.width() == 2);
  CHECK(f.data().size() == 12);
  for (const auto& d : f.data()) CHECK(d == Displacement{});
  CHECK_FALSE(f.has_visibility());
}

TEST_CASE("TRKF errors are distinct") {
  CHECK(kind_of([] { decode_tracking_field(trkf_bytes("XXXX", 1, 1, 1, 1, {0, 0})); }) ==
        ErrorKind::bad_magic);
  CHECK(kind_of([] { decode_tracking_field(trkf_bytes("TRKF", 2, 1, 1, 1, {0, 0})); }) ==
        ErrorKind::version_mismatch);
  CHECK(kind_of([] { decode_tracking_field(trkf_bytes("TRKF", 1, 2, 1, 1, {0, 0, 1})); }) ==
        ErrorKind::truncated);
  CHECK(kind_of([] {
          decode_tracking_field(trkf_bytes("TRKF", 1, 2, 1, 1, {0, 0, std::nanf(""), 0}));
        }) == ErrorKind::non_finite);
}

TEST_CASE("TRKF first frame is forced to zero") {
  const auto f = decode_tracking_field(trkf_bytes("TRKF", 1, 2, 1, 1, {0.25f, -3.0f, 1.5f, 2.0f}));
  CHECK(f.at(0, 0, 0) == Displacement{});
  CHECK(f.at(1, 0, 0) == Displacement{1.5, 2.0});
}

TEST_CASE("TRKF roundtrip is bit exact") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // float32 storage: round the random field to float first.
    const auto raw = test::random_field(7, 5, 4, 10.0, seed, seed % 2 == 0);
    std::vector<Displacement> data(raw.data().begin(), raw.data().end());
    for (auto& d : data) d = {static_cast<float>(d.dx), static_cast<float>(d.dy)};
    const MotionField f(7, 5, 4, data, std::vector<std::uint8_t>(raw.visibility().begin(), raw.visibility().end()));
    const auto bytes = encode_tracking_field(f);
    const auto g = decode_tracking_field(bytes);
    CHECK(g == f);
    CHECK(encode_tracking_field(g) == bytes);
  }
}

TEST_CASE("TRKF save, load, save gives identical files") {
  const auto dir = scratch("trkf");
  const auto f = decode_tracking_field(encode_tracking_field(test::random_field(9, 8, 3, 4.0, 5, true)));
  save_tracking_field(f, dir / "a.trkf");
  const auto g = load_tracking_field(dir / "a.trkf");
  save_tracking_field(g, dir / "b.trkf");
  CHECK(read_file(dir / "a.trkf") == read_file(dir / "b.trkf"));
  const auto bytes = read_file(dir / "a.trkf");
  CHECK((bytes[6] & 1) == 1);  // visibility flag
  const auto zeros = encode_tracking_field(MotionField::zeros(3, 2, 2));
  CHECK(zeros.size() == 4 + 2 + 2 + 12 + 3 * 2 * 2 * 2 * 4);
  CHECK(std::all_of(zeros.begin() + 20, zeros.end(), [](std::uint8_t b) { return b == 0; }));
}

TEST_CASE("frame sequences roundtrip through PPM") {
  const auto dir = scratch("frames");
  std::vector<Frame> frames{test::random_frame(8, 8, 3, 1), test::random_frame(8, 8, 3, 2)};
  save_frames(frames, dir, 24.0);
  CHECK(fs::exists(dir / "000000.ppm"));
  CHECK(fs::exists(dir / "000001.ppm"));
  CHECK(fs::exists(dir / "index.json"));
  const auto seq = load_frames(dir);
  CHECK(seq.fps == 24.0);
  CHECK(seq.frames == frames);
  const Frame gray = test::random_frame(9, 8, 1, 3);
  CHECK(decode_ppm(encode_ppm(gray)) == gray);
  const std::string bad = "P6\n4 4\n255\n";
  CHECK_THROWS_AS(decode_ppm(std::vector<std::uint8_t>(bad.begin(), bad.end())), Error);
}

TEST_CASE("static synthetic scene") {
  SyntheticSceneSpec spec;
  spec.length = 5;
  const auto v = generate_synthetic(spec);
  REQUIRE(v.frames.size() == 5);
  for (const auto& d : v.field.data()) CHECK(d == Displacement{});
  for (const auto& f : v.frames) CHECK(f == v.frames[0]);
}

TEST_CASE("translating synthetic scene has the closed-form field") {
  SyntheticSceneSpec spec;
  spec.length = 4;
  spec.layers = {SceneLayer{WholeFrame{}, TranslationMotion{2.0, 0.0}}};
  const auto v = generate_synthetic(spec);
  for (int t = 0; t < 4; ++t) {
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) CHECK(v.field.at(t, x, y) == Displacement{2.0 * t, 0.0});
    }
  }
}

TEST_CASE("two half-plane layers give a piecewise field matching the masks") {
  SyntheticSceneSpec spec;
  spec.length = 5;
  spec.layers = {SceneLayer{HalfPlaneRegion{1.0, 0.0, 32.0}, TranslationMotion{1.0, 0.0}},
                 SceneLayer{WholeFrame{}, TranslationMotion{-1.0, 0.0}}};
  const auto v = generate_synthetic(spec);
  for (int t = 0; t < 5; ++t) {
    for (int y = 0; y < spec.height; y += 3) {
      for (int x = 0; x < spec.width; ++x) {
        const double vx = x >= 32 ? 1.0 : -1.0;
        CHECK(v.field.at(t, x, y) == Displacement{vx * t, 0.0});
      }
    }
  }
}

TEST_CASE("noise-free fields reproduce every frame on occupied pixels") {
  SyntheticSceneSpec spec;
  spec.length = 6;
  spec.seed = 11;
  spec.layers = {SceneLayer{RectRegion{10, 12, 30, 40}, TranslationMotion{1.5, -0.5}},
                 SceneLayer{HalfPlaneRegion{0.0, 1.0, 40.0}, AffineMotion{{1.01, 0.0, 0.3, 0.0, 0.99, 0.2}}},
                 SceneLayer{WholeFrame{}, TranslationMotion{-1.0, 0.5}}};
  const auto v = generate_synthetic(spec);
  for (int t = 1; t < spec.length; ++t) {
    const auto splat = forward_splat(v.frames[0], v.field.slice(t));
    long covered = 0;
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        if (!splat.occupied(x, y)) continue;
        ++covered;
        for (int c = 0; c < 3; ++c) {
          CHECK(std::lround(splat.sample(x, y, c)) == v.frames[t].at(x, y, c));
        }
      }
    }
    CHECK(covered > spec.width * spec.height / 2);
  }
}

TEST_CASE("synthetic generation is deterministic and seed dependent") {
  SyntheticSceneSpec spec;
  spec.length = 4;
  spec.noise_sigma = 0.3;
  spec.seed = 42;
  spec.layers = {SceneLayer{WholeFrame{}, TranslationMotion{1.0, 1.0}}};
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(a.frames == b.frames);
  CHECK(encode_tracking_field(a.field) == encode_tracking_field(b.field));
  spec.seed = 43;
  const auto c = generate_synthetic(spec);
  CHECK_FALSE(c.frames == a.frames);
  // Noise moves the field away from the exact motion.
  SyntheticTracker tracker(spec);
  CHECK_FALSE(tracker.track(0, 4) == tracker.exact_track(0, 4));
}

TEST_CASE("scene cut replaces content and marks the field non-visible") {
  SyntheticSceneSpec spec;
  spec.length = 8;
  spec.cut_frame = 4;
  spec.seed = 3;
  const auto v = generate_synthetic(spec);
  CHECK(v.frames[3] == v.frames[0]);
  CHECK_FALSE(v.frames[4] == v.frames[3]);
  CHECK(v.frames[5] == v.frames[4]);
  for (int t = 0; t < 4; ++t) CHECK(v.field.visible(t, 10, 10));
  for (int t = 4; t < 8; ++t) CHECK_FALSE(v.field.visible(t, 10, 10));
  spec.cut_frame = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.cut_frame = 8;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("degenerate affine motion is rejected") {
  SyntheticSceneSpec spec;
  spec.layers = {SceneLayer{WholeFrame{}, AffineMotion{{0.0, 0.0, 0.0, 0.0, 0.0, 0.0}}}};
  CHECK_THROWS_AS(generate_synthetic(spec), Error);
}

TEST_CASE("re-anchoring a translation field keeps the velocity") {
  const auto f = test::uniform_field(16, 16, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});
  ReanchoringTracker tracker(f);
  const auto g = tracker.track(2, 3);
  for (int x = 0; x < 16; ++x) {
    CHECK(g.at(1, x, 5) == Displacement{1, 0});
    CHECK(g.at(2, x, 5) == Displacement{2, 0});
  }
  CHECK_THROWS_AS(tracker.track(3, 3), Error);
}

TEST_CASE("directory tracker reads per-start files") {
  const auto dir = scratch("fielddir");
  const auto f = test::uniform_field(8, 8, {{0, 0}, {1, 0}, {2, 0}});
  save_tracking_field(f, dir / "000004.trkf");
  FieldDirectoryTracker tracker(dir);
  CHECK(tracker.track(4, 2) == f.head(2));
  CHECK_THROWS_AS(tracker.track(4, 4), Error);
  CHECK_THROWS_AS(tracker.track(5, 2), Error);
}

}
