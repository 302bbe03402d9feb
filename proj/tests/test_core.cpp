#include <doctest.h>

#include "advc/core.hpp"
#include "advc/parallel.hpp"
#include "support.hpp"

using namespace advc;

TEST_SUITE("core") {

TEST_CASE("codec defaults") {
  const CodecConfig c;
  CHECK(c.theta_occ == 0.8);
  CHECK(c.theta_perc == 0.85);
  CHECK(c.budget == 300);
  CHECK(c.hysteresis == 1);
  CHECK(c.t_max == 121);
  CHECK(c.quant_step == 0.5);
  CHECK(c.points_per_iteration == 8);
  CHECK(c.residual_tolerance == 1e-4);
  CHECK(c.sigma_candidates == std::vector<double>{2, 4, 8, 16, 32, 64});
  CHECK_FALSE(c.grid_cells.has_value());
  CHECK_FALSE(c.nms_radius.has_value());
  CHECK_FALSE(c.rbf_top_k.has_value());
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config ranges are enforced") {
  auto bad = [](auto mutate) {
    CodecConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), Error);
  };
  bad([](CodecConfig& c) { c.theta_occ = 0.0; });
  bad([](CodecConfig& c) { c.theta_occ = 1.01; });
  bad([](CodecConfig& c) { c.theta_perc = -0.1; });
  bad([](CodecConfig& c) { c.hysteresis = 0; });
  bad([](CodecConfig& c) { c.budget = 0; });
  bad([](CodecConfig& c) { c.sigma_candidates.clear(); });
  bad([](CodecConfig& c) { c.sigma_candidates = {2.0, -1.0}; });
  bad([](CodecConfig& c) { c.quant_step = 0.0; });
  bad([](CodecConfig& c) { c.t_max = 1; });
  bad([](CodecConfig& c) { c.residual_tolerance = -1.0; });
  bad([](CodecConfig& c) { c.points_per_iteration = 0; });
  bad([](CodecConfig& c) { c.nms_radius = -1; });
  bad([](CodecConfig& c) { c.grid_cells = GridCells{20, 20}; });  // 400 > B = 300
  CodecConfig ok;
  ok.theta_occ = 1.0;
  ok.grid_cells = GridCells{10, 30};
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("frames reject small or inconsistent shapes") {
  CHECK_THROWS_AS(Frame::filled(3, 8, 3, 0), Error);
  CHECK_THROWS_AS(Frame::filled(8, 7, 1, 0), Error);
  CHECK_THROWS_AS(Frame::filled(8, 8, 2, 0), Error);
  CHECK_THROWS_AS(Frame(8, 8, 3, std::vector<std::uint8_t>(10)), Error);
  const Frame f = Frame::filled(8, 9, 3, 7);
  CHECK(f.samples().size() == 8 * 9 * 3);
  CHECK(f.at(7, 8, 2) == 7);
}

TEST_CASE("gray conversion") {
  std::vector<std::uint8_t> s(8 * 8 * 3);
  for (std::size_t i = 0; i < s.size(); i += 3) {
    s[i] = 100;
    s[i + 1] = 50;
    s[i + 2] = 200;
  }
  const auto g = to_gray(Frame(8, 8, 3, s));
  CHECK(g[0] == doctest::Approx(0.299 * 100 + 0.587 * 50 + 0.114 * 200));
}

TEST_CASE("motion field first frame must be zero") {
  std::vector<Displacement> data(2 * 2 * 3);
  CHECK_NOTHROW(MotionField(2, 2, 3, data));
  data[1] = {0.5, 0.0};
  CHECK_THROWS_AS(MotionField(2, 2, 3, data), Error);
  data[1] = {};
  data[7] = {std::nan(""), 0.0};
  try {
    MotionField(2, 2, 3, data);
    FAIL("accepted NaN");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_finite);
  }
  CHECK_THROWS_AS(MotionField(2, 2, 3, std::vector<Displacement>(11)), Error);
  CHECK_THROWS_AS(MotionField(2, 2, 3, std::vector<Displacement>(12), std::vector<std::uint8_t>(5)), Error);
}

TEST_CASE("motion field accessors") {
  const auto f = test::random_field(5, 4, 3, 2.0, 1);
  const auto tr = f.track(3, 2);
  REQUIRE(tr.size() == 3);
  for (int t = 0; t < 3; ++t) CHECK(tr[t] == f.at(t, 3, 2));
  const auto h = f.head(2);
  CHECK(h.length() == 2);
  CHECK(h.at(1, 4, 3) == f.at(1, 4, 3));
  CHECK(f.slice(2).size() == 20);
  CHECK(&f.slice(2)[0] == &f.at(2, 0, 0));
}

TEST_CASE("trajectory sets validate their points") {
  auto track = std::vector<Displacement>{{0, 0}, {1, 0}};
  CHECK_NOTHROW(TrajectorySet(8, 8, 2, {{{1, 1}, track}, {{2, 1}, track}}));
  CHECK_THROWS_AS(TrajectorySet(8, 8, 2, {{{1, 1}, track}, {{1, 1}, track}}), Error);
  CHECK_THROWS_AS(TrajectorySet(8, 8, 2, {{{8, 1}, track}}), Error);
  CHECK_THROWS_AS(TrajectorySet(8, 8, 2, {{{-1, 1}, track}}), Error);
  CHECK_THROWS_AS(TrajectorySet(8, 8, 3, {{{1, 1}, track}}), Error);
  CHECK_THROWS_AS(TrajectorySet(8, 8, 2, {{{1, 1}, {{0.5, 0}, {1, 0}}}}), Error);
}

TEST_CASE("sampling a field keeps exact values") {
  const auto f = test::random_field(6, 6, 4, 3.0, 9);
  const std::vector<PixelCoord> at{{0, 0}, {5, 5}, {2, 3}};
  const auto s = TrajectorySet::sample(f, at);
  REQUIRE(s.size() == 3);
  for (std::size_t i = 0; i < at.size(); ++i) CHECK(s.points()[i].track == f.track(at[i].x, at[i].y));
  CHECK(s.locations() == at);
}

TEST_CASE("segment plans chain with one-frame overlaps") {
  CHECK_THROWS_AS(SegmentPlan(3, 3), Error);
  CHECK(SegmentPlan(3, 4).length() == 2);
  const std::vector<SegmentPlan> good{{0, 19}, {19, 38}, {38, 49}};
  CHECK_NOTHROW(validate_plan_chain(good, 50));
  CHECK_THROWS_AS(validate_plan_chain(good, 51), Error);
  const std::vector<SegmentPlan> gap{{0, 19}, {20, 49}};
  CHECK_THROWS_AS(validate_plan_chain(gap, 50), Error);
  const std::vector<SegmentPlan> late{{1, 49}};
  CHECK_THROWS_AS(validate_plan_chain(late, 50), Error);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(0, 1000, [&](int i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(0, 100, [](int i) {
                    if (i == 57) throw Error(ErrorKind::malformed, "boom");
                  }),
                  Error);
  CHECK(worker_count() >= 1);
}

}
