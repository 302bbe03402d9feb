#include <doctest.h>

#include "advc/rbf.hpp"
#include "support.hpp"

using namespace advc;
using namespace advc::rbf;

namespace {

TrajectorySet anchors_with(int w, int h, std::vector<std::pair<PixelCoord, Displacement>> pts) {
  std::vector<Trajectory> out;
  for (auto& [q, v] : pts) out.push_back({q, {Displacement{}, v}});
  return TrajectorySet(w, h, 2, std::move(out));
}

// Direct evaluation of the normalized Gaussian, in long double.
Displacement oracle(const TrajectorySet& s, double sigma, PixelCoord p, int t) {
  long double num_x = 0, num_y = 0, den = 0;
  for (const auto& a : s.points()) {
    const long double d2 = std::pow(p.x - a.q.x, 2) + std::pow(p.y - a.q.y, 2);
    const long double k = std::exp(-d2 / (2.0L * sigma * sigma));
    num_x += k * a.track[t].dx;
    num_y += k * a.track[t].dy;
    den += k;
  }
  return {static_cast<double>(num_x / den), static_cast<double>(num_y / den)};
}

}  // namespace

TEST_SUITE("rbf") {

TEST_CASE("equal anchor values interpolate to that value") {
  const auto s = anchors_with(16, 16, {{{1, 1}, {2, -1}}, {{9, 3}, {2, -1}}, {{4, 12}, {2, -1}}});
  for (double sigma : {0.5, 2.0, 64.0}) {
    const RbfModel m(s, sigma);
    for (int y = 0; y < 16; y += 5) {
      for (int x = 0; x < 16; x += 5) CHECK(interpolate(m, {x, y}, 1) == Displacement{2, -1});
    }
  }
}

TEST_CASE("a single anchor fills the frame") {
  const RbfModel m(anchors_with(8, 8, {{{3, 3}, {3, 0}}}), 4.0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) CHECK(interpolate(m, {x, y}, 1) == Displacement{3, 0});
  }
}

TEST_CASE("equidistant anchors give the midpoint") {
  const RbfModel m(anchors_with(16, 16, {{{2, 5}, {0, 0}}, {{8, 5}, {4, 0}}}), 3.0);
  const auto v = interpolate(m, {5, 9}, 1);
  CHECK(v.dx == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(v.dy == 0.0);
}

TEST_CASE("tiny bandwidth returns the coincident anchor") {
  const RbfModel m(anchors_with(16, 16, {{{4, 4}, {1.25, -7}}, {{9, 4}, {5, 5}}, {{4, 10}, {-3, 2}}}),
                   0.1);
  const auto v = interpolate(m, {4, 4}, 1);
  CHECK(std::abs(v.dx - 1.25) < 1e-6);
  CHECK(std::abs(v.dy + 7) < 1e-6);
}

TEST_CASE("interpolation matches the direct kernel sum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = test::random_trajectories(16, 16, 4, 7, 5.0, seed);
    for (double sigma : {1.0, 3.0, 10.0}) {
      const RbfModel m(s, sigma);
      for (int t = 0; t < 4; ++t) {
        for (int y = 0; y < 16; y += 3) {
          for (int x = 0; x < 16; x += 3) {
            const auto a = interpolate(m, {x, y}, t);
            const auto b = oracle(s, sigma, {x, y}, t);
            CHECK(std::abs(a.dx - b.dx) < 1e-9);
            CHECK(std::abs(a.dy - b.dy) < 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("dense evaluation equals pointwise evaluation") {
  const auto s = test::random_trajectories(16, 16, 3, 9, 4.0, 17);
  for (std::optional<int> k : {std::optional<int>{}, std::optional<int>{4}}) {
    const RbfModel m(s, 3.0, k);
    const auto f = interpolate_field(m, 16, 16, 3);
    for (int t = 0; t < 3; ++t) {
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) CHECK(f.at(t, x, y) == interpolate(m, {x, y}, t));
      }
    }
    for (const auto& d : f.slice(0)) CHECK(d == Displacement{});
  }
}

TEST_CASE("top_k equal to the anchor count matches exact mode") {
  const auto s = test::random_trajectories(16, 16, 3, 9, 4.0, 2);
  const auto exact = interpolate_field(RbfModel(s, 2.5), 16, 16, 3);
  const auto full = interpolate_field(RbfModel(s, 2.5, 9), 16, 16, 3);
  CHECK(exact == full);
}

TEST_CASE("weights form a partition of unity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = test::random_trajectories(20, 20, 2, 12, 1.0, seed);
    for (std::optional<int> k : {std::optional<int>{}, std::optional<int>{3}}) {
      const RbfModel m(s, 0.5 + seed, k);
      for (int y = 0; y < 20; y += 4) {
        for (int x = 0; x < 20; x += 4) {
          const auto kw = kernel_weights(m, {x, y});
          double sum = 0;
          for (double a : kw.alpha) sum += a;
          CHECK(std::abs(sum - 1.0) < 1e-9);
          if (k) CHECK(kw.alpha.size() == 3);
        }
      }
    }
  }
}

TEST_CASE("outputs stay inside the anchor hull") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = test::random_trajectories(16, 16, 3, 6, 8.0, seed + 100);
    const RbfModel m(s, 1.0 + seed);
    for (int t = 1; t < 3; ++t) {
      double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
      for (const auto& p : s.points()) {
        lo_x = std::min(lo_x, p.track[t].dx), hi_x = std::max(hi_x, p.track[t].dx);
        lo_y = std::min(lo_y, p.track[t].dy), hi_y = std::max(hi_y, p.track[t].dy);
      }
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          const auto v = interpolate(m, {x, y}, t);
          CHECK(v.dx >= lo_x - 1e-12);
          CHECK(v.dx <= hi_x + 1e-12);
          CHECK(v.dy >= lo_y - 1e-12);
          CHECK(v.dy <= hi_y + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("shifting anchors and query together leaves the output unchanged") {
  const auto s = test::random_trajectories(12, 12, 2, 5, 3.0, 8);
  std::vector<Trajectory> moved = s.points();
  for (auto& p : moved) p.q = {p.q.x + 7, p.q.y + 3};
  const RbfModel a(s, 2.0), b(TrajectorySet(24, 24, 2, moved), 2.0);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) {
      const auto u = interpolate(a, {x, y}, 1);
      const auto v = interpolate(b, {x + 7, y + 3}, 1);
      CHECK(std::abs(u.dx - v.dx) < 1e-12);
      CHECK(std::abs(u.dy - v.dy) < 1e-12);
    }
  }
}

TEST_CASE("reconstruction error examples") {
  const auto field = test::uniform_field(8, 8, {{0, 0}, {1, 2}, {3, -1}});
  const std::vector<double> ones(64, 1.0), zeros(64, 0.0);
  const RbfModel m(TrajectorySet::sample(field, std::vector<PixelCoord>{{1, 1}, {6, 5}}), 2.0);
  CHECK(reconstruction_error(field, m, ones) == 0.0);
  const auto noise = test::random_field(8, 8, 3, 5.0, 1);
  CHECK(reconstruction_error(noise, m, zeros) == 0.0);
  // 1x1 frames are below the minimum frame size, so the example is embedded
  // in a field with a single differing pixel; offset 0 is always zero.
  std::vector<Displacement> d(128);
  d[64] = {1, 0};
  const MotionField one(8, 8, 2, d);
  std::vector<double> w(64, 0.0);
  w[0] = 1.0;
  CHECK(reconstruction_error(one, MotionField::zeros(8, 8, 2), w) == 1.0);
  CHECK_THROWS_AS(reconstruction_error(one, MotionField::zeros(8, 8, 3), w), Error);
}

TEST_CASE("bandwidth selection") {
  const std::vector<double> cands{2, 8, 32};
  const std::vector<double> ones(32 * 32, 1.0);
  const auto flat = test::uniform_field(32, 32, {{0, 0}, {1, 1}});
  const std::vector<PixelCoord> anchors{{4, 4}, {20, 4}, {4, 20}, {20, 20}, {12, 12}};
  CHECK(select_bandwidth(flat, anchors, ones, cands).sigma == 2.0);
  CHECK(select_bandwidth(flat, anchors, ones, std::vector<double>{8.0}).sigma == 8.0);

  const auto two = test::two_region_field(32, 32, 3);
  const auto sel = select_bandwidth(two, anchors, ones, cands);
  REQUIRE(sel.errors.size() == 3);
  std::size_t best = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const RbfModel m(TrajectorySet::sample(two, anchors), cands[i]);
    const double e = reconstruction_error(two, interpolate_field(m, 32, 32, 3), ones);
    CHECK(e == doctest::Approx(sel.errors[i]).epsilon(1e-12));
    if (e < reconstruction_error(two, interpolate_field(RbfModel(TrajectorySet::sample(two, anchors), cands[best]), 32, 32, 3), ones)) best = i;
  }
  CHECK(sel.sigma == cands[best]);
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(RbfModel(TrajectorySet(8, 8, 2, {}), 1.0), Error);
  const auto s = test::random_trajectories(8, 8, 2, 2, 1.0, 1);
  CHECK_THROWS_AS(RbfModel(s, 0.0), Error);
  CHECK_THROWS_AS(RbfModel(s, std::nan("")), Error);
}

}
