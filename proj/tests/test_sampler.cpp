#include <doctest.h>

#include <functional>
#include <set>

#include "advc/rbf.hpp"
#include "advc/sampler.hpp"
#include "support.hpp"

using namespace advc;
using namespace advc::sampler;

namespace {

Frame gray_frame(int w, int h, const std::function<int(int, int)>& value) {
  std::vector<std::uint8_t> s(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) s[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(value(x, y));
  }
  return Frame(w, h, 1, std::move(s));
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("constant image has floor weights") {
  const auto s = sketch_weights(Frame::filled(10, 10, 3, 77));
  for (double v : s.weight) CHECK(v == kSketchFloor);
}

TEST_CASE("step edge peaks on the edge columns") {
  const auto s = sketch_weights(gray_frame(16, 8, [](int x, int) { return x < 8 ? 0 : 200; }));
  for (int y = 0; y < 8; ++y) {
    CHECK(s.at(7, y) == 1.0);
    CHECK(s.at(8, y) == 1.0);
    CHECK(s.at(2, y) == kSketchFloor);
    CHECK(s.at(13, y) == kSketchFloor);
  }
}

TEST_CASE("sketch matches a direct Sobel stencil") {
  const Frame f = test::random_frame(8, 8, 1, 21);
  const auto s = sketch_weights(f);
  auto px = [&](int x, int y) { return double(f.at(std::clamp(x, 0, 7), std::clamp(y, 0, 7))); };
  std::vector<double> mag(64);
  double peak = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double gx = 0, gy = 0;
      const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
      for (int j = -1; j <= 1; ++j) {
        for (int i = -1; i <= 1; ++i) {
          gx += kx[j + 1][i + 1] * px(x + i, y + j);
          gy += kx[i + 1][j + 1] * px(x + i, y + j);
        }
      }
      mag[y * 8 + x] = std::hypot(gx, gy);
      peak = std::max(peak, mag[y * 8 + x]);
    }
  }
  for (int i = 0; i < 64; ++i) CHECK(std::abs(s.weight[i] - std::max(0.01, mag[i] / peak)) < 1e-6);
}

TEST_CASE("grid initialization") {
  const auto flat = sketch_weights(Frame::filled(16, 16, 1, 5));
  const auto tl = init_grid(flat, {2, 2});
  CHECK(tl == std::vector<PixelCoord>{{0, 0}, {8, 0}, {0, 8}, {8, 8}});

  const std::set<std::pair<int, int>> bright{{3, 5}, {12, 1}, {6, 14}, {9, 9}};
  const auto s = sketch_weights(gray_frame(16, 16, [&](int x, int y) { return bright.count({x, y}) ? 255 : 0; }));
  // The Sobel response peaks on the neighbors of a bright pixel, so check
  // with a sketch built directly instead.
  SketchMap direct{16, 16, std::vector<double>(256, kSketchFloor)};
  for (auto [x, y] : bright) direct.weight[y * 16 + x] = 1.0;
  CHECK(init_grid(direct, {2, 2}) == std::vector<PixelCoord>{{3, 5}, {12, 1}, {6, 14}, {9, 9}});
  const auto quad = init_grid(s, {2, 2});
  REQUIRE(quad.size() == 4);
  CHECK(quad[0].x < 8);
  CHECK(quad[0].y < 8);
  CHECK(quad[1].x >= 8);
  CHECK(quad[1].y < 8);
  CHECK(quad[2].x < 8);
  CHECK(quad[2].y >= 8);
  CHECK(quad[3].x >= 8);
  CHECK(quad[3].y >= 8);
  CHECK_THROWS_AS(init_grid(flat, {17, 1}), Error);
}

TEST_CASE("default grid follows the aspect ratio within half the budget") {
  for (int b : {2, 10, 40, 80, 160, 300, 500}) {
    for (auto [w, h] : std::vector<std::pair<int, int>>{{64, 64}, {128, 64}, {64, 96}}) {
      const auto g = default_grid(w, h, b);
      CHECK(g.rows * g.cols <= std::max(1, b / 2));
      CHECK(g.rows >= 1);
      CHECK(g.cols >= 1);
    }
  }
  CHECK(default_grid(64, 64, 300) == GridCells{12, 12});
  CHECK(default_grid(128, 64, 80) == GridCells{4, 10});
}

TEST_CASE("residual map examples") {
  const auto flat = test::uniform_field(8, 8, {{0, 0}, {2, 2}});
  const rbf::RbfModel m(TrajectorySet::sample(flat, std::vector<PixelCoord>{{2, 2}}), 4.0);
  SketchMap sk{8, 8, std::vector<double>(64, kSketchFloor)};
  for (double r : residual_map(flat, m, sk)) CHECK(r == 0.0);

  std::vector<Displacement> d(128);
  d[64 + 9] = {1, 0};
  const MotionField f(8, 8, 2, d);
  const auto r = residual_map(f, MotionField::zeros(8, 8, 2), sk.weight);
  CHECK(r[9] == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(r[10] == 0.0);
}

TEST_CASE("residual map times length equals the reconstruction error") {
  const auto f = test::random_field(16, 16, 5, 3.0, 4);
  const auto sk = sketch_weights(test::random_frame(16, 16, 3, 4));
  const rbf::RbfModel m(TrajectorySet::sample(f, std::vector<PixelCoord>{{1, 2}, {9, 9}, {14, 3}}), 3.0);
  const auto r = residual_map(f, m, sk);
  double sum = 0;
  for (double v : r) sum += v * 5;
  CHECK(std::abs(sum - rbf::reconstruction_error(f, m, sk.weight)) < 1e-6);
}

TEST_CASE("local maxima are strict") {
  std::vector<double> map(64, 0.0);
  map[9] = 2.0;
  map[30] = 1.0;
  map[31] = 1.0;  // plateau: neither is strict
  map[63] = 0.5;
  CHECK(local_maxima(map, 8, 8) == std::vector<std::size_t>{9, 63});
}

TEST_CASE("constant field stops at tolerance with the initial grid") {
  const auto field = test::uniform_field(32, 32, {{0, 0}, {1, 0}, {2, 0}});
  const auto sk = sketch_weights(test::textured_frame(32, 32));
  CodecConfig cfg;
  cfg.budget = 40;
  const auto sel = greedy_select(field, sk, cfg);
  CHECK(sel.trace.termination == Termination::tolerance);
  CHECK(sel.trace.iterations.empty());
  CHECK(sel.trajectories.locations() == init_grid(sk, default_grid(32, 32, 40)));
  CHECK(sel.sigma == cfg.sigma_candidates.front());
}

TEST_CASE("budget equal to the grid stops immediately") {
  const auto field = test::two_region_field(32, 32, 4);
  const auto sk = sketch_weights(test::textured_frame(32, 32));
  CodecConfig cfg;
  cfg.grid_cells = GridCells{3, 3};
  cfg.budget = 9;
  const auto sel = greedy_select(field, sk, cfg);
  CHECK(sel.trace.termination == Termination::budget);
  CHECK(sel.trajectories.size() == 9);
  cfg.budget = 8;
  CHECK_THROWS_AS(greedy_select(field, sk, cfg), Error);
}

TEST_CASE("refinement reduces the error on a two-region field") {
  const auto field = test::two_region_field(32, 32, 5);
  const auto sk = sketch_weights(test::textured_frame(32, 32));
  CodecConfig cfg;
  cfg.grid_cells = GridCells{2, 2};
  cfg.budget = 4 + 16;
  const auto sel = greedy_select(field, sk, cfg);
  const auto s0 = init_grid(sk, {2, 2});
  const double r0 = rbf::reconstruction_error(
      field, rbf::RbfModel(TrajectorySet::sample(field, s0), sel.sigma), sk.weight);
  const double r1 = rbf::reconstruction_error(field, rbf::RbfModel(sel.trajectories, sel.sigma), sk.weight);
  CHECK(r1 < r0);
  CHECK(r0 == doctest::Approx(sel.trace.initial_error));
  REQUIRE_FALSE(sel.trace.iterations.empty());
  CHECK(sel.trace.iterations.back().error == doctest::Approx(r1));
  std::size_t size = sel.trace.initial_size;
  for (const auto& it : sel.trace.iterations) {
    CHECK_FALSE(it.added.empty());
    size += it.added.size();
  }
  CHECK(size == sel.trace.final_size);
  CHECK(sel.trace.final_size == sel.trajectories.size());
  CHECK(sel.trajectories.size() <= 20);
}

TEST_CASE("selection is deterministic, distinct, and sampled from the field") {
  const auto field = test::random_field(24, 24, 4, 3.0, 12);
  const auto sk = sketch_weights(test::random_frame(24, 24, 3, 12));
  CodecConfig cfg;
  cfg.budget = 30;
  const auto a = greedy_select(field, sk, cfg);
  const auto b = greedy_select(field, sk, cfg);
  CHECK(a.trajectories == b.trajectories);
  CHECK(a.trajectories.size() <= 30);
  std::set<PixelCoord> seen;
  for (const auto& p : a.trajectories.points()) {
    CHECK(seen.insert(p.q).second);
    CHECK(p.track == field.track(p.q.x, p.q.y));
  }
  CHECK(to_json(a.trace)["final_size"] == a.trajectories.size());
}

TEST_CASE("occluded candidates can be excluded") {
  // Visible only in frame 0 on the right half.
  const auto base = test::two_region_field(32, 32, 4);
  std::vector<std::uint8_t> vis(32 * 32 * 4, 1);
  for (int t = 1; t < 4; ++t) {
    for (int y = 0; y < 32; ++y) {
      for (int x = 16; x < 32; ++x) vis[(t * 32 + y) * 32 + x] = 0;
    }
  }
  const MotionField field(32, 32, 4, std::vector<Displacement>(base.data().begin(), base.data().end()), vis);
  const auto sk = sketch_weights(test::textured_frame(32, 32));
  CodecConfig cfg;
  cfg.grid_cells = GridCells{1, 1};
  cfg.budget = 20;
  cfg.exclude_occluded = true;
  const auto sel = greedy_select(field, sk, cfg);
  for (const auto& it : sel.trace.iterations) {
    for (const auto& p : it.added) CHECK(p.x < 16);
  }
}

}
