#include <doctest.h>

#include "advc/bitstream.hpp"
#include "advc/decode.hpp"
#include "advc/encoder.hpp"
#include "advc/metrics.hpp"
#include "support.hpp"

using namespace advc;
using namespace advc::metrics;
using advc::test::VelocityTracker;

namespace {

Frame plus(const Frame& f, int delta) {
  std::vector<std::uint8_t> s(f.samples().begin(), f.samples().end());
  for (auto& v : s) v = static_cast<std::uint8_t>(v + delta);
  return Frame(f.width(), f.height(), f.channels(), s);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("endpoint error") {
  const auto f = test::random_field(8, 8, 3, 4.0, 1);
  CHECK(endpoint_error(f, f) == 0.0);
  std::vector<Displacement> shifted(f.data().begin(), f.data().end());
  for (std::size_t i = 64; i < shifted.size(); ++i) shifted[i] = shifted[i] + Displacement{3, 4};
  // Offset 0 is zero in both fields, so 2 of the 3 frames carry the offset.
  CHECK(endpoint_error(f, MotionField(8, 8, 3, shifted)) == doctest::Approx(5.0 * 2 / 3).epsilon(1e-12));
  const auto g = test::random_field(8, 8, 3, 4.0, 2);
  double sum = 0;
  for (int t = 0; t < 3; ++t) {
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        sum += std::hypot(f.at(t, x, y).dx - g.at(t, x, y).dx, f.at(t, x, y).dy - g.at(t, x, y).dy);
      }
    }
  }
  CHECK(std::abs(endpoint_error(f, g) - sum / 192) < 1e-9);
  CHECK_THROWS_AS(endpoint_error(f, MotionField::zeros(8, 8, 2)), Error);
}

TEST_CASE("PSNR and SSIM") {
  const Frame a = plus(test::textured_frame(32, 32), 0);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(ssim(a, a) == 1.0);
  const Frame flat = Frame::filled(16, 16, 3, 100);
  const Frame brighter = plus(flat, 16);
  CHECK(mean_squared_error(flat, brighter) == 256.0);
  CHECK(psnr(flat, brighter) == doctest::Approx(10 * std::log10(255.0 * 255.0 / 256.0)));
  CHECK(psnr(flat, brighter) == doctest::Approx(24.05).epsilon(1e-3));
  const Frame b = test::random_frame(32, 32, 3, 9);
  CHECK(ssim(a, b) == ssim(b, a));
  CHECK_THROWS_AS(psnr(a, flat), Error);
  CHECK(psnr_from_mse(0.0) == kPsnrCap);
}

TEST_CASE("static video report") {
  const std::vector<Frame> frames(9, test::textured_frame(32, 32));
  VelocityTracker tracker(32, 32, 0, 0);
  EncodeOptions opt;
  opt.config.budget = 20;
  opt.config.t_max = 5;
  const auto enc = encode_video(frames, tracker, opt);
  const auto dec = decode::decode_container(enc.container);
  std::vector<SegmentInputs> inputs;
  for (const auto& s : enc.segments) {
    inputs.push_back({s.plan, &s.field, &s.reconstruction, s.r_initial, s.r_final,
                      s.transmitted.size(), s.selection.sigma});
  }
  const auto report = build_report(frames, dec.frames, inputs, enc.accounting, enc.container.header);
  CHECK(*report.summary.epe == 0.0);
  CHECK(*report.summary.psnr == kPsnrCap);
  CHECK(*report.summary.ssim == 1.0);
  const auto bpp = bitstream::bpp_accounting(enc.container);
  CHECK(report.summary.bpp.total == bpp.total);
  CHECK(report.summary.bpp.total_bits == enc.bytes.size() * 8);
  CHECK(report.summary.frames == 9);
  CHECK(report.segments.size() == enc.segments.size());
  std::uint64_t bytes = 0;
  for (const auto& s : report.segments) bytes += s.bytes.total();
  CHECK(bytes + enc.accounting.header == enc.bytes.size());
  const auto js = to_json(report);
  CHECK(js["summary"]["frames"] == 9);
  const auto csv = to_csv(report);
  CHECK(csv.rfind("segment,start,length,points,sigma,bpp,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(report.segments.size() + 1));
}

TEST_CASE("report without decoded frames omits quality") {
  const std::vector<Frame> frames(4, test::textured_frame(16, 16));
  VelocityTracker tracker(16, 16, 1, 0);
  EncodeOptions opt;
  opt.config.budget = 10;
  const auto enc = encode_video(frames, tracker, opt);
  std::vector<SegmentInputs> inputs;
  for (const auto& s : enc.segments) inputs.push_back({s.plan, nullptr, nullptr, {}, {}, 0, 1.0});
  const auto report = build_report({}, {}, inputs, enc.accounting, enc.container.header);
  CHECK_FALSE(report.summary.psnr.has_value());
  CHECK_FALSE(report.summary.epe.has_value());
  CHECK(report.summary.bpp.total > 0);
  CHECK_THROWS_AS(build_report(frames, std::vector<Frame>(3, frames[0]), inputs, enc.accounting, enc.container.header), Error);
}

}
