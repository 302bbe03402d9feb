#include "advc/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "advc/image.hpp"
#include "advc/parallel.hpp"

namespace advc::metrics {

namespace {

void require_same_shape(const Frame& a, const Frame& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
    throw Error(ErrorKind::dimension_mismatch, "frames differ in shape");
  }
}

double squared_error_sum(const Frame& a, const Frame& b) {
  require_same_shape(a, b);
  const auto x = a.samples();
  const auto y = b.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    sum += d * d;
  }
  return sum;
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

double endpoint_error(const MotionField& truth, const MotionField& estimate) {
  if (truth.width() != estimate.width() || truth.height() != estimate.height() ||
      truth.length() != estimate.length()) {
    throw Error(ErrorKind::dimension_mismatch, "fields differ in shape");
  }
  const auto a = truth.data();
  const auto b = estimate.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::hypot(a[i].dx - b[i].dx, a[i].dy - b[i].dy);
  return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

double mean_squared_error(const Frame& a, const Frame& b) {
  return squared_error_sum(a, b) / static_cast<double>(a.samples().size());
}

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double psnr(const Frame& a, const Frame& b) { return psnr_from_mse(mean_squared_error(a, b)); }

double ssim(const Frame& a, const Frame& b) {
  require_same_shape(a, b);
  return windowed_ssim(to_gray(a), to_gray(b), a.width(), a.height());
}

Report build_report(std::span<const Frame> original, std::span<const Frame> decoded,
                    std::span<const SegmentInputs> segments,
                    const bitstream::ByteAccounting& accounting,
                    const bitstream::ContainerHeader& header) {
  if (accounting.segments.size() != segments.size()) {
    throw Error(ErrorKind::invalid_argument, "accounting and segment list disagree");
  }
  const bool quality = !original.empty() && !decoded.empty();
  if (quality && (original.size() != decoded.size() ||
                  static_cast<int>(original.size()) != header.total_frames)) {
    throw Error(ErrorKind::dimension_mismatch, "original and decoded videos are not aligned");
  }
  Report report;
  auto& sum = report.summary;
  sum.frames = header.total_frames;
  sum.segments = static_cast<int>(segments.size());
  sum.bpp = bitstream::bpp_breakdown(accounting, header);

  std::vector<double> frame_se(quality ? original.size() : 0);
  std::vector<double> frame_ssim(frame_se.size());
  if (quality) {
    parallel_for(0, static_cast<int>(original.size()), [&](int i) {
      frame_se[i] = squared_error_sum(original[i], decoded[i]);
      frame_ssim[i] = ssim(original[i], decoded[i]);
    });
  }
  const double frame_plane = static_cast<double>(header.width) * header.height;
  double epe_sum = 0.0;
  double epe_count = 0.0;
  bool have_epe = true;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& in = segments[k];
    SegmentReport r;
    r.index = static_cast<int>(k);
    r.start = in.plan.start();
    r.length = in.plan.length();
    r.bytes = accounting.segments[k];
    const int new_frames = k == 0 ? r.length : r.length - 1;
    r.bpp = static_cast<double>(r.bytes.total() * 8) / (new_frames * frame_plane);
    r.points = in.points;
    r.sigma = in.sigma;
    r.r_initial = in.r_initial;
    r.r_final = in.r_final;
    if (in.truth && in.estimate) {
      r.epe = endpoint_error(*in.truth, *in.estimate);
      const double n = static_cast<double>(in.truth->data().size());
      epe_sum += *r.epe * n;
      epe_count += n;
    } else {
      have_epe = false;
    }
    if (quality) {
      double se = 0.0, s = 0.0;
      std::size_t samples = 0;
      for (int t = in.plan.start(); t <= in.plan.end(); ++t) {
        se += frame_se[t];
        s += frame_ssim[t];
        samples += original[t].samples().size();
      }
      r.psnr = psnr_from_mse(se / static_cast<double>(samples));
      r.ssim = s / r.length;
    }
    sum.points += in.points;
    report.segments.push_back(r);
  }
  if (have_epe && epe_count > 0) sum.epe = epe_sum / epe_count;
  if (quality) {
    double se = 0.0, s = 0.0, samples = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
      se += frame_se[i];
      s += frame_ssim[i];
      samples += static_cast<double>(original[i].samples().size());
    }
    sum.psnr = psnr_from_mse(se / samples);
    sum.ssim = s / static_cast<double>(original.size());
  }
  return report;
}

nlohmann::json to_json(const Report& report) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& r : report.segments) {
    segments.push_back({{"segment", r.index},
                        {"start", r.start},
                        {"length", r.length},
                        {"points", r.points},
                        {"sigma", r.sigma},
                        {"bpp", r.bpp},
                        {"bytes",
                         {{"keyframe", r.bytes.keyframe},
                          {"trajectory", r.bytes.trajectory},
                          {"codebook", r.bytes.codebook},
                          {"side_info", r.bytes.side_info}}},
                        {"epe", opt(r.epe)},
                        {"psnr", opt(r.psnr)},
                        {"ssim", opt(r.ssim)},
                        {"r_initial", opt(r.r_initial)},
                        {"r_final", opt(r.r_final)}});
  }
  const auto& s = report.summary;
  return {{"summary",
           {{"frames", s.frames},
            {"segments", s.segments},
            {"points", s.points},
            {"bpp", bitstream::to_json(s.bpp)},
            {"epe", opt(s.epe)},
            {"psnr", opt(s.psnr)},
            {"ssim", opt(s.ssim)}}},
          {"segments", segments}};
}

std::string to_csv(const Report& report) {
  std::string out =
      "segment,start,length,points,sigma,bpp,keyframe_bytes,trajectory_bytes,codebook_bytes,"
      "side_info_bytes,epe,psnr,ssim,r_initial,r_final\n";
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return std::string(buf);
  };
  char buf[256];
  for (const auto& r : report.segments) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%zu,%.9g,%.9g,%llu,%llu,%llu,%llu,", r.index, r.start,
                  r.length, r.points, r.sigma, r.bpp,
                  static_cast<unsigned long long>(r.bytes.keyframe),
                  static_cast<unsigned long long>(r.bytes.trajectory),
                  static_cast<unsigned long long>(r.bytes.codebook),
                  static_cast<unsigned long long>(r.bytes.side_info));
    out += buf;
    out += cell(r.epe) + "," + cell(r.psnr) + "," + cell(r.ssim) + "," + cell(r.r_initial) + "," +
           cell(r.r_final) + "\n";
  }
  return out;
}

}  // namespace advc::metrics
