// advc: encode, decode, analyze, render-tracks and sweep from the shell.
//
// Exit codes: 0 success, 1 internal failure, 2 usage error, 3 data error.
// Errors are printed to stderr as one JSON object.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "advc/bitstream.hpp"
#include "advc/byte_io.hpp"
#include "advc/config_io.hpp"
#include "advc/decode.hpp"
#include "advc/encoder.hpp"
#include "advc/gop.hpp"
#include "advc/metrics.hpp"
#include "advc/motion_io.hpp"
#include "advc/sampler.hpp"
#include "advc/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit_error(const char* kind, const std::string& message, std::optional<int> record = {}) {
  json e{{"kind", kind}, {"message", message}};
  if (record) e["record"] = *record;
  std::cerr << json{{"error", e}}.dump() << "\n";
}

// Anything thrown while assembling configuration is the caller's mistake.
template <class Fn>
auto as_usage(Fn&& fn) {
  try {
    return fn();
  } catch (const advc::Error& e) {
    throw UsageError(e.what());
  } catch (const json::exception& e) {
    throw UsageError(e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  advc::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Flags shared by every command that configures the codec.
struct CodecFlags {
  std::string config_file;
  double theta_occ = 0, theta_perc = 0, quant_step = 0;
  int hysteresis = 0, budget = 0, t_max = 0;
  std::vector<double> sigma;
  std::string keyframe_codec;
  std::string hole_fill;
  double blend = 0;
  int half_size = 0;
  CLI::Option *o_occ{}, *o_perc{}, *o_hyst{}, *o_budget{}, *o_quant{}, *o_sigma{}, *o_tmax{},
      *o_codec{}, *o_fill{}, *o_blend{}, *o_half{};

  void add_codec(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
    o_occ = app->add_option("--theta-occ", theta_occ, "occupancy threshold");
    o_perc = app->add_option("--theta-perc", theta_perc, "perceptual threshold");
    o_hyst = app->add_option("--hysteresis", hysteresis, "frames below threshold before a cut");
    o_budget = app->add_option("--budget", budget, "trajectory budget per segment");
    o_quant = app->add_option("--quant-step", quant_step, "displacement quantization step (px)");
    o_sigma = app->add_option("--sigma-candidates", sigma, "RBF bandwidths, comma separated")
                  ->delimiter(',');
    o_tmax = app->add_option("--t-max", t_max, "maximum segment length");
    o_codec = app->add_option("--keyframe-codec", keyframe_codec, "lossless_pred or external_blob");
  }
  void add_reconstruction(CLI::App* app) {
    o_fill = app->add_option("--hole-fill", hole_fill, "nearest or blend_with_end");
    o_blend = app->add_option("--blend", blend, "end-keyframe weighting exponent");
    o_half = app->add_option("--rectangle-half-size", half_size, "track marker half-size (px)");
  }
};

// Effective settings after layering defaults, the config file and flags.
struct Settings {
  advc::CodecConfig codec;
  advc::decode::ReconstructionConfig reconstruction;
  advc::bitstream::KeyframeCodecTag keyframe_codec = advc::bitstream::KeyframeCodecTag::lossless_pred;
  std::optional<double> fps;
  // Paths the config file may supply; flags take precedence.
  std::string frames, tracking, synthetic_spec, truth, out, blob_dir, sidecar;
};

Settings resolve(const CodecFlags& f) {
  return as_usage([&] {
    Settings s;
    if (!f.config_file.empty()) {
      const json doc = advc::load_json(f.config_file);
      advc::StrictObject o(doc, "config");
      advc::apply_codec_config(o, s.codec);
      advc::apply_reconstruction_config(o, s.reconstruction);
      if (auto v = o.get<std::string>("keyframe_codec")) s.keyframe_codec = advc::bitstream::parse_codec_tag(*v);
      if (auto v = o.get<double>("fps")) s.fps = *v;
      o.read("frames", s.frames);
      o.read("tracking", s.tracking);
      o.read("synthetic_spec", s.synthetic_spec);
      o.read("truth", s.truth);
      o.read("out", s.out);
      o.read("blob_dir", s.blob_dir);
      o.read("sidecar", s.sidecar);
      o.finish();
    }
    auto& c = s.codec;
    if (f.o_occ && *f.o_occ) c.theta_occ = f.theta_occ;
    if (f.o_perc && *f.o_perc) c.theta_perc = f.theta_perc;
    if (f.o_hyst && *f.o_hyst) c.hysteresis = f.hysteresis;
    if (f.o_budget && *f.o_budget) c.budget = f.budget;
    if (f.o_quant && *f.o_quant) c.quant_step = f.quant_step;
    if (f.o_sigma && *f.o_sigma) c.sigma_candidates = f.sigma;
    if (f.o_tmax && *f.o_tmax) c.t_max = f.t_max;
    if (f.o_codec && *f.o_codec) s.keyframe_codec = advc::bitstream::parse_codec_tag(f.keyframe_codec);
    if (f.o_fill && *f.o_fill) s.reconstruction.hole_fill = advc::decode::parse_hole_fill(f.hole_fill);
    if (f.o_blend && *f.o_blend) s.reconstruction.blend = f.blend;
    if (f.o_half && *f.o_half) s.reconstruction.rectangle_half_size = f.half_size;
    c.validate();
    s.reconstruction.validate();
    return s;
  });
}

void override_path(std::string& target, const std::string& flag) {
  if (!flag.empty()) target = flag;
}

struct Input {
  std::vector<advc::Frame> frames;
  double fps = 30.0;
  std::unique_ptr<advc::TrackingProvider> tracker;
  std::optional<advc::motion_io::SyntheticSceneSpec> synthetic;
};

std::unique_ptr<advc::TrackingProvider> open_tracking(const fs::path& path) {
  if (fs::is_directory(path)) return std::make_unique<advc::motion_io::FieldDirectoryTracker>(path);
  return std::make_unique<advc::motion_io::ReanchoringTracker>(advc::motion_io::load_tracking_field(path));
}

Input load_input(const Settings& s) {
  if (s.frames.empty() && s.synthetic_spec.empty()) {
    throw UsageError("an input is required: --frames DIR or --synthetic-spec FILE");
  }
  if (!s.frames.empty() && !s.synthetic_spec.empty()) {
    throw UsageError("--frames and --synthetic-spec are mutually exclusive");
  }
  if (s.synthetic_spec.empty() && s.tracking.empty()) {
    throw UsageError("--tracking is required unless the input is synthetic");
  }
  Input in;
  if (!s.synthetic_spec.empty()) {
    in.synthetic = as_usage([&] { return advc::synthetic_spec_from_json(advc::load_json(s.synthetic_spec)); });
    auto tracker = std::make_unique<advc::motion_io::SyntheticTracker>(*in.synthetic);
    in.frames = tracker->render();
    in.fps = in.synthetic->fps;
    in.tracker = std::move(tracker);
  } else {
    auto seq = advc::motion_io::load_frames(s.frames);
    in.frames = std::move(seq.frames);
    in.fps = seq.fps;
  }
  if (!s.tracking.empty()) in.tracker = open_tracking(s.tracking);
  if (s.fps) in.fps = *s.fps;
  return in;
}

std::unique_ptr<advc::bitstream::KeyframeCodec> external_codec(const Settings& s) {
  if (s.keyframe_codec != advc::bitstream::KeyframeCodecTag::external_blob) return nullptr;
  return std::make_unique<advc::bitstream::ExternalBlobCodec>(
      advc::bitstream::ExternalBlobCodec::from_directories(s.blob_dir, s.sidecar));
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  CodecFlags flags;
  std::string frames, tracking, synthetic, out, report, blob_dir;
};

int cmd_encode(const EncodeArgs& a) {
  Settings s = resolve(a.flags);
  override_path(s.frames, a.frames);
  override_path(s.tracking, a.tracking);
  override_path(s.synthetic_spec, a.synthetic);
  override_path(s.out, a.out);
  override_path(s.blob_dir, a.blob_dir);
  if (s.out.empty()) throw UsageError("--out is required");
  if (s.keyframe_codec == advc::bitstream::KeyframeCodecTag::external_blob && s.blob_dir.empty()) {
    throw UsageError("external_blob keyframes need --blob-dir");
  }
  Input in = load_input(s);
  const auto codec = external_codec(s);

  advc::EncodeOptions options;
  options.config = s.codec;
  options.fps = in.fps;
  options.codec = s.keyframe_codec;
  options.keyframe_codec = codec.get();
  const auto encoded = advc::encode_video(in.frames, *in.tracker, options);
  fs::path out(s.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  advc::write_file(out, encoded.bytes);

  std::vector<advc::metrics::SegmentInputs> inputs;
  for (const auto& seg : encoded.segments) {
    inputs.push_back({seg.plan, &seg.field, &seg.reconstruction, seg.r_initial, seg.r_final,
                      seg.transmitted.size(), seg.selection.sigma});
  }
  double decode_seconds = 0.0;
  std::vector<advc::Frame> decoded;
  if (s.keyframe_codec == advc::bitstream::KeyframeCodecTag::lossless_pred) {
    const auto t0 = std::chrono::steady_clock::now();
    decoded = advc::decode::decode_container(encoded.container, s.reconstruction).frames;
    decode_seconds = seconds_since(t0);
  }
  const auto report = advc::metrics::build_report(
      decoded.empty() ? std::span<const advc::Frame>() : std::span<const advc::Frame>(in.frames),
      decoded, inputs, encoded.accounting, encoded.container.header);
  json doc = advc::metrics::to_json(report);
  for (std::size_t k = 0; k < encoded.segments.size(); ++k) {
    doc["segments"][k]["trace"] = advc::sampler::to_json(encoded.segments[k].selection.trace);
  }
  doc["container"] = out.string();
  doc["file_bytes"] = encoded.bytes.size();
  doc["config"] = advc::codec_config_to_json(s.codec);
  doc["keyframe_codec"] = advc::bitstream::to_string(s.keyframe_codec);
  auto timings = advc::to_json(encoded.timings);
  timings["reference_decode_s"] = decode_seconds;
  doc["timings"] = timings;
  const fs::path report_path = a.report.empty() ? fs::path(out.string() + ".report.json") : fs::path(a.report);
  write_text(report_path, doc.dump(2) + "\n");
  if (!encoded.segmentation.plans.empty()) {
    write_text(report_path.string() + ".scores.csv", advc::gop::scores_to_csv(encoded.segmentation));
  }
  std::cout << json{{"container", out.string()},
                    {"bytes", encoded.bytes.size()},
                    {"segments", encoded.segments.size()},
                    {"bpp", report.summary.bpp.total},
                    {"report", report_path.string()},
                    {"timings", timings}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct DecodeArgs {
  CodecFlags flags;
  std::string container, out, truth, tracking, sidecar, report;
};

int cmd_decode(const DecodeArgs& a) {
  Settings s = resolve(a.flags);
  override_path(s.out, a.out);
  override_path(s.truth, a.truth);
  override_path(s.tracking, a.tracking);
  override_path(s.sidecar, a.sidecar);
  if (s.out.empty()) throw UsageError("--out is required");

  const auto t0 = std::chrono::steady_clock::now();
  advc::bitstream::ByteAccounting accounting;
  const auto bytes = advc::read_file(a.container);
  const auto container = advc::bitstream::parse_container(bytes, &accounting);
  s.keyframe_codec = container.header.codec;
  const auto codec = external_codec(s);
  const auto video = advc::decode::decode_container(container, s.reconstruction, codec.get());
  const double decode_seconds = seconds_since(t0);
  advc::motion_io::save_frames(video.frames, s.out, video.fps);

  // Optional ground truth: a frame directory or a synthetic spec.
  std::vector<advc::Frame> truth_frames;
  std::unique_ptr<advc::TrackingProvider> truth_tracker;
  if (!s.truth.empty()) {
    if (fs::is_directory(s.truth)) {
      truth_frames = advc::motion_io::load_frames(s.truth).frames;
    } else {
      const auto spec = as_usage([&] { return advc::synthetic_spec_from_json(advc::load_json(s.truth)); });
      auto tracker = std::make_unique<advc::motion_io::SyntheticTracker>(spec);
      truth_frames = tracker->render();
      truth_tracker = std::move(tracker);
    }
  }
  if (!s.tracking.empty()) truth_tracker = open_tracking(s.tracking);

  std::vector<advc::MotionField> truth_fields;
  for (const auto& seg : video.segments) {
    if (!truth_tracker) break;
    auto* synthetic = dynamic_cast<advc::motion_io::SyntheticTracker*>(truth_tracker.get());
    truth_fields.push_back(synthetic ? synthetic->exact_track(seg.plan.start(), seg.plan.length())
                                     : truth_tracker->track(seg.plan.start(), seg.plan.length()));
  }
  std::vector<advc::metrics::SegmentInputs> inputs;
  for (std::size_t k = 0; k < video.segments.size(); ++k) {
    const auto& seg = video.segments[k];
    inputs.push_back({seg.plan, truth_fields.empty() ? nullptr : &truth_fields[k], &seg.field,
                      std::nullopt, std::nullopt, seg.trajectories.size(),
                      container.segments[k].sigma});
  }
  const auto report = advc::metrics::build_report(
      truth_frames, truth_frames.empty() ? std::span<const advc::Frame>() : std::span<const advc::Frame>(video.frames),
      inputs, accounting, container.header);
  json doc = advc::metrics::to_json(report);
  doc["timings"] = {{"decode_s", decode_seconds}};
  doc["frames_written"] = video.frames.size();
  const fs::path report_path = a.report.empty() ? fs::path(s.out) / "report.json" : fs::path(a.report);
  write_text(report_path, doc.dump(2) + "\n");
  write_text(report_path.string() + ".csv", advc::metrics::to_csv(report));
  std::cout << json{{"frames", video.frames.size()}, {"out", s.out}, {"report", report_path.string()},
                    {"decode_s", decode_seconds}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  CodecFlags flags;
  std::string frames, tracking, synthetic, out, traces;
};

int cmd_analyze(const AnalyzeArgs& a) {
  Settings s = resolve(a.flags);
  override_path(s.frames, a.frames);
  override_path(s.tracking, a.tracking);
  override_path(s.synthetic_spec, a.synthetic);
  override_path(s.out, a.out);
  if (s.out.empty()) throw UsageError("--out is required");
  Input in = load_input(s);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<advc::MotionField> fields;
  const auto seg = advc::gop::segment_video(in.frames, *in.tracker, s.codec,
                                            advc::gop::default_similarity(), &fields);
  const double seg_seconds = seconds_since(t0);
  write_text(s.out, advc::gop::scores_to_csv(seg));
  json summary{{"scores", s.out}, {"segments", seg.plans.size()}, {"segmentation_s", seg_seconds}};
  if (!a.traces.empty()) {
    const auto t1 = std::chrono::steady_clock::now();
    json traces = json::array();
    for (std::size_t k = 0; k < seg.plans.size(); ++k) {
      const auto sketch = advc::sampler::sketch_weights(in.frames[seg.plans[k].start()]);
      const auto sel = advc::sampler::greedy_select(fields[k], sketch, s.codec);
      json t = advc::sampler::to_json(sel.trace);
      t["segment"] = k;
      t["start"] = seg.plans[k].start();
      t["end"] = seg.plans[k].end();
      t["sigma"] = sel.sigma;
      traces.push_back(t);
    }
    write_text(a.traces, json{{"segments", traces}}.dump(2) + "\n");
    summary["traces"] = a.traces;
    summary["selection_s"] = seconds_since(t1);
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

advc::TrajectorySet trajectories_from_json(const json& doc) {
  advc::StrictObject o(doc, "trajectories");
  const int w = o.get<int>("width").value_or(0);
  const int h = o.get<int>("height").value_or(0);
  const int T = o.get<int>("length").value_or(0);
  std::vector<advc::Trajectory> points;
  if (const auto* list = o.find("points")) {
    for (const auto& p : *list) {
      advc::StrictObject po(p, "trajectories.points[]");
      advc::Trajectory tr;
      tr.q = {po.get<int>("x").value_or(0), po.get<int>("y").value_or(0)};
      for (const auto& d : po.get<std::vector<std::array<double, 2>>>("track").value_or(
               std::vector<std::array<double, 2>>{})) {
        tr.track.push_back({d[0], d[1]});
      }
      po.finish();
      points.push_back(std::move(tr));
    }
  }
  o.finish();
  return advc::TrajectorySet(w, h, T, std::move(points));
}

struct RenderArgs {
  CodecFlags flags;
  std::string container, trajectories, out;
};

int cmd_render(const RenderArgs& a) {
  Settings s = resolve(a.flags);
  override_path(s.out, a.out);
  if (s.out.empty()) throw UsageError("--out is required");
  if (a.container.empty() == a.trajectories.empty()) {
    throw UsageError("give exactly one of a container or --trajectories");
  }
  std::vector<advc::Frame> frames;
  double fps = 30.0;
  if (!a.trajectories.empty()) {
    const auto set = as_usage([&] { return trajectories_from_json(advc::load_json(a.trajectories)); });
    frames = advc::decode::render_trajectory_video(set, set.width(), set.height(), s.reconstruction);
  } else {
    const auto container = advc::bitstream::read_container(a.container);
    fps = container.header.fps;
    for (std::size_t k = 0; k < container.segments.size(); ++k) {
      const auto set = advc::bitstream::decode_segment_trajectories(container.segments[k], container.header);
      auto seg = advc::decode::render_trajectory_video(set, container.header.width,
                                                       container.header.height, s.reconstruction);
      for (std::size_t i = k == 0 ? 0 : 1; i < seg.size(); ++i) frames.push_back(std::move(seg[i]));
    }
  }
  advc::motion_io::save_frames(frames, s.out, fps);
  std::cout << json{{"frames", frames.size()}, {"out", s.out}}.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string spec, kind = "both", out;
};

int cmd_sweep(const SweepArgs& a) {
  auto spec = as_usage([&] { return advc::sweep::spec_from_json(advc::load_json(a.spec)); });
  if (!a.out.empty()) spec.output = a.out;
  if (spec.output.empty()) throw UsageError("sweep output directory missing (--out or \"output\")");
  if (a.kind != "threshold" && a.kind != "budget" && a.kind != "both") {
    throw UsageError("--kind must be threshold, budget or both");
  }
  json summary{{"output", spec.output.string()}};
  auto failures = [](const std::vector<advc::sweep::SweepRow>& rows) {
    return std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.error.empty(); });
  };
  if (a.kind != "budget") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = advc::sweep::run_threshold_sweep(spec);
    summary["threshold"] = {{"rows", rows.size()}, {"failed", failures(rows)}, {"seconds", seconds_since(t0)}};
  }
  if (a.kind != "threshold") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = advc::sweep::run_budget_sweep(spec);
    summary["budget"] = {{"rows", rows.size()}, {"failed", failures(rows)}, {"seconds", seconds_since(t0)}};
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-trajectory video codec toolkit"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* c_enc = app.add_subcommand("encode", "encode a video into an ADVC container");
  enc.flags.add_codec(c_enc);
  enc.flags.add_reconstruction(c_enc);
  c_enc->add_option("--frames", enc.frames, "frame directory (%06d.ppm + index.json)");
  c_enc->add_option("--tracking", enc.tracking, "TRKF file or directory of per-start fields");
  c_enc->add_option("--synthetic-spec", enc.synthetic, "synthetic scene JSON");
  c_enc->add_option("--out", enc.out, "container path");
  c_enc->add_option("--report", enc.report, "report path (default <out>.report.json)");
  c_enc->add_option("--blob-dir", enc.blob_dir, "external keyframe blobs (%06d.bin)");

  DecodeArgs dec;
  auto* c_dec = app.add_subcommand("decode", "decode a container to frames");
  dec.flags.add_codec(c_dec);
  dec.flags.add_reconstruction(c_dec);
  c_dec->add_option("container", dec.container, "container path")->required()->check(CLI::ExistingFile);
  c_dec->add_option("--out", dec.out, "output frame directory");
  c_dec->add_option("--truth", dec.truth, "ground truth: frame directory or synthetic spec JSON");
  c_dec->add_option("--tracking", dec.tracking, "ground-truth tracking for EPE");
  c_dec->add_option("--sidecar", dec.sidecar, "decoded external keyframes (%06d.ppm)");
  c_dec->add_option("--report", dec.report, "report path (default <out>/report.json)");

  AnalyzeArgs ana;
  auto* c_ana = app.add_subcommand("analyze", "per-frame keyframe scores");
  ana.flags.add_codec(c_ana);
  c_ana->add_option("--frames", ana.frames, "frame directory");
  c_ana->add_option("--tracking", ana.tracking, "TRKF file or directory");
  c_ana->add_option("--synthetic-spec", ana.synthetic, "synthetic scene JSON");
  c_ana->add_option("--out", ana.out, "score CSV path");
  c_ana->add_option("--traces", ana.traces, "also run selection and write traces JSON");

  RenderArgs ren;
  auto* c_ren = app.add_subcommand("render-tracks", "draw trajectories as a video");
  ren.flags.add_reconstruction(c_ren);
  c_ren->add_option("--config", ren.flags.config_file, "JSON config file")->check(CLI::ExistingFile);
  c_ren->add_option("container", ren.container, "container path");
  c_ren->add_option("--trajectories", ren.trajectories, "trajectory JSON instead of a container");
  c_ren->add_option("--out", ren.out, "output frame directory");

  SweepArgs swp;
  auto* c_swp = app.add_subcommand("sweep", "threshold and budget sweeps");
  c_swp->add_option("spec", swp.spec, "sweep spec JSON")->required()->check(CLI::ExistingFile);
  c_swp->add_option("--kind", swp.kind, "threshold, budget or both");
  c_swp->add_option("--out", swp.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (*c_enc) return cmd_encode(enc);
    if (*c_dec) return cmd_decode(dec);
    if (*c_ana) return cmd_analyze(ana);
    if (*c_ren) return cmd_render(ren);
    if (*c_swp) return cmd_sweep(swp);
  } catch (const UsageError& e) {
    emit_error("usage", e.what());
    return kExitUsage;
  } catch (const advc::Error& e) {
    emit_error(advc::to_string(e.kind()), e.what(), e.record());
    return kExitData;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
