#include "advc/encoder.hpp"

#include <chrono>

#include "advc/bitstream/trajectory_coding.hpp"
#include "advc/decode.hpp"

namespace advc {

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

nlohmann::json to_json(const StageTimings& t) {
  return {{"segmentation_s", t.segmentation},
          {"tracking_s", t.tracking},
          {"selection_s", t.selection},
          {"coding_s", t.coding},
          {"total_s", t.total}};
}

EncodeResult encode_video(std::span<const Frame> frames, TrackingProvider& tracker,
                          const EncodeOptions& options) {
  const auto& config = options.config;
  config.validate();
  if (frames.size() < 2) throw Error(ErrorKind::invalid_argument, "encoding needs at least two frames");
  const int count = static_cast<int>(frames.size());
  const int w = frames[0].width();
  const int h = frames[0].height();
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h || f.channels() != frames[0].channels()) {
      throw Error(ErrorKind::dimension_mismatch, "frames differ in shape");
    }
  }
  const bitstream::LosslessPredCodec lossless;
  const bitstream::KeyframeCodec* codec = options.keyframe_codec;
  if (!codec) {
    if (options.codec != bitstream::KeyframeCodecTag::lossless_pred) {
      throw Error(ErrorKind::invalid_argument, "external keyframes need a blob source");
    }
    codec = &lossless;
  }
  if (codec->tag() != options.codec) {
    throw Error(ErrorKind::invalid_argument, "keyframe codec does not match the requested tag");
  }

  EncodeResult result;
  Stopwatch total, clock;
  std::vector<SegmentPlan> plans;
  std::vector<MotionField> fields;
  if (options.plans) {
    plans = *options.plans;
    validate_plan_chain(plans, count);
    for (const auto& p : plans) {
      if (p.length() > config.t_max) {
        throw Error(ErrorKind::invalid_argument, "fixed segment longer than t_max");
      }
    }
    clock.lap();
    for (const auto& p : plans) fields.push_back(tracker.track(p.start(), p.length()));
    result.timings.tracking = clock.lap();
  } else {
    clock.lap();
    const auto& metric = options.metric ? *options.metric : gop::default_similarity();
    result.segmentation = gop::segment_video(frames, tracker, config, metric, &fields);
    plans = result.segmentation.plans;
    result.timings.segmentation = clock.lap();
  }

  auto& container = result.container;
  container.header = bitstream::make_header(w, h, count, options.fps, config, options.codec);
  auto key_blob = [&](int index) {
    return bitstream::KeyframeBlob{codec->tag(), codec->encode(frames[index], index)};
  };

  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto& plan = plans[k];
    MotionField& field = fields[k];
    if (field.width() != w || field.height() != h || field.length() != plan.length()) {
      throw Error(ErrorKind::dimension_mismatch, "tracking field does not match its segment");
    }
    clock.lap();
    const auto sketch = sampler::sketch_weights(frames[plan.start()]);
    auto selection = sampler::greedy_select(field, sketch, config);
    result.timings.selection += clock.lap();

    const auto stream = bitstream::quantize_trajectories(selection.trajectories, config.quant_step);
    std::optional<bitstream::KeyframeBlob> start_key;
    if (k == 0) start_key = key_blob(plan.start());
    container.segments.push_back(bitstream::make_segment_record(
        stream, selection.sigma, std::move(start_key), key_blob(plan.end())));
    auto transmitted = bitstream::dequantize_trajectories(stream);
    auto reconstruction = decode::reconstruct_field(transmitted, selection.sigma, w, h);
    result.timings.coding += clock.lap();

    const auto& trace = selection.trace;
    const double r0 = trace.initial_error;
    const double r1 = trace.iterations.empty() ? r0 : trace.iterations.back().error;
    result.segments.push_back({plan, std::move(field), std::move(selection), std::move(transmitted),
                               std::move(reconstruction), r0, r1});
  }
  clock.lap();
  result.bytes = bitstream::serialize_container(container, &result.accounting);
  result.timings.coding += clock.lap();
  result.timings.total = total.lap();
  return result;
}

}  // namespace advc
