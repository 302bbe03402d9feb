#include "advc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "advc/byte_io.hpp"
#include "advc/config_io.hpp"
#include "advc/decode.hpp"
#include "advc/encoder.hpp"
#include "advc/metrics.hpp"
#include "advc/parallel.hpp"

namespace advc::sweep {

void SweepSpec::validate() const {
  if (corpus.empty()) throw Error(ErrorKind::invalid_argument, "sweep corpus is empty");
  if (theta_occ.empty() || theta_perc.empty() || budgets.empty()) {
    throw Error(ErrorKind::invalid_argument, "sweep axes must be non-empty");
  }
  for (const auto& v : corpus) {
    if (v.name.empty()) throw Error(ErrorKind::invalid_argument, "every sweep video needs a name");
    // Names are the first CSV column and part of the resume key.
    if (v.name.find_first_of(",\"\n\r") != std::string::npos) {
      throw Error(ErrorKind::invalid_argument, "sweep video name '" + v.name + "' contains a comma, quote or newline");
    }
    if (std::count_if(corpus.begin(), corpus.end(), [&](const SweepVideo& o) { return o.name == v.name; }) > 1) {
      throw Error(ErrorKind::invalid_argument, "duplicate sweep video name '" + v.name + "'");
    }
    if (!v.synthetic && (v.frames.empty() || v.tracking.empty())) {
      throw Error(ErrorKind::invalid_argument,
                  "sweep video '" + v.name + "' needs a synthetic spec or frames plus tracking");
    }
  }
  // Every axis value must form a valid configuration.
  for (double a : theta_occ) {
    for (double b : theta_perc) {
      for (int budget : budgets) {
        CodecConfig c = base;
        c.theta_occ = a;
        c.theta_perc = b;
        c.budget = budget;
        c.validate();
      }
    }
  }
}

SweepSpec spec_from_json(const nlohmann::json& object) {
  StrictObject o(object, "sweep");
  SweepSpec s;
  o.read("theta_occ", s.theta_occ);
  o.read("theta_perc", s.theta_perc);
  o.read("budgets", s.budgets);
  if (auto out = o.get<std::string>("output")) s.output = *out;
  if (const auto* cfg = o.find("config")) apply_codec_config(*cfg, s.base);
  const auto* corpus = o.find("corpus");
  if (!corpus || !corpus->is_array()) throw Error(ErrorKind::invalid_argument, "sweep.corpus must be a list");
  for (std::size_t i = 0; i < corpus->size(); ++i) {
    const std::string where = "sweep.corpus[" + std::to_string(i) + "]";
    StrictObject vo((*corpus)[i], where);
    SweepVideo v;
    v.name = vo.get<std::string>("name").value_or("video" + std::to_string(i));
    if (const auto* syn = vo.find("synthetic")) v.synthetic = synthetic_spec_from_json(*syn);
    if (auto f = vo.get<std::string>("frames")) v.frames = *f;
    if (auto t = vo.get<std::string>("tracking")) v.tracking = *t;
    vo.finish();
    s.corpus.push_back(std::move(v));
  }
  o.finish();
  s.validate();
  return s;
}

namespace {

struct LoadedVideo {
  std::vector<Frame> frames;
  double fps = 30.0;
  std::function<std::unique_ptr<TrackingProvider>()> tracker;
  std::string error;  // set when the video could not be loaded
};

LoadedVideo load_video(const SweepVideo& v) {
  LoadedVideo out;
  if (v.synthetic) {
    const auto spec = *v.synthetic;
    out.frames = motion_io::SyntheticTracker(spec).render();
    out.fps = spec.fps;
    out.tracker = [spec] { return std::make_unique<motion_io::SyntheticTracker>(spec); };
    return out;
  }
  auto seq = motion_io::load_frames(v.frames);
  out.frames = std::move(seq.frames);
  out.fps = seq.fps;
  const auto tracking = v.tracking;
  if (std::filesystem::is_directory(tracking)) {
    out.tracker = [tracking] { return std::make_unique<motion_io::FieldDirectoryTracker>(tracking); };
  } else {
    auto field = std::make_shared<MotionField>(motion_io::load_tracking_field(tracking));
    out.tracker = [field] { return std::make_unique<motion_io::ReanchoringTracker>(*field); };
  }
  return out;
}

bool is_default_cell(double a, double b) {
  return a == kDefaultThetaOcc && b == kDefaultThetaPerc;
}

// Encodes, decodes and measures one configuration.
void evaluate(const LoadedVideo& video, const CodecConfig& config,
              const std::optional<std::vector<SegmentPlan>>& plans, SweepRow& row) {
  auto tracker = video.tracker();
  EncodeOptions options;
  options.config = config;
  options.fps = video.fps;
  options.plans = plans;
  const auto encoded = encode_video(video.frames, *tracker, options);
  const auto decoded = decode::decode_container(bitstream::parse_container(encoded.bytes));
  std::vector<metrics::SegmentInputs> inputs;
  for (const auto& s : encoded.segments) {
    inputs.push_back({s.plan, &s.field, &s.reconstruction, s.r_initial, s.r_final,
                      s.transmitted.size(), s.selection.sigma});
  }
  const auto report = metrics::build_report(video.frames, decoded.frames, inputs,
                                            encoded.accounting, encoded.container.header);
  row.segments = report.summary.segments;
  row.points = report.summary.points;
  row.bpp = report.summary.bpp.total;
  row.psnr = report.summary.psnr.value_or(0.0);
  row.ssim = report.summary.ssim.value_or(0.0);
  row.epe = report.summary.epe.value_or(0.0);
}

using CellKey = std::tuple<std::string, double, double, int>;

CellKey key_of(const SweepRow& r) { return {r.video, r.theta_occ, r.theta_perc, r.budget}; }

// Completed rows from an earlier run, keyed by their parameters.
std::map<CellKey, SweepRow> previous_rows(const std::filesystem::path& csv) {
  std::map<CellKey, SweepRow> out;
  if (csv.empty() || !std::filesystem::exists(csv)) return out;
  std::ifstream in(csv);
  std::stringstream ss;
  ss << in.rdbuf();
  for (auto& r : rows_from_csv(ss.str())) {
    if (r.error.empty()) out.emplace(key_of(r), std::move(r));
  }
  return out;
}

struct Cell {
  SweepRow row;
  std::size_t video = 0;
  std::size_t group = 0;  // shared segmentation group for budget sweeps
  bool done = false;
};

// Runs pending cells on the worker pool, appending each finished row to the
// CSV as it completes, then rewrites the file in canonical order.
std::vector<SweepRow> run_cells(const SweepSpec& spec, std::vector<Cell>& cells,
                                const std::vector<LoadedVideo>& videos,
                                const std::vector<std::optional<std::vector<SegmentPlan>>>& plans,
                                const std::filesystem::path& csv) {
  std::mutex write_mutex;
  std::ofstream log;
  if (!csv.empty()) {
    std::filesystem::create_directories(csv.parent_path());
    const bool fresh = !std::filesystem::exists(csv);
    log.open(csv, std::ios::app);
    if (!log) throw Error(ErrorKind::io, "cannot write " + csv.string());
    if (fresh) log << rows_to_csv({});
  }
  parallel_for(0, static_cast<int>(cells.size()), [&](int i) {
    auto& cell = cells[i];
    if (cell.done) return;
    try {
      if (!videos[cell.video].error.empty()) throw Error(ErrorKind::io, videos[cell.video].error);
      CodecConfig config = spec.base;
      config.theta_occ = cell.row.theta_occ;
      config.theta_perc = cell.row.theta_perc;
      config.budget = cell.row.budget;
      evaluate(videos[cell.video], config, plans[cell.group], cell.row);
    } catch (const std::exception& e) {
      cell.row.error = e.what();
    }
    if (log.is_open()) {
      const auto text = rows_to_csv({cell.row});
      std::lock_guard lock(write_mutex);
      log << text.substr(text.find('\n') + 1) << std::flush;
    }
  });
  std::vector<SweepRow> rows;
  for (const auto& c : cells) rows.push_back(c.row);
  if (!csv.empty()) {
    log.close();
    const auto text = rows_to_csv(rows);
    write_file(csv, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  return rows;
}

std::vector<LoadedVideo> load_corpus(const SweepSpec& spec) {
  std::vector<LoadedVideo> out;
  for (const auto& v : spec.corpus) {
    try {
      out.push_back(load_video(v));
    } catch (const std::exception& e) {
      out.emplace_back().error = e.what();
    }
  }
  return out;
}

}  // namespace

std::vector<SweepRow> run_threshold_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto csv = spec.output.empty() ? spec.output : spec.output / "threshold_sweep.csv";
  const auto previous = previous_rows(csv);
  const auto videos = load_corpus(spec);
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < spec.corpus.size(); ++v) {
    for (double a : spec.theta_occ) {
      for (double b : spec.theta_perc) {
        Cell c;
        c.row.video = spec.corpus[v].name;
        c.row.theta_occ = a;
        c.row.theta_perc = b;
        c.row.budget = spec.base.budget;
        c.row.is_default = is_default_cell(a, b);
        c.video = v;
        if (auto it = previous.find(key_of(c.row)); it != previous.end()) {
          c.row = it->second;
          c.done = true;
        }
        cells.push_back(std::move(c));
      }
    }
  }
  std::vector<std::optional<std::vector<SegmentPlan>>> no_plans(1);
  auto rows = run_cells(spec, cells, videos, no_plans, csv);
  if (!spec.output.empty()) {
    const auto text = heatmap_data(rows);
    write_file(spec.output / "threshold_heatmap.dat",
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  return rows;
}

std::vector<SweepRow> run_budget_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto csv = spec.output.empty() ? spec.output : spec.output / "budget_sweep.csv";
  const auto previous = previous_rows(csv);
  const auto videos = load_corpus(spec);

  struct Group {
    std::size_t video;
    double a, b;
  };
  std::vector<Group> groups;
  for (std::size_t v = 0; v < spec.corpus.size(); ++v) {
    for (double a : spec.theta_occ) {
      for (double b : spec.theta_perc) groups.push_back({v, a, b});
    }
  }
  // Budget does not influence boundaries, so segment each group once.
  std::vector<std::optional<std::vector<SegmentPlan>>> plans(groups.size());
  std::vector<std::string> group_error(groups.size());
  parallel_for(0, static_cast<int>(groups.size()), [&](int g) {
    try {
      const auto& video = videos[groups[g].video];
      if (!video.error.empty()) throw Error(ErrorKind::io, video.error);
      CodecConfig config = spec.base;
      config.theta_occ = groups[g].a;
      config.theta_perc = groups[g].b;
      auto tracker = videos[groups[g].video].tracker();
      plans[g] = gop::segment_video(videos[groups[g].video].frames, *tracker, config).plans;
    } catch (const std::exception& e) {
      group_error[g] = e.what();
    }
  });

  std::vector<Cell> cells;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int budget : spec.budgets) {
      Cell c;
      c.row.video = spec.corpus[groups[g].video].name;
      c.row.theta_occ = groups[g].a;
      c.row.theta_perc = groups[g].b;
      c.row.budget = budget;
      c.row.is_default = is_default_cell(groups[g].a, groups[g].b);
      c.video = groups[g].video;
      c.group = g;
      if (auto it = previous.find(key_of(c.row)); it != previous.end()) {
        c.row = it->second;
        c.done = true;
      } else if (!group_error[g].empty()) {
        c.row.error = group_error[g];
        c.done = true;
      }
      cells.push_back(std::move(c));
    }
  }
  return run_cells(spec, cells, videos, plans, csv);
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "video,theta_occ,theta_perc,budget,segments,points,bpp,psnr,ssim,epe,is_default,error\n";
  char buf[512];
  for (const auto& r : rows) {
    std::string error = r.error;
    for (char& ch : error) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    out += r.video;
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%d,%d,%zu,%.17g,%.17g,%.17g,%.17g,%d,",
                  r.theta_occ, r.theta_perc, r.budget, r.segments, r.points, r.bpp, r.psnr, r.ssim,
                  r.epe, r.is_default ? 1 : 0);
    out += buf;
    out += error + "\n";
  }
  return out;
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
  std::vector<SweepRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    for (int i = 0; i < 11; ++i) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos) break;
      f.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (f.size() != 11) continue;  // torn line from an interrupted run
    f.push_back(line.substr(pos));
    try {
      SweepRow r;
      r.video = f[0];
      r.theta_occ = std::stod(f[1]);
      r.theta_perc = std::stod(f[2]);
      r.budget = std::stoi(f[3]);
      r.segments = std::stoi(f[4]);
      r.points = std::stoul(f[5]);
      r.bpp = std::stod(f[6]);
      r.psnr = std::stod(f[7]);
      r.ssim = std::stod(f[8]);
      r.epe = std::stod(f[9]);
      r.is_default = f[10] == "1";
      r.error = f[11];
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      // Skip rows that do not parse.
    }
  }
  return rows;
}

std::string heatmap_data(const std::vector<SweepRow>& rows) {
  struct Acc {
    double bpp = 0, psnr = 0, ssim = 0, epe = 0;
    int n = 0;
  };
  std::map<std::pair<double, double>, Acc> cells;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    auto& a = cells[{r.theta_occ, r.theta_perc}];
    a.bpp += r.bpp;
    a.psnr += r.psnr;
    a.ssim += r.ssim;
    a.epe += r.epe;
    ++a.n;
  }
  std::string out = "# theta_occ theta_perc bpp psnr ssim epe\n";
  char buf[256];
  double current = std::nan("");
  for (const auto& [key, a] : cells) {
    if (!std::isnan(current) && key.first != current) out += "\n";
    current = key.first;
    std::snprintf(buf, sizeof buf, "%.6g %.6g %.9g %.9g %.9g %.9g\n", key.first, key.second,
                  a.bpp / a.n, a.psnr / a.n, a.ssim / a.n, a.epe / a.n);
    out += buf;
  }
  return out;
}

}  // namespace advc::sweep
