#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "advc/core.hpp"
#include "advc/motion_io.hpp"

namespace advc::sweep {

/// One corpus entry: a synthetic scene, or a frame directory with a
/// tracking source (TRKF file or directory of per-start fields).
struct SweepVideo {
  std::string name;
  std::optional<motion_io::SyntheticSceneSpec> synthetic;
  std::filesystem::path frames;
  std::filesystem::path tracking;
};

struct SweepSpec {
  std::vector<SweepVideo> corpus;
  std::vector<double> theta_occ{0.8};
  std::vector<double> theta_perc{0.85};
  std::vector<int> budgets{40, 80, 160, 300, 500};
  CodecConfig base;
  // CSVs go here when set; existing rows are reused on rerun.
  std::filesystem::path output;

  void validate() const;
};

SweepSpec spec_from_json(const nlohmann::json& object);

struct SweepRow {
  std::string video;
  double theta_occ = 0.0;
  double theta_perc = 0.0;
  int budget = 0;
  int segments = 0;
  std::size_t points = 0;
  double bpp = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  double epe = 0.0;
  bool is_default = false;  // the 0.8 / 0.85 threshold cell
  std::string error;        // empty on success
};

inline constexpr double kDefaultThetaOcc = 0.8;
inline constexpr double kDefaultThetaPerc = 0.85;

/// One row per (video, theta_occ, theta_perc) at the base budget, in axis
/// order. Failures are recorded in the row and the sweep continues.
std::vector<SweepRow> run_threshold_sweep(const SweepSpec& spec);

/// One row per (video, theta pair, budget). Each (video, theta pair) is
/// segmented once and the plans are reused for every budget.
std::vector<SweepRow> run_budget_sweep(const SweepSpec& spec);

/// Header `video,theta_occ,theta_perc,budget,segments,points,bpp,psnr,ssim,epe,is_default,error`.
std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> rows_from_csv(const std::string& text);

/// Blocks of `theta_occ theta_perc bpp psnr ssim epe` averaged over videos,
/// one blank-line-separated block per theta_occ, for gnuplot `splot ... with pm3d`.
std::string heatmap_data(const std::vector<SweepRow>& rows);

}  // namespace advc::sweep
