#include "advc/config_io.hpp"

#include <fstream>

namespace advc {

StrictObject::StrictObject(const nlohmann::json& object, std::string where)
    : object_(object), where_(std::move(where)) {
  if (!object_.is_object()) throw Error(ErrorKind::invalid_argument, where_ + " must be an object");
}

const nlohmann::json* StrictObject::find(const std::string& key) {
  seen_.insert(key);
  const auto it = object_.find(key);
  return it == object_.end() ? nullptr : &*it;
}

void StrictObject::finish() const {
  for (const auto& item : object_.items()) {
    if (!seen_.count(item.key())) {
      throw Error(ErrorKind::invalid_argument, "unknown key " + where_ + "." + item.key());
    }
  }
}

void apply_codec_config(StrictObject& o, CodecConfig& c) {
  o.read("theta_occ", c.theta_occ);
  o.read("theta_perc", c.theta_perc);
  o.read("hysteresis", c.hysteresis);
  o.read("budget", c.budget);
  o.read("sigma_candidates", c.sigma_candidates);
  o.read("quant_step", c.quant_step);
  o.read("t_max", c.t_max);
  o.read("residual_tolerance", c.residual_tolerance);
  o.read("points_per_iteration", c.points_per_iteration);
  o.read("exclude_occluded", c.exclude_occluded);
  if (const auto* g = o.find("grid_cells"); g && !g->is_null()) {
    if (!g->is_array() || g->size() != 2 || !(*g)[0].is_number_integer() ||
        !(*g)[1].is_number_integer()) {
      throw Error(ErrorKind::invalid_argument, "grid_cells must be [rows, cols]");
    }
    c.grid_cells = GridCells{(*g)[0].get<int>(), (*g)[1].get<int>()};
  }
  if (auto v = o.get<int>("nms_radius")) c.nms_radius = *v;
  if (auto v = o.get<int>("rbf_top_k")) c.rbf_top_k = *v;
}

void apply_codec_config(const nlohmann::json& object, CodecConfig& config) {
  StrictObject o(object, "config");
  apply_codec_config(o, config);
  o.finish();
  config.validate();
}

nlohmann::json codec_config_to_json(const CodecConfig& c) {
  nlohmann::json j{{"theta_occ", c.theta_occ},
                   {"theta_perc", c.theta_perc},
                   {"hysteresis", c.hysteresis},
                   {"budget", c.budget},
                   {"sigma_candidates", c.sigma_candidates},
                   {"quant_step", c.quant_step},
                   {"t_max", c.t_max},
                   {"residual_tolerance", c.residual_tolerance},
                   {"points_per_iteration", c.points_per_iteration},
                   {"exclude_occluded", c.exclude_occluded},
                   {"grid_cells", nullptr},
                   {"nms_radius", nullptr},
                   {"rbf_top_k", nullptr}};
  if (c.grid_cells) j["grid_cells"] = {c.grid_cells->rows, c.grid_cells->cols};
  if (c.nms_radius) j["nms_radius"] = *c.nms_radius;
  if (c.rbf_top_k) j["rbf_top_k"] = *c.rbf_top_k;
  return j;
}

void apply_reconstruction_config(StrictObject& o, decode::ReconstructionConfig& c) {
  if (auto v = o.get<std::string>("hole_fill")) c.hole_fill = decode::parse_hole_fill(*v);
  o.read("blend", c.blend);
  o.read("rectangle_half_size", c.rectangle_half_size);
}

namespace {

motion_io::Region region_from_json(const nlohmann::json& j, const std::string& where) {
  StrictObject o(j, where);
  const auto type = o.get<std::string>("type").value_or("whole");
  motion_io::Region out;
  if (type == "whole") {
    out = motion_io::WholeFrame{};
  } else if (type == "rect") {
    motion_io::RectRegion r;
    o.read("x0", r.x0);
    o.read("y0", r.y0);
    o.read("x1", r.x1);
    o.read("y1", r.y1);
    out = r;
  } else if (type == "half_plane") {
    motion_io::HalfPlaneRegion r;
    o.read("nx", r.nx);
    o.read("ny", r.ny);
    o.read("offset", r.offset);
    out = r;
  } else {
    throw Error(ErrorKind::invalid_argument, where + ".type '" + type + "' is unknown");
  }
  o.finish();
  return out;
}

motion_io::MotionModel motion_from_json(const nlohmann::json& j, const std::string& where) {
  StrictObject o(j, where);
  const auto type = o.get<std::string>("type").value_or("static");
  motion_io::MotionModel out;
  if (type == "static") {
    out = motion_io::StaticMotion{};
  } else if (type == "translation") {
    motion_io::TranslationMotion m;
    o.read("vx", m.vx);
    o.read("vy", m.vy);
    out = m;
  } else if (type == "affine") {
    motion_io::AffineMotion m;
    o.read("m", m.m);
    out = m;
  } else {
    throw Error(ErrorKind::invalid_argument, where + ".type '" + type + "' is unknown");
  }
  o.finish();
  return out;
}

}  // namespace

motion_io::SyntheticSceneSpec synthetic_spec_from_json(const nlohmann::json& object) {
  StrictObject o(object, "synthetic");
  motion_io::SyntheticSceneSpec s;
  o.read("width", s.width);
  o.read("height", s.height);
  o.read("length", s.length);
  o.read("channels", s.channels);
  o.read("fps", s.fps);
  o.read("noise_sigma", s.noise_sigma);
  o.read("seed", s.seed);
  if (auto v = o.get<int>("cut_frame")) s.cut_frame = *v;
  if (const auto* layers = o.find("layers")) {
    if (!layers->is_array()) throw Error(ErrorKind::invalid_argument, "synthetic.layers must be a list");
    s.layers.clear();
    for (std::size_t i = 0; i < layers->size(); ++i) {
      const std::string where = "synthetic.layers[" + std::to_string(i) + "]";
      StrictObject lo((*layers)[i], where);
      motion_io::SceneLayer layer;
      if (const auto* r = lo.find("region")) layer.region = region_from_json(*r, where + ".region");
      if (const auto* m = lo.find("motion")) layer.motion = motion_from_json(*m, where + ".motion");
      if (auto t = lo.get<std::string>("texture")) {
        if (*t == "textured") layer.texture = motion_io::Texture::textured;
        else if (*t == "flat") layer.texture = motion_io::Texture::flat;
        else throw Error(ErrorKind::invalid_argument, where + ".texture '" + *t + "' is unknown");
      }
      lo.finish();
      s.layers.push_back(layer);
    }
  }
  o.finish();
  s.validate();
  return s;
}

nlohmann::json synthetic_spec_to_json(const motion_io::SyntheticSceneSpec& s) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : s.layers) {
    nlohmann::json region = std::visit(
        [](const auto& r) -> nlohmann::json {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, motion_io::RectRegion>) {
            return {{"type", "rect"}, {"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}};
          } else if constexpr (std::is_same_v<R, motion_io::HalfPlaneRegion>) {
            return {{"type", "half_plane"}, {"nx", r.nx}, {"ny", r.ny}, {"offset", r.offset}};
          } else {
            return {{"type", "whole"}};
          }
        },
        layer.region);
    nlohmann::json motion = std::visit(
        [](const auto& m) -> nlohmann::json {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, motion_io::TranslationMotion>) {
            return {{"type", "translation"}, {"vx", m.vx}, {"vy", m.vy}};
          } else if constexpr (std::is_same_v<M, motion_io::AffineMotion>) {
            return {{"type", "affine"}, {"m", m.m}};
          } else {
            return {{"type", "static"}};
          }
        },
        layer.motion);
    layers.push_back({{"region", region},
                      {"motion", motion},
                      {"texture", layer.texture == motion_io::Texture::flat ? "flat" : "textured"}});
  }
  nlohmann::json j{{"width", s.width},     {"height", s.height},
                   {"length", s.length},   {"channels", s.channels},
                   {"fps", s.fps},         {"noise_sigma", s.noise_sigma},
                   {"seed", s.seed},       {"layers", layers}};
  if (s.cut_frame) j["cut_frame"] = *s.cut_frame;
  return j;
}

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::invalid_argument, path.string() + ": " + e.what());
  }
}

}  // namespace advc
