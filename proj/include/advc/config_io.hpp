#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "advc/core.hpp"
#include "advc/decode.hpp"
#include "advc/motion_io.hpp"

namespace advc {

/// Reads keys out of a JSON object and rejects whatever is left over.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& object, std::string where);

  bool has(const std::string& key) const { return object_.contains(key); }
  const nlohmann::json* find(const std::string& key);

  template <class T>
  std::optional<T> get(const std::string& key) {
    const auto* v = find(key);
    if (!v || v->is_null()) return std::nullopt;
    try {
      return v->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::invalid_argument, where_ + "." + key + " has the wrong type");
    }
  }
  template <class T>
  void read(const std::string& key, T& out) {
    if (auto v = get<T>(key)) out = *v;
  }

  /// Throws invalid_argument naming the first key never read.
  void finish() const;

 private:
  const nlohmann::json& object_;
  std::string where_;
  std::set<std::string> seen_;
};

/// Overlays the keys present in `object` onto `config`.
void apply_codec_config(StrictObject& object, CodecConfig& config);
void apply_codec_config(const nlohmann::json& object, CodecConfig& config);
nlohmann::json codec_config_to_json(const CodecConfig& config);

void apply_reconstruction_config(StrictObject& object, decode::ReconstructionConfig& config);

motion_io::SyntheticSceneSpec synthetic_spec_from_json(const nlohmann::json& object);
nlohmann::json synthetic_spec_to_json(const motion_io::SyntheticSceneSpec& spec);

/// Parses a JSON file, reporting syntax errors as invalid_argument.
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace advc
