#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "salient/grids.hpp"

namespace salient {

/// One image entry of a dataset manifest. Relative paths resolve against the
/// manifest's directory.
struct ManifestImage {
  std::string id;
  int pixel_width = 0;
  int pixel_height = 0;
  std::filesystem::path saliency_grid;
  std::filesystem::path feature_grid;
  std::optional<std::filesystem::path> image;  ///< grayscale PGM, needed by intensity registration
  Plane plane = Plane::TV;
  std::optional<AnnotationSet> annotations;
};

struct Manifest {
  std::vector<ManifestImage> images;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : base_dir / p; }
  const ManifestImage& find(const std::string& id) const;
};

Manifest manifest_from_json(const nlohmann::json& j, std::filesystem::path base_dir = {});
nlohmann::json manifest_to_json(const Manifest& m);

/// Throws IoFailure / ParseError.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& m, const std::filesystem::path& path);

/// Reads a JSON document, mapping failures to IoFailure / ParseError.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes with two-space indentation and a trailing newline.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace salient
