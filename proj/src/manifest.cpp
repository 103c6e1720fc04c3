#include "salient/manifest.hpp"

#include <fstream>
#include <sstream>

#include "salient/error.hpp"

namespace salient {
namespace {

using nlohmann::json;

Point2 point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, "expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json point_to(Point2 p) { return json::array({p.x, p.y}); }

AnnotationSet annotations_from(const json& j, const std::string& id, Plane plane) {
  AnnotationSet ann;
  ann.image_id = id;
  ann.plane = plane;
  ann.csp_center = point_from(j.at("csp_center"));
  const auto& seg = j.at("segment");
  if (!seg.is_array() || seg.size() != 2) throw Error(ErrorCode::ParseError, "segment needs two endpoints");
  ann.segment = {point_from(seg.at(0)), point_from(seg.at(1))};
  const auto& hc = j.at("hc_ellipse");
  ann.hc.center = point_from(hc.at("center"));
  ann.hc.a = hc.at("a").get<double>();
  ann.hc.b = hc.at("b").get<double>();
  ann.hc.theta = hc.value("theta", 0.0);
  ann.validate();
  return ann;
}

json annotations_to(const AnnotationSet& ann) {
  return {{"csp_center", point_to(ann.csp_center)},
          {"segment", json::array({point_to(ann.segment.a), point_to(ann.segment.b)})},
          {"hc_ellipse", {{"center", point_to(ann.hc.center)}, {"a", ann.hc.a}, {"b", ann.hc.b}, {"theta", ann.hc.theta}}}};
}

}  // namespace

const ManifestImage& Manifest::find(const std::string& id) const {
  for (const auto& img : images) {
    if (img.id == id) return img;
  }
  throw Error(ErrorCode::BadParams, "no image '" + id + "' in manifest");
}

Manifest manifest_from_json(const json& j, std::filesystem::path base_dir) {
  Manifest m;
  m.base_dir = std::move(base_dir);
  try {
    for (const auto& e : j.at("images")) {
      ManifestImage img;
      img.id = e.at("id").get<std::string>();
      img.pixel_width = e.at("pixel_width").get<int>();
      img.pixel_height = e.at("pixel_height").get<int>();
      if (img.pixel_width <= 0 || img.pixel_height <= 0) {
        throw Error(ErrorCode::ParseError, "image " + img.id + " has a non-positive size");
      }
      img.saliency_grid = e.at("saliency_grid").get<std::string>();
      img.feature_grid = e.at("feature_grid").get<std::string>();
      if (e.contains("image")) img.image = e.at("image").get<std::string>();
      img.plane = parse_plane(e.value("plane", std::string("TV")));
      if (e.contains("annotations") && !e.at("annotations").is_null()) {
        img.annotations = annotations_from(e.at("annotations"), img.id, img.plane);
      }
      m.images.push_back(std::move(img));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

json manifest_to_json(const Manifest& m) {
  json images = json::array();
  for (const auto& img : m.images) {
    json e = {{"id", img.id},
              {"pixel_width", img.pixel_width},
              {"pixel_height", img.pixel_height},
              {"saliency_grid", img.saliency_grid.generic_string()},
              {"feature_grid", img.feature_grid.generic_string()},
              {"plane", std::string(to_string(img.plane))}};
    if (img.image) e["image"] = img.image->generic_string();
    if (img.annotations) e["annotations"] = annotations_to(*img.annotations);
    images.push_back(std::move(e));
  }
  return {{"images", std::move(images)}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + ex.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Manifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_json_file(path), path.parent_path());
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace salient
