#include "salient/artifacts.hpp"

#include "salient/error.hpp"
#include "salient/version.hpp"

namespace salient {

using nlohmann::json;

json landmarks_to_json(const std::vector<ImageLandmarks>& images) {
  json out = json::array();
  for (const auto& img : images) {
    json lms = json::array();
    for (std::size_t i = 0; i < img.set.landmarks.size(); ++i) {
      const auto& lm = img.set.landmarks[i];
      json e = {{"index", i},
                {"seed", {lm.seed.x, lm.seed.y}},
                {"grid", {lm.grid_pos.x, lm.grid_pos.y}},
                {"pixel", {lm.pixel_pos.x, lm.pixel_pos.y}},
                {"saliency", lm.saliency}};
      if (lm.cluster) e["cluster"] = *lm.cluster;
      lms.push_back(std::move(e));
    }
    out.push_back({{"id", img.set.image_id}, {"plane", std::string(to_string(img.plane))}, {"landmarks", std::move(lms)}});
  }
  return out;
}

std::vector<ImageLandmarks> landmarks_from_json(const json& j) {
  std::vector<ImageLandmarks> out;
  try {
    for (const auto& e : j.at("images")) {
      ImageLandmarks img;
      img.set.image_id = e.at("id").get<std::string>();
      img.plane = parse_plane(e.at("plane").get<std::string>());
      for (const auto& l : e.at("landmarks")) {
        Landmark lm;
        lm.seed = {l.at("seed").at(0).get<int>(), l.at("seed").at(1).get<int>()};
        lm.grid_pos = {l.at("grid").at(0).get<double>(), l.at("grid").at(1).get<double>()};
        lm.pixel_pos = {l.at("pixel").at(0).get<double>(), l.at("pixel").at(1).get<double>()};
        lm.saliency = l.at("saliency").get<double>();
        if (l.contains("cluster")) lm.cluster = l.at("cluster").get<int>();
        img.set.landmarks.push_back(lm);
      }
      out.push_back(std::move(img));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("malformed landmark file: ") + ex.what());
  }
  return out;
}

json clusterings_to_json(const std::vector<PlaneClustering>& planes) {
  json out = json::array();
  for (const auto& p : planes) {
    json per_k = json::array();
    for (const auto& [k, s] : p.result.per_k_silhouette) per_k.push_back({{"k", k}, {"silhouette", s}});
    out.push_back({{"plane", std::string(to_string(p.plane))},
                   {"k", p.result.k},
                   {"silhouette", p.result.silhouette},
                   {"wcss", p.result.wcss},
                   {"per_k_silhouette", std::move(per_k)},
                   {"centroids", p.result.centroids}});
  }
  return out;
}

json provenance(const std::string& command, json config) {
  return {{"tool", kToolName}, {"version", kVersion}, {"command", command}, {"config", std::move(config)}};
}

}  // namespace salient
