#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "json.hpp"

#include "salient/clustering.hpp"
#include "salient/grids.hpp"
#include "salient/peaks.hpp"

namespace salient {

/// Landmarks of one image as stored in landmarks.json / clusters.json.
struct ImageLandmarks {
  Plane plane = Plane::TV;
  LandmarkSet set;
};

/// Per-plane clustering summary stored in clusters.json.
struct PlaneClustering {
  Plane plane = Plane::TV;
  ClusteringResult result;
};

nlohmann::json landmarks_to_json(const std::vector<ImageLandmarks>& images);
std::vector<ImageLandmarks> landmarks_from_json(const nlohmann::json& j);

nlohmann::json clusterings_to_json(const std::vector<PlaneClustering>& planes);

/// Header fields shared by every JSON artifact.
nlohmann::json provenance(const std::string& command, nlohmann::json config);

}  // namespace salient
