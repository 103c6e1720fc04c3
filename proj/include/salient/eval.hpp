#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "salient/grids.hpp"
#include "salient/image.hpp"
#include "salient/intensity.hpp"
#include "salient/peaks.hpp"
#include "salient/registration.hpp"

namespace salient {

enum class Method { None, LR, LRIntensity, SalientLM };

std::string_view to_string(Method m);
/// Accepts none, lr, lr-intensity, salient.
Method parse_method(std::string_view text);
/// Comma-separated method list.
std::vector<Method> parse_methods(std::string_view text);

enum class Structure { CSP, Segment };

std::string_view to_string(Structure s);

/// CSP center, LV/TCD segment midpoint.
Point2 reference_point(const AnnotationSet& ann, Structure s);

/// Assignment of anonymous cluster labels to anatomical structures, per plane.
class LabelMap {
 public:
  void set(Plane plane, Structure s, int cluster) { map_[plane][s] = cluster; }
  std::optional<int> cluster_for(Plane plane, Structure s) const;
  std::optional<Structure> structure_for(Plane plane, int cluster) const;
  bool complete(Plane plane) const;
  bool empty() const { return map_.empty(); }

  /// Parses "csp=0,lv=1" (applies to both planes) or plane-qualified entries
  /// "tv.csp=0,tv.lv=1,tc.csp=1,tc.tcd=0". lv, tcd and cereb name the segment
  /// structure. Throws ParseError.
  static LabelMap parse(std::string_view text);
  std::string to_string() const;

 private:
  std::map<Plane, std::map<Structure, int>> map_;
};

inline constexpr double kDefaultMatchRadius = 0.10;

struct MatchCounts {
  int landmarks = 0;
  int landmarks_matched = 0;
  int structures = 0;
  int structures_matched = 0;

  MatchCounts& operator+=(const MatchCounts& o);
};

struct MatchReport {
  MatchCounts counts;
  double landmark_rate = 0.0;   ///< % of discovered landmarks near their mapped structure
  double structure_rate = 0.0;  ///< % of annotated structures near a landmark of their cluster
  double radius = kDefaultMatchRadius;

  static MatchReport from_counts(const MatchCounts& c, double radius);
};

/// A landmark matches when its mapped structure's reference point lies within
/// radius_frac * HC long axis (inclusive). Unlabeled or unmapped landmarks
/// never match.
MatchReport match_landmarks(const LandmarkSet& landmarks, const AnnotationSet& ann, const LabelMap& labels,
                            double radius_frac = kDefaultMatchRadius);

/// Distances in percent of the target HC long axis.
struct AlignmentError {
  double csp = 0.0;
  double segment = 0.0;
  double hc = 0.0;
};

AlignmentError alignment_error(const SimilarityTransform& tf, const AnnotationSet& source,
                               const AnnotationSet& target);

/// Head orientation from annotations: sign of csp_x - segment_midpoint_x.
/// Throws AmbiguousOrientation when zero.
int head_orientation(const AnnotationSet& ann);

SimilarityTransform baseline_none();
/// Pure horizontal flip about the source width when orientations differ.
/// Rotation center is the target image center, for later refinement.
SimilarityTransform baseline_lr(const AnnotationSet& source, const AnnotationSet& target, int source_width,
                                Point2 target_center);

/// Highest-saliency landmark per mapped structure, or nullopt if a structure
/// has no landmark in its cluster.
std::optional<LandmarkPair> select_landmark_pair(const LandmarkSet& landmarks, Plane plane, const LabelMap& labels,
                                                 int image_width);

/// Builds a label map from annotations: for each plane, the assignment of
/// distinct clusters to structures that maximizes the number of landmarks
/// within the match radius of their structure.
LabelMap infer_label_map(const std::vector<LandmarkSet>& landmarks, const std::vector<AnnotationSet>& annotations,
                         double radius_frac = kDefaultMatchRadius);

/// Everything the evaluation needs to know about one image.
struct EvalImage {
  std::string id;
  Plane plane = Plane::TV;
  int width = 0;
  int height = 0;
  std::optional<AnnotationSet> annotations;
  std::optional<Image> image;
  std::optional<LandmarkSet> landmarks;  ///< with cluster labels
};

struct PairRow {
  std::string source;
  std::string target;
  AlignmentError error;
};

struct Aggregate {
  double mean = 0.0;
  double sem = 0.0;  ///< standard error of the mean (sample sd / sqrt(n)); 0 for n < 2
};

Aggregate aggregate(const std::vector<double>& values);

struct EvalReport {
  Plane plane = Plane::TV;
  Method method = Method::None;
  std::vector<PairRow> rows;
  Aggregate csp;
  Aggregate segment;
  Aggregate hc;

  std::size_t pair_count() const { return rows.size(); }
};

struct EvalOptions {
  double radius_frac = kDefaultMatchRadius;
  IntensityOptions intensity;
  /// Evaluate every method on the pairs usable by SalientLM when it is
  /// requested, so that rows of one plane compare like with like.
  bool common_pairs = true;
  int jobs = 1;
};

struct EvalResult {
  std::vector<EvalReport> reports;  ///< ordered by plane, then requested method order
  std::vector<std::string> skipped;  ///< human-readable reasons
  std::map<Plane, MatchReport> matching;
};

/// Evaluates the given (source, target) index pairs.
EvalResult evaluate_pairs(const std::vector<EvalImage>& images, const std::vector<std::pair<int, int>>& pairs,
                          const std::vector<Method>& methods, const LabelMap& labels, const EvalOptions& opts = {});

/// All unordered unique pairs within each plane, source = lower index.
std::vector<std::pair<int, int>> unique_pairs(const std::vector<EvalImage>& images);

EvalResult evaluate_all(const std::vector<EvalImage>& images, const std::vector<Method>& methods,
                        const LabelMap& labels, const EvalOptions& opts = {});

/// CSV with columns plane,method,pair,csp_err,lv_err,hc_err: one row per pair,
/// then "mean" and "sem" rows per (plane, method).
std::string report_csv(const EvalResult& result);

}  // namespace salient
