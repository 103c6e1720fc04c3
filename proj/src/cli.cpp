#include "salient/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "salient/artifacts.hpp"
#include "salient/clustering.hpp"
#include "salient/error.hpp"
#include "salient/eval.hpp"
#include "salient/manifest.hpp"
#include "salient/peaks.hpp"
#include "salient/registration.hpp"
#include "salient/synth.hpp"
#include "salient/version.hpp"

namespace salient::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SALIENT_ALIGN_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadParams, "SALIENT_ALIGN_SEED must be an unsigned integer");
    }
  }
  return 7;
}

struct ExtractArgs {
  fs::path manifest;
  fs::path out;
  PeakConfig peaks;
};

struct ClusterArgs {
  fs::path landmarks;
  fs::path manifest;
  fs::path out;
  int k_min = 2;
  int k_max = 10;
  std::uint64_t seed = 7;
  bool normalize = false;
};

struct RegisterArgs {
  std::string source;
  std::string target;
  fs::path clusters;
  fs::path manifest;
  fs::path out;
  fs::path warp;
  std::string label_map = "auto";
  bool force_no_flip = false;
};

struct EvaluateArgs {
  fs::path manifest;
  fs::path clusters;
  fs::path out;
  fs::path json_out;
  std::string label_map = "auto";
  std::string methods = "none,lr,lr-intensity,salient";
  double radius = kDefaultMatchRadius;
  int jobs = 1;
};

struct SynthArgs {
  int n = 40;
  std::uint64_t seed = 7;
  double noise = 0.1;
  double saliency_noise = 0.0;
  double feature_noise = 0.5;
  bool shadows = false;
  fs::path out_dir;
};

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::vector<ImageLandmarks> load_clustered(const fs::path& path) { return landmarks_from_json(read_json_file(path)); }

LabelMap resolve_label_map(const std::string& spec, const Manifest& manifest,
                           const std::vector<ImageLandmarks>& clustered, double radius) {
  if (spec != "auto") return LabelMap::parse(spec);
  std::vector<LandmarkSet> sets;
  std::vector<AnnotationSet> anns;
  for (const auto& img : clustered) {
    const auto& entry = manifest.find(img.set.image_id);
    if (!entry.annotations) continue;
    sets.push_back(img.set);
    anns.push_back(*entry.annotations);
  }
  if (sets.empty()) throw Error(ErrorCode::MissingAnnotation, "label map 'auto' needs annotated images");
  return infer_label_map(sets, anns, radius);
}

void run_extract(const ExtractArgs& a) {
  a.peaks.validate();
  const Manifest manifest = load_manifest(a.manifest);
  std::vector<ImageLandmarks> out;
  for (const auto& img : manifest.images) {
    const SaliencyGrid grid = read_saliency_grid(manifest.resolve(img.saliency_grid));
    const auto meta = ImageMeta::from_sizes(img.id, img.pixel_width, img.pixel_height, grid.width(), grid.height());
    out.push_back({img.plane, extract_landmarks(grid, meta, a.peaks)});
  }
  json doc = provenance("extract", {{"manifest", a.manifest.generic_string()},
                                    {"min_distance", a.peaks.min_distance},
                                    {"threshold", a.peaks.threshold}});
  doc["images"] = landmarks_to_json(out);
  write_json(a.out, doc);
}

void run_cluster(const ClusterArgs& a, std::ostream& err) {
  if (a.k_min < 2 || a.k_max < a.k_min) throw Error(ErrorCode::OutOfRange, "need 2 <= k-min <= k-max");
  const Manifest manifest = load_manifest(a.manifest);
  auto images = landmarks_from_json(read_json_file(a.landmarks));
  std::vector<PlaneClustering> planes;
  json resolved_k = json::object();
  for (Plane plane : {Plane::TV, Plane::TC}) {
    std::vector<std::size_t> members;
    std::vector<LandmarkSet> sets;
    std::vector<FeatureGrid> grids;
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (images[i].plane != plane) continue;
      members.push_back(i);
      sets.push_back(images[i].set);
      grids.push_back(read_feature_grid(manifest.resolve(manifest.find(images[i].set.image_id).feature_grid)));
    }
    FeatureCollection features = collect_features(sets, grids);
    if (features.empty()) continue;
    if (a.normalize) normalize_l2(features);
    const int k_max = std::min(a.k_max, static_cast<int>(features.size()) - 1);
    if (k_max < a.k_max) {
      err << "cluster: " << to_string(plane) << " has " << features.size() << " landmarks, k-max lowered to "
          << k_max << "\n";
    }
    resolved_k[std::string(to_string(plane))] = {a.k_min, k_max};
    auto result = auto_cluster(features, a.k_min, k_max, a.seed);
    std::size_t e = 0;
    for (std::size_t i : members) {
      for (auto& lm : images[i].set.landmarks) lm.cluster = result.labels[e++];
    }
    planes.push_back({plane, std::move(result)});
  }
  json doc = provenance("cluster", {{"landmarks", a.landmarks.generic_string()},
                                    {"manifest", a.manifest.generic_string()},
                                    {"k_min", a.k_min},
                                    {"k_max", a.k_max},
                                    {"k_range_used", resolved_k},
                                    {"seed", a.seed},
                                    {"normalize", a.normalize}});
  doc["planes"] = clusterings_to_json(planes);
  doc["images"] = landmarks_to_json(images);
  write_json(a.out, doc);
}

void run_register(const RegisterArgs& a, std::ostream& err) {
  const Manifest manifest = load_manifest(a.manifest);
  const auto clustered = load_clustered(a.clusters);
  const LabelMap labels = resolve_label_map(a.label_map, manifest, clustered, kDefaultMatchRadius);
  auto pair_of = [&](const std::string& id) {
    const auto& entry = manifest.find(id);
    const auto it = std::find_if(clustered.begin(), clustered.end(),
                                 [&](const ImageLandmarks& l) { return l.set.image_id == id; });
    if (it == clustered.end()) throw Error(ErrorCode::BadParams, "no landmarks for image '" + id + "'");
    auto pair = select_landmark_pair(it->set, entry.plane, labels, entry.pixel_width);
    if (!pair) throw Error(ErrorCode::MissingAnnotation, "image '" + id + "' lacks a landmark for every mapped structure");
    return pair.value();
  };
  const auto& src = manifest.find(a.source);
  const auto& tgt = manifest.find(a.target);
  if (src.plane != tgt.plane) throw Error(ErrorCode::BadParams, "source and target must share a plane");
  const LandmarkPair sp = pair_of(a.source);
  const LandmarkPair tp = pair_of(a.target);
  SimilarityTransform tf;
  try {
    tf = fit_transform(sp, tp, a.force_no_flip);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AmbiguousOrientation) err << "register: pass --force-no-flip to align anyway\n";
    throw;
  }
  json doc = provenance("register", {{"source", a.source},
                                     {"target", a.target},
                                     {"clusters", a.clusters.generic_string()},
                                     {"manifest", a.manifest.generic_string()},
                                     {"label_map", labels.to_string()},
                                     {"force_no_flip", a.force_no_flip}});
  doc["flipped"] = tf.flipped;
  doc["flip_width"] = tf.flip_width;
  doc["translation"] = {tf.translation.x, tf.translation.y};
  doc["rotation"] = tf.rotation;
  doc["scale"] = tf.scale;
  doc["alpha"] = tf.alpha;
  doc["beta"] = tf.beta;
  doc["center"] = {tf.center.x, tf.center.y};
  doc["matrix"] = tf.matrix;
  doc["landmarks"] = {{"source", {{"c", {sp.c.x, sp.c.y}}, {"d", {sp.d.x, sp.d.y}}}},
                      {"target", {{"c", {tp.c.x, tp.c.y}}, {"d", {tp.d.x, tp.d.y}}}}};
  write_json(a.out, doc);
  if (!a.warp.empty()) {
    if (!src.image) throw Error(ErrorCode::MissingAnnotation, "manifest has no image for '" + a.source + "'");
    const Image img = read_pgm(manifest.resolve(*src.image));
    write_image(warp_image(img, tf, tgt.pixel_width, tgt.pixel_height), a.warp);
  }
}

json aggregate_json(const Aggregate& a) { return {{"mean", a.mean}, {"sem", a.sem}}; }

void run_evaluate(const EvaluateArgs& a, std::ostream& err) {
  const auto methods = parse_methods(a.methods);
  if (!(a.radius > 0.0)) throw Error(ErrorCode::OutOfRange, "radius must be positive");
  const Manifest manifest = load_manifest(a.manifest);
  const auto clustered = load_clustered(a.clusters);
  const bool need_salient = std::find(methods.begin(), methods.end(), Method::SalientLM) != methods.end();
  const bool need_images = std::find(methods.begin(), methods.end(), Method::LRIntensity) != methods.end();
  LabelMap labels;
  if (need_salient) labels = resolve_label_map(a.label_map, manifest, clustered, a.radius);

  std::vector<EvalImage> images;
  for (const auto& entry : manifest.images) {
    EvalImage img{entry.id, entry.plane, entry.pixel_width, entry.pixel_height, entry.annotations, {}, {}};
    if (need_images && entry.image) img.image = read_pgm(manifest.resolve(*entry.image));
    for (const auto& c : clustered) {
      if (c.set.image_id == entry.id) img.landmarks = c.set;
    }
    images.push_back(std::move(img));
  }
  EvalOptions opts;
  opts.radius_frac = a.radius;
  opts.jobs = a.jobs;
  const auto result = evaluate_all(images, methods, labels, opts);
  for (const auto& s : result.skipped) err << "evaluate: " << s << "\n";

  write_text_file(a.out, report_csv(result));
  std::string method_list;
  for (Method m : methods) method_list += (method_list.empty() ? "" : ",") + std::string(to_string(m));
  json doc = provenance("evaluate", {{"manifest", a.manifest.generic_string()},
                                     {"clusters", a.clusters.generic_string()},
                                     {"label_map", labels.to_string()},
                                     {"methods", method_list},
                                     {"radius", a.radius}});
  doc["dispersion"] = "standard error of the mean";
  doc["error_unit"] = "percent of target HC long axis";
  json reports = json::array();
  for (const auto& r : result.reports) {
    reports.push_back({{"plane", std::string(to_string(r.plane))},
                       {"method", std::string(to_string(r.method))},
                       {"pair_count", r.pair_count()},
                       {"csp", aggregate_json(r.csp)},
                       {"lv", aggregate_json(r.segment)},
                       {"hc", aggregate_json(r.hc)}});
  }
  doc["reports"] = std::move(reports);
  json matching = json::object();
  for (const auto& [plane, m] : result.matching) {
    matching[std::string(to_string(plane))] = {{"landmark_rate", m.landmark_rate},
                                               {"structure_rate", m.structure_rate},
                                               {"landmarks", m.counts.landmarks},
                                               {"landmarks_matched", m.counts.landmarks_matched},
                                               {"structures", m.counts.structures},
                                               {"structures_matched", m.counts.structures_matched},
                                               {"radius", m.radius}};
  }
  doc["matching"] = std::move(matching);
  doc["skipped"] = result.skipped;
  write_json(a.json_out.empty() ? fs::path(a.out).replace_extension(".json") : a.json_out, doc);
}

void run_synth(const SynthArgs& a) {
  if (a.n < 1) throw Error(ErrorCode::OutOfRange, "--n must be positive");
  SceneParams params;
  params.image_noise = a.noise;
  params.saliency_noise = a.saliency_noise;
  params.feature_noise = a.feature_noise;
  params.shadows = a.shadows;
  const auto scenes = make_cohort(a.n, a.seed, params);
  write_dataset(scenes, a.out_dir);
  json doc = provenance("synth", {{"n", a.n},
                                  {"seed", a.seed},
                                  {"noise", a.noise},
                                  {"saliency_noise", a.saliency_noise},
                                  {"feature_noise", a.feature_noise},
                                  {"shadows", a.shadows}});
  write_json(a.out_dir / "synth.json", doc);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::uint64_t seed = 7;
  try {
    seed = default_seed();
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kValidationError;
  }

  CLI::App app{"Salient landmark discovery and two-landmark image alignment", "salient_align"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ExtractArgs extract;
  auto* ex = app.add_subcommand("extract", "Find salient landmarks as local maxima of saliency grids");
  ex->add_option("--manifest", extract.manifest, "Dataset manifest JSON")->required();
  ex->add_option("--min-distance", extract.peaks.min_distance, "Minimum distance d between maxima, in cells")
      ->capture_default_str()
      ->check(CLI::Range(1, 1 << 20));
  ex->add_option("--threshold", extract.peaks.threshold, "Saliency threshold t")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  ex->add_option("--out", extract.out, "Output landmarks JSON")->required();

  ClusterArgs cluster;
  cluster.seed = seed;
  auto* cl = app.add_subcommand("cluster", "Cluster landmark feature vectors per plane (auto k by silhouette)");
  cl->add_option("--landmarks", cluster.landmarks, "Landmarks JSON from extract")->required();
  cl->add_option("--manifest", cluster.manifest, "Dataset manifest JSON")->required();
  cl->add_option("--k-min", cluster.k_min, "Smallest candidate k")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  cl->add_option("--k-max", cluster.k_max, "Largest candidate k (lowered to n-1 per plane)")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  cl->add_option("--seed", cluster.seed, "Random seed (default from SALIENT_ALIGN_SEED or 7)")->capture_default_str();
  cl->add_flag("--normalize", cluster.normalize, "L2-normalize feature vectors before clustering");
  cl->add_option("--out", cluster.out, "Output clusters JSON")->required();

  RegisterArgs reg;
  auto* rg = app.add_subcommand("register", "Align a source image to a target with two salient landmarks");
  rg->add_option("--source", reg.source, "Source image id")->required();
  rg->add_option("--target", reg.target, "Target image id")->required();
  rg->add_option("--clusters", reg.clusters, "Clusters JSON from cluster")->required();
  rg->add_option("--manifest", reg.manifest, "Dataset manifest JSON")->required();
  rg->add_option("--label-map", reg.label_map, "Cluster-to-structure map, e.g. csp=0,lv=1, or auto")->capture_default_str();
  rg->add_flag("--force-no-flip", reg.force_no_flip, "Skip the flip when landmark ordering is ambiguous");
  rg->add_option("--out", reg.out, "Output transform JSON")->required();
  rg->add_option("--warp", reg.warp, "Write the warped source image (.png or .pgm)");

  EvaluateArgs eval;
  eval.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* ev = app.add_subcommand("evaluate", "Pairwise alignment errors for baselines and salient landmarks");
  ev->add_option("--manifest", eval.manifest, "Dataset manifest JSON")->required();
  ev->add_option("--clusters", eval.clusters, "Clusters JSON from cluster")->required();
  ev->add_option("--label-map", eval.label_map, "Cluster-to-structure map, e.g. csp=0,lv=1, or auto")->capture_default_str();
  ev->add_option("--methods", eval.methods, "Comma-separated subset of none,lr,lr-intensity,salient")->capture_default_str();
  ev->add_option("--radius", eval.radius, "Match radius as a fraction of the HC long axis")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 10.0));
  ev->add_option("--jobs", eval.jobs, "Worker threads for pairwise evaluation")->check(CLI::Range(1, 1024));
  ev->add_option("--out", eval.out, "Output CSV report")->required();
  ev->add_option("--json", eval.json_out, "Aggregate JSON report (default: --out with .json)");

  SynthArgs synth;
  synth.seed = seed;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic dataset with known ground truth");
  sy->add_option("--n", synth.n, "Number of images (alternating TV/TC)")->capture_default_str()->check(CLI::Range(1, 100000));
  sy->add_option("--seed", synth.seed, "Random seed (default from SALIENT_ALIGN_SEED or 7)")->capture_default_str();
  sy->add_option("--noise", synth.noise, "Image speckle noise sigma")->capture_default_str()->check(CLI::NonNegativeNumber);
  sy->add_option("--saliency-noise", synth.saliency_noise, "Saliency grid noise sigma")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sy->add_option("--feature-noise", synth.feature_noise, "Feature noise sigma")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sy->add_flag("--shadows", synth.shadows, "Add wedge-shaped acoustic shadows");
  sy->add_option("--out-dir", synth.out_dir, "Output directory")->required();

  std::vector<const char*> argv;
  argv.push_back("salient_align");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (*ex) run_extract(extract);
    if (*cl) run_cluster(cluster, err);
    if (*rg) run_register(reg, err);
    if (*ev) run_evaluate(eval, err);
    if (*sy) run_synth(synth);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_io_error(e.code()) ? kIoError : kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

}  // namespace salient::cli
