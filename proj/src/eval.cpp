#include "salient/eval.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "salient/error.hpp"

namespace salient {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::None: return "none";
    case Method::LR: return "lr";
    case Method::LRIntensity: return "lr-intensity";
    case Method::SalientLM: return "salient";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "none") return Method::None;
  if (text == "lr") return Method::LR;
  if (text == "lr-intensity" || text == "lr+intensity") return Method::LRIntensity;
  if (text == "salient" || text == "salient-lm") return Method::SalientLM;
  throw Error(ErrorCode::ParseError, "unknown method '" + std::string(text) + "'");
}

std::vector<Method> parse_methods(std::string_view text) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto token = text.substr(start, end - start);
    if (!token.empty()) {
      const Method m = parse_method(token);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    start = end + 1;
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty method list");
  return out;
}

std::string_view to_string(Structure s) { return s == Structure::CSP ? "csp" : "segment"; }

Point2 reference_point(const AnnotationSet& ann, Structure s) {
  return s == Structure::CSP ? ann.csp_center : ann.segment.midpoint();
}

std::optional<int> LabelMap::cluster_for(Plane plane, Structure s) const {
  const auto p = map_.find(plane);
  if (p == map_.end()) return std::nullopt;
  const auto it = p->second.find(s);
  if (it == p->second.end()) return std::nullopt;
  return it->second;
}

std::optional<Structure> LabelMap::structure_for(Plane plane, int cluster) const {
  const auto p = map_.find(plane);
  if (p == map_.end()) return std::nullopt;
  for (const auto& [s, c] : p->second) {
    if (c == cluster) return s;
  }
  return std::nullopt;
}

bool LabelMap::complete(Plane plane) const {
  return cluster_for(plane, Structure::CSP) && cluster_for(plane, Structure::Segment);
}

LabelMap LabelMap::parse(std::string_view text) {
  LabelMap out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    std::string token(text.substr(start, end - start));
    start = end + 1;
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "label map entry '" + token + "' lacks '='");
    std::string key = token.substr(0, eq);
    std::vector<Plane> planes = {Plane::TV, Plane::TC};
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      planes = {parse_plane(key.substr(0, dot))};
      key = key.substr(dot + 1);
    }
    Structure s;
    if (key == "csp") {
      s = Structure::CSP;
    } else if (key == "lv" || key == "tcd" || key == "cereb" || key == "segment") {
      s = Structure::Segment;
    } else {
      throw Error(ErrorCode::ParseError, "unknown structure '" + key + "' in label map");
    }
    int cluster = 0;
    try {
      std::size_t used = 0;
      cluster = std::stoi(token.substr(eq + 1), &used);
      if (used != token.size() - eq - 1 || cluster < 0) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "label map entry '" + token + "' needs a non-negative cluster id");
    }
    for (Plane p : planes) out.set(p, s, cluster);
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty label map");
  return out;
}

std::string LabelMap::to_string() const {
  std::string out;
  for (const auto& [plane, entries] : map_) {
    for (const auto& [s, c] : entries) {
      if (!out.empty()) out += ',';
      out += plane == Plane::TV ? "tv." : "tc.";
      out += s == Structure::CSP ? "csp" : (plane == Plane::TV ? "lv" : "tcd");
      out += '=' + std::to_string(c);
    }
  }
  return out;
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  landmarks += o.landmarks;
  landmarks_matched += o.landmarks_matched;
  structures += o.structures;
  structures_matched += o.structures_matched;
  return *this;
}

MatchReport MatchReport::from_counts(const MatchCounts& c, double radius) {
  MatchReport r;
  r.counts = c;
  r.radius = radius;
  r.landmark_rate = c.landmarks > 0 ? 100.0 * c.landmarks_matched / c.landmarks : 0.0;
  r.structure_rate = c.structures > 0 ? 100.0 * c.structures_matched / c.structures : 0.0;
  return r;
}

MatchReport match_landmarks(const LandmarkSet& landmarks, const AnnotationSet& ann, const LabelMap& labels,
                            double radius_frac) {
  const double radius = radius_frac * ann.hc_long_axis();
  MatchCounts c;
  for (const Landmark& lm : landmarks.landmarks) {
    ++c.landmarks;
    if (!lm.cluster) continue;
    const auto s = labels.structure_for(ann.plane, *lm.cluster);
    if (s && distance(lm.pixel_pos, reference_point(ann, *s)) <= radius) ++c.landmarks_matched;
  }
  for (Structure s : {Structure::CSP, Structure::Segment}) {
    ++c.structures;
    const auto cluster = labels.cluster_for(ann.plane, s);
    if (!cluster) continue;
    const Point2 ref = reference_point(ann, s);
    const bool hit = std::any_of(landmarks.landmarks.begin(), landmarks.landmarks.end(), [&](const Landmark& lm) {
      return lm.cluster == cluster && distance(lm.pixel_pos, ref) <= radius;
    });
    if (hit) ++c.structures_matched;
  }
  return MatchReport::from_counts(c, radius_frac);
}

AlignmentError alignment_error(const SimilarityTransform& tf, const AnnotationSet& source,
                               const AnnotationSet& target) {
  const double unit = 100.0 / target.hc_long_axis();
  AlignmentError e;
  e.csp = distance(apply(tf, source.csp_center), target.csp_center) * unit;
  e.segment = distance(apply(tf, source.segment.midpoint()), target.segment.midpoint()) * unit;
  e.hc = distance(apply(tf, source.hc.center), target.hc.center) * unit;
  return e;
}

int head_orientation(const AnnotationSet& ann) {
  const double dx = ann.csp_center.x - ann.segment.midpoint().x;
  if (dx == 0.0) throw Error(ErrorCode::AmbiguousOrientation, "CSP and segment of " + ann.image_id + " are vertically aligned");
  return dx > 0.0 ? 1 : -1;
}

SimilarityTransform baseline_none() { return SimilarityTransform::identity(); }

SimilarityTransform baseline_lr(const AnnotationSet& source, const AnnotationSet& target, int source_width,
                                Point2 target_center) {
  const bool flip = head_orientation(source) != head_orientation(target);
  return SimilarityTransform::compose(flip, source_width, {0.0, 0.0}, 0.0, 1.0, target_center);
}

std::optional<LandmarkPair> select_landmark_pair(const LandmarkSet& landmarks, Plane plane, const LabelMap& labels,
                                                 int image_width) {
  auto best = [&](Structure s) -> const Landmark* {
    const auto cluster = labels.cluster_for(plane, s);
    if (!cluster) return nullptr;
    const Landmark* pick = nullptr;
    for (const Landmark& lm : landmarks.landmarks) {
      if (lm.cluster == cluster && (!pick || lm.saliency > pick->saliency)) pick = &lm;
    }
    return pick;
  };
  const Landmark* c = best(Structure::CSP);
  const Landmark* d = best(Structure::Segment);
  if (!c || !d) return std::nullopt;
  return LandmarkPair{c->pixel_pos, d->pixel_pos, image_width};
}

LabelMap infer_label_map(const std::vector<LandmarkSet>& landmarks, const std::vector<AnnotationSet>& annotations,
                         double radius_frac) {
  if (landmarks.size() != annotations.size()) {
    throw Error(ErrorCode::MissingAnnotation, "label inference needs one annotation set per landmark set");
  }
  LabelMap out;
  for (Plane plane : {Plane::TV, Plane::TC}) {
    // hits[cluster][structure]
    std::map<int, std::array<int, 2>> hits;
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
      const auto& ann = annotations[i];
      if (ann.plane != plane) continue;
      const double radius = radius_frac * ann.hc_long_axis();
      for (const Landmark& lm : landmarks[i].landmarks) {
        if (!lm.cluster) continue;
        auto& h = hits[*lm.cluster];
        if (distance(lm.pixel_pos, reference_point(ann, Structure::CSP)) <= radius) ++h[0];
        if (distance(lm.pixel_pos, reference_point(ann, Structure::Segment)) <= radius) ++h[1];
      }
    }
    int best_score = -1, best_c = -1, best_s = -1;
    for (const auto& [c, hc] : hits) {
      for (const auto& [s, hs] : hits) {
        if (c == s) continue;
        const int score = hc[0] + hs[1];
        if (score > best_score) {
          best_score = score;
          best_c = c;
          best_s = s;
        }
      }
    }
    if (best_score > 0) {
      out.set(plane, Structure::CSP, best_c);
      out.set(plane, Structure::Segment, best_s);
    }
  }
  return out;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  const double n = static_cast<double>(values.size());
  for (double v : values) a.mean += v;
  a.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return a;
}

namespace {

struct PairOutcome {
  std::vector<std::optional<AlignmentError>> errors;  // per method
  std::vector<std::string> notes;
};

// Landmark pair usable for SalientLM: both selected landmarks lie near their
// annotated structures.
std::optional<LandmarkPair> eligible_pair(const EvalImage& img, const LabelMap& labels, double radius_frac) {
  if (!img.landmarks || !img.annotations) return std::nullopt;
  auto pair = select_landmark_pair(*img.landmarks, img.plane, labels, img.width);
  if (!pair) return std::nullopt;
  const double radius = radius_frac * img.annotations->hc_long_axis();
  if (distance(pair->c, reference_point(*img.annotations, Structure::CSP)) > radius) return std::nullopt;
  if (distance(pair->d, reference_point(*img.annotations, Structure::Segment)) > radius) return std::nullopt;
  return pair;
}

std::string pair_name(const EvalImage& s, const EvalImage& t) { return s.id + "->" + t.id; }

PairOutcome evaluate_one(const EvalImage& src, const EvalImage& tgt, const std::vector<Method>& methods,
                         const std::optional<LandmarkPair>& src_pair, const std::optional<LandmarkPair>& tgt_pair,
                         const EvalOptions& opts) {
  PairOutcome out;
  out.errors.resize(methods.size());
  const auto& sa = *src.annotations;
  const auto& ta = *tgt.annotations;
  const Point2 target_center{tgt.width / 2.0, tgt.height / 2.0};
  for (std::size_t m = 0; m < methods.size(); ++m) {
    try {
      switch (methods[m]) {
        case Method::None:
          out.errors[m] = alignment_error(baseline_none(), sa, ta);
          break;
        case Method::LR:
          out.errors[m] = alignment_error(baseline_lr(sa, ta, src.width, target_center), sa, ta);
          break;
        case Method::LRIntensity: {
          if (!src.image || !tgt.image) {
            out.notes.push_back(pair_name(src, tgt) + ": lr-intensity skipped, image missing");
            break;
          }
          const auto init = baseline_lr(sa, ta, src.width, target_center);
          const auto reg = register_intensity(*src.image, *tgt.image, init, opts.intensity);
          out.errors[m] = alignment_error(reg.transform, sa, ta);
          break;
        }
        case Method::SalientLM: {
          if (!src_pair || !tgt_pair) {
            out.notes.push_back(pair_name(src, tgt) + ": salient skipped, landmarks not identified");
            break;
          }
          SimilarityTransform tf;
          try {
            tf = fit_transform(*src_pair, *tgt_pair);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::AmbiguousOrientation) throw;
            out.notes.push_back(pair_name(src, tgt) + ": ambiguous landmark orientation, no flip applied");
            tf = fit_transform(*src_pair, *tgt_pair, /*force_no_flip_if_ambiguous=*/true);
          }
          out.errors[m] = alignment_error(tf, sa, ta);
          break;
        }
      }
    } catch (const Error& e) {
      out.notes.push_back(pair_name(src, tgt) + ": " + std::string(to_string(methods[m])) + " failed, " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<int, int>> unique_pairs(const std::vector<EvalImage>& images) {
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < static_cast<int>(images.size()); ++j) {
    for (int k = j + 1; k < static_cast<int>(images.size()); ++k) {
      if (images[static_cast<std::size_t>(j)].plane == images[static_cast<std::size_t>(k)].plane) {
        pairs.emplace_back(j, k);
      }
    }
  }
  return pairs;
}

EvalResult evaluate_pairs(const std::vector<EvalImage>& images, const std::vector<std::pair<int, int>>& pairs,
                          const std::vector<Method>& methods, const LabelMap& labels, const EvalOptions& opts) {
  EvalResult result;
  const bool want_salient = std::find(methods.begin(), methods.end(), Method::SalientLM) != methods.end();

  std::vector<std::optional<LandmarkPair>> lm_pairs(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    if (img.landmarks && img.annotations) {
      result.matching[img.plane].counts += match_landmarks(*img.landmarks, *img.annotations, labels, opts.radius_frac).counts;
    }
    lm_pairs[i] = eligible_pair(img, labels, opts.radius_frac);
  }
  for (auto& [plane, report] : result.matching) report = MatchReport::from_counts(report.counts, opts.radius_frac);

  // Filter pairs up front so the report is independent of scheduling.
  std::vector<std::pair<int, int>> todo;
  for (const auto& [j, k] : pairs) {
    const auto& s = images.at(static_cast<std::size_t>(j));
    const auto& t = images.at(static_cast<std::size_t>(k));
    if (!s.annotations || !t.annotations) {
      result.skipped.push_back(pair_name(s, t) + ": missing annotations");
      continue;
    }
    if (want_salient && opts.common_pairs &&
        (!lm_pairs[static_cast<std::size_t>(j)] || !lm_pairs[static_cast<std::size_t>(k)])) {
      result.skipped.push_back(pair_name(s, t) + ": structures not all identified by salient landmarks");
      continue;
    }
    todo.emplace_back(j, k);
  }

  std::vector<PairOutcome> outcomes(todo.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      const auto [j, k] = todo[i];
      outcomes[i] = evaluate_one(images[static_cast<std::size_t>(j)], images[static_cast<std::size_t>(k)], methods,
                                 lm_pairs[static_cast<std::size_t>(j)], lm_pairs[static_cast<std::size_t>(k)], opts);
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(todo.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
  }

  for (Plane plane : {Plane::TV, Plane::TC}) {
    for (std::size_t m = 0; m < methods.size(); ++m) {
      EvalReport rep;
      rep.plane = plane;
      rep.method = methods[m];
      for (std::size_t i = 0; i < todo.size(); ++i) {
        const auto& s = images[static_cast<std::size_t>(todo[i].first)];
        const auto& t = images[static_cast<std::size_t>(todo[i].second)];
        if (s.plane != plane || !outcomes[i].errors[m]) continue;
        rep.rows.push_back({s.id, t.id, *outcomes[i].errors[m]});
      }
      bool plane_present = std::any_of(todo.begin(), todo.end(), [&](const auto& p) {
        return images[static_cast<std::size_t>(p.first)].plane == plane;
      });
      if (!plane_present) continue;
      std::vector<double> csp, seg, hc;
      for (const auto& r : rep.rows) {
        csp.push_back(r.error.csp);
        seg.push_back(r.error.segment);
        hc.push_back(r.error.hc);
      }
      rep.csp = aggregate(csp);
      rep.segment = aggregate(seg);
      rep.hc = aggregate(hc);
      result.reports.push_back(std::move(rep));
    }
  }
  for (const auto& o : outcomes) result.skipped.insert(result.skipped.end(), o.notes.begin(), o.notes.end());
  return result;
}

EvalResult evaluate_all(const std::vector<EvalImage>& images, const std::vector<Method>& methods,
                        const LabelMap& labels, const EvalOptions& opts) {
  return evaluate_pairs(images, unique_pairs(images), methods, labels, opts);
}

std::string report_csv(const EvalResult& result) {
  std::ostringstream out;
  char buf[160];
  out << "plane,method,pair,csp_err,lv_err,hc_err\n";
  for (const auto& rep : result.reports) {
    const auto plane = to_string(rep.plane);
    const auto method = to_string(rep.method);
    for (const auto& row : rep.rows) {
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f\n", row.error.csp, row.error.segment, row.error.hc);
      out << plane << ',' << method << ',' << row.source << "->" << row.target << buf;
    }
  }
  for (const auto& rep : result.reports) {
    std::snprintf(buf, sizeof buf, ",mean,%.6f,%.6f,%.6f\n", rep.csp.mean, rep.segment.mean, rep.hc.mean);
    out << to_string(rep.plane) << ',' << to_string(rep.method) << buf;
    std::snprintf(buf, sizeof buf, ",sem,%.6f,%.6f,%.6f\n", rep.csp.sem, rep.segment.sem, rep.hc.sem);
    out << to_string(rep.plane) << ',' << to_string(rep.method) << buf;
  }
  return out.str();
}

}  // namespace salient
