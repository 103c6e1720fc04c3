#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "salient/error.hpp"
#include "salient/eval.hpp"
#include "salient/rng.hpp"
#include "salient/synth.hpp"

namespace salient {
namespace {

AnnotationSet simple_annotations() {
  AnnotationSet a;
  a.image_id = "a";
  a.plane = Plane::TV;
  a.csp_center = {100, 100};
  a.segment = {{180, 90}, {200, 110}};
  a.hc = {{140, 110}, 90, 70, 0.1};
  return a;
}

Landmark landmark_at(Point2 p, int cluster, double saliency = 1.0) {
  Landmark lm;
  lm.pixel_pos = p;
  lm.saliency = saliency;
  lm.cluster = cluster;
  return lm;
}

// Labeled landmarks placed exactly at the planted positions.
EvalImage planted_image(const SynthScene& s) {
  EvalImage img = to_eval_image(s);
  LandmarkSet set{s.meta.image_id, {}};
  for (const auto& t : s.true_landmarks) set.landmarks.push_back(landmark_at(t.pixel, t.cluster));
  img.landmarks = set;
  return img;
}

const LabelMap kTruthLabels = LabelMap::parse("tv.csp=1,tv.lv=2,tc.csp=1,tc.tcd=3");

TEST(LabelMap, ParseForms) {
  const auto both = LabelMap::parse("csp=0,lv=1");
  EXPECT_EQ(both.cluster_for(Plane::TV, Structure::CSP), 0);
  EXPECT_EQ(both.cluster_for(Plane::TC, Structure::Segment), 1);
  EXPECT_TRUE(both.complete(Plane::TC));
  EXPECT_EQ(both.structure_for(Plane::TV, 1), Structure::Segment);
  EXPECT_FALSE(both.structure_for(Plane::TV, 5));

  const auto planes = LabelMap::parse("tv.csp=1,tc.tcd=0");
  EXPECT_TRUE(planes.cluster_for(Plane::TV, Structure::CSP));
  EXPECT_FALSE(planes.cluster_for(Plane::TV, Structure::Segment));
  EXPECT_FALSE(planes.complete(Plane::TV));
  EXPECT_EQ(LabelMap::parse(planes.to_string()).to_string(), planes.to_string());

  for (const char* bad : {"csp", "csp=x", "foo=1", "xx.csp=1"}) EXPECT_THROW(LabelMap::parse(bad), Error) << bad;
}

TEST(Methods, ParseAndPrint) {
  const auto ms = parse_methods("none,lr,lr-intensity,salient");
  ASSERT_EQ(ms.size(), 4u);
  for (std::size_t i = 0; i < ms.size(); ++i) EXPECT_EQ(parse_method(to_string(ms[i])), ms[i]);
  EXPECT_THROW(parse_method("sift"), Error);
}

TEST(MatchLandmarks, RadiusSemantics) {
  const auto ann = simple_annotations();
  const double axis = ann.hc_long_axis();
  const auto labels = LabelMap::parse("csp=0,lv=1");
  LandmarkSet set{"a", {landmark_at(ann.csp_center, 0)}};
  auto r = match_landmarks(set, ann, labels);
  EXPECT_EQ(r.landmark_rate, 100.0);
  EXPECT_EQ(r.structure_rate, 50.0);

  set.landmarks = {landmark_at(ann.csp_center + Point2{0.11 * axis, 0}, 0)};
  EXPECT_EQ(match_landmarks(set, ann, labels).counts.landmarks_matched, 0);
  set.landmarks = {landmark_at(ann.csp_center + Point2{0.09 * axis, 0}, 0)};
  EXPECT_EQ(match_landmarks(set, ann, labels).counts.landmarks_matched, 1);

  // a landmark of the wrong cluster never counts, whatever its position
  set.landmarks = {landmark_at(ann.csp_center, 1), landmark_at(ann.segment.midpoint(), 1)};
  r = match_landmarks(set, ann, labels);
  EXPECT_EQ(r.counts.landmarks, 2);
  EXPECT_EQ(r.counts.landmarks_matched, 1);
  EXPECT_EQ(r.counts.structures_matched, 1);
}

TEST(MatchLandmarks, PlantedSetsMatchFully) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SceneParams params;
    params.plane = seed % 2 ? Plane::TC : Plane::TV;
    const auto img = planted_image(make_scene(seed, params));
    const auto r = match_landmarks(*img.landmarks, *img.annotations, kTruthLabels);
    EXPECT_EQ(r.landmark_rate, 100.0);
    EXPECT_EQ(r.structure_rate, 100.0);
  }
}

TEST(AlignmentError, IdentityAndExactSimilarity) {
  const auto ann = simple_annotations();
  const auto zero = alignment_error(baseline_none(), ann, ann);
  EXPECT_EQ(zero.csp, 0.0);
  EXPECT_EQ(zero.segment, 0.0);
  EXPECT_EQ(zero.hc, 0.0);

  const auto tf = SimilarityTransform::compose(true, 288, {5, -3}, 0.2, 1.1, {120, 100});
  AnnotationSet moved = ann;
  moved.csp_center = apply(tf, ann.csp_center);
  moved.segment = {apply(tf, ann.segment.a), apply(tf, ann.segment.b)};
  moved.hc.center = apply(tf, ann.hc.center);
  moved.hc.a *= 1.1;
  moved.hc.b *= 1.1;
  const auto e = alignment_error(tf, ann, moved);
  EXPECT_LT(e.csp, 1e-6);
  EXPECT_LT(e.segment, 1e-6);
  EXPECT_LT(e.hc, 1e-6);
}

TEST(AlignmentError, KnownOffsetNormalizedByTarget) {
  const auto src = simple_annotations();
  AnnotationSet tgt = src;
  const Point2 off{6, 8};
  tgt.csp_center = src.csp_center + off;
  tgt.segment = {src.segment.a + off, src.segment.b + off};
  tgt.hc.center = src.hc.center + off;
  tgt.hc.a = 125;  // target long axis 250
  const auto e = alignment_error(baseline_none(), src, tgt);
  EXPECT_NEAR(e.csp, 10.0 / 250.0 * 100.0, 1e-12);
  EXPECT_NEAR(e.segment, 4.0, 1e-12);
  EXPECT_NEAR(e.hc, 4.0, 1e-12);
}

TEST(Baselines, LeftRight) {
  auto src = simple_annotations();
  auto tgt = src;
  EXPECT_EQ(head_orientation(src), -1);
  const auto same = baseline_lr(src, tgt, 288, {144, 112});
  EXPECT_FALSE(same.flipped);
  EXPECT_EQ(apply(same, {10, 20}), (Point2{10, 20}));

  tgt.csp_center = {288 - 100.0, 100};
  tgt.segment = {{288 - 180.0, 90}, {288 - 200.0, 110}};
  const auto flip = baseline_lr(src, tgt, 288, {144, 112});
  EXPECT_TRUE(flip.flipped);
  EXPECT_NEAR(distance(apply(flip, {10, 20}), Point2{278, 20}), 0.0, 1e-12);
  EXPECT_LT(alignment_error(flip, src, tgt).csp, alignment_error(baseline_none(), src, tgt).csp);

  tgt.csp_center = tgt.segment.midpoint();
  EXPECT_THROW(baseline_lr(src, tgt, 288, {}), Error);
}

TEST(SelectLandmarkPair, HighestSaliencyPerCluster) {
  LandmarkSet set{"a", {landmark_at({10, 10}, 0, 0.5), landmark_at({20, 10}, 0, 0.9), landmark_at({50, 50}, 1, 0.3),
                        landmark_at({60, 60}, 2, 1.0)}};
  const auto labels = LabelMap::parse("csp=0,lv=1");
  const auto p = select_landmark_pair(set, Plane::TV, labels, 288);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->c, (Point2{20, 10}));
  EXPECT_EQ(p->d, (Point2{50, 50}));
  EXPECT_EQ(p->image_width, 288);
  set.landmarks.pop_back();
  set.landmarks.pop_back();
  EXPECT_FALSE(select_landmark_pair(set, Plane::TV, labels, 288));
}

TEST(Aggregate, MeanAndStandardError) {
  const auto a = aggregate({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(a.mean, 2.5);
  EXPECT_NEAR(a.sem, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(aggregate({7}).sem, 0.0);
}

std::vector<EvalImage> planted_cohort(int n, std::uint64_t seed) {
  std::vector<EvalImage> images;
  for (const auto& s : make_cohort(n, seed, {})) images.push_back(planted_image(s));
  return images;
}

TEST(UniquePairs, Combinatorics) {
  const auto images = planted_cohort(9, 1);  // 5 TV, 4 TC
  const auto pairs = unique_pairs(images);
  EXPECT_EQ(pairs.size(), 10u + 6u);
  for (const auto& [j, k] : pairs) {
    EXPECT_LT(j, k);
    EXPECT_EQ(images[static_cast<std::size_t>(j)].plane, images[static_cast<std::size_t>(k)].plane);
  }
  std::vector<EvalImage> two(images.begin(), images.begin() + 3);
  two.erase(two.begin() + 1);
  EXPECT_EQ(unique_pairs(two).size(), 1u);
}

TEST(EvaluateAll, CleanDataDominance) {
  const auto images = planted_cohort(8, 2);
  const std::vector<Method> methods = {Method::None, Method::LR, Method::SalientLM};
  const auto result = evaluate_all(images, methods, kTruthLabels);
  ASSERT_EQ(result.reports.size(), 6u);
  EXPECT_TRUE(result.skipped.empty());
  EXPECT_EQ(result.matching.at(Plane::TV).landmark_rate, 100.0);
  for (std::size_t p = 0; p < 2; ++p) {
    const auto& none = result.reports[p * 3];
    const auto& lr = result.reports[p * 3 + 1];
    const auto& sal = result.reports[p * 3 + 2];
    ASSERT_EQ(none.pair_count(), 6u);
    ASSERT_EQ(sal.pair_count(), 6u);
    for (std::size_t i = 0; i < none.rows.size(); ++i) {
      EXPECT_LE(sal.rows[i].error.csp, lr.rows[i].error.csp + 1e-9);
      EXPECT_LE(lr.rows[i].error.csp, none.rows[i].error.csp + 1e-9);
      EXPECT_LT(sal.rows[i].error.csp, 1e-6);
      EXPECT_LT(sal.rows[i].error.segment, 1e-6);
    }
  }
}

TEST(EvaluateAll, ThreadCountDoesNotChangeReport) {
  const auto images = planted_cohort(6, 3);
  const std::vector<Method> methods = {Method::None, Method::LR, Method::SalientLM};
  EvalOptions one, four;
  four.jobs = 4;
  EXPECT_EQ(report_csv(evaluate_all(images, methods, kTruthLabels, one)),
            report_csv(evaluate_all(images, methods, kTruthLabels, four)));
}

TEST(EvaluateAll, IneligibleImagesSkipped) {
  auto images = planted_cohort(6, 4);
  images[0].landmarks->landmarks.clear();
  const auto result = evaluate_all(images, {Method::None, Method::SalientLM}, kTruthLabels);
  EXPECT_EQ(result.reports[0].pair_count(), 1u);  // 3 TV images, two pairs involve image 0
  EXPECT_EQ(result.skipped.size(), 2u);
}

TEST(ReportCsv, AggregatesRecomputableFromRows) {
  const auto images = planted_cohort(8, 5);
  const auto result = evaluate_all(images, {Method::None, Method::LR}, kTruthLabels);
  std::istringstream in(report_csv(result));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "plane,method,pair,csp_err,lv_err,hc_err");
  std::map<std::string, std::vector<double>> csp;
  std::map<std::string, double> means;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 6u) << line;
    const std::string key = f[0] + "/" + f[1];
    if (f[2] == "mean") {
      means[key] = std::stod(f[3]);
    } else if (f[2] != "sem") {
      EXPECT_NE(f[2].find("->"), std::string::npos);
      csp[key].push_back(std::stod(f[3]));
    }
  }
  ASSERT_EQ(means.size(), 4u);
  for (const auto& [key, values] : csp) EXPECT_NEAR(aggregate(values).mean, means[key], 1e-6) << key;
}

TEST(InferLabelMap, RecoversPlantedAssignment) {
  std::vector<LandmarkSet> sets;
  std::vector<AnnotationSet> anns;
  for (const auto& img : planted_cohort(8, 6)) {
    sets.push_back(*img.landmarks);
    anns.push_back(*img.annotations);
  }
  const auto inferred = infer_label_map(sets, anns);
  EXPECT_EQ(inferred.cluster_for(Plane::TV, Structure::CSP), 1);
  EXPECT_EQ(inferred.cluster_for(Plane::TV, Structure::Segment), 2);
  EXPECT_EQ(inferred.cluster_for(Plane::TC, Structure::Segment), 3);
}

}  // namespace
}  // namespace salient
