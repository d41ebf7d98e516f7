#include <gtest/gtest.h>

#include <random>

#include <Eigen/Geometry>

#include "semloc/registration.hpp"

using namespace semloc;

namespace {

RigidTransform random_transform(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = gauss(rng);
  RigidTransform t;
  t.rotation = nearest_rotation(m);
  t.translation = {gauss(rng) * 15.0, gauss(rng) * 15.0, gauss(rng) * 15.0};
  return t;
}

std::vector<Eigen::Vector3d> random_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  std::vector<Eigen::Vector3d> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({coord(rng), coord(rng), coord(rng)});
  return pts;
}

double sum_squared_residuals(const RigidTransform& t,
                             const std::vector<CorrespondencePair>& pairs) {
  double s = 0.0;
  for (const auto& [p, q] : pairs) s += (t.apply(q) - p).squaredNorm();
  return s;
}

ObjectMap grid_map(std::size_t n, int classes = 2, Frame frame = Frame::ReferenceGlobal) {
  ObjectMap m;
  m.frame = frame;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i % 10) * 7.0;
    const double y = static_cast<double>(i / 10) * 7.0;
    const double z = static_cast<double>(i % 3);
    m.objects.push_back({{x, y, z}, static_cast<ClassId>(i % classes), static_cast<ObjectId>(i)});
  }
  return m;
}

}  // namespace

TEST(FitRigid, IdentityWhenSetsCoincide) {
  std::mt19937_64 rng(1);
  const auto pts = random_points(rng, 6);
  std::vector<CorrespondencePair> pairs;
  for (const auto& p : pts) pairs.emplace_back(p, p);
  const RigidTransform t = fit_rigid(pairs);
  EXPECT_LT((t.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(t.translation.norm(), 1e-12);
}

TEST(FitRigid, ExactRecoveryOfGeneratorTransform) {
  const RigidTransform gen = rotation_about_z(kPi / 2.0, {5.0, 0.0, 0.0});
  const std::vector<Eigen::Vector3d> q{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<CorrespondencePair> pairs;
  for (const auto& v : q) pairs.emplace_back(gen.apply(v), v);
  const RigidTransform t = fit_rigid(pairs);
  EXPECT_LT((t.rotation - gen.rotation).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((t.translation - gen.translation).norm(), 1e-9);
}

TEST(FitRigid, OutputIsAlwaysAProperRotation) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const RigidTransform gen = random_transform(rng);
    const auto q = random_points(rng, 5 + trial % 10);
    std::vector<CorrespondencePair> pairs;
    for (const auto& v : q) {
      Eigen::Vector3d p = gen.apply(v);
      for (int d = 0; d < 3; ++d) p[d] += noise(rng);
      pairs.emplace_back(p, v);
    }
    EXPECT_TRUE(fit_rigid(pairs).is_valid(1e-9));
  }
}

TEST(FitRigid, LocallyOptimalAgainstRandomPerturbations) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> mag(1e-3, 1e-1);
  for (int trial = 0; trial < 10; ++trial) {
    const RigidTransform gen = random_transform(rng);
    const auto q = random_points(rng, 8);
    std::vector<CorrespondencePair> pairs;
    for (const auto& v : q) {
      Eigen::Vector3d p = gen.apply(v);
      for (int d = 0; d < 3; ++d) p[d] += 0.3 * gauss(rng);
      pairs.emplace_back(p, v);
    }
    const RigidTransform fit = fit_rigid(pairs);
    const double base = sum_squared_residuals(fit, pairs);
    for (int k = 0; k < 1000; ++k) {
      const double m = mag(rng);
      RigidTransform perturbed = fit;
      Eigen::Vector3d axis{gauss(rng), gauss(rng), gauss(rng)};
      axis.normalize();
      perturbed.rotation =
          fit.rotation * Eigen::AngleAxisd(m, axis).toRotationMatrix();
      perturbed.translation += m * Eigen::Vector3d{gauss(rng), gauss(rng), gauss(rng)};
      EXPECT_LE(base, sum_squared_residuals(perturbed, pairs) + 1e-12);
    }
  }
}

TEST(FitRigid, EquivariantUnderCommonPreRotation) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = random_points(rng, 6);
    const RigidTransform gen = random_transform(rng);
    std::vector<CorrespondencePair> pairs;
    for (const auto& v : q) pairs.emplace_back(gen.apply(v), v);
    const RigidTransform base = fit_rigid(pairs);

    const RigidTransform s = random_transform(rng);
    std::vector<CorrespondencePair> rotated;
    for (const auto& [p, v] : pairs) rotated.emplace_back(s.apply(p), s.apply(v));
    const RigidTransform fit = fit_rigid(rotated);
    const RigidTransform expected = compose(compose(s, base), s.inverse());
    EXPECT_LT((fit.rotation - expected.rotation).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((fit.translation - expected.translation).norm(), 1e-6);
  }
}

TEST(FitRigid, RejectsTooFewPairs) {
  std::vector<CorrespondencePair> pairs{{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}};
  EXPECT_THROW(fit_rigid(pairs), InsufficientCorrespondences);
}

TEST(FitRigid, RejectsCollinearPoints) {
  std::vector<CorrespondencePair> pairs;
  for (int i = 0; i < 5; ++i) {
    const Eigen::Vector3d v{static_cast<double>(i), 0.0, 0.0};
    pairs.emplace_back(v, v);
  }
  EXPECT_THROW(fit_rigid(pairs), DegenerateGeometry);
}

TEST(ComputeRmse, ZeroForPerfectAlignment) {
  const ObjectMap ref = grid_map(20);
  ObjectMap veh = ref;
  veh.frame = Frame::VehicleLocal;
  EXPECT_NEAR(compute_rmse(RigidTransform::identity(), veh, ref), 0.0, 1e-12);
}

TEST(ComputeRmse, SingleObjectGivesItsDistance) {
  ObjectMap ref;
  ref.objects.push_back({{3.0, 0.0, 0.0}, 0, 0});
  ObjectMap veh;
  veh.frame = Frame::VehicleLocal;
  veh.objects.push_back({{0.0, 0.0, 0.0}, 0, 0});
  EXPECT_NEAR(compute_rmse(RigidTransform::identity(), veh, ref), 3.0, 1e-12);
}

TEST(ComputeRmse, MatchesBruteForceOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  std::uniform_int_distribution<int> cls(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    ObjectMap ref, veh;
    for (int i = 0; i < 15; ++i)
      ref.objects.push_back({{coord(rng), coord(rng), coord(rng)}, cls(rng),
                             static_cast<ObjectId>(i)});
    for (int i = 0; i < 5; ++i)
      veh.objects.push_back({{coord(rng), coord(rng), coord(rng)}, cls(rng),
                             static_cast<ObjectId>(i)});
    const RigidTransform t = random_transform(rng);

    double sum = 0.0;
    std::size_t scored = 0;
    for (const auto& o : veh.objects) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : ref.objects)
        if (r.class_id == o.class_id)
          best = std::min(best, (t.apply(o.centroid) - r.centroid).squaredNorm());
      if (std::isfinite(best)) {
        sum += best;
        ++scored;
      }
    }
    if (scored == 0) continue;
    const double expected = std::sqrt(sum / static_cast<double>(scored));
    EXPECT_NEAR(compute_rmse(t, veh, ref), expected, 1e-12);
  }
}

TEST(ComputeRmse, KdTreePathAgreesWithBruteForce) {
  // above the brute-force limit so the k-d tree is exercised
  const ObjectMap ref = grid_map(150, 1);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> coord(0.0, 70.0);
  ObjectMap veh;
  for (int i = 0; i < 30; ++i)
    veh.objects.push_back({{coord(rng), coord(rng), coord(rng) / 20.0}, 0,
                           static_cast<ObjectId>(i)});
  double sum = 0.0;
  for (const auto& o : veh.objects) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : ref.objects) best = std::min(best, (o.centroid - r.centroid).squaredNorm());
    sum += best;
  }
  const double expected = std::sqrt(sum / static_cast<double>(veh.size()));
  EXPECT_NEAR(compute_rmse(RigidTransform::identity(), veh, ref), expected, 1e-12);
}

TEST(ComputeRmse, ClassFilterRestrictsScoring) {
  ObjectMap ref;
  ref.objects.push_back({{0.0, 0.0, 0.0}, 0, 0});
  ref.objects.push_back({{10.0, 0.0, 0.0}, 1, 1});
  ObjectMap veh;
  veh.objects.push_back({{1.0, 0.0, 0.0}, 0, 0});  // 1 m from its class-0 neighbor
  veh.objects.push_back({{15.0, 0.0, 0.0}, 1, 1});  // 5 m from its class-1 neighbor
  const double all = compute_rmse(RigidTransform::identity(), veh, ref);
  EXPECT_NEAR(all, std::sqrt((1.0 + 25.0) / 2.0), 1e-12);
  const double filtered = compute_rmse(RigidTransform::identity(), veh, ref,
                                       std::set<ClassId>{0});
  EXPECT_NEAR(filtered, 1.0, 1e-12);
}

TEST(ComputeRmse, SkipsClassesAbsentFromReference) {
  ObjectMap ref;
  ref.objects.push_back({{0.0, 0.0, 0.0}, 0, 0});
  ObjectMap veh;
  veh.objects.push_back({{2.0, 0.0, 0.0}, 0, 0});
  veh.objects.push_back({{99.0, 0.0, 0.0}, 5, 1});  // class 5 unknown to the reference
  EXPECT_NEAR(compute_rmse(RigidTransform::identity(), veh, ref), 2.0, 1e-12);
}

TEST(ComputeRmse, ErrorsWhenNothingScoreable) {
  ObjectMap ref;
  ref.objects.push_back({{0.0, 0.0, 0.0}, 0, 0});
  ObjectMap veh;
  veh.objects.push_back({{1.0, 0.0, 0.0}, 3, 0});
  EXPECT_THROW(compute_rmse(RigidTransform::identity(), veh, ref), NoScoreableObjects);
}

TEST(ComputeRmse, InvariantUnderVehicleOrderPermutation) {
  std::mt19937_64 rng(7);
  ObjectMap ref = grid_map(25);
  ObjectMap veh = grid_map(12, 2, Frame::VehicleLocal);
  const RigidTransform t = random_transform(rng);
  const double base = compute_rmse(t, veh, ref);
  std::reverse(veh.objects.begin(), veh.objects.end());
  EXPECT_NEAR(base, compute_rmse(t, veh, ref), 1e-12);
}

TEST(RegisterSubmap, NoiselessRoundTripRecoversGenerator) {
  const ObjectMap ref = grid_map(20);
  const RigidTransform gen = rotation_about_z(0.7, {12.0, -4.0, 1.0});
  ObjectMap veh = apply_transform(gen.inverse(), ref);
  veh.frame = Frame::VehicleLocal;

  PipelineConfig cfg;
  cfg.epsilon = 1.0;
  const CandidateRegistration cand = register_submap(ref, veh, cfg);
  ASSERT_TRUE(cand.usable());
  EXPECT_EQ(cand.inlier_count, 20u);
  EXPECT_NEAR(cand.rmse, 0.0, 1e-9);
  EXPECT_LT((cand.transform->rotation - gen.rotation).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((cand.transform->translation - gen.translation).norm(), 1e-6);
}

TEST(RegisterSubmap, IdentityOnSelfRegistration) {
  const ObjectMap ref = grid_map(15);
  ObjectMap veh = ref;
  veh.frame = Frame::VehicleLocal;
  PipelineConfig cfg;
  const CandidateRegistration cand = register_submap(ref, veh, cfg);
  ASSERT_TRUE(cand.usable());
  EXPECT_LT((cand.transform->rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(cand.transform->translation.norm(), 1e-9);
  EXPECT_NEAR(cand.rmse, 0.0, 1e-9);
}

TEST(RegisterSubmap, RobustToHalfOutliers) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(0.0, 70.0);
  const ObjectMap ref = grid_map(20);
  const RigidTransform gen = rotation_about_z(-1.1, {30.0, 8.0, 0.0});
  ObjectMap veh = apply_transform(gen.inverse(), ref);
  veh.frame = Frame::VehicleLocal;
  // replace half the vehicle objects with uniform clutter
  for (std::size_t i = 0; i < veh.size(); i += 2)
    veh.objects[i].centroid = {coord(rng), coord(rng), coord(rng)};

  PipelineConfig cfg;
  cfg.epsilon = 0.5;
  const CandidateRegistration cand = register_submap(ref, veh, cfg);
  ASSERT_TRUE(cand.usable());
  const auto [dt, dr] = transform_distance(*cand.transform, gen);
  EXPECT_LT(dt, 0.5);
  EXPECT_LT(dr, 2.0);
  EXPECT_GE(cand.inlier_count, 10u);  // at least the surviving true matches
}

TEST(RegisterSubmap, TinyCliqueIsUnusableButCounted) {
  // two isolated objects cannot form a fit-worthy clique
  ObjectMap ref;
  ref.objects.push_back({{0.0, 0.0, 0.0}, 0, 0});
  ref.objects.push_back({{5.0, 0.0, 0.0}, 0, 1});
  ObjectMap veh;
  veh.frame = Frame::VehicleLocal;
  veh.objects.push_back({{100.0, 0.0, 0.0}, 0, 0});
  veh.objects.push_back({{105.0, 0.0, 0.0}, 0, 1});
  PipelineConfig cfg;
  cfg.epsilon = 0.5;
  const CandidateRegistration cand = register_submap(ref, veh, cfg);
  EXPECT_FALSE(cand.usable());
  EXPECT_EQ(cand.inlier_count, 2u);
}

TEST(RegisterSubmap, CollinearCliqueComesBackUnusable) {
  ObjectMap ref;
  for (int i = 0; i < 6; ++i)
    ref.objects.push_back({{static_cast<double>(3 * i), 0.0, 0.0}, 0, static_cast<ObjectId>(i)});
  ObjectMap veh = ref;
  veh.frame = Frame::VehicleLocal;
  PipelineConfig cfg;
  cfg.epsilon = 0.5;
  const CandidateRegistration cand = register_submap(ref, veh, cfg);
  EXPECT_FALSE(cand.usable());
  EXPECT_GE(cand.inlier_count, 3u);
}

TEST(RegisterSubmap, PriorGuidesAssociationReuse) {
  const ObjectMap ref = grid_map(12);
  ObjectMap veh = ref;
  veh.frame = Frame::VehicleLocal;
  std::vector<Association> prior;
  for (int i = 0; i < 4; ++i) prior.push_back({i, i});
  PipelineConfig cfg;
  cfg.epsilon = 1.0;
  const CandidateRegistration cand = register_submap(ref, veh, cfg, prior);
  ASSERT_TRUE(cand.usable());
  EXPECT_EQ(cand.inlier_count, 12u);  // prior pins are part of the clique
  EXPECT_NEAR(cand.rmse, 0.0, 1e-9);
}
