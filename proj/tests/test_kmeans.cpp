#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "barytrack/kmeans.hpp"
#include "oracles.hpp"

using namespace barytrack;

namespace {

RegisteredTrajectory track(double lon0, double dlon, std::mt19937_64& eng, double jitter,
                           int i_min = -3, int i_max = 3) {
  std::normal_distribution<double> g(0.0, jitter);
  RegisteredTrajectory t;
  t.storm_ref = "synthetic";
  t.i_min = i_min;
  for (int i = i_min; i <= i_max; ++i) {
    t.positions.push_back(from_latlon(35.0 + 2.0 * i + g(eng), lon0 + dlon * i + g(eng)));
  }
  return t;
}

std::vector<RegisteredTrajectory> two_bundles(std::mt19937_64& eng) {
  std::vector<RegisteredTrajectory> out;
  for (int i = 0; i < 10; ++i) {
    out.push_back(track(-80.0, 1.0, eng, 0.5));
    out.push_back(track(-40.0, 2.0, eng, 0.5));
  }
  return out;
}

std::vector<RegisteredTrajectory> random_collection(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> lon(-95.0, -30.0), slope(-1.0, 3.0);
  std::vector<RegisteredTrajectory> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(track(lon(eng), slope(eng), eng, 1.5));
  return out;
}

std::vector<RegisteredTrajectory> fixture_trajectories() {
  std::ifstream in(BARYTRACK_TEST_DATA "/hurdat2_al_1980_2012.txt", std::ios::binary);
  const auto storms = parse_hurdat2(in);
  const auto reg = exclude_sparse_years(select_and_register(storms, {20, 35, 1980, 2012}), 3);
  return crop_common(reg).trajectories;
}

std::set<std::set<std::size_t>> partition(const std::vector<int>& labels) {
  std::map<int, std::set<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].insert(i);
  std::set<std::set<std::size_t>> out;
  for (auto& [label, members] : groups) out.insert(members);
  return out;
}

}  // namespace

TEST(TrajDistance, ReferenceValues) {
  std::mt19937_64 eng(1);
  const auto a = track(-70, 1, eng, 0.3);
  EXPECT_NEAR(traj_distance(a, a), 0.0, 1e-15);
  RegisteredTrajectory anti = a;
  for (auto& p : anti.positions) p = UnitVector(-p.x(), -p.y(), -p.z());
  EXPECT_NEAR(traj_distance(a, anti), 2.0, 1e-12);
  for (int i = 0; i < 100; ++i) {
    const auto b = track(-60, 2, eng, 3.0), c = track(-50, 0, eng, 3.0);
    EXPECT_DOUBLE_EQ(traj_distance(b, c), traj_distance(c, b));
  }
}

TEST(TrajDistance, GridMismatchThrows) {
  std::mt19937_64 eng(2);
  try {
    traj_distance(track(-70, 1, eng, 0.1, -3, 3), track(-70, 1, eng, 0.1, -2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridMismatch);
  }
}

TEST(BarycentreTrajectory, SingleMemberIsItself) {
  std::mt19937_64 eng(3);
  const auto a = track(-70, 1, eng, 0.3);
  const auto b = barycentre_trajectory({a});
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    EXPECT_LT(gc_distance(a.positions[i], b.positions[i]), 1e-15);
  }
}

TEST(BarycentreTrajectory, TwoMembersMatchGridSearch) {
  std::mt19937_64 eng(4);
  const auto a = track(-75, 1, eng, 0.5), b = track(-60, 2, eng, 0.5);
  const auto c = barycentre_trajectory({a, b});
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    EXPECT_LT(gc_distance(c.positions[i], slerp(a.positions[i], b.positions[i], 0.5)), 1e-12);
    const auto& p = a.positions[i];
    const auto& q = b.positions[i];
    const auto ref = oracle::grid_search_min_cosine_energy(
        {{p.x(), p.y(), p.z()}, {q.x(), q.y(), q.z()}});
    EXPECT_LT(gc_distance(c.positions[i], UnitVector(ref[0], ref[1], ref[2])), 1e-6);
  }
}

TEST(BarycentreTrajectory, TangentPerturbationsDoNotImprove) {
  const auto trajs = random_collection(12, 5);
  const auto c = barycentre_trajectory(trajs);
  auto mean_dist = [&](const RegisteredTrajectory& centroid) {
    double s = 0.0;
    for (const auto& t : trajs) s += traj_distance(t, centroid);
    return s / double(trajs.size());
  };
  const double base = mean_dist(c);
  std::mt19937_64 eng(6);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < c.positions.size(); ++i) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto& x = c.positions[i];
      const UnitVector r(g(eng), g(eng), g(eng));
      const double d = r.dot(x);
      const UnitVector tangent(r.x() - d * x.x(), r.y() - d * x.y(), r.z() - d * x.z());
      RegisteredTrajectory moved = c;
      const double eps = 1e-3;
      moved.positions[i] = UnitVector(std::cos(eps) * x.x() + std::sin(eps) * tangent.x(),
                                      std::cos(eps) * x.y() + std::sin(eps) * tangent.y(),
                                      std::cos(eps) * x.z() + std::sin(eps) * tangent.z());
      EXPECT_GE(mean_dist(moved), base - 1e-15);
    }
  }
}

TEST(BarycentreTrajectory, DegenerateColumnNamesGridIndex) {
  RegisteredTrajectory a, b;
  a.i_min = b.i_min = -1;
  a.positions = {from_latlon(30, -60), from_latlon(0, 0)};
  b.positions = {from_latlon(31, -60), from_latlon(0, 180)};
  try {
    barycentre_trajectory({a, b});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMean);
    EXPECT_NE(std::string(e.what()).find("0"), std::string::npos);
  }
}

TEST(LloydKmeans, OneClusterPerTrajectoryHasZeroObjective) {
  const auto trajs = random_collection(6, 7);
  const auto c = lloyd_kmeans(trajs, 6, 3, 42);
  EXPECT_NEAR(c.objective, 0.0, 1e-12);
  EXPECT_EQ(partition(c.assignments).size(), 6u);
}

TEST(LloydKmeans, SingleClusterCentroidIsGlobalBarycentre) {
  const auto trajs = random_collection(15, 8);
  const auto c = lloyd_kmeans(trajs, 1, 2, 1);
  const auto bary = barycentre_trajectory(trajs);
  for (std::size_t i = 0; i < bary.positions.size(); ++i) {
    EXPECT_LT(gc_distance(bary.positions[i], c.centroids[0].positions[i]), 1e-12);
  }
  for (int a : c.assignments) EXPECT_EQ(a, 0);
}

TEST(LloydKmeans, RecoversTwoBundlesForEverySeed) {
  std::mt19937_64 eng(9);
  const auto trajs = two_bundles(eng);
  std::set<std::size_t> even, odd;
  for (std::size_t i = 0; i < trajs.size(); ++i) (i % 2 == 0 ? even : odd).insert(i);
  const std::set<std::set<std::size_t>> truth{even, odd};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = lloyd_kmeans(trajs, 2, 10, seed);
    EXPECT_EQ(partition(c.assignments), truth) << "seed " << seed;
  }
}

TEST(LloydKmeans, ObjectiveMatchesRecomputation) {
  const auto trajs = random_collection(40, 10);
  const auto c = lloyd_kmeans(trajs, 5, 4, 3);
  double total = 0.0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    total += traj_distance(trajs[i], c.centroids[std::size_t(c.assignments[i])]);
  }
  EXPECT_NEAR(c.objective, total, 1e-9);
  for (int a : c.assignments) {
    EXPECT_GE(a, 0);
    EXPECT_LT(a, 5);
  }
}

TEST(LloydKmeans, MonotoneTracesAndBestOfRestarts) {
  const auto trajs = random_collection(60, 11);
  const auto c = lloyd_kmeans(trajs, 8, 10, 5);
  ASSERT_EQ(c.objective_traces.size(), 10u);
  for (const auto& trace : c.objective_traces) {
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-12);
  }
  for (double o : c.restart_objectives) EXPECT_LE(c.objective, o);
  EXPECT_EQ(c.restart_objectives[std::size_t(c.best_restart)], c.objective);
}

TEST(LloydKmeans, DeterministicUnderSeed) {
  const auto trajs = random_collection(50, 12);
  const auto a = lloyd_kmeans(trajs, 6, 5, 99);
  const auto b = lloyd_kmeans(trajs, 6, 5, 99);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.objective, b.objective);
  for (std::size_t c = 0; c < a.centroids.size(); ++c) {
    EXPECT_EQ(a.centroids[c].positions, b.centroids[c].positions);
  }
}

TEST(LloydKmeans, RestartIsIndependentOfOtherRestarts) {
  const auto trajs = random_collection(30, 13);
  const auto three = lloyd_kmeans(trajs, 4, 3, 21);
  const auto five = lloyd_kmeans(trajs, 4, 5, 21);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(three.restart_objectives[r], five.restart_objectives[r]);
  }
}

TEST(LloydKmeans, ArgumentErrors) {
  const auto trajs = random_collection(3, 14);
  try {
    lloyd_kmeans(trajs, 4, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewTrajectories);
  }
  EXPECT_THROW(lloyd_kmeans(trajs, 0, 1, 0), Error);
  EXPECT_THROW(lloyd_kmeans(trajs, 2, 0, 0), Error);
  std::mt19937_64 eng(15);
  auto mixed = trajs;
  mixed.push_back(track(-60, 1, eng, 0.1, -2, 3));
  EXPECT_THROW(lloyd_kmeans(mixed, 2, 1, 0), Error);
}

TEST(LloydKmeans, DuplicateTrajectoriesKeepKClusters) {
  std::mt19937_64 eng(16);
  const auto base = track(-70, 1, eng, 0.1);
  std::vector<RegisteredTrajectory> trajs(6, base);
  trajs.push_back(track(-40, 1, eng, 0.1));
  const auto c = lloyd_kmeans(trajs, 3, 5, 0);
  EXPECT_EQ(c.centroids.size(), 3u);
  EXPECT_GE(c.objective, 0.0);
}

TEST(OrderWestToEast, SortsByKeyLongitude) {
  std::mt19937_64 eng(17);
  std::vector<RegisteredTrajectory> trajs{track(-80, 0, eng, 0), track(-60, 0, eng, 0),
                                          track(-70, 0, eng, 0)};
  Clustering c = lloyd_kmeans(trajs, 3, 1, 0);
  // Force raw centroid i to be trajectory i.
  c.centroids = trajs;
  c.assignments = {0, 1, 2};
  const auto ordered = order_west_to_east(c, 35.0);
  EXPECT_EQ(ordered.ordering, (std::vector<int>{0, 2, 1}));
  EXPECT_EQ(ordered.assignments, (std::vector<int>{0, 2, 1}));
  EXPECT_NEAR(ordered.key_longitudes[0], -80.0, 1e-9);
  EXPECT_NEAR(ordered.key_longitudes[1], -70.0, 1e-9);
  EXPECT_NEAR(ordered.key_longitudes[2], -60.0, 1e-9);
  EXPECT_EQ(ordered.objective, c.objective);
  EXPECT_EQ(partition(ordered.assignments), partition(c.assignments));

  const auto again = order_west_to_east(ordered, 35.0);
  EXPECT_EQ(again.assignments, ordered.assignments);
  EXPECT_EQ(again.ordering, ordered.ordering);
}

TEST(OrderWestToEast, FallsBackToRelativeTimeZero) {
  RegisteredTrajectory flat;
  flat.i_min = -1;
  flat.positions = {from_latlon(36, -50), from_latlon(36, -45), from_latlon(36, -40)};
  EXPECT_NEAR(key_longitude(flat, 35.0), -45.0, 1e-9);
}

TEST(OrderWestToEast, PreservesPartitionOnRandomRuns) {
  const auto trajs = random_collection(40, 18);
  const auto raw = lloyd_kmeans(trajs, 6, 3, 8);
  const auto ordered = order_west_to_east(raw, 35.0);
  EXPECT_EQ(partition(raw.assignments), partition(ordered.assignments));
  EXPECT_EQ(raw.objective, ordered.objective);
  EXPECT_NEAR(clustering_objective(trajs, ordered.assignments, ordered.centroids), raw.objective,
              1e-12);
  EXPECT_TRUE(std::is_sorted(ordered.key_longitudes.begin(), ordered.key_longitudes.end()));
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    EXPECT_EQ(ordered.assignments[i], ordered.ordering[std::size_t(raw.assignments[i])]);
  }
}

TEST(RmsDistances, ReferenceValues) {
  std::mt19937_64 eng(19);
  const auto a = track(-70, 1, eng, 0.2);
  EXPECT_NEAR(rms_distance_km(a, a), 0.0, 1e-9);
  RegisteredTrajectory shifted = a;
  const double theta = 0.03;
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    // Move every point along its own meridian by theta radians.
    const auto ll = to_latlon(a.positions[i]);
    shifted.positions[i] = from_latlon(ll.lat + rad_to_deg(theta), ll.lon);
  }
  EXPECT_NEAR(rms_distance_km(a, shifted), kEarthRadiusKm * theta, 1e-6);
}

TEST(RmsDistances, GroupedByCluster) {
  const auto trajs = random_collection(25, 20);
  const auto c = lloyd_kmeans(trajs, 4, 2, 0);
  const auto rms = rms_distances(c, trajs);
  ASSERT_EQ(rms.size(), 4u);
  const auto sizes = c.cluster_sizes();
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(rms[k].size(), std::size_t(sizes[k]));
}

TEST(FixtureClustering, MonotoneAndDeterministic) {
  const auto trajs = fixture_trajectories();
  ASSERT_GE(trajs.size(), 20u);
  const auto a = lloyd_kmeans(trajs, 20, 10, 0);
  for (const auto& trace : a.objective_traces) {
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-12);
  }
  const auto b = lloyd_kmeans(trajs, 20, 10, 0);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.objective, b.objective);
}
