#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "barytrack/error.hpp"
#include "barytrack/rng.hpp"
#include "barytrack/sphere.hpp"
#include "barytrack/trajectory.hpp"

namespace barytrack {

inline constexpr int kMaxLloydIterations = 100;

/// Mean cosine energy between two trajectories over their shared grid.
inline double traj_distance(const RegisteredTrajectory& a, const RegisteredTrajectory& b) {
  if (!a.same_grid(b)) {
    throw Error(ErrorKind::GridMismatch, a.storm_ref + " and " + b.storm_ref +
                                             " are not on the same grid");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    sum += cosine_energy(a.positions[i], b.positions[i]);
  }
  return sum / double(a.positions.size());
}

/// Pointwise cosine barycentre of the selected members. With no index list,
/// every trajectory is a member.
inline RegisteredTrajectory barycentre_trajectory(const std::vector<RegisteredTrajectory>& trajs,
                                                  std::span<const std::size_t> members) {
  if (members.empty()) throw Error(ErrorKind::InvalidArgument, "barycentre of no trajectories");
  const auto& first = trajs.at(members.front());
  for (auto m : members) {
    if (!trajs.at(m).same_grid(first)) {
      throw Error(ErrorKind::GridMismatch, "barycentre members are not on the same grid");
    }
  }
  RegisteredTrajectory out;
  out.storm_ref = "barycentre";
  out.grid_step = first.grid_step;
  out.i_min = first.i_min;
  out.positions.reserve(first.positions.size());
  std::vector<UnitVector> column(members.size());
  for (std::size_t t = 0; t < first.positions.size(); ++t) {
    for (std::size_t j = 0; j < members.size(); ++j) column[j] = trajs[members[j]].positions[t];
    try {
      out.positions.push_back(cosine_barycentre(std::span<const UnitVector>(column)));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateMean) throw;
      throw Error(ErrorKind::DegenerateMean,
                  "at relative grid index " + std::to_string(first.i_min + int(t)));
    }
  }
  return out;
}

inline RegisteredTrajectory barycentre_trajectory(const std::vector<RegisteredTrajectory>& trajs) {
  std::vector<std::size_t> all(trajs.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return barycentre_trajectory(trajs, all);
}

struct Clustering {
  int k = 0;
  std::vector<int> assignments;
  std::vector<RegisteredTrajectory> centroids;
  double objective = 0.0;
  std::uint64_t seed = 0;
  int restarts = 0;
  /// ordering[raw centroid index] = reported label. Identity until
  /// order_west_to_east is applied.
  std::vector<int> ordering;
  /// Longitude (degrees) used to rank each centroid, indexed by label.
  std::vector<double> key_longitudes;
  int best_restart = 0;
  std::vector<double> restart_objectives;
  /// Objective after every assignment step, one history per restart.
  std::vector<std::vector<double>> objective_traces;

  std::vector<std::size_t> members(int label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (assignments[i] == label) out.push_back(i);
    }
    return out;
  }

  std::vector<int> cluster_sizes() const {
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
    return sizes;
  }
};

/// Sum over trajectories of the distance to the assigned centroid.
inline double clustering_objective(const std::vector<RegisteredTrajectory>& trajs,
                                   const std::vector<int>& assignments,
                                   const std::vector<RegisteredTrajectory>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    total += traj_distance(trajs[i], centroids[static_cast<std::size_t>(assignments[i])]);
  }
  return total;
}

namespace detail {

struct RestartResult {
  std::vector<int> assignments;
  std::vector<RegisteredTrajectory> centroids;
  double objective = 0.0;
  std::vector<double> trace;
};

// Nearest centroid per trajectory, ties to the lowest index.
inline double assign(const std::vector<RegisteredTrajectory>& trajs,
                     const std::vector<RegisteredTrajectory>& centroids, std::vector<int>& labels,
                     std::vector<double>& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    int best = 0;
    double best_d = traj_distance(trajs[i], centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = traj_distance(trajs[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = int(c);
      }
    }
    labels[i] = best;
    dist[i] = best_d;
    total += best_d;
  }
  return total;
}

inline void update(const std::vector<RegisteredTrajectory>& trajs, const std::vector<int>& labels,
                   std::vector<double> dist, std::vector<RegisteredTrajectory>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<std::vector<std::size_t>> groups(k);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    groups[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!groups[c].empty()) centroids[c] = barycentre_trajectory(trajs, groups[c]);
  }
  // Empty clusters take the trajectory currently farthest from its centroid.
  for (std::size_t c = 0; c < k; ++c) {
    if (!groups[c].empty()) continue;
    const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) -
                                              dist.begin());
    centroids[c] = trajs[far];
    dist[far] = -1.0;
  }
}

inline RestartResult run_restart(const std::vector<RegisteredTrajectory>& trajs, int k,
                                 std::uint64_t seed, int restart) {
  auto eng = rng::stream(seed, static_cast<std::uint64_t>(restart));
  std::vector<std::size_t> order(trajs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k entries are a uniform k-subset.
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    const auto j = i + static_cast<std::size_t>(rng::bounded(eng, order.size() - i));
    std::swap(order[i], order[j]);
  }

  RestartResult r;
  r.centroids.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) r.centroids.push_back(trajs[order[static_cast<std::size_t>(c)]]);

  std::vector<int> labels(trajs.size());
  std::vector<double> dist(trajs.size());
  r.trace.push_back(assign(trajs, r.centroids, labels, dist));

  bool converged = false;
  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    update(trajs, labels, dist, r.centroids);
    std::vector<int> next(trajs.size());
    r.trace.push_back(assign(trajs, r.centroids, next, dist));
    const bool unchanged = next == labels;
    labels = std::move(next);
    if (unchanged) {
      converged = true;
      break;
    }
  }
  if (!converged) update(trajs, labels, dist, r.centroids);

  r.assignments = std::move(labels);
  r.objective = clustering_objective(trajs, r.assignments, r.centroids);
  return r;
}

}  // namespace detail

/// Lloyd's algorithm with cosine-barycentre centroids, best of `restarts`
/// seeded runs. Deterministic in (trajs, k, restarts, seed).
inline Clustering lloyd_kmeans(const std::vector<RegisteredTrajectory>& trajs, int k, int restarts,
                               std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (restarts < 1) throw Error(ErrorKind::InvalidArgument, "restarts must be at least 1");
  if (trajs.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::TooFewTrajectories, std::to_string(trajs.size()) +
                                                   " trajectories cannot form " +
                                                   std::to_string(k) + " clusters");
  }
  for (const auto& t : trajs) {
    if (!t.same_grid(trajs.front())) {
      throw Error(ErrorKind::GridMismatch, "k-means input must be cropped to a common grid");
    }
  }

  Clustering out;
  out.k = k;
  out.seed = seed;
  out.restarts = restarts;
  detail::RestartResult best;
  for (int r = 0; r < restarts; ++r) {
    auto res = detail::run_restart(trajs, k, seed, r);
    out.restart_objectives.push_back(res.objective);
    out.objective_traces.push_back(res.trace);
    if (r == 0 || res.objective < best.objective) {
      out.best_restart = r;
      best = std::move(res);
    }
  }
  out.assignments = std::move(best.assignments);
  out.centroids = std::move(best.centroids);
  out.objective = best.objective;
  for (int c = 0; c < k; ++c) {
    out.centroids[static_cast<std::size_t>(c)].storm_ref = "centroid-" + std::to_string(c);
  }
  out.ordering.resize(static_cast<std::size_t>(k));
  std::iota(out.ordering.begin(), out.ordering.end(), 0);
  return out;
}

/// Longitude where a centroid first upcrosses `register_lat`, or its longitude
/// at relative time 0 (nearest grid time to 0 if 0 was cropped away).
inline double key_longitude(const RegisteredTrajectory& centroid, double register_lat) {
  const auto& pos = centroid.positions;
  for (std::size_t i = 0; i + 1 < pos.size(); ++i) {
    const double a = to_latlon(pos[i]).lat;
    const double b = to_latlon(pos[i + 1]).lat;
    if (a < register_lat && register_lat <= b) {
      return to_latlon(slerp(pos[i], pos[i + 1], (register_lat - a) / (b - a))).lon;
    }
  }
  const int zero = std::clamp(0, centroid.i_min, centroid.i_max());
  return to_latlon(centroid.at(zero)).lon;
}

/// Relabels clusters so label 0 is the most westerly by key longitude.
inline Clustering order_west_to_east(const Clustering& in, double register_lat) {
  const auto k = static_cast<std::size_t>(in.k);
  std::vector<double> keys(k);
  for (std::size_t c = 0; c < k; ++c) keys[c] = key_longitude(in.centroids[c], register_lat);
  std::vector<int> by_longitude(k);
  std::iota(by_longitude.begin(), by_longitude.end(), 0);
  std::stable_sort(by_longitude.begin(), by_longitude.end(),
                   [&](int a, int b) { return keys[std::size_t(a)] < keys[std::size_t(b)]; });

  Clustering out = in;
  std::vector<int> relabel(k);
  for (std::size_t label = 0; label < k; ++label) {
    const auto raw = static_cast<std::size_t>(by_longitude[label]);
    relabel[raw] = int(label);
    out.centroids[label] = in.centroids[raw];
    out.centroids[label].storm_ref = "centroid-" + std::to_string(label);
  }
  for (auto& a : out.assignments) a = relabel[static_cast<std::size_t>(a)];
  out.key_longitudes.resize(k);
  for (std::size_t label = 0; label < k; ++label) {
    out.key_longitudes[label] = keys[static_cast<std::size_t>(by_longitude[label])];
  }
  // Compose with any earlier relabeling so ordering still maps raw indices.
  for (auto& o : out.ordering) o = relabel[static_cast<std::size_t>(o)];
  return out;
}

/// Root-mean-square great-circle distance (km) between a trajectory and a
/// centroid over the shared grid.
inline double rms_distance_km(const RegisteredTrajectory& traj,
                              const RegisteredTrajectory& centroid) {
  if (!traj.same_grid(centroid)) throw Error(ErrorKind::GridMismatch, "rms grid mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < traj.positions.size(); ++i) {
    const double d = gc_distance(traj.positions[i], centroid.positions[i]);
    sum += d * d;
  }
  return kEarthRadiusKm * std::sqrt(sum / double(traj.positions.size()));
}

/// Per-cluster RMS distances (km), each list in input trajectory order.
inline std::vector<std::vector<double>> rms_distances(const Clustering& clustering,
                                                      const std::vector<RegisteredTrajectory>& trajs) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(clustering.k));
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto label = static_cast<std::size_t>(clustering.assignments[i]);
    out[label].push_back(rms_distance_km(trajs[i], clustering.centroids[label]));
  }
  return out;
}

}  // namespace barytrack
