#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "barytrack/error.hpp"
#include "barytrack/hurdat.hpp"
#include "barytrack/sphere.hpp"

namespace barytrack {

inline constexpr std::int64_t kDefaultGridStepSeconds = 21600;

/// Latitude thresholds and year window used to select storms.
struct CrossingSpec {
  double lower_lat = 20.0;
  double register_lat = 35.0;
  int year_from = 1950;
  int year_to = 2012;

  void validate() const {
    if (!(lower_lat < register_lat) || !(lower_lat > -90.0) || !(register_lat < 90.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  "crossing latitudes must satisfy -90 < lower_lat < register_lat < 90");
    }
    if (year_from > year_to) throw Error(ErrorKind::InvalidArgument, "empty year range");
  }
};

/// A storm sampled on a uniform grid of times relative to its registration
/// instant: positions[j] sits at relative time (i_min + j) * grid_step.
struct RegisteredTrajectory {
  std::string storm_ref;
  double registration_time = 0.0;  // seconds since epoch
  std::int64_t grid_step = kDefaultGridStepSeconds;
  int i_min = 0;
  std::vector<UnitVector> positions;

  int i_max() const { return i_min + static_cast<int>(positions.size()) - 1; }
  const UnitVector& at(int i) const { return positions.at(static_cast<std::size_t>(i - i_min)); }
  bool same_grid(const RegisteredTrajectory& o) const {
    return i_min == o.i_min && positions.size() == o.positions.size() && grid_step == o.grid_step;
  }
};

struct Upcrossing {
  std::size_t segment;  // crossing lies between points[segment] and points[segment + 1]
  double time;          // seconds since epoch, linearly interpolated
};

/// Every segment with lat_i < lat <= lat_{i+1}, in track order.
inline std::vector<Upcrossing> find_upcrossings(const Storm& storm, double lat) {
  std::vector<Upcrossing> out;
  const auto& pts = storm.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i].latitude;
    const double b = pts[i + 1].latitude;
    if (a < lat && lat <= b) {
      const double ta = double(pts[i].timestamp.epoch_seconds());
      const double tb = double(pts[i + 1].timestamp.epoch_seconds());
      const double frac = (lat - a) / (b - a);
      out.push_back({i, ta + frac * (tb - ta)});
    }
  }
  return out;
}

/// Position of the storm at an absolute time inside its observed span, by slerp
/// between the bracketing fixes.
inline UnitVector position_at(const Storm& storm, const std::vector<double>& times, double t) {
  const auto& pts = storm.points;
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  if (hi == 0) hi = 1;
  if (hi >= times.size()) hi = times.size() - 1;
  const std::size_t lo = hi - 1;
  const UnitVector a = from_latlon(pts[lo].latitude, pts[lo].longitude);
  const UnitVector b = from_latlon(pts[hi].latitude, pts[hi].longitude);
  const double frac = (t - times[lo]) / (times[hi] - times[lo]);
  if (frac <= 0.0) return a;
  if (frac >= 1.0) return b;
  return slerp(a, b, frac);
}

/// Registers one storm at `registration_time` and resamples it over the
/// largest grid range inside its observed time span.
inline RegisteredTrajectory register_storm(const Storm& storm, double registration_time,
                                           std::int64_t grid_step = kDefaultGridStepSeconds) {
  if (storm.points.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, storm.id() + " needs at least two fixes");
  }
  std::vector<double> times;
  times.reserve(storm.points.size());
  for (const auto& p : storm.points) times.push_back(double(p.timestamp.epoch_seconds()));

  const double step = double(grid_step);
  constexpr double eps = 1e-6;
  const int i_min = static_cast<int>(std::ceil((times.front() - registration_time) / step - eps));
  const int i_max = static_cast<int>(std::floor((times.back() - registration_time) / step + eps));

  RegisteredTrajectory traj;
  traj.storm_ref = storm.id();
  traj.registration_time = registration_time;
  traj.grid_step = grid_step;
  traj.i_min = i_min;
  for (int i = i_min; i <= i_max; ++i) {
    const double t = std::clamp(registration_time + i * step, times.front(), times.back());
    traj.positions.push_back(position_at(storm, times, t));
  }
  return traj;
}

/// Keeps storms in the year window that upcross both latitudes, registered at
/// their first upcrossing of `spec.register_lat`.
inline std::vector<RegisteredTrajectory> select_and_register(
    const std::vector<Storm>& storms, const CrossingSpec& spec,
    std::int64_t grid_step = kDefaultGridStepSeconds) {
  spec.validate();
  std::vector<RegisteredTrajectory> out;
  for (const auto& s : storms) {
    if (s.points.size() < 2) continue;
    const int year = s.points.front().timestamp.year;
    if (year < spec.year_from || year > spec.year_to) continue;
    if (find_upcrossings(s, spec.lower_lat).empty()) continue;
    const auto reg = find_upcrossings(s, spec.register_lat);
    if (reg.empty()) continue;
    out.push_back(register_storm(s, reg.front().time, grid_step));
  }
  return out;
}

/// Drops trajectories whose registration year has fewer than `min_per_year`
/// members.
inline std::vector<RegisteredTrajectory> exclude_sparse_years(
    const std::vector<RegisteredTrajectory>& trajs, std::size_t min_per_year) {
  std::map<int, std::size_t> per_year;
  for (const auto& t : trajs) ++per_year[utc_year(t.registration_time)];
  std::vector<RegisteredTrajectory> out;
  for (const auto& t : trajs) {
    if (per_year[utc_year(t.registration_time)] >= min_per_year) out.push_back(t);
  }
  return out;
}

struct CroppedCollection {
  std::vector<RegisteredTrajectory> trajectories;
  int i_lo = 0;
  int i_hi = 0;
};

/// Restricts every trajectory to the grid range they all cover.
inline CroppedCollection crop_common(const std::vector<RegisteredTrajectory>& trajs) {
  if (trajs.empty()) throw Error(ErrorKind::InvalidArgument, "crop_common needs input");
  CroppedCollection out;
  out.i_lo = trajs.front().i_min;
  out.i_hi = trajs.front().i_max();
  for (const auto& t : trajs) {
    if (t.grid_step != trajs.front().grid_step) {
      throw Error(ErrorKind::GridMismatch, "trajectories use different grid steps");
    }
    out.i_lo = std::max(out.i_lo, t.i_min);
    out.i_hi = std::min(out.i_hi, t.i_max());
  }
  if (out.i_lo > out.i_hi) {
    throw Error(ErrorKind::EmptyOverlap, "registered time ranges have no common grid time");
  }
  out.trajectories.reserve(trajs.size());
  for (const auto& t : trajs) {
    RegisteredTrajectory c = t;
    c.i_min = out.i_lo;
    const auto first = t.positions.begin() + (out.i_lo - t.i_min);
    c.positions.assign(first, first + (out.i_hi - out.i_lo + 1));
    out.trajectories.push_back(std::move(c));
  }
  return out;
}

}  // namespace barytrack
