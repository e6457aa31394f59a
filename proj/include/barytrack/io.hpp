#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "barytrack/error.hpp"
#include "barytrack/hurdat.hpp"
#include "barytrack/kmeans.hpp"
#include "barytrack/stats.hpp"
#include "barytrack/trajectory.hpp"

namespace barytrack::io {

using Json = nlohmann::ordered_json;

inline std::string iso_utc(double epoch_seconds) {
  using namespace std::chrono;
  const auto secs = static_cast<long long>(std::llround(epoch_seconds));
  const sys_seconds tp{seconds{secs}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                int(hms.minutes().count()), int(hms.seconds().count()));
  return buf;
}

// ---- label table CSV: year,position,label (position is 1-based) ----

inline void write_label_csv(std::ostream& out, const LabelTable& table) {
  out << "year,position,label\n";
  for (const auto& [year, row] : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << year << ',' << i + 1 << ',' << row[i] << '\n';
  }
}

/// Reads a label table. `k` <= 0 infers the alphabet size as max label + 1.
inline LabelTable read_label_csv(std::istream& in, int k = 0) {
  std::map<int, std::map<int, int>> cells;
  std::string line;
  std::size_t number = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = detail::split_fields(line);
    if (f.empty() || (f.size() == 1 && f[0].empty())) continue;
    if (number == 1 && f.size() == 3 && f[0] == "year") continue;
    const auto year = f.size() == 3 ? detail::parse_number<int>(f[0]) : std::nullopt;
    const auto pos = f.size() == 3 ? detail::parse_number<int>(f[1]) : std::nullopt;
    const auto label = f.size() == 3 ? detail::parse_number<int>(f[2]) : std::nullopt;
    if (!year || !pos || !label || *pos < 1 || *label < 0) {
      throw ParseError(ErrorKind::MalformedRow, number, "expected 'year,position,label'");
    }
    if (!cells[*year].emplace(*pos, *label).second) {
      throw ParseError(ErrorKind::MalformedRow, number, "duplicate position");
    }
    max_label = std::max(max_label, *label);
  }
  LabelTable table;
  table.k = k > 0 ? k : max_label + 1;
  for (const auto& [year, row] : cells) {
    int expect = 1;
    auto& out = table.rows[year];
    for (const auto& [pos, label] : row) {
      if (pos != expect++) {
        throw Error(ErrorKind::InvalidArgument,
                    "positions for year " + std::to_string(year) + " are not contiguous from 1");
      }
      out.push_back(label);
    }
  }
  table.validate(1);
  return table;
}

// ---- reports ----

inline Json to_json(const TestReport& r) {
  Json j;
  j["statistic"] = r.statistic;
  if (r.beta) j["beta"] = *r.beta;
  j["T_observed"] = r.t_observed;
  j["n_years"] = r.n_years;
  j["n_labels"] = r.n_labels;
  j["cond_mean"] = r.cond_mean;
  j["cond_variance"] = r.cond_variance;
  j["moments_source"] = r.moments_source;
  j["z_score"] = r.z_score;
  j["p_normal"] = r.p_normal;
  j["critical_value_5pct"] = r.critical_value_5pct;
  if (r.p_permutation) {
    j["p_permutation"] = *r.p_permutation;
    j["n_permutations"] = r.n_permutations;
    j["n_exceedances"] = r.n_exceedances;
    j["seed"] = r.seed;
  }
  Json per_year = Json::array();
  for (const auto& [year, v] : r.per_year) per_year.push_back({{"year", year}, {"T_y", v}});
  j["per_year"] = std::move(per_year);
  return j;
}

inline Json to_json(const Clustering& c, const std::vector<RegisteredTrajectory>& trajs) {
  Json j;
  j["k"] = c.k;
  j["seed"] = c.seed;
  j["restarts"] = c.restarts;
  j["best_restart"] = c.best_restart;
  j["objective"] = c.objective;
  j["restart_objectives"] = c.restart_objectives;
  j["ordering"] = c.ordering;
  j["cluster_sizes"] = c.cluster_sizes();
  j["key_longitudes"] = c.key_longitudes;
  if (!trajs.empty()) {
    j["grid"] = {{"i_lo", trajs.front().i_min},
                 {"i_hi", trajs.front().i_max()},
                 {"step_seconds", trajs.front().grid_step}};
  }
  Json assignments = Json::array();
  for (std::size_t i = 0; i < c.assignments.size(); ++i) {
    Json a;
    if (i < trajs.size()) {
      a["storm"] = trajs[i].storm_ref;
      a["registration_time"] = iso_utc(trajs[i].registration_time);
    }
    a["label"] = c.assignments[i];
    assignments.push_back(std::move(a));
  }
  j["assignments"] = std::move(assignments);
  return j;
}

namespace detail {

inline Json line_string(const RegisteredTrajectory& t) {
  Json coords = Json::array();
  for (const auto& p : t.positions) {
    const auto ll = to_latlon(p);
    // Six decimals is ~0.1 m, well below the data precision.
    coords.push_back({std::round(ll.lon * 1e6) / 1e6, std::round(ll.lat * 1e6) / 1e6});
  }
  return {{"type", "LineString"}, {"coordinates", std::move(coords)}};
}

inline Json relative_hours(const RegisteredTrajectory& t) {
  Json hours = Json::array();
  for (int i = t.i_min; i <= t.i_max(); ++i) hours.push_back(double(i * t.grid_step) / 3600.0);
  return hours;
}

}  // namespace detail

/// Registered trajectories as LineString features; `labels` may be empty.
inline Json trajectories_geojson(const std::vector<RegisteredTrajectory>& trajs,
                                 const std::vector<int>& labels = {}) {
  Json features = Json::array();
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& t = trajs[i];
    Json props;
    props["storm"] = t.storm_ref;
    props["registration_time"] = iso_utc(t.registration_time);
    if (i < labels.size()) props["cluster"] = labels[i];
    props["i_min"] = t.i_min;
    props["i_max"] = t.i_max();
    props["relative_time_hours"] = detail::relative_hours(t);
    features.push_back(
        {{"type", "Feature"}, {"properties", std::move(props)}, {"geometry", detail::line_string(t)}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

inline Json centroids_geojson(const Clustering& c) {
  Json features = Json::array();
  const auto sizes = c.cluster_sizes();
  for (std::size_t label = 0; label < c.centroids.size(); ++label) {
    const auto& t = c.centroids[label];
    Json props;
    props["cluster"] = label;
    props["size"] = sizes[label];
    if (label < c.key_longitudes.size()) props["key_longitude"] = c.key_longitudes[label];
    props["i_min"] = t.i_min;
    props["i_max"] = t.i_max();
    props["relative_time_hours"] = detail::relative_hours(t);
    features.push_back(
        {{"type", "Feature"}, {"properties", std::move(props)}, {"geometry", detail::line_string(t)}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

inline void write_rms_csv(std::ostream& out, const Clustering& c,
                          const std::vector<RegisteredTrajectory>& trajs) {
  out << "storm,cluster,rms_km\n";
  char buf[64];
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto label = static_cast<std::size_t>(c.assignments[i]);
    std::snprintf(buf, sizeof buf, "%.3f", rms_distance_km(trajs[i], c.centroids[label]));
    out << trajs[i].storm_ref << ',' << label << ',' << buf << '\n';
  }
}

inline void write_qq_csv(std::ostream& out, const QQData& qq) {
  out << "theoretical,standardized\n";
  char buf[96];
  for (std::size_t i = 0; i < qq.theoretical.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9f,%.9f\n", qq.theoretical[i], qq.standardized[i]);
    out << buf;
  }
}

}  // namespace barytrack::io
