#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "barytrack/error.hpp"
#include "barytrack/hurdat.hpp"
#include "barytrack/kmeans.hpp"
#include "barytrack/rng.hpp"
#include "barytrack/trajectory.hpp"

namespace barytrack {

inline constexpr double kOneSidedFivePercentZ = 1.645;
inline constexpr double kDefaultBeta = 0.25;
// Replicate statistics within this distance of the observed value count as ties.
inline constexpr double kStatisticTieTolerance = 1e-9;

/// Time-ordered cluster labels per year.
struct LabelTable {
  std::map<int, std::vector<int>> rows;
  int k = 0;

  std::size_t total_labels() const {
    std::size_t n = 0;
    for (const auto& [year, row] : rows) n += row.size();
    return n;
  }

  void validate(std::size_t min_row_length = 1) const {
    for (const auto& [year, row] : rows) {
      if (row.size() < min_row_length) {
        throw Error(ErrorKind::DegenerateRow,
                    "year " + std::to_string(year) + " has only " + std::to_string(row.size()) +
                        " labels");
      }
      for (int label : row) {
        if (label < 0 || label >= k) {
          throw Error(ErrorKind::InvalidArgument, "label " + std::to_string(label) +
                                                      " outside [0, " + std::to_string(k) + ")");
        }
      }
    }
  }
};

/// Groups clustered trajectories by registration year, ordered by
/// registration time, dropping years with fewer than `min_per_year` storms.
inline LabelTable build_label_table(const Clustering& clustering,
                                    const std::vector<RegisteredTrajectory>& trajs,
                                    std::size_t min_per_year = 3) {
  std::map<int, std::vector<std::pair<double, std::size_t>>> by_year;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    by_year[utc_year(trajs[i].registration_time)].emplace_back(trajs[i].registration_time, i);
  }
  LabelTable table;
  table.k = clustering.k;
  for (auto& [year, items] : by_year) {
    if (items.size() < min_per_year) continue;
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& row = table.rows[year];
    for (const auto& [time, idx] : items) row.push_back(clustering.assignments[idx]);
  }
  return table;
}

/// Number of positions i with row[i] == row[i - lag].
inline int lag_agreements(std::span<const int> row, std::size_t lag) {
  int count = 0;
  for (std::size_t i = lag; i < row.size(); ++i) count += row[i] == row[i - lag] ? 1 : 0;
  return count;
}

/// Which score statistic to evaluate: consecutive agreements, or agreements at
/// every lag weighted by beta^(lag - 1).
struct Statistic {
  enum class Kind { Plain, Decayed };
  Kind kind = Kind::Plain;
  double beta = kDefaultBeta;

  static Statistic plain() { return {Kind::Plain, 1.0}; }
  static Statistic decayed(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "decay parameter beta must lie in (0, 1)");
    }
    return {Kind::Decayed, beta};
  }

  std::string name() const { return kind == Kind::Plain ? "T" : "T_beta"; }

  double evaluate(std::span<const int> row) const {
    if (kind == Kind::Plain) return lag_agreements(row, 1);
    double total = 0.0;
    double weight = 1.0;
    for (std::size_t lag = 1; lag < row.size(); ++lag) {
      total += weight * lag_agreements(row, lag);
      weight *= beta;
    }
    return total;
  }
};

struct StatisticValue {
  double total = 0.0;
  std::vector<std::pair<int, double>> per_year;
};

inline StatisticValue evaluate_statistic(const LabelTable& table, const Statistic& stat) {
  StatisticValue out;
  for (const auto& [year, row] : table.rows) {
    const double v = stat.evaluate(row);
    out.per_year.emplace_back(year, v);
    out.total += v;
  }
  return out;
}

inline StatisticValue run_statistic(const LabelTable& table) {
  return evaluate_statistic(table, Statistic::plain());
}

inline StatisticValue run_statistic_decayed(const LabelTable& table, double beta) {
  return evaluate_statistic(table, Statistic::decayed(beta));
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of the consecutive-agreement count of a uniformly random
/// arrangement of the given label multiplicities.
inline Moments conditional_moments_from_counts(std::span<const int> multiplicities) {
  double h = 0.0, m2 = 0.0, m3 = 0.0;
  for (int r : multiplicities) {
    h += r;
    m2 += double(r) * (r - 1);
    m3 += double(r) * (r - 1) * (r - 2);
  }
  if (h < 2.0) throw Error(ErrorKind::DegenerateRow, "conditional moments need at least 2 labels");
  Moments m;
  m.mean = m2 / h;
  m.variance = m2 * m2 / (h * h * (h - 1.0)) + (h - 3.0) * m2 / (h * (h - 1.0)) -
               2.0 * m3 / (h * (h - 1.0));
  if (m.variance < 0.0 && m.variance > -1e-12) m.variance = 0.0;
  return m;
}

inline std::vector<int> multiplicities(std::span<const int> row) {
  std::map<int, int> counts;
  for (int label : row) ++counts[label];
  std::vector<int> out;
  for (const auto& [label, c] : counts) out.push_back(c);
  return out;
}

inline Moments conditional_moments(std::span<const int> row) {
  if (row.size() < 2) throw Error(ErrorKind::DegenerateRow, "conditional moments need h >= 2");
  return conditional_moments_from_counts(multiplicities(row));
}

/// k (e^theta + k - 1)^(h - 1).
inline double partition_function(double theta, int h, int k) {
  if (!(theta >= 0.0) || h < 1 || k < 2) {
    throw Error(ErrorKind::InvalidArgument, "partition_function needs theta >= 0, h >= 1, k >= 2");
  }
  return k * std::pow(std::exp(theta) + k - 1.0, h - 1);
}

inline double upper_tail_normal(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

struct TestReport {
  std::string statistic = "T";
  double t_observed = 0.0;
  std::vector<std::pair<int, double>> per_year;
  double cond_mean = 0.0;
  double cond_variance = 0.0;
  /// "exact" for the closed-form moments, "permutation" when the moments are
  /// estimated from the replicates.
  std::string moments_source = "exact";
  double z_score = 0.0;
  double p_normal = 1.0;
  double critical_value_5pct = 0.0;
  std::optional<double> p_permutation;
  int n_permutations = 0;
  int n_exceedances = 0;
  std::optional<double> beta;
  std::uint64_t seed = 0;
  std::size_t n_years = 0;
  std::size_t n_labels = 0;
};

namespace detail {

inline void fill_normal(TestReport& r) {
  const double sd = std::sqrt(r.cond_variance);
  r.critical_value_5pct = r.cond_mean + kOneSidedFivePercentZ * sd;
  if (r.cond_variance <= 0.0) {
    if (std::abs(r.t_observed - r.cond_mean) > kStatisticTieTolerance) {
      throw Error(ErrorKind::ZeroVariance, "statistic has zero variance but differs from its mean");
    }
    r.z_score = 0.0;
    r.p_normal = 1.0;
    return;
  }
  r.z_score = (r.t_observed - r.cond_mean) / sd;
  r.p_normal = upper_tail_normal(r.z_score);
}

inline void require_years(const LabelTable& table) {
  if (table.rows.empty()) throw Error(ErrorKind::NoYears, "label table has no years");
}

}  // namespace detail

/// Plain run statistic referred to a normal law with the exact conditional
/// mean and variance summed over years.
inline TestReport normal_test(const LabelTable& table) {
  detail::require_years(table);
  table.validate(2);
  TestReport r;
  const auto value = run_statistic(table);
  r.t_observed = value.total;
  r.per_year = value.per_year;
  for (const auto& [year, row] : table.rows) {
    const auto m = conditional_moments(row);
    r.cond_mean += m.mean;
    r.cond_variance += m.variance;
  }
  r.n_years = table.rows.size();
  r.n_labels = table.total_labels();
  detail::fill_normal(r);
  return r;
}

/// Statistic values for n tables, each obtained by independently shuffling
/// every year's row. Replicate i uses its own stream derived from (seed, i).
inline std::vector<double> permutation_replicates(const LabelTable& table, const Statistic& stat,
                                                  int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one permutation");
  std::vector<double> out(static_cast<std::size_t>(n));
  std::vector<int> scratch;
  for (int i = 0; i < n; ++i) {
    auto eng = rng::stream(seed, static_cast<std::uint64_t>(i));
    double total = 0.0;
    for (const auto& [year, row] : table.rows) {
      scratch.assign(row.begin(), row.end());
      rng::shuffle(std::span<int>(scratch), eng);
      total += stat.evaluate(scratch);
    }
    out[static_cast<std::size_t>(i)] = total;
  }
  return out;
}

inline Moments sample_moments(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) return m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.variance = ss / double(xs.size() - 1);
  }
  return m;
}

/// Within-year permutation test with the add-one p-value (1 + #{rep >= obs}) / (n + 1).
/// Plain statistics also carry the exact-moment normal approximation; decayed
/// ones use the replicate mean and variance.
inline TestReport permutation_test(const LabelTable& table, const Statistic& stat, int n,
                                   std::uint64_t seed) {
  detail::require_years(table);
  table.validate(1);
  TestReport r;
  if (stat.kind == Statistic::Kind::Plain) {
    r = normal_test(table);
  } else {
    const auto value = evaluate_statistic(table, stat);
    r.statistic = stat.name();
    r.t_observed = value.total;
    r.per_year = value.per_year;
    r.beta = stat.beta;
    r.n_years = table.rows.size();
    r.n_labels = table.total_labels();
  }
  const auto reps = permutation_replicates(table, stat, n, seed);
  for (double v : reps) r.n_exceedances += v >= r.t_observed - kStatisticTieTolerance ? 1 : 0;
  r.n_permutations = n;
  r.seed = seed;
  r.p_permutation = (1.0 + r.n_exceedances) / (n + 1.0);
  if (stat.kind == Statistic::Kind::Decayed) {
    const auto m = sample_moments(reps);
    r.cond_mean = m.mean;
    r.cond_variance = m.variance;
    r.moments_source = "permutation";
    detail::fill_normal(r);
  }
  return r;
}

struct QQData {
  std::vector<double> theoretical;
  std::vector<double> standardized;
};

/// Sorted standardized values paired with standard normal quantiles at (i - 0.5) / n.
inline QQData qq_pairs(std::vector<double> values, double mean, double sd) {
  if (values.size() < 2) throw Error(ErrorKind::InvalidArgument, "QQ data needs n >= 2");
  if (!(sd > 0.0)) throw Error(ErrorKind::ZeroVariance, "cannot standardize with zero variance");
  std::sort(values.begin(), values.end());
  QQData out;
  const double n = double(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.theoretical.push_back(normal_quantile((double(i) + 0.5) / n));
    out.standardized.push_back((values[i] - mean) / sd);
  }
  return out;
}

/// QQ data for permutation replicates of a statistic, standardized by the
/// exact conditional moments (plain) or the replicate moments (decayed).
inline QQData qq_data(const LabelTable& table, const Statistic& stat, int n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "QQ data needs n >= 2");
  auto reps = permutation_replicates(table, stat, n, seed);
  Moments m;
  if (stat.kind == Statistic::Kind::Plain) {
    const auto r = normal_test(table);
    m = {r.cond_mean, r.cond_variance};
  } else {
    m = sample_moments(reps);
  }
  if (!(m.variance > 0.0)) throw Error(ErrorKind::ZeroVariance, "conditional variance is zero");
  return qq_pairs(std::move(reps), m.mean, std::sqrt(m.variance));
}

}  // namespace barytrack
