#include "pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

namespace barytrack::cli {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
auto in_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const io::Json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_output(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  write_text(dir / "run_config.ini", config.to_ini());
  return dir;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  crossing().validate();
  if (grid_step_seconds <= 0) throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (restarts < 1) throw Error(ErrorKind::InvalidArgument, "restarts must be at least 1");
  if (min_per_year < 1) throw Error(ErrorKind::InvalidArgument, "min-per-year must be at least 1");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::InvalidArgument, "beta must lie in (0, 1)");
  if (permutations < 2) throw Error(ErrorKind::InvalidArgument, "permutations must be at least 2");
}

std::string RunConfig::to_ini() const {
  std::ostringstream out;
  out << "data = \"" << data_path << "\"\n";
  if (!labels_path.empty()) out << "labels = \"" << labels_path << "\"\n";
  out << "year-from = " << year_from << "\n"
      << "year-to = " << year_to << "\n"
      << "lower-lat = " << format_double(lower_lat) << "\n"
      << "register-lat = " << format_double(register_lat) << "\n"
      << "grid-step = " << grid_step_seconds << "\n"
      << "k = " << k << "\n"
      << "restarts = " << restarts << "\n"
      << "min-per-year = " << min_per_year << "\n"
      << "beta = " << format_double(beta) << "\n"
      << "permutations = " << permutations << "\n"
      << "seed = " << seed << "\n"
      << "out = \"" << output_dir << "\"\n";
  if (reference_t) out << "reference-t = " << format_double(*reference_t) << "\n";
  if (reference_t_beta) out << "reference-t-beta = " << format_double(*reference_t_beta) << "\n";
  return out.str();
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::vector<Storm> load_storms(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
  auto storms = parse_hurdat2(in);
  if (storms.empty()) throw ParseError(ErrorKind::MalformedHeader, 0, "no storms in '" + path + "'");
  return storms;
}

IngestResult cmd_ingest(const RunConfig& config) {
  return in_stage("ingest", [&] {
    config.validate();
    IngestResult r;
    r.storms = load_storms(config.data_path);
    r.totals = count_by_year(r.storms, config.year_from, config.year_to);
    for (const auto& [year, n] : r.totals) r.crossing[year] = 0;
    // Crossing counts are attributed like the totals: by year of first fix.
    for (const auto& s : r.storms) {
      if (s.points.size() < 2) continue;
      const int year = s.points.front().timestamp.year;
      if (year < config.year_from || year > config.year_to) continue;
      if (!find_upcrossings(s, config.lower_lat).empty() &&
          !find_upcrossings(s, config.register_lat).empty()) {
        ++r.crossing[year];
      }
    }
    const auto dir = prepare_output(config);
    std::ostringstream csv;
    csv << "year,total,crossing\n";
    for (const auto& [year, n] : r.totals) csv << year << ',' << n << ',' << r.crossing[year] << '\n';
    write_text(dir / "counts.csv", csv.str());
    return r;
  });
}

ClusterResult cluster_storms(const std::vector<Storm>& storms, const RunConfig& config) {
  ClusterResult r;
  const auto selected = select_and_register(storms, config.crossing(), config.grid_step_seconds);
  r.registered = exclude_sparse_years(selected, static_cast<std::size_t>(config.min_per_year));
  if (r.registered.size() < static_cast<std::size_t>(config.k)) {
    throw Error(ErrorKind::TooFewTrajectories,
                std::to_string(r.registered.size()) + " qualifying trajectories for k = " +
                    std::to_string(config.k));
  }
  r.cropped = crop_common(r.registered);
  const auto raw = lloyd_kmeans(r.cropped.trajectories, config.k, config.restarts, config.seed);
  r.clustering = order_west_to_east(raw, config.register_lat);
  r.labels = build_label_table(r.clustering, r.cropped.trajectories,
                               static_cast<std::size_t>(config.min_per_year));
  return r;
}

ClusterResult cmd_cluster(const RunConfig& config) {
  const auto storms = in_stage("ingest", [&] {
    config.validate();
    return load_storms(config.data_path);
  });
  return in_stage("cluster", [&] {
    auto r = cluster_storms(storms, config);
    const auto dir = prepare_output(config);
    const auto& trajs = r.cropped.trajectories;
    write_json(dir / "clustering.json", io::to_json(r.clustering, trajs));
    write_json(dir / "centroids.geojson", io::centroids_geojson(r.clustering));
    write_json(dir / "trajectories.geojson",
               io::trajectories_geojson(r.registered, r.clustering.assignments));
    std::ostringstream rms;
    io::write_rms_csv(rms, r.clustering, trajs);
    write_text(dir / "rms.csv", rms.str());
    std::ostringstream labels;
    io::write_label_csv(labels, r.labels);
    write_text(dir / "labels.csv", labels.str());
    return r;
  });
}

TestResult test_labels(const LabelTable& table, const RunConfig& config) {
  if (table.rows.empty()) throw Error(ErrorKind::NoYears, "label table has no years");
  const auto seed = config.seed;
  TestResult r;
  r.plain = permutation_test(table, Statistic::plain(), config.permutations, seed);
  r.decayed = permutation_test(table, Statistic::decayed(config.beta), config.permutations, seed);
  r.qq = qq_data(table, Statistic::plain(), config.permutations, seed);
  return r;
}

TestResult cmd_test(const RunConfig& config) {
  LabelTable table;
  if (!config.labels_path.empty()) {
    table = in_stage("test", [&] {
      config.validate();
      std::ifstream in(config.labels_path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open label table '" + config.labels_path + "'");
      return io::read_label_csv(in);
    });
  } else {
    table = cmd_cluster(config).labels;
  }
  return in_stage("test", [&] {
    auto r = test_labels(table, config);
    const auto dir = prepare_output(config);
    io::Json report;
    report["input"] = config.labels_path.empty() ? "clustering" : "label-table";
    report["k"] = table.k;
    auto add_reference = [](io::Json& j, const TestReport& rep, std::optional<double> ref) {
      if (!ref) return;
      j["reference_T_observed"] = *ref;
      j["deviation_from_reference"] = rep.t_observed - *ref;
      // References are quoted to two decimals.
      j["matches_reference"] = std::abs(rep.t_observed - *ref) <= 0.005;
    };
    auto plain = io::to_json(r.plain);
    add_reference(plain, r.plain, config.reference_t);
    auto decayed = io::to_json(r.decayed);
    add_reference(decayed, r.decayed, config.reference_t_beta);
    report["plain"] = std::move(plain);
    report["decayed"] = std::move(decayed);
    write_json(dir / "report.json", report);
    std::ostringstream qq;
    io::write_qq_csv(qq, r.qq);
    write_text(dir / "qq.csv", qq.str());
    return r;
  });
}

std::map<std::string, std::string> cmd_pipeline(const RunConfig& config) {
  RunConfig staged = config;
  staged.labels_path.clear();
  cmd_ingest(staged);
  // cmd_test re-clusters from the data when no label table is given, which
  // also writes every clustering artifact.
  cmd_test(staged);
  return in_stage("manifest", [&] {
    const fs::path dir(staged.output_dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
        names.push_back(entry.path().filename().string());
      }
    }
    std::sort(names.begin(), names.end());
    std::map<std::string, std::string> hashes;
    io::Json files = io::Json::array();
    for (const auto& name : names) {
      const auto hash = sha256_hex(dir / name);
      hashes[name] = hash;
      files.push_back({{"path", name}, {"bytes", fs::file_size(dir / name)}, {"sha256", hash}});
    }
    write_json(dir / "manifest.json", io::Json{{"files", std::move(files)}});
    return hashes;
  });
}

}  // namespace barytrack::cli
