// barytrack: HURDAT2 ingestion, barycentre k-means of storm tracks, and
// within-year run tests for temporal association of cluster labels.
//
// Best-track data: https://www.nhc.noaa.gov/data/#hurdat (Atlantic HURDAT2).

#include <iostream>

#include "CLI11.hpp"

#include "pipeline.hpp"

int main(int argc, char** argv) {
  using namespace barytrack::cli;

  RunConfig config;
  std::optional<double> reference_t, reference_t_beta;

  CLI::App app{"barytrack - barycentre clustering of hurricane tracks and run tests"};
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--data", config.data_path, "HURDAT2 best-track file");
  app.add_option("--labels", config.labels_path, "label table CSV (year,position,label) for `test`");
  app.add_option("--year-from", config.year_from, "first year (default 1950)");
  app.add_option("--year-to", config.year_to, "last year (default 2012)");
  app.add_option("--lower-lat", config.lower_lat, "lower crossing latitude (default 20)");
  app.add_option("--register-lat", config.register_lat, "registration latitude (default 35)");
  app.add_option("--grid-step", config.grid_step_seconds, "grid step in seconds (default 21600)");
  app.add_option("--k", config.k, "number of clusters (default 20)");
  app.add_option("--restarts", config.restarts, "Lloyd restarts (default 10)");
  app.add_option("--min-per-year", config.min_per_year, "minimum storms per year (default 3)");
  app.add_option("--beta", config.beta, "lag decay for T_beta (default 0.25)");
  app.add_option("--permutations", config.permutations, "permutation replicates (default 1000)");
  app.add_option("--seed", config.seed, "master RNG seed (default 0)");
  app.add_option("--out", config.output_dir, "output directory (default ./out)");
  app.add_option("--reference-t", reference_t, "published T to compare against in report.json");
  app.add_option("--reference-t-beta", reference_t_beta,
                 "published T_beta to compare against in report.json");

  auto* ingest = app.add_subcommand("ingest", "parse the data file and write counts.csv");
  auto* cluster = app.add_subcommand(
      "cluster", "register, crop and cluster; writes clustering.json, centroids.geojson, "
                 "trajectories.geojson, rms.csv, labels.csv");
  auto* test = app.add_subcommand(
      "test", "run tests on --labels or on a fresh clustering; writes report.json, qq.csv");
  auto* pipeline = app.add_subcommand("pipeline", "ingest + cluster + test, then manifest.json");

  CLI11_PARSE(app, argc, argv);
  config.reference_t = reference_t;
  config.reference_t_beta = reference_t_beta;

  try {
    if (ingest->parsed()) {
      const auto r = cmd_ingest(config);
      int total = 0, crossing = 0;
      for (const auto& [year, n] : r.totals) total += n;
      for (const auto& [year, n] : r.crossing) crossing += n;
      std::cout << r.storms.size() << " storms parsed; " << total << " in " << config.year_from
                << "-" << config.year_to << ", " << crossing << " crossing " << config.lower_lat
                << "N and " << config.register_lat << "N\n";
    } else if (cluster->parsed()) {
      const auto r = cmd_cluster(config);
      std::cout << r.cropped.trajectories.size() << " trajectories on grid [" << r.cropped.i_lo
                << ", " << r.cropped.i_hi << "], objective " << r.clustering.objective << "\n";
    } else if (test->parsed()) {
      const auto r = cmd_test(config);
      std::cout << "T = " << r.plain.t_observed << ", normal p = " << r.plain.p_normal
                << ", permutation p = " << r.plain.p_permutation.value_or(1.0) << "\n"
                << "T_beta = " << r.decayed.t_observed
                << ", permutation p = " << r.decayed.p_permutation.value_or(1.0) << "\n";
    } else if (pipeline->parsed()) {
      const auto files = cmd_pipeline(config);
      std::cout << files.size() << " artifacts written to " << config.output_dir << "\n";
    }
  } catch (const StageError& e) {
    std::cerr << "barytrack " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "barytrack: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
