#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "helicoid/dyadic.hpp"
#include "helicoid/exponents.hpp"
#include "helicoid/gridfn.hpp"

namespace helicoid {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Experiment driver configuration; ingested from JSON. Field defaults match
// the canonical desk-scale runs.
struct ExperimentConfig {
  std::string experiment;
  int d = 1, n = 2, k = 1, J = 8;
  std::vector<Rational> alpha;     // n+1 entries where required
  std::vector<double> s;           // average exponents
  double q = 1.0;
  int seeds = 100;
  std::uint64_t base_seed = 1;
  std::string weight_mode = "indicator";  // or "chi"
  int chi_M = 100;
  double growth_tol = 0.20;  // two-resolution stability allowance
  int threads = 0;           // 0 = hardware concurrency
  std::string out;
  std::string format = "csv";
  std::vector<int> scales;  // whitney frequency scales; empty = auto
  long long box = 0;        // frequency box bound; 0 = auto (N/2)
  Eigen::MatrixXi A;        // whitney matrix; empty = default for (n,k)
  std::string op = "product";  // loomis-whitney operator choice
  double endpoint_C = 20.0;    // pinned constant for the endpoint criterion
  std::vector<std::string> tuples_json;  // mixed-norm scan tuples

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string canonical_json() const;
  std::uint64_t hash() const;
  void validate() const;
};

struct Report {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::pair<std::string, bool>> verdicts;
  std::uint64_t config_hash = 0;
  std::string experiment;

  bool pass() const;
  std::string to_csv() const;
  std::string to_json() const;
};

Report run_local_estimate(const ExperimentConfig& cfg);
Report run_loomis_whitney(const ExperimentConfig& cfg);
Report run_mixed_norm_scan(const ExperimentConfig& cfg);
Report run_maximal_suite(const ExperimentConfig& cfg);
Report run_sparse_suite(const ExperimentConfig& cfg);
Report run_endpoint(const ExperimentConfig& cfg);
Report run_range_scan(const ExperimentConfig& cfg);

Report run_experiment(const ExperimentConfig& cfg);

// Recomputes the report for the config and compares it with the stored
// text (bit-identical rows); returns true on a match.
bool verify_report(const ExperimentConfig& cfg, const std::string& report_text);

// deterministic per-trial RNG stream and the two random input families
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial, std::uint64_t salt);
GridFunction bandlimited_gaussian(const GridGeometry& g, std::uint64_t seed,
                                  long long cutoff);
GridFunction random_dyadic_indicator(const GridGeometry& g, std::uint64_t seed,
                                     int min_torus_scale = 1, int max_torus_scale = 3);

// default generic Whitney matrices for small (n, k), tensored to dimension d
Eigen::MatrixXi default_whitney_matrix(int n, int k, int d);

}  // namespace helicoid
