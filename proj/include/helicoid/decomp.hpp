#pragma once

#include <map>
#include <optional>
#include <vector>

#include "helicoid/exponents.hpp"
#include "helicoid/wavepackets.hpp"

namespace helicoid {

// Coefficients <f, phi^j_{s_j}> for every tile of S. The pairing is
// conjugate-linear in the packet for slots 0..n-1 and plain (no conjugation)
// for the last slot, which is exactly what makes the (n+1)-linear form the
// dual pairing of the operator.
Eigen::ArrayXcd slot_coefficients(const TileCollection& S, PacketCache& cache,
                                  const GridFunction& f, int slot);

// Time-frequency size (exact): sup over candidate tops t in the member set
// of ((1/|R_t|) sum_{s_j lesssim' t_j} |coef_s|^2)^{1/2}. C0 = 0 uses S.C0.
double size(const TileCollection& S, const std::vector<size_t>& members, int j,
            const Eigen::ArrayXcd& coefs, int C0 = 0);

// Labeled upper-bound mode for large collections: the exact top-sums are
// evaluated on a deterministic stratified sample of tops and inflated by
// `slack`.
struct SampledSize {
  double upper_bound;
  bool sampled_upper_bound;  // always true; the label travels with the value
};
SampledSize size_sampled_upper_bound(const TileCollection& S,
                                     const std::vector<size_t>& members, int j,
                                     const Eigen::ArrayXcd& coefs, std::uint64_t seed,
                                     int top_samples = 256, double slack = 2.0,
                                     int C0 = 0);

struct DecomposeResult {
  std::vector<size_t> remaining;  // S'
  std::vector<Tree> trees;        // extracted forest, levels unset
  double energy_sum = 0.0;        // sum of |R_T| over extracted trees
  double energy_budget = 0.0;     // lambda^{-2} ||f chi_{R0}||_2^2 (or global)
  double energy_ratio = 0.0;
};

struct DecomposeOptions {
  int chi_M = 100;
  int C0 = 0;  // 0 = collection's constant
};

// Greedy tree extraction: while size > lambda/2, pick the maximal offending
// lacunary top (scale descending, then lexicographic), extract its lacunary
// members together with everything <=-below the top in slot j. Throws
// size-exceeds-lambda when the precondition fails.
DecomposeResult decompose(const TileCollection& S, const std::vector<size_t>& members,
                          const GridFunction& f, int j, const Eigen::ArrayXcd& coefs,
                          double lambda, const std::optional<DyadicCube>& R0,
                          DecomposeOptions opt = {});

struct Forest {
  int level = 0;  // size ~ 2^{-level}; INT_MAX marks the zero-coefficient leftovers
  int slot = 0;
  std::vector<Tree> trees;
  double energy_sum = 0.0;
  double energy_budget = 0.0;
};

constexpr int kSentinelLevel = INT32_MAX;

struct ForestDecompositionOptions {
  int max_levels = 40;
  int chi_M = 100;
};

// Iterates the decomposition at lambda = 2^{-l} downward per slot until the
// remaining size vanishes; zero-coefficient leftovers land on the sentinel
// level as single-tile trees.
std::map<int, std::vector<Forest>> forest_decomposition(
    const TileCollection& S, const std::vector<GridFunction>& fs, PacketCache& cache,
    ForestDecompositionOptions opt = {});

// Forest report: per level, tree tops, energies and the measured
// constants, as JSON text.
std::string forest_report_json(const std::map<int, std::vector<Forest>>& forests);

// size / spatial-size ratio (John-Nirenberg style control); requires
// |f| <= 1_E pointwise for the indicator function E.
double john_nirenberg_check(const TileCollection& S, const GridFunction& f, int j,
                            const GridFunction& E, PacketCache& cache, int chi_M = 100);

struct LocalEstimateResult {
  double form_abs = 0.0;
  double bound = 0.0;  // prod_j (size~_{R0} 1_{E_j})^{1-alpha_j} * |R0|
  double ratio = 0.0;
  bool anomaly = false;  // zero bound with a nonzero form
};

// Empirical constant of the localized form estimate: |Lambda_{S(R0)}(1_E)| over
// the product of localized spatial sizes. alpha must lie in Xi_{n,k}.
LocalEstimateResult local_estimate_ratio(const TileCollection& S, const DyadicCube& R0,
                                         const std::vector<GridFunction>& Es,
                                         const AlphaTuple& alpha, int chi_M = 100);

}  // namespace helicoid
