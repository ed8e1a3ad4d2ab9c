#include "helicoid/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "helicoid/model.hpp"

namespace helicoid {

namespace {

// plain pairing (1/N^d) sum f phi = sum_m fhat(-m) phihat(m), aliased at the
// Nyquist edge
Complex plain_pair(const GridGeometry& g, const Spectrum& fhat, const WavePacket& pk) {
  const long long N = g.points_per_axis();
  Complex acc(0, 0);
  for (const auto& [b, v] : pk.freq_coeffs) {
    auto m = freq_of_bin(g, b);
    std::vector<long long> neg(m.size());
    for (size_t i = 0; i < m.size(); ++i) {
      neg[i] = -m[i];
      if (neg[i] == N / 2) neg[i] = -N / 2;  // alias
    }
    acc += fhat.bins[0](bin_of_freq(g, neg)) * v;
  }
  return acc;
}

}  // namespace

Eigen::ArrayXcd slot_coefficients(const TileCollection& S, PacketCache& cache,
                                  const GridFunction& f, int slot) {
  if (!f.W.is_scalar()) throw std::invalid_argument("slot_coefficients: scalar f only");
  Spectrum fhat = fft(f);
  Eigen::ArrayXcd out(S.size());
  const bool plain = (slot == S.n);
  for (size_t i = 0; i < S.size(); ++i) {
    const WavePacket& pk = cache.get(S.tiles[i].component(slot));
    out(i) = plain ? plain_pair(S.geom, fhat, pk) : coefficient_scalar(fhat, pk);
  }
  return out;
}

namespace {

// Candidate tops run over the member tiles; the top's own coefficient is
// counted (a lacunary tree with a virtual top just above t contains t), so a
// singleton measures |c| / sqrt(|R|).
double top_sum(const TileCollection& S, const std::vector<size_t>& members, size_t top,
               int j, const Eigen::ArrayXcd& coefs, int C0) {
  const MultiTile& t = S.tiles[top];
  double acc = 0.0;
  for (size_t m : members)
    if (m == top ||
        tile_order(S.tiles[m].component(j), t.component(j), TileOrder::LesssimPrime, C0))
      acc += std::norm(coefs(m));
  return std::sqrt(acc / S.geom.spatial_cube_volume(t.spatial));
}

}  // namespace

double size(const TileCollection& S, const std::vector<size_t>& members, int j,
            const Eigen::ArrayXcd& coefs, int C0) {
  if (C0 == 0) C0 = S.C0;
  double best = 0.0;
  for (size_t t : members) best = std::max(best, top_sum(S, members, t, j, coefs, C0));
  return best;
}

SampledSize size_sampled_upper_bound(const TileCollection& S,
                                     const std::vector<size_t>& members, int j,
                                     const Eigen::ArrayXcd& coefs, std::uint64_t seed,
                                     int top_samples, double slack, int C0) {
  if (C0 == 0) C0 = S.C0;
  // stratify: all tops at the two coarsest spatial scales, then random others
  int coarse = INT32_MIN;
  for (size_t m : members) coarse = std::max(coarse, S.tiles[m].spatial.scale);
  std::vector<size_t> tops;
  for (size_t m : members)
    if (S.tiles[m].spatial.scale >= coarse - 1) tops.push_back(m);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < top_samples && !members.empty(); ++i)
    tops.push_back(members[rng() % members.size()]);
  double best = 0.0;
  for (size_t t : tops) best = std::max(best, top_sum(S, members, t, j, coefs, C0));
  return {best * slack, true};
}

DecomposeResult decompose(const TileCollection& S, const std::vector<size_t>& members,
                          const GridFunction& f, int j, const Eigen::ArrayXcd& coefs,
                          double lambda, const std::optional<DyadicCube>& R0,
                          DecomposeOptions opt) {
  const int C0 = opt.C0 == 0 ? S.C0 : opt.C0;
  if (size(S, members, j, coefs, C0) > lambda)
    throw std::invalid_argument("size-exceeds-lambda");

  DecomposeResult res;
  res.remaining = members;
  const double half = lambda / 2.0;
  for (;;) {
    // maximal offending lacunary top under the deterministic ordering
    size_t best = SIZE_MAX;
    for (size_t t : res.remaining) {
      if (!(top_sum(S, res.remaining, t, j, coefs, C0) > half)) continue;
      if (best == SIZE_MAX || S.tiles[t] < S.tiles[best]) best = t;
    }
    if (best == SIZE_MAX) break;
    const MultiTile& top = S.tiles[best];
    std::vector<size_t> extracted, rest;
    for (size_t m : res.remaining) {
      Tile c = S.tiles[m].component(j);
      Tile tc = top.component(j);
      bool in = tile_order(c, tc, TileOrder::LesssimPrime, C0) ||
                tile_order(c, tc, TileOrder::Le, C0);
      (in ? extracted : rest).push_back(m);
    }
    res.remaining = std::move(rest);
    Tree tree;
    tree.top = top;
    tree.slot = j;
    tree.type = TreeType::Lacunary;
    for (size_t m : extracted) tree.members.push_back(S.tiles[m]);
    if (S.geom.d >= 2) {
      // directional tag per the lexicographic reorganization
      tree.direction_axis = -1;
      for (size_t m : extracted) {
        int ax = lacunary_direction_axis(S.tiles[m], top, j);
        if (ax >= 0) { tree.direction_axis = ax; break; }
      }
    }
    res.energy_sum += S.geom.spatial_cube_volume(top.spatial);
    res.trees.push_back(std::move(tree));
  }

  double l2;
  if (R0) {
    Eigen::ArrayXd chi = chi_tilde_weights(S.geom, *R0, opt.chi_M);
    l2 = l2_norm_weighted(f, chi);
  } else {
    l2 = l2_norm(f);
  }
  res.energy_budget = (l2 * l2) / (lambda * lambda);
  res.energy_ratio = res.energy_budget > 0 ? res.energy_sum / res.energy_budget : 0.0;
  return res;
}

std::map<int, std::vector<Forest>> forest_decomposition(
    const TileCollection& S, const std::vector<GridFunction>& fs, PacketCache& cache,
    ForestDecompositionOptions opt) {
  if ((int)fs.size() != S.n + 1)
    throw std::invalid_argument("forest_decomposition: need n+1 functions");
  std::map<int, std::vector<Forest>> out;
  for (int j = 0; j <= S.n; ++j) {
    Eigen::ArrayXcd coefs = slot_coefficients(S, cache, fs[j], j);
    std::vector<size_t> members(S.size());
    for (size_t i = 0; i < S.size(); ++i) members[i] = i;
    std::vector<Forest> forests;
    double sz = size(S, members, j, coefs, 0);
    if (sz > 0) {
      int level = (int)std::floor(-std::log2(sz));
      while (std::ldexp(1.0, -level) < sz) --level;
      while (std::ldexp(1.0, -(level + 1)) >= sz) ++level;
      for (int steps = 0; steps < opt.max_levels && !members.empty(); ++steps, ++level) {
        double lambda = std::ldexp(1.0, -level);
        auto dec = decompose(S, members, fs[j], j, coefs, lambda, std::nullopt,
                             {opt.chi_M, 0});
        members = dec.remaining;
        if (!dec.trees.empty()) {
          Forest forest;
          forest.level = level;
          forest.slot = j;
          forest.trees = std::move(dec.trees);
          forest.energy_sum = dec.energy_sum;
          forest.energy_budget = dec.energy_budget;
          forests.push_back(std::move(forest));
        }
        if (size(S, members, j, coefs, 0) == 0.0) break;
      }
    }
    if (!members.empty()) {
      Forest leftovers;
      leftovers.level = kSentinelLevel;
      leftovers.slot = j;
      for (size_t m : members) {
        Tree t;
        t.top = S.tiles[m];
        t.members = {S.tiles[m]};
        t.slot = j;
        leftovers.trees.push_back(std::move(t));
      }
      forests.push_back(std::move(leftovers));
    }
    out[j] = std::move(forests);
  }
  return out;
}

std::string forest_report_json(const std::map<int, std::vector<Forest>>& forests) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [slot, list] : forests) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& forest : list) {
      nlohmann::json fj;
      fj["level"] = forest.level == kSentinelLevel ? nlohmann::json("sentinel")
                                                   : nlohmann::json(forest.level);
      fj["energy_sum"] = forest.energy_sum;
      fj["energy_budget"] = forest.energy_budget;
      fj["measured_constant"] =
          forest.energy_budget > 0 ? forest.energy_sum / forest.energy_budget : 0.0;
      nlohmann::json tops = nlohmann::json::array();
      for (const auto& tree : forest.trees) {
        nlohmann::json t;
        t["top_spatial"] = tree.top.spatial.str();
        t["members"] = tree.members.size();
        if (tree.direction_axis >= 0) t["direction_axis"] = tree.direction_axis;
        tops.push_back(t);
      }
      fj["trees"] = tops;
      levels.push_back(fj);
    }
    out[std::to_string(slot)] = levels;
  }
  return out.dump(2);
}

double john_nirenberg_check(const TileCollection& S, const GridFunction& f, int j,
                            const GridFunction& E, PacketCache& cache, int chi_M) {
  for (long long i = 0; i < f.npoints(); ++i)
    if (std::abs(f.data[0](i)) > std::abs(E.data[0](i)) + 1e-12)
      throw std::invalid_argument("john_nirenberg_check: |f| <= 1_E violated");
  if (S.tiles.empty()) return 0.0;
  Eigen::ArrayXcd coefs = slot_coefficients(S, cache, f, j);
  std::vector<size_t> members(S.size());
  for (size_t i = 0; i < S.size(); ++i) members[i] = i;
  double sz = size(S, members, j, coefs, 0);
  if (sz == 0.0) return 0.0;
  std::vector<DyadicCube> cubes;
  for (const auto& s : S.tiles) cubes.push_back(s.spatial);
  double ssize = spatial_size(f, cubes, 1.0, {WeightMode::ChiTilde, chi_M});
  return ssize > 0 ? sz / ssize : std::numeric_limits<double>::infinity();
}

LocalEstimateResult local_estimate_ratio(const TileCollection& S, const DyadicCube& R0,
                                         const std::vector<GridFunction>& Es,
                                         const AlphaTuple& alpha, int chi_M) {
  if ((int)Es.size() != S.n + 1)
    throw std::invalid_argument("local_estimate_ratio: need n+1 indicator functions");
  if (!xi_feasible(alpha.n, alpha.k, alpha))
    throw std::invalid_argument("local_estimate_ratio: alpha not in Xi_{n,k}");

  TileCollection SR0 = localize(S, R0);
  ModelOperator T(SR0);
  std::vector<size_t> all(SR0.size());
  for (size_t i = 0; i < SR0.size(); ++i) all[i] = i;
  Complex lam = form(T, Es, all);

  LocalEstimateResult res;
  res.form_abs = std::abs(lam);
  auto cubes = spatial_projection(S, R0);
  double denom = S.geom.spatial_cube_volume(R0);
  for (int j = 0; j <= S.n; ++j) {
    double sz = spatial_size(Es[j], cubes, 1.0, {WeightMode::ChiTilde, chi_M});
    denom *= std::pow(sz, 1.0 - alpha.alphas[j].to_double());
  }
  res.bound = denom;
  if (denom <= 0.0) {
    res.anomaly = res.form_abs > 1e-14;
    res.ratio = 0.0;
  } else {
    res.ratio = res.form_abs / denom;
  }
  return res;
}

}  // namespace helicoid
