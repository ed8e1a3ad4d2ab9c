#include "helicoid/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace helicoid {

namespace {

std::vector<long long> cube_cells(const GridGeometry& g, const DyadicCube& R) {
  std::vector<long long> cells;
  std::vector<long long> off(g.d, 0);
  const long long side = 1LL << R.scale;
  for (;;) {
    std::vector<long long> p(g.d);
    for (int i = 0; i < g.d; ++i) p[i] = (R.corner[i] << R.scale) + off[i];
    cells.push_back(grid_index(g, p));
    int axis = g.d - 1;
    for (; axis >= 0; --axis) {
      if (++off[axis] < side) break;
      off[axis] = 0;
    }
    if (axis < 0) break;
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

long long cells_of(const GridGeometry& g, const DyadicCube& R) {
  (void)g;
  long long c = 1;
  for (int i = 0; i < R.dim; ++i) c <<= R.scale;
  return c;
}

}  // namespace

SparseVerifyResult verify_sparse(const SparseCollection& c) {
  SparseVerifyResult res;
  auto fail = [&](const std::string& m) {
    res.ok = false;
    res.violation = m;
    return res;
  };
  if (c.cubes.size() != c.witnesses.size()) return fail("witness table size mismatch");

  std::set<long long> used;
  for (size_t i = 0; i < c.cubes.size(); ++i) {
    const DyadicCube& Q = c.cubes[i];
    auto cells = cube_cells(c.geom, Q);
    std::set<long long> inside(cells.begin(), cells.end());
    for (long long cell : c.witnesses[i]) {
      if (!inside.count(cell))
        return fail("witness cell outside its cube at index " + std::to_string(i));
      if (!used.insert(cell).second)
        return fail("witness sets overlap at cube index " + std::to_string(i));
    }
    // |E_Q| >= eta |Q| exactly: |E_Q| * den >= num * cells(Q)
    __int128 lhs = (__int128)c.witnesses[i].size() * c.eta.den();
    __int128 rhs = (__int128)c.eta.num() * cells_of(c.geom, Q);
    if (lhs < rhs)
      return fail("witness mass below eta at cube index " + std::to_string(i));
  }

  // child condition: direct descendants are the maximal elements strictly
  // inside Q
  for (size_t i = 0; i < c.cubes.size(); ++i) {
    const DyadicCube& Q = c.cubes[i];
    long long child_mass = 0;
    for (size_t a = 0; a < c.cubes.size(); ++a) {
      if (a == i) continue;
      if (!cube_strict_subset(c.cubes[a], Q)) continue;
      bool maximal = true;
      for (size_t b = 0; b < c.cubes.size() && maximal; ++b) {
        if (b == a || b == i) continue;
        if (cube_strict_subset(c.cubes[a], c.cubes[b]) &&
            cube_strict_subset(c.cubes[b], Q))
          maximal = false;
      }
      if (maximal) child_mass += cells_of(c.geom, c.cubes[a]);
    }
    // sum |P| <= (1 - eta) |Q| exactly
    __int128 lhs = (__int128)child_mass * c.eta.den();
    __int128 rhs = (__int128)(c.eta.den() - c.eta.num()) * cells_of(c.geom, Q);
    if (lhs > rhs)
      return fail("child condition fails at cube index " + std::to_string(i));
  }
  return res;
}

SparseCollection build_sparse(const std::vector<GridFunction>& fs,
                              const std::vector<double>& s, double q,
                              const GridFunction& v, const DyadicCube& top,
                              BuildSparseOptions opt) {
  if (fs.empty()) throw std::invalid_argument("build_sparse: need inputs");
  if (s.size() != fs.size() + 1)
    throw std::invalid_argument("build_sparse: need s_1..s_{n+1} exponents");
  if (!(q > 0)) throw std::invalid_argument("build_sparse: q must be positive");
  const GridGeometry& g = fs[0].geom;
  const double C = opt.C > 0 ? opt.C : std::ldexp(1.0, g.d + 2);

  std::vector<const GridFunction*> tracked;
  for (const auto& f : fs) tracked.push_back(&f);
  tracked.push_back(&v);

  auto averages = [&](const DyadicCube& Q) {
    std::vector<double> a(tracked.size());
    Eigen::ArrayXd w = opt.mode == WeightMode::Indicator
                           ? indicator_weights(g, Q)
                           : chi_tilde_weights(g, Q, opt.chi_M);
    for (size_t j = 0; j < tracked.size(); ++j)
      a[j] = ave_with_weights(*tracked[j], Q, s[j], w);
    return a;
  };

  SparseCollection out;
  out.geom = g;
  out.eta = Rational(1, 2);

  std::vector<DyadicCube> frontier{top};
  while (!frontier.empty()) {
    std::vector<DyadicCube> next;
    for (const DyadicCube& Q : frontier) {
      auto aQ = averages(Q);
      // maximal strict subcubes where a tracked average jumps by factor C
      std::vector<DyadicCube> children;
      std::function<void(const DyadicCube&)> descend = [&](const DyadicCube& P) {
        if (P.scale == 0) return;
        // immediate dyadic children
        std::vector<long long> off(g.d, 0);
        for (;;) {
          DyadicCube child;
          child.dim = g.d;
          child.scale = P.scale - 1;
          child.corner.resize(g.d);
          for (int i = 0; i < g.d; ++i) child.corner[i] = 2 * P.corner[i] + off[i];
          auto aC = averages(child);
          bool trigger = false;
          for (size_t j = 0; j < aC.size(); ++j)
            if (aC[j] > C * aQ[j] && aC[j] > 0) trigger = true;
          if (trigger)
            children.push_back(child);
          else
            descend(child);
          int axis = g.d - 1;
          for (; axis >= 0; --axis) {
            if (++off[axis] < 2) break;
            off[axis] = 0;
          }
          if (axis < 0) break;
        }
      };
      descend(Q);

      long long child_mass = 0;
      for (const auto& ch : children) child_mass += cells_of(g, ch);
      if (2 * child_mass > cells_of(g, Q)) {
        std::ostringstream os;
        os << "build_sparse: trigger factor too small, child mass ratio "
           << (double)child_mass / (double)cells_of(g, Q) << " at cube " << Q.str();
        throw std::runtime_error(os.str());
      }

      // E_Q = Q minus its children
      auto cells = cube_cells(g, Q);
      std::set<long long> removed;
      for (const auto& ch : children)
        for (long long cell : cube_cells(g, ch)) removed.insert(cell);
      std::vector<long long> witness;
      for (long long cell : cells)
        if (!removed.count(cell)) witness.push_back(cell);
      out.cubes.push_back(Q);
      out.witnesses.push_back(std::move(witness));
      for (const auto& ch : children) next.push_back(ch);
    }
    frontier = std::move(next);
  }
  return out;
}

double sparse_form(const SparseCollection& c, const std::vector<GridFunction>& fs,
                   const std::vector<double>& s, double q, const GridFunction& v,
                   const AveOptions& ave_opt) {
  if (s.size() != fs.size() + 1)
    throw std::invalid_argument("sparse_form: need s_1..s_{n+1} exponents");
  double total = 0.0;
  for (const auto& Q : c.cubes) {
    double term = c.geom.spatial_cube_volume(Q);
    for (size_t j = 0; j < fs.size(); ++j)
      term *= std::pow(ave(fs[j], Q, s[j], ave_opt), q);
    term *= std::pow(ave(v, Q, s.back(), ave_opt), q);
    total += term;
  }
  return total;
}

std::string sparse_to_json(const SparseCollection& c) {
  nlohmann::json j;
  j["d"] = c.geom.d;
  j["J"] = c.geom.J;
  j["eta"] = c.eta.str();
  nlohmann::json cubes = nlohmann::json::array();
  for (size_t i = 0; i < c.cubes.size(); ++i) {
    nlohmann::json q;
    q["scale"] = c.cubes[i].scale;
    q["corner"] = c.cubes[i].corner;
    q["witness_cells"] = c.witnesses[i];
    cubes.push_back(q);
  }
  j["cubes"] = cubes;
  return j.dump();
}

SparseCollection sparse_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SparseCollection c;
  c.geom.d = j.at("d").get<int>();
  c.geom.J = j.at("J").get<int>();
  c.eta = parse_rational(j.at("eta").get<std::string>());
  for (const auto& q : j.at("cubes")) {
    DyadicCube cube;
    cube.dim = c.geom.d;
    cube.scale = q.at("scale").get<int>();
    cube.corner = q.at("corner").get<std::vector<long long>>();
    c.cubes.push_back(cube);
    c.witnesses.push_back(q.at("witness_cells").get<std::vector<long long>>());
  }
  return c;
}

SparseDominationResult sparse_domination_ratio(double op_norm_q_pow_q,
                                               const SparseCollection& c,
                                               const std::vector<GridFunction>& fs,
                                               const std::vector<double>& s, double q,
                                               const GridFunction& v,
                                               const AveOptions& ave_opt) {
  SparseDominationResult res;
  res.operator_mass = op_norm_q_pow_q;
  res.form_value = sparse_form(c, fs, s, q, v, ave_opt);
  res.ratio = res.form_value > 0 ? res.operator_mass / res.form_value
                                 : (res.operator_mass > 0 ? INFINITY : 0.0);
  return res;
}

}  // namespace helicoid
