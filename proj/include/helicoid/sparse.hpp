#pragma once

#include <string>
#include <vector>

#include "helicoid/gridfn.hpp"
#include "helicoid/rational.hpp"

namespace helicoid {

// eta-sparse family of dyadic cubes with literal witness subsets: E_Q is a
// sorted list of grid cell indices, pairwise disjoint across cubes, with
// |E_Q| >= eta |Q|.
struct SparseCollection {
  GridGeometry geom;
  Rational eta{1, 2};
  std::vector<DyadicCube> cubes;
  std::vector<std::vector<long long>> witnesses;  // cell indices per cube
};

struct SparseVerifyResult {
  bool ok = true;
  std::string violation;
};

// Checks the witness condition (containment, disjointness, mass) and the
// child condition sum |P| <= (1-eta)|Q| exactly, by counting cells.
SparseVerifyResult verify_sparse(const SparseCollection& c);

struct BuildSparseOptions {
  double C = 0.0;  // trigger factor; 0 = default 2^{d+2}
  WeightMode mode = WeightMode::Indicator;
  int chi_M = 100;
};

// Stopping-time generations from `top`: the children of Q are the maximal
// strict dyadic subcubes on which some tracked s_j-average exceeds C times
// its value on Q (inputs f_1..f_n and v, exponents s_1..s_{n+1});
// E_Q = Q minus its children. Throws when the child mass exceeds
// (1-eta)|Q| (trigger factor too small), reporting the measured ratio.
SparseCollection build_sparse(const std::vector<GridFunction>& fs,
                              const std::vector<double>& s, double q,
                              const GridFunction& v, const DyadicCube& top,
                              BuildSparseOptions opt = {});

// sum_Q prod_j (ave^{s_j}_Q f_j)^q (ave^{s_{n+1}}_Q v)^q |Q|.
double sparse_form(const SparseCollection& c, const std::vector<GridFunction>& fs,
                   const std::vector<double>& s, double q, const GridFunction& v,
                   const AveOptions& ave_opt = {WeightMode::ChiTilde, 100});

struct SparseDominationResult {
  double operator_mass = 0.0;  // ||T(f) v||_q^q as supplied
  double form_value = 0.0;
  double ratio = 0.0;
};

// JSON serialization: cubes, eta, and witness cell lists.
std::string sparse_to_json(const SparseCollection& c);
SparseCollection sparse_from_json(const std::string& text);

SparseDominationResult sparse_domination_ratio(double op_norm_q_pow_q,
                                               const SparseCollection& c,
                                               const std::vector<GridFunction>& fs,
                                               const std::vector<double>& s, double q,
                                               const GridFunction& v,
                                               const AveOptions& ave_opt = {WeightMode::ChiTilde,
                                                                            100});

}  // namespace helicoid
