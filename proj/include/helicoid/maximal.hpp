#pragma once

#include <array>
#include <optional>
#include <vector>

#include "helicoid/gridfn.hpp"

namespace helicoid {

// Explicit finite dyadic sup-family.
struct CubeFamily {
  std::vector<DyadicCube> cubes;
};

CubeFamily dyadic_family(const GridGeometry& g, int min_scale, int max_scale);
// Cubes of the family contained in R0, plus R0 itself (the local spatial
// information of the family).
std::vector<DyadicCube> family_in(const CubeFamily& family, const DyadicCube& R0);

struct MaximalOptions {
  WeightMode mode = WeightMode::Indicator;  // the paper's default for maximal fns
  int M = 100;
};

// Scale-selection rule per (x, w); kNone marks no selection.
struct StoppingTime {
  static constexpr int kNone = INT32_MIN;
  std::vector<Eigen::ArrayXi> scale;  // per w, per grid point

  static StoppingTime none(const GridGeometry& g, const VectorSpace& W);
};

StoppingTime random_stopping_time(const GridGeometry& g, const VectorSpace& W,
                                  int min_scale, int max_scale, std::uint64_t seed);

// M_{s_1..s_n}: per (x,w) the sup over family cubes containing x of the
// product of s_j-averages. argmax_out, when given, receives the selected
// scale per (x,w) (first maximizing cube in family order).
GridFunction multi_maximal(const std::vector<GridFunction>& fs,
                           const std::vector<double>& s, const CubeFamily& family,
                           MaximalOptions opt = {}, StoppingTime* argmax_out = nullptr);

// Linearized variant: only the term selected by kappa survives; zero when
// kappa is none, the selected cube is absent from the family, or it falls
// outside the localization (a d-cube R0 or a lower-dimensional Rtilde).
GridFunction linearized_maximal(const std::vector<GridFunction>& fs,
                                const std::vector<double>& s, const CubeFamily& family,
                                const StoppingTime& kappa,
                                const std::optional<DyadicCube>& localization = std::nullopt,
                                MaximalOptions opt = {});

struct LocalMaximalResult {
  double argmax_ratio = 0.0;
  double worst_ratio = 0.0;  // over argmax kappa plus the sampled kappas
};

struct LocalMaximalOptions {
  int kappa_samples = 32;
  std::uint64_t seed = 0;
  MaximalOptions ave;            // weights inside the operator
  int size_chi_M = 100;          // weights inside the sizes on the right side
  bool v_is_indicator = true;    // otherwise the q+eps variant is used
  double eps = 0.05;
};

// Ratio of || M^{kappa,R0}(f...) . v ||_q against
// prod_j size~^{s_j}_{R0} f_j * (size~_{R0} v)^{1/q} * |R0|^{1/q}.
LocalMaximalResult local_maximal_estimate(const std::vector<GridFunction>& fs,
                                          const GridFunction& v,
                                          const std::vector<double>& s, double q,
                                          const DyadicCube& R0, const CubeFamily& family,
                                          LocalMaximalOptions opt = {});

struct WeakTypeSumResult {
  double value = 0.0;
  double certified_tail = 0.0;
  double closed_form = 0.0;  // A1^{q/s1} A2^{q/s2} A3^{1-q/s1-q/s2} S0^{q/s1+q/s2}
  double ratio = 0.0;
  int box = 0;  // final truncation size
};

// Direct truncated evaluation of the endpoint triple sum; throws
// divergence-detected when q >= min(s1, s2), the exact summability
// threshold of the truncated sum.
WeakTypeSumResult weak_type_sum(double q, std::array<double, 2> s,
                                std::array<double, 3> A, double S0);

// L: R^d -> R^{d_target}, factored as an axis permutation followed by the
// projection onto the first d_target coordinates (the torus-compatible
// instances of the orthonormal factorization).
struct SurjectionDescriptor {
  std::vector<int> perm;  // permutation of 0..d-1
  int d_target = 1;
};

struct CommuteResult {
  double max_ratio = 0.0;
  GridFunction field;  // pointwise ratio over the d-dim grid
};

// Pointwise ratio M^d_s(f o L)(x) / M^{d_target}_s f(L x) over matched
// dyadic families at resolution J. Throws for non-surjective descriptors.
CommuteResult maximal_projection_commute(const GridFunction& f,
                                         const SurjectionDescriptor& L, double s, int J,
                                         MaximalOptions opt = {WeightMode::ChiTilde, 100});

struct FeffermanSteinResult {
  double ratio = 0.0;
  bool anomaly = false;  // zero denominator with nonzero numerator
};

// ||g||_q / || M_{s_1..s_n}(f_1,...,f_n) ||_q on the given family.
FeffermanSteinResult fefferman_stein_ratio(const GridFunction& g_out,
                                           const std::vector<GridFunction>& fs,
                                           const std::vector<double>& s, double q,
                                           const CubeFamily& family,
                                           MaximalOptions opt = {});

}  // namespace helicoid
