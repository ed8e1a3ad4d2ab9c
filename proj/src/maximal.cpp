#include "helicoid/maximal.hpp"

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace helicoid {

CubeFamily dyadic_family(const GridGeometry& g, int min_scale, int max_scale) {
  CubeFamily fam;
  for (int scale = max_scale; scale >= min_scale; --scale) {
    long long per_axis = 1LL << (g.J - scale);
    std::vector<long long> c(g.d, 0);
    for (;;) {
      fam.cubes.push_back(DyadicCube::unit(g.d, scale, c));
      int axis = g.d - 1;
      for (; axis >= 0; --axis) {
        if (++c[axis] < per_axis) break;
        c[axis] = 0;
      }
      if (axis < 0) break;
    }
  }
  return fam;
}

std::vector<DyadicCube> family_in(const CubeFamily& family, const DyadicCube& R0) {
  std::vector<DyadicCube> out;
  for (const auto& R : family.cubes)
    if (cube_subset(R, R0)) out.push_back(R);
  bool has_r0 = false;
  for (const auto& R : out)
    if (R == R0) has_r0 = true;
  if (!has_r0) out.push_back(R0);
  return out;
}

StoppingTime StoppingTime::none(const GridGeometry& g, const VectorSpace& W) {
  StoppingTime k;
  k.scale.assign(W.total(), Eigen::ArrayXi::Constant(g.total_points(), kNone));
  return k;
}

StoppingTime random_stopping_time(const GridGeometry& g, const VectorSpace& W,
                                  int min_scale, int max_scale, std::uint64_t seed) {
  StoppingTime k = StoppingTime::none(g, W);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(min_scale, max_scale);
  for (auto& arr : k.scale)
    for (long long i = 0; i < arr.size(); ++i) arr(i) = dist(rng);
  return k;
}

namespace {

double ave_array(const GridGeometry& g, const Eigen::ArrayXcd& a, const DyadicCube& R,
                 double p, const Eigen::ArrayXd& weights) {
  const double vol = std::ldexp(1.0, (R.scale - g.J) * g.d);
  const double hd = 1.0 / (double)g.total_points();
  double acc = 0.0;
  for (long long i = 0; i < a.size(); ++i) {
    if (weights(i) == 0.0) continue;
    double m = std::abs(a(i));
    if (m == 0.0) continue;
    acc += std::pow(m, p) * weights(i) * hd;
  }
  return std::pow(acc / vol, 1.0 / p);
}

// products of s_j-averages per cube and w; the single source of truth shared
// by the sup and the linearized variant so the two agree bitwise
std::vector<Eigen::ArrayXd> cube_products(const std::vector<GridFunction>& fs,
                                          const std::vector<double>& s,
                                          const CubeFamily& family, MaximalOptions opt) {
  const GridGeometry& g = fs[0].geom;
  const long long nw = fs[0].W.total();
  std::vector<Eigen::ArrayXd> out(family.cubes.size());
  for (size_t ci = 0; ci < family.cubes.size(); ++ci) {
    const DyadicCube& R = family.cubes[ci];
    Eigen::ArrayXd w = opt.mode == WeightMode::Indicator ? indicator_weights(g, R)
                                                         : chi_tilde_weights(g, R, opt.M);
    Eigen::ArrayXd vals(nw);
    for (long long wi = 0; wi < nw; ++wi) {
      double prod = 1.0;
      for (size_t j = 0; j < fs.size(); ++j)
        prod *= ave_array(g, fs[j].data[wi], R, s[j], w);
      vals(wi) = prod;
    }
    out[ci] = vals;
  }
  return out;
}

void validate_inputs(const std::vector<GridFunction>& fs, const std::vector<double>& s,
                     const CubeFamily& family) {
  if (fs.empty()) throw std::invalid_argument("maximal: need at least one function");
  if (fs.size() != s.size()) throw std::invalid_argument("maximal: exponent count mismatch");
  for (double p : s)
    if (!(p > 0)) throw std::invalid_argument("maximal: exponents must be positive");
  if (family.cubes.empty()) throw std::invalid_argument("maximal: empty cube family");
  for (const auto& f : fs)
    if (f.W.total() != fs[0].W.total() || f.geom.J != fs[0].geom.J ||
        f.geom.d != fs[0].geom.d)
      throw std::invalid_argument("maximal: incompatible inputs");
}

}  // namespace

GridFunction multi_maximal(const std::vector<GridFunction>& fs, const std::vector<double>& s,
                           const CubeFamily& family, MaximalOptions opt,
                           StoppingTime* argmax_out) {
  validate_inputs(fs, s, family);
  const GridGeometry& g = fs[0].geom;
  const VectorSpace& W = fs[0].W;
  auto products = cube_products(fs, s, family, opt);

  GridFunction out = GridFunction::zeros(g, W);
  if (argmax_out) *argmax_out = StoppingTime::none(g, W);
  for (long long wi = 0; wi < W.total(); ++wi) {
    Eigen::ArrayXd best = Eigen::ArrayXd::Zero(g.total_points());
    Eigen::ArrayXi best_scale = Eigen::ArrayXi::Constant(g.total_points(), StoppingTime::kNone);
    for (size_t ci = 0; ci < family.cubes.size(); ++ci) {
      const DyadicCube& R = family.cubes[ci];
      double v = products[ci](wi);
      // iterate the cells of R
      std::vector<long long> c(g.d);
      for (int i = 0; i < g.d; ++i) c[i] = R.corner[i] << R.scale;
      const long long side = 1LL << R.scale;
      std::vector<long long> off(g.d, 0);
      for (;;) {
        std::vector<long long> point(g.d);
        for (int i = 0; i < g.d; ++i) point[i] = c[i] + off[i];
        long long idx = grid_index(g, point);
        if (v > best(idx)) {
          best(idx) = v;
          best_scale(idx) = R.scale;
        }
        int axis = g.d - 1;
        for (; axis >= 0; --axis) {
          if (++off[axis] < side) break;
          off[axis] = 0;
        }
        if (axis < 0) break;
      }
    }
    out.data[wi] = best.cast<Complex>();
    if (argmax_out) argmax_out->scale[wi] = best_scale;
  }
  return out;
}

GridFunction linearized_maximal(const std::vector<GridFunction>& fs,
                                const std::vector<double>& s, const CubeFamily& family,
                                const StoppingTime& kappa,
                                const std::optional<DyadicCube>& localization,
                                MaximalOptions opt) {
  validate_inputs(fs, s, family);
  const GridGeometry& g = fs[0].geom;
  const VectorSpace& W = fs[0].W;
  auto products = cube_products(fs, s, family, opt);

  // locate the family cube of a given scale containing a point
  std::map<std::pair<int, std::vector<long long>>, size_t> by_key;
  for (size_t ci = 0; ci < family.cubes.size(); ++ci)
    by_key[{family.cubes[ci].scale, family.cubes[ci].corner}] = ci;

  GridFunction out = GridFunction::zeros(g, W);
  for (long long wi = 0; wi < W.total(); ++wi) {
    for (long long idx = 0; idx < g.total_points(); ++idx) {
      int sc = kappa.scale[wi](idx);
      if (sc == StoppingTime::kNone || sc < 0 || sc > g.J) continue;
      auto coords = grid_coords(g, idx);
      std::vector<long long> corner(g.d);
      for (int i = 0; i < g.d; ++i) corner[i] = coords[i] >> sc;
      auto it = by_key.find({sc, corner});
      if (it == by_key.end()) continue;
      const DyadicCube& R = family.cubes[it->second];
      if (localization) {
        if (localization->dim == g.d) {
          if (!cube_subset(R, *localization)) continue;
        } else {
          DyadicCube proj;
          proj.dim = localization->dim;
          proj.scale = R.scale;
          proj.corner.assign(R.corner.begin(), R.corner.begin() + localization->dim);
          if (!cube_subset(proj, *localization)) continue;
        }
      }
      out.data[wi](idx) = products[it->second](wi);
    }
  }
  return out;
}

namespace {

double grid_q_norm(const GridGeometry& g, const Eigen::ArrayXcd& a, double q) {
  double hd = 1.0 / (double)g.total_points();
  double acc = 0.0;
  for (long long i = 0; i < a.size(); ++i) {
    double m = std::abs(a(i));
    if (m > 0) acc += std::pow(m, q) * hd;
  }
  return std::pow(acc, 1.0 / q);
}

}  // namespace

LocalMaximalResult local_maximal_estimate(const std::vector<GridFunction>& fs,
                                          const GridFunction& v,
                                          const std::vector<double>& s, double q,
                                          const DyadicCube& R0, const CubeFamily& family,
                                          LocalMaximalOptions opt) {
  validate_inputs(fs, s, family);
  const GridGeometry& g = fs[0].geom;
  if (!fs[0].W.is_scalar())
    throw std::invalid_argument("local_maximal_estimate: scalar inputs");

  // right-hand side sizes over the family restricted to R0
  auto cubes = family_in(family, R0);
  double rhs = std::pow(g.spatial_cube_volume(R0), 1.0 / q);
  AveOptions size_opt{WeightMode::ChiTilde, opt.size_chi_M};
  for (size_t j = 0; j < fs.size(); ++j)
    rhs *= spatial_size(fs[j], cubes, s[j], size_opt);
  double vexp = opt.v_is_indicator ? 1.0 : q + opt.eps;
  rhs *= std::pow(spatial_size(v, cubes, vexp, size_opt), 1.0 / q);

  auto lhs_for = [&](const StoppingTime& kappa) {
    GridFunction lin = linearized_maximal(fs, s, family, kappa, R0, opt.ave);
    lin.data[0] *= v.data[0];
    return grid_q_norm(g, lin.data[0], q);
  };

  LocalMaximalResult res;
  // the argmax of the localized operator ranges over the cubes inside R0
  CubeFamily restricted;
  for (const auto& R : family.cubes)
    if (cube_subset(R, R0)) restricted.cubes.push_back(R);
  if (restricted.cubes.empty()) return res;
  StoppingTime argmax;
  multi_maximal(fs, s, restricted, opt.ave, &argmax);
  double lhs = lhs_for(argmax);
  res.argmax_ratio = rhs > 0 ? lhs / rhs : 0.0;
  res.worst_ratio = res.argmax_ratio;
  int lo = g.J, hi = 0;
  for (const auto& R : family.cubes) {
    lo = std::min(lo, R.scale);
    hi = std::max(hi, R.scale);
  }
  for (int k = 0; k < opt.kappa_samples; ++k) {
    StoppingTime kap = random_stopping_time(g, fs[0].W, lo, hi, opt.seed * 7919 + k);
    double r = rhs > 0 ? lhs_for(kap) / rhs : 0.0;
    res.worst_ratio = std::max(res.worst_ratio, r);
  }
  return res;
}

WeakTypeSumResult weak_type_sum(double q, std::array<double, 2> s,
                                std::array<double, 3> A, double S0) {
  if (!(q > 0) || !(s[0] > 0) || !(s[1] > 0) || !(S0 > 0))
    throw std::invalid_argument("weak_type_sum: positive parameters required");
  const double s_prime = 1.0 / (1.0 / s[0] + 1.0 / s[1]);
  if (q >= s_prime) throw std::domain_error("divergence-detected: q >= s'");

  WeakTypeSumResult res;
  res.closed_form = std::pow(A[0], q / s[0]) * std::pow(A[1], q / s[1]) *
                    std::pow(A[2], 1.0 - q / s[0] - q / s[1]) *
                    std::pow(S0, q / s[0] + q / s[1]);
  if (A[0] == 0.0 || A[1] == 0.0 || A[2] == 0.0) return res;

  const int n3min = (int)std::ceil(-std::log2(S0) - 1e-12);
  // the inner n3-sum has a closed form: a plateau of A3 terms while
  // 2^{n3} A3 <= C12, then an exact geometric tail of 2^{-n3} C12
  auto inner_n3 = [&](double C12) {
    if (C12 <= 0.0) return 0.0;
    double t_real = std::floor(std::log2(C12 / A[2]));
    long long t = (long long)t_real;
    double plateau = 0.0;
    if (t >= n3min) plateau = (double)(t - n3min + 1) * A[2];
    long long tail_start = std::max<long long>(t + 1, n3min);
    double tail = C12 * std::exp2((double)(1 - tail_start));
    return plateau + tail;
  };
  auto partial = [&](int B) {
    double acc = 0.0;
    for (int n1 = -B; n1 <= B; ++n1)
      for (int n2 = -B; n2 <= B; ++n2) {
        double C12 = std::min(std::exp2(n1 * s[0]) * A[0], std::exp2(n2 * s[1]) * A[1]);
        acc += std::exp2(-q * (double)n1) * std::exp2(-q * (double)n2) * inner_n3(C12);
      }
    return acc;
  };

  int B = 8;
  double prev = partial(B);
  double inc_prev = prev;
  for (;;) {
    int B2 = B * 2;
    double cur = partial(B2);
    double inc = cur - prev;
    if (inc < 0) inc = 0;
    if (inc <= 1e-12 * std::max(cur, 1e-300)) {
      // geometric certificate from the observed contraction
      double rho = inc_prev > 0 ? std::min(0.9, inc / std::max(inc_prev, 1e-300)) : 0.0;
      res.value = cur;
      res.certified_tail = inc_prev > 0 ? inc * rho / std::max(1e-12, 1.0 - rho) + inc : inc;
      res.box = B2;
      break;
    }
    if (inc > inc_prev && B >= 64)
      throw std::domain_error("divergence-detected: increments are not contracting");
    inc_prev = inc;
    prev = cur;
    B = B2;
    if (B > 4096) throw std::domain_error("divergence-detected: no convergence by box 4096");
  }
  res.ratio = res.closed_form > 0 ? res.value / res.closed_form : 0.0;
  return res;
}

CommuteResult maximal_projection_commute(const GridFunction& f,
                                         const SurjectionDescriptor& L, double s, int J,
                                         MaximalOptions opt) {
  const int d = (int)L.perm.size();
  const int dt = L.d_target;
  if (dt < 1 || dt > d) throw std::invalid_argument("non-surjective map descriptor");
  {
    std::vector<bool> seen(d, false);
    for (int p : L.perm) {
      if (p < 0 || p >= d || seen[p])
        throw std::invalid_argument("non-surjective map descriptor");
      seen[p] = true;
    }
  }
  if (f.geom.d != dt) throw std::invalid_argument("commute: f must live on R^{d_target}");
  if (f.geom.J != J) throw std::invalid_argument("commute: resolution mismatch");

  GridGeometry gd{d, J};
  // lift g = f o L on the d-dim grid
  GridFunction lifted = GridFunction::zeros(gd);
  for (long long idx = 0; idx < gd.total_points(); ++idx) {
    auto coords = grid_coords(gd, idx);
    std::vector<long long> target(dt);
    for (int i = 0; i < dt; ++i) target[i] = coords[L.perm[i]];
    lifted.data[0](idx) = f.data[0](grid_index(f.geom, target));
  }

  CubeFamily fam_d = dyadic_family(gd, 0, J);
  CubeFamily fam_t = dyadic_family(f.geom, 0, J);
  GridFunction Md = multi_maximal({lifted}, {s}, fam_d, opt);
  GridFunction Mt = multi_maximal({f}, {s}, fam_t, opt);

  CommuteResult res;
  res.field = GridFunction::zeros(gd);
  for (long long idx = 0; idx < gd.total_points(); ++idx) {
    auto coords = grid_coords(gd, idx);
    std::vector<long long> target(dt);
    for (int i = 0; i < dt; ++i) target[i] = coords[L.perm[i]];
    double denom = std::abs(Mt.data[0](grid_index(f.geom, target)));
    double numer = std::abs(Md.data[0](idx));
    double r = denom > 0 ? numer / denom : (numer > 0 ? INFINITY : 0.0);
    res.field.data[0](idx) = r;
    res.max_ratio = std::max(res.max_ratio, r);
  }
  return res;
}

FeffermanSteinResult fefferman_stein_ratio(const GridFunction& g_out,
                                           const std::vector<GridFunction>& fs,
                                           const std::vector<double>& s, double q,
                                           const CubeFamily& family, MaximalOptions opt) {
  GridFunction M = multi_maximal(fs, s, family, opt);
  double denom = grid_q_norm(M.geom, M.data[0], q);
  double numer = grid_q_norm(g_out.geom, g_out.data[0], q);
  FeffermanSteinResult res;
  if (denom == 0.0) {
    res.anomaly = numer > 0.0;
    res.ratio = 0.0;
  } else {
    res.ratio = numer / denom;
  }
  return res;
}

}  // namespace helicoid
