#include "helicoid/gridfn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace helicoid {

double VectorSpace::weight(long long w) const {
  double out = 1.0;
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    long long n = it->size();
    out *= (*it)(w % n);
    w /= n;
  }
  return out;
}

double VectorSpace::total_mass() const {
  double out = 1.0;
  for (const auto& f : factors) out *= f.sum();
  return out;
}

GridFunction GridFunction::zeros(const GridGeometry& g, const VectorSpace& W) {
  GridFunction f;
  f.geom = g;
  f.W = W;
  f.data.assign(W.total(), Eigen::ArrayXcd::Zero(g.total_points()));
  return f;
}

GridFunction GridFunction::constant(const GridGeometry& g, Complex c, const VectorSpace& W) {
  GridFunction f = zeros(g, W);
  for (auto& a : f.data) a.setConstant(c);
  return f;
}

GridFunction GridFunction::indicator(const GridGeometry& g, const DyadicCube& R) {
  GridFunction f = zeros(g);
  Eigen::ArrayXd w = indicator_weights(g, R);
  f.data[0] = w.cast<Complex>();
  return f;
}

long long grid_index(const GridGeometry& g, const std::vector<long long>& coords) {
  long long idx = 0;
  for (int i = 0; i < g.d; ++i) idx = idx * g.points_per_axis() + coords[i];
  return idx;
}

std::vector<long long> grid_coords(const GridGeometry& g, long long index) {
  std::vector<long long> c(g.d);
  for (int i = g.d - 1; i >= 0; --i) {
    c[i] = index % g.points_per_axis();
    index /= g.points_per_axis();
  }
  return c;
}

namespace {

// Toroidal gap in cells between the sample cell x and the cube's cell range
// [lo, hi); the grid set is half-open, so the first cell past the cube is at
// distance one cell (and the chi-tilde weight tends to the indicator as M
// grows).
inline long long axis_gap_cells(long long x, long long lo, long long hi, long long N) {
  long long best = N;
  for (long long t : {-N, 0LL, N}) {
    long long xs = x + t;
    long long gap = 0;
    if (xs < lo)
      gap = lo - xs;
    else if (xs >= hi)
      gap = xs - (hi - 1);
    best = std::min(best, gap);
  }
  return best;
}

}  // namespace

Eigen::ArrayXd chi_tilde_weights(const GridGeometry& g, const DyadicCube& R, int M) {
  const long long N = g.points_per_axis();
  const double ell = std::ldexp(1.0, R.scale - g.J);
  Eigen::ArrayXd w(g.total_points());
  std::vector<long long> lo(g.d), hi(g.d);
  for (int i = 0; i < R.dim; ++i) {
    lo[i] = R.corner[i] << R.scale;
    hi[i] = lo[i] + (1LL << R.scale);
  }
  std::vector<long long> c(g.d, 0);
  for (long long idx = 0; idx < g.total_points(); ++idx) {
    double d2 = 0.0;
    for (int i = 0; i < g.d; ++i) {
      double gp = (double)axis_gap_cells(c[i], lo[i], hi[i], N) / (double)N;
      d2 += gp * gp;
    }
    w(idx) = std::pow(1.0 + std::sqrt(d2) / ell, -M);
    for (int i = g.d - 1; i >= 0; --i) {
      if (++c[i] < N) break;
      c[i] = 0;
    }
  }
  return w;
}

Eigen::ArrayXd indicator_weights(const GridGeometry& g, const DyadicCube& R) {
  const long long N = g.points_per_axis();
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(g.total_points());
  std::vector<long long> c(g.d, 0);
  for (long long idx = 0; idx < g.total_points(); ++idx) {
    bool in = true;
    for (int i = 0; i < g.d && in; ++i) {
      long long x = c[i];
      long long loc = R.corner[i] << R.scale;  // unshifted spatial cube
      in = (x >= loc) && (x < loc + (1LL << R.scale));
    }
    if (in) w(idx) = 1.0;
    for (int i = g.d - 1; i >= 0; --i) {
      if (++c[i] < N) break;
      c[i] = 0;
    }
  }
  return w;
}

namespace {

double p_of(const LebesgueExponent& e) {
  if (e.recip.num() < 0) throw std::invalid_argument("invalid-exponent: negative reciprocal");
  if (e.is_infinity()) return std::numeric_limits<double>::infinity();
  double p = 1.0 / e.recip.to_double();
  if (!(p > 0)) throw std::invalid_argument("invalid-exponent");
  return p;
}

// Reduce consecutive blocks of length `len` with an L^p norm; entry weights
// are either the explicit array or the constant h.
Eigen::ArrayXd reduce_lp(const Eigen::ArrayXd& v, long long len, double p,
                         const Eigen::ArrayXd* weights, double h) {
  const long long blocks = v.size() / len;
  Eigen::ArrayXd out(blocks);
  for (long long b = 0; b < blocks; ++b) {
    auto seg = v.segment(b * len, len);
    if (std::isinf(p)) {
      out(b) = seg.maxCoeff();
    } else {
      double acc = 0.0;
      for (long long i = 0; i < len; ++i) {
        double wgt = weights ? (*weights)(i) : h;
        acc += wgt * std::pow(seg(i), p);
      }
      out(b) = std::pow(acc, 1.0 / p);
    }
  }
  return out;
}

}  // namespace

double mixed_norm(const GridFunction& f, const NormSpec& spec) {
  const GridGeometry& g = f.geom;
  if (spec.spatial.total_dim() != g.d)
    throw std::invalid_argument("mixed_norm: spatial groups must cover d axes");
  if (spec.vector_exponents.size() != f.W.factors.size())
    throw std::invalid_argument("mixed_norm: vector depth mismatch");

  const long long npts = f.npoints();
  const long long nw = f.W.total();
  // |f| arranged with w fastest: index = x * nw + w
  Eigen::ArrayXd v(npts * nw);
  for (long long w = 0; w < nw; ++w)
    for (long long x = 0; x < npts; ++x) v(x * nw + w) = std::abs(f.data[w](x));

  // vector norms, innermost factor (last) first
  for (int m = (int)f.W.factors.size() - 1; m >= 0; --m) {
    const Eigen::ArrayXd& wts = f.W.factors[m];
    double p = p_of(spec.vector_exponents[m]);
    v = reduce_lp(v, wts.size(), p, std::isinf(p) ? nullptr : &wts, 0.0);
  }
  // spatial groups from the last axis inward; a group of dimension k is one
  // joint L^p reduction over its block of axes
  const double h = 1.0 / (double)g.points_per_axis();
  for (int gi = (int)spec.spatial.groups.size() - 1; gi >= 0; --gi) {
    const auto& [dim, pe] = spec.spatial.groups[gi];
    double p = p_of(pe);
    long long len = 1;
    for (int i = 0; i < dim; ++i) len *= g.points_per_axis();
    v = reduce_lp(v, len, p, nullptr, std::isinf(p) ? 0.0 : std::pow(h, dim));
  }
  if (v.size() != 1) throw std::logic_error("mixed_norm: reduction did not collapse");
  return v(0);
}

double ave_with_weights(const GridFunction& f, const DyadicCube& R, double p,
                        const Eigen::ArrayXd& weights) {
  if (!f.W.is_scalar()) throw std::invalid_argument("ave: scalar functions only");
  if (!(p > 0) || std::isinf(p)) throw std::invalid_argument("invalid-exponent for ave");
  const double vol = std::ldexp(1.0, (R.scale - f.geom.J) * f.geom.d);
  const double hd = 1.0 / (double)f.geom.total_points();
  double acc = 0.0;
  const auto& a = f.data[0];
  for (long long i = 0; i < a.size(); ++i) {
    double m = std::abs(a(i));
    if (m == 0.0 || weights(i) == 0.0) continue;
    acc += std::pow(m, p) * weights(i) * hd;
  }
  return std::pow(acc / vol, 1.0 / p);
}

double ave(const GridFunction& f, const DyadicCube& R, double p, const AveOptions& opt) {
  Eigen::ArrayXd w = opt.mode == WeightMode::Indicator
                         ? indicator_weights(f.geom, R)
                         : chi_tilde_weights(f.geom, R, opt.M);
  return ave_with_weights(f, R, p, w);
}

double spatial_size(const GridFunction& f, const std::vector<DyadicCube>& cubes, double p,
                    const AveOptions& opt) {
  if (cubes.empty()) throw std::invalid_argument("undefined-size: empty cube set");
  double best = 0.0;
  for (const auto& R : cubes) best = std::max(best, ave(f, R, p, opt));
  return best;
}

GridFunction restrict_vector_norm(const GridFunction& f,
                                  const std::vector<LebesgueExponent>& R) {
  if (R.size() != f.W.factors.size())
    throw std::invalid_argument("restrict_vector_norm: depth mismatch");
  const long long npts = f.npoints();
  const long long nw = f.W.total();
  Eigen::ArrayXd v(npts * nw);
  for (long long w = 0; w < nw; ++w)
    for (long long x = 0; x < npts; ++x) v(x * nw + w) = std::abs(f.data[w](x));
  for (int m = (int)f.W.factors.size() - 1; m >= 0; --m) {
    const Eigen::ArrayXd& wts = f.W.factors[m];
    double p = p_of(R[m]);
    v = reduce_lp(v, wts.size(), p, std::isinf(p) ? nullptr : &wts, 0.0);
  }
  GridFunction out = GridFunction::zeros(f.geom);
  out.data[0] = v.cast<Complex>();
  return out;
}

GridFunction abs(const GridFunction& f) {
  if (!f.W.is_scalar()) throw std::invalid_argument("abs: scalar functions only");
  GridFunction out = GridFunction::zeros(f.geom);
  out.data[0] = f.data[0].abs().cast<Complex>();
  return out;
}

double l2_norm(const GridFunction& f) {
  if (!f.W.is_scalar()) throw std::invalid_argument("l2_norm: scalar functions only");
  double hd = 1.0 / (double)f.geom.total_points();
  return std::sqrt((f.data[0].abs2() * hd).sum());
}

double l2_norm_weighted(const GridFunction& f, const Eigen::ArrayXd& weights) {
  if (!f.W.is_scalar()) throw std::invalid_argument("l2_norm: scalar functions only");
  double hd = 1.0 / (double)f.geom.total_points();
  return std::sqrt((f.data[0].abs2() * weights.square() * hd).sum());
}

}  // namespace helicoid
