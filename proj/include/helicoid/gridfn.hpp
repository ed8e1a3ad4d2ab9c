#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "helicoid/dyadic.hpp"
#include "helicoid/exponents.hpp"

namespace helicoid {

using Complex = std::complex<double>;

// Finite product measure space for the vector parameter; each factor is a
// list of positive point masses. A scalar function uses the default single
// factor {1}.
struct VectorSpace {
  std::vector<Eigen::ArrayXd> factors;

  VectorSpace() : factors{Eigen::ArrayXd::Ones(1)} {}
  explicit VectorSpace(std::vector<Eigen::ArrayXd> f) : factors(std::move(f)) {}

  long long total() const {
    long long t = 1;
    for (const auto& f : factors) t *= f.size();
    return t;
  }
  bool is_scalar() const { return total() == 1; }
  double weight(long long w) const;  // product of factor masses
  double total_mass() const;
};

// Complex samples on the d-torus at resolution 2^J per axis, indexed by the
// grid point and a vector parameter w. Layout: data[w] is the flat grid
// array with the last axis fastest.
struct GridFunction {
  GridGeometry geom;
  VectorSpace W;
  std::vector<Eigen::ArrayXcd> data;

  static GridFunction zeros(const GridGeometry& g, const VectorSpace& W = VectorSpace());
  static GridFunction constant(const GridGeometry& g, Complex c,
                               const VectorSpace& W = VectorSpace());
  // Indicator of a spatial dyadic cube (grid units, unshifted).
  static GridFunction indicator(const GridGeometry& g, const DyadicCube& R);

  long long npoints() const { return geom.total_points(); }
  Eigen::ArrayXcd& at(long long w) { return data[w]; }
  const Eigen::ArrayXcd& at(long long w) const { return data[w]; }

  bool compatible(const GridFunction& o) const {
    return geom.d == o.geom.d && geom.J == o.geom.J && W.total() == o.W.total();
  }
};

long long grid_index(const GridGeometry& g, const std::vector<long long>& coords);
std::vector<long long> grid_coords(const GridGeometry& g, long long index);

enum class WeightMode { Indicator, ChiTilde };

struct AveOptions {
  WeightMode mode = WeightMode::ChiTilde;
  int M = 100;  // chi-tilde decay exponent
};

// (1 + dist(x,R)/ell(R))^{-M} with toroidal Euclidean distance; the cube is
// read in grid units and everything is scaled to torus coordinates.
Eigen::ArrayXd chi_tilde_weights(const GridGeometry& g, const DyadicCube& R, int M);
Eigen::ArrayXd indicator_weights(const GridGeometry& g, const DyadicCube& R);

struct NormSpec {
  MixedExponent spatial;                          // groups over the d axes
  std::vector<LebesgueExponent> vector_exponents;  // one per W factor
};

// Iterated norm: vector-factor norms innermost (last factor first), then
// spatial axes from x_d inward to x_1, Riemann weights 1/N per axis and the
// factor masses on W. L^infinity slots take maxima.
double mixed_norm(const GridFunction& f, const NormSpec& spec);

// L^p-normalized average over a cube: ((1/|R|) sum |f|^p w_R N^{-d})^{1/p}.
// Scalar functions only; 0 < p < infinity.
double ave(const GridFunction& f, const DyadicCube& R, double p, const AveOptions& opt = {});
double ave_with_weights(const GridFunction& f, const DyadicCube& R, double p,
                        const Eigen::ArrayXd& weights);

// sup over the cube family of ave; throws undefined-size on an empty family.
double spatial_size(const GridFunction& f, const std::vector<DyadicCube>& cubes, double p,
                    const AveOptions& opt = {});

// Pointwise-in-x application of the vector norms; returns a scalar function.
GridFunction restrict_vector_norm(const GridFunction& f,
                                  const std::vector<LebesgueExponent>& R);

// Pointwise |f| as a scalar-real-valued GridFunction (W must be scalar).
GridFunction abs(const GridFunction& f);

double l2_norm(const GridFunction& f);  // scalar L^2 with Riemann weights
double l2_norm_weighted(const GridFunction& f, const Eigen::ArrayXd& weights);

}  // namespace helicoid
