#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helicoid/fourier.hpp"
#include "helicoid/gridfn.hpp"

using namespace helicoid;

namespace {

GridFunction random_field(const GridGeometry& g, std::mt19937_64& rng,
                          const VectorSpace& W = VectorSpace()) {
  GridFunction f = GridFunction::zeros(g, W);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& a : f.data)
    for (long long i = 0; i < a.size(); ++i) a(i) = Complex(gauss(rng), gauss(rng));
  return f;
}

LebesgueExponent lp(long long num, long long den = 1) {
  return LebesgueExponent::from_p(Rational(num, den));
}

DyadicCube spatial_cube(int d, int scale, std::vector<long long> corner) {
  return DyadicCube::unit(d, scale, std::move(corner));
}

}  // namespace

TEST_CASE("mixed norm basics") {
  GridGeometry g{2, 4};
  auto one = GridFunction::constant(g, 1.0);
  NormSpec spec{MixedExponent{{{1, lp(2)}, {1, lp(3)}}}, {lp(2)}};
  CHECK(mixed_norm(one, spec) == doctest::Approx(1.0).epsilon(1e-12));

  // indicator of the left half in x1, L^2_{x1} L^inf_{x2}
  GridFunction half = GridFunction::zeros(g);
  const long long N = g.points_per_axis();
  for (long long x1 = 0; x1 < N / 2; ++x1)
    for (long long x2 = 0; x2 < N; ++x2) half.data[0](grid_index(g, {x1, x2})) = 1.0;
  NormSpec spec2{MixedExponent{{{1, lp(2)}, {1, LebesgueExponent::infinity()}}}, {lp(1)}};
  CHECK(mixed_norm(half, spec2) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("mixed norm agrees with the naive double loop") {
  GridGeometry g{2, 3};
  std::mt19937_64 rng(31);
  auto f = random_field(g, rng);
  const long long N = g.points_per_axis();
  // oracle: L^3_{x1} L^2_{x2} computed directly
  double outer = 0.0;
  for (long long x1 = 0; x1 < N; ++x1) {
    double inner = 0.0;
    for (long long x2 = 0; x2 < N; ++x2)
      inner += std::pow(std::abs(f.data[0](grid_index(g, {x1, x2}))), 2.0) / (double)N;
    outer += std::pow(std::sqrt(inner), 3.0) / (double)N;
  }
  double expect = std::pow(outer, 1.0 / 3.0);
  NormSpec spec{MixedExponent{{{1, lp(3)}, {1, lp(2)}}}, {lp(1)}};
  CHECK(mixed_norm(f, spec) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mixed norm homogeneity and nesting consistency") {
  GridGeometry g{2, 3};
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_field(g, rng);
    NormSpec per_axis{MixedExponent{{{1, lp(5, 2)}, {1, lp(5, 2)}}}, {lp(1)}};
    NormSpec grouped{MixedExponent{{{2, lp(5, 2)}}}, {lp(1)}};
    double a = mixed_norm(f, per_axis);
    double b = mixed_norm(f, grouped);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));

    Complex c(0.3, -1.7);
    GridFunction cf = f;
    cf.data[0] *= c;
    CHECK(mixed_norm(cf, per_axis) == doctest::Approx(std::abs(c) * a).epsilon(1e-12));
  }
}

TEST_CASE("mixed norm Hoelder inequality on random pairs") {
  GridGeometry g{1, 5};
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto f = random_field(g, rng);
    auto h = random_field(g, rng);
    GridFunction prod = f;
    prod.data[0] *= h.data[0];
    // 1/2 = 1/4 + 1/4 and 1/1 = 1/2 + 1/2
    for (auto [p, p1, p2] : {std::array<long long, 3>{2, 4, 4},
                             std::array<long long, 3>{1, 2, 2}}) {
      NormSpec sp{MixedExponent::uniform(1, lp(p)), {lp(1)}};
      NormSpec sp1{MixedExponent::uniform(1, lp(p1)), {lp(1)}};
      NormSpec sp2{MixedExponent::uniform(1, lp(p2)), {lp(1)}};
      CHECK(mixed_norm(prod, sp) <=
            mixed_norm(f, sp1) * mixed_norm(h, sp2) * (1 + 1e-12));
    }
  }
}

TEST_CASE("ave on constants, zero, and the chi-tilde half torus value") {
  GridGeometry g{1, 8};
  auto c = GridFunction::constant(g, Complex(0.0, -2.5));
  DyadicCube R = spatial_cube(1, 6, {1});
  CHECK(ave(c, R, 1.0, {WeightMode::Indicator, 100}) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(ave(c, R, 3.0, {WeightMode::Indicator, 100}) == doctest::Approx(2.5).epsilon(1e-12));
  auto z = GridFunction::zeros(g);
  CHECK(ave(z, R, 1.0, {}) == 0.0);

  // f = 1, chi-tilde(100), R = half torus: quadrature oracle. The mass of
  // the tail is ~1e-2 at this resolution (the nearest off-cube samples see
  // (1+2/N)^{-100} which is nowhere near negligible). Distances are between
  // sample cells, toroidal.
  DyadicCube half = spatial_cube(1, 7, {0});
  const long long N = g.points_per_axis();
  double oracle = 0.0;
  for (long long x = 0; x < N; ++x) {
    double dist = 0.0;
    if (x >= N / 2) dist = (double)std::min(x - (N / 2 - 1), N - x) / (double)N;
    oracle += std::pow(1.0 + dist / 0.5, -100.0) / (double)N;
  }
  oracle /= 0.5;  // 1/|R|
  auto onef = GridFunction::constant(g, 1.0);
  double got = ave(onef, half, 1.0, {WeightMode::ChiTilde, 100});
  CHECK(got == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(got > 1.0);
  CHECK(got < 1.05);
}

TEST_CASE("ave monotonicity in the weight") {
  GridGeometry g{1, 6};
  std::mt19937_64 rng(43);
  auto f = random_field(g, rng);
  for (int scale = 2; scale <= 5; ++scale) {
    for (long long corner = 0; corner < (1LL << (g.J - scale)); corner += 3) {
      DyadicCube R = spatial_cube(1, scale, {corner});
      CHECK(ave(f, R, 1.0, {WeightMode::Indicator, 100}) <=
            ave(f, R, 1.0, {WeightMode::ChiTilde, 100}) * (1 + 1e-12));
    }
  }
}

TEST_CASE("spatial size") {
  GridGeometry g{1, 6};
  DyadicCube E = spatial_cube(1, 4, {1});
  auto ind = GridFunction::indicator(g, E);
  CHECK(spatial_size(ind, {E}, 1.0, {WeightMode::Indicator, 100}) ==
        doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(47);
  auto f = random_field(g, rng);
  std::vector<DyadicCube> cubes;
  for (int scale = 0; scale <= g.J; ++scale)
    for (long long corner = 0; corner < (1LL << (g.J - scale)); ++corner)
      cubes.push_back(spatial_cube(1, scale, {corner}));
  double s = spatial_size(f, cubes, 1.0, {WeightMode::Indicator, 100});
  // brute-force dyadic maximal function maximum
  double best = 0.0;
  for (const auto& R : cubes) {
    double acc = 0.0;
    long long lo = R.corner[0] << R.scale, len = 1LL << R.scale;
    for (long long x = lo; x < lo + len; ++x) acc += std::abs(f.data[0](x));
    best = std::max(best, acc / (double)len);
  }
  CHECK(s == doctest::Approx(best).epsilon(1e-12));
  CHECK_THROWS(spatial_size(f, {}, 1.0, {}));
}

TEST_CASE("restrict_vector_norm") {
  GridGeometry g{1, 4};
  VectorSpace W{{(Eigen::ArrayXd(3) << 0.5, 0.25, 0.25).finished()}};
  auto c = GridFunction::constant(g, Complex(2.0, 0.0), W);
  auto r = restrict_vector_norm(c, {lp(2)});
  // constant in w: mu(W)^{1/2} * |f| = 1^{1/2} * 2
  CHECK(std::abs(r.data[0](0)) == doctest::Approx(2.0).epsilon(1e-12));

  auto single = GridFunction::constant(g, Complex(0.0, 3.0));
  auto rs = restrict_vector_norm(single, {lp(7)});
  CHECK(std::abs(rs.data[0](1)) == doctest::Approx(3.0).epsilon(1e-12));

  std::mt19937_64 rng(53);
  auto f = random_field(g, rng, W);
  auto rv = restrict_vector_norm(f, {lp(3)});
  for (long long x = 0; x < f.npoints(); ++x) {
    double acc = 0.0;
    for (int w = 0; w < 3; ++w)
      acc += W.factors[0](w) * std::pow(std::abs(f.data[w](x)), 3.0);
    CHECK(std::abs(rv.data[0](x)) == doctest::Approx(std::pow(acc, 1.0 / 3)).epsilon(1e-12));
  }
}

TEST_CASE("fft round trip and Parseval") {
  std::mt19937_64 rng(59);
  for (int d = 1; d <= 2; ++d) {
    GridGeometry g{d, 4};
    auto f = random_field(g, rng);
    auto s = fft(f);
    auto back = ifft(s);
    for (long long i = 0; i < f.npoints(); ++i)
      CHECK(std::abs(back.data[0](i) - f.data[0](i)) < 1e-10);
    // Parseval with the 1/N^d forward normalization
    double spatial = (f.data[0].abs2() / (double)f.npoints()).sum();
    double freq = s.bins[0].abs2().sum();
    CHECK(spatial == doctest::Approx(freq).epsilon(1e-10));
  }
}

TEST_CASE("bin/frequency indexing") {
  GridGeometry g{2, 3};
  for (long long m1 = -4; m1 < 4; ++m1)
    for (long long m2 = -4; m2 < 4; ++m2) {
      auto idx = bin_of_freq(g, {m1, m2});
      auto back = freq_of_bin(g, idx);
      CHECK(back[0] == m1);
      CHECK(back[1] == m2);
    }
  CHECK_THROWS(bin_of_freq(g, {4, 0}));

  // a pure exponential lands in exactly one bin
  GridFunction f = GridFunction::zeros(g);
  const long long N = g.points_per_axis();
  for (long long x1 = 0; x1 < N; ++x1)
    for (long long x2 = 0; x2 < N; ++x2)
      f.data[0](grid_index(g, {x1, x2})) =
          std::exp(Complex(0, 2 * M_PI * (3.0 * x1 - 2.0 * x2) / (double)N));
  auto s = fft(f);
  for (long long b = 0; b < f.npoints(); ++b) {
    auto m = freq_of_bin(g, b);
    double expect = (m[0] == 3 && m[1] == -2) ? 1.0 : 0.0;
    CHECK(std::abs(s.bins[0](b) - expect) < 1e-10);
  }
}

TEST_CASE("quasi-norm exponents below one use the same formula") {
  GridGeometry g{1, 4};
  std::mt19937_64 rng(67);
  auto f = random_field(g, rng);
  NormSpec half{MixedExponent::uniform(1, lp(1, 2)), {lp(1)}};
  double a = mixed_norm(f, half);
  CHECK(a > 0.0);
  GridFunction cf = f;
  cf.data[0] *= 4.0;
  CHECK(mixed_norm(cf, half) == doctest::Approx(4.0 * a).epsilon(1e-12));
  // direct formula check
  double acc = 0.0;
  for (long long i = 0; i < f.npoints(); ++i)
    acc += std::sqrt(std::abs(f.data[0](i))) / (double)f.npoints();
  CHECK(a == doctest::Approx(acc * acc).epsilon(1e-12));
}
