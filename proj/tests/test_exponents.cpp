#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helicoid/exponents.hpp"

using namespace helicoid;

namespace {

ExponentTuple tup(std::initializer_list<Rational> recips) {
  ExponentTuple t;
  for (const auto& r : recips) t.entries.push_back(LebesgueExponent::from_recip(r));
  return t;
}

// Random Hoelder tuple with small denominators; the last slot closes the sum.
ExponentTuple random_holder(std::mt19937_64& rng, int n, long long den = 24) {
  for (;;) {
    ExponentTuple t;
    Rational sum(0);
    std::uniform_int_distribution<long long> dist(0, den - 1);
    for (int j = 0; j < n; ++j) {
      Rational r(dist(rng), den);  // in [0, 1)
      t.entries.push_back(LebesgueExponent::from_recip(r));
      sum += r;
    }
    Rational last = Rational(1) - sum;
    t.entries.push_back(LebesgueExponent::from_recip(last));
    if (last > Rational(1 - n) && last < Rational(1)) return t;
  }
}

bool witness_checks_out(int n, int k, const ExponentTuple& t, const RangeDecision& d) {
  if (!d.witness) return false;
  const AlphaTuple& a = *d.witness;
  if (k == 0) {
    for (const auto& x : a.alphas)
      if (!x.is_zero()) return false;
    return true;
  }
  if (!xi_feasible(n, k, a)) return false;
  std::vector<Rational> thresholds;
  for (const auto& x : a.alphas) thresholds.push_back(Rational(1) - x);
  return is_local(t, thresholds);
}

}  // namespace

TEST_CASE("Hoelder tuple recognition") {
  CHECK(is_holder_tuple(tup({{1, 2}, {1, 2}, {0, 1}})));        // (2,2,inf)
  CHECK(is_holder_tuple(tup({{1, 4}, {1, 4}, {1, 2}})));        // (4,4,2)
  CHECK_FALSE(is_holder_tuple(tup({{1, 2}, {1, 3}, {1, 4}})));  // sums to 13/12
  // last slot may have negative reciprocal as long as 1/n < p' < inf
  CHECK(is_holder_tuple(tup({{3, 4}, {3, 4}, {-1, 2}})));
  CHECK_FALSE(is_holder_tuple(tup({{1, 1}, {0, 1}, {0, 1}})));  // p_1 = 1 excluded
  ExponentTuple degenerate;
  degenerate.entries.push_back(LebesgueExponent::infinity());
  CHECK_THROWS(is_holder_tuple(degenerate));
}

TEST_CASE("strict locality") {
  auto a = std::vector<Rational>{{2, 3}, {2, 3}, {2, 3}};
  CHECK(is_local(tup({{1, 2}, {1, 2}, {1, 2}}), a));
  auto half = std::vector<Rational>{{1, 2}, {1, 2}, {1, 2}};
  CHECK_FALSE(is_local(tup({{1, 2}, {1, 2}, {1, 2}}), half));  // strictness
  auto pos = std::vector<Rational>{{1, 100}, {1, 100}, {1, 100}};
  CHECK(is_local(tup({{0, 1}, {0, 1}, {0, 1}}), pos));  // all-infinity tuple
}

TEST_CASE("alpha from theta") {
  ThetaVector sym{2, 1, {{1u << 0, Rational(1, 3)}, {1u << 1, Rational(1, 3)}, {1u << 2, Rational(1, 3)}}};
  auto a = alpha_from_theta(sym);
  CHECK(a.alphas == std::vector<Rational>{{1, 3}, {1, 3}, {1, 3}});

  ThetaVector corner{2, 1, {{1u << 0, Rational(1)}}};
  auto ac = alpha_from_theta(corner);
  CHECK(ac.alphas == std::vector<Rational>{Rational(1), Rational(0), Rational(0)});
  CHECK_FALSE(xi_feasible(2, 1, ac));  // alpha_1 not in (0,1/2)

  // n=4, k=2, uniform weight over the 10 pairs: each slot sits in C(4,1)=4 pairs.
  ThetaVector uni;
  uni.n = 4;
  uni.k = 2;
  for (SlotMask m : k_subsets(5, 2)) uni.weights[m] = Rational(1, 10);
  auto au = alpha_from_theta(uni);
  Rational total(0);
  for (const auto& x : au.alphas) {
    CHECK(x == Rational(4, 10));
    total += x;
  }
  CHECK(total == Rational(2));
}

TEST_CASE("alpha_from_theta sums to k on random thetas") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + (int)(rng() % 3);
    int maxk = (n + 1) / 2 - ((n + 1) % 2 == 0 ? 1 : 0);
    int k = 1 + (int)(rng() % std::max(1, maxk));
    if (2 * k >= n + 1) k = 1;
    auto subs = k_subsets(n + 1, k);
    ThetaVector th;
    th.n = n;
    th.k = k;
    long long den = 60;
    long long left = den;
    for (size_t i = 0; i < subs.size(); ++i) {
      long long w = (i + 1 == subs.size()) ? left : (long long)(rng() % (left + 1));
      left -= w;
      if (w > 0) th.weights[subs[i]] = Rational(w, den);
    }
    if (th.weights.empty()) th.weights[subs[0]] = Rational(0);
    auto a = alpha_from_theta(th);
    Rational sum(0);
    for (const auto& x : a.alphas) sum += x;
    CHECK(sum == Rational(k));
  }
}

TEST_CASE("xi feasibility") {
  AlphaTuple sym{2, 1, {{1, 3}, {1, 3}, {1, 3}}};
  CHECK(xi_feasible(2, 1, sym));
  AlphaTuple bad{2, 1, {{3, 5}, {1, 5}, {1, 5}}};
  CHECK_FALSE(xi_feasible(2, 1, bad));
  AlphaTuple uni{4, 2, {{2, 5}, {2, 5}, {2, 5}, {2, 5}, {2, 5}}};
  CHECK(xi_feasible(4, 2, uni));
  CHECK_THROWS(xi_feasible(2, 2, sym));  // k >= (n+1)/2
  AlphaTuple zero{2, 0, {Rational(0), Rational(0), Rational(0)}};
  CHECK(xi_feasible(2, 0, zero));
}

TEST_CASE("range membership examples") {
  auto d = range_membership(2, 1, tup({{1, 2}, {1, 2}, {0, 1}}));
  CHECK(d.member);
  CHECK(witness_checks_out(2, 1, tup({{1, 2}, {1, 2}, {0, 1}}), d));

  // needs alpha_1, alpha_2 < 1/4 forcing alpha_3 > 1/2: infeasible
  auto r = range_membership(2, 1, tup({{3, 4}, {3, 4}, {-1, 2}}));
  CHECK_FALSE(r.member);

  auto nh = range_membership(2, 1, tup({{1, 2}, {1, 3}, {1, 4}}));
  CHECK_FALSE(nh.member);
  CHECK(nh.reason == "not a Hoelder tuple");

  // k = 0: every Hoelder tuple
  auto p0 = range_membership(2, 0, tup({{1, 2}, {1, 3}, {1, 6}}));
  CHECK(p0.member);
}

TEST_CASE("closed local-L2 range is always accepted") {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 4; ++n) {
    for (int k = 0; 2 * k < n + 1; ++k) {
      for (int trial = 0; trial < 40; ++trial) {
        // all reciprocals in [0, 1/2], last slot included
        ExponentTuple t;
        Rational sum(0);
        bool ok = true;
        for (int j = 0; j < n; ++j) {
          Rational r((long long)(rng() % 13), 24);  // [0, 1/2]
          t.entries.push_back(LebesgueExponent::from_recip(r));
          sum += r;
        }
        Rational last = Rational(1) - sum;
        if (!(last >= Rational(0) && last <= Rational(1, 2))) ok = false;
        t.entries.push_back(LebesgueExponent::from_recip(last));
        if (!ok) continue;
        auto d = range_membership(n, k, t);
        CHECK(d.member);
      }
    }
  }
}

TEST_CASE("membership is monotone via witness reuse") {
  std::mt19937_64 rng(13);
  int reused = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto t = random_holder(rng, 2);
    auto d = range_membership(2, 1, t);
    if (!d.member) continue;
    // decrease 1/p_1 by one grid step, close Hoelder via the last slot
    ExponentTuple t2 = t;
    Rational step(1, 24);
    if (t2.entries[0].recip < step) continue;
    t2.entries[0].recip -= step;
    t2.entries[2].recip += step;
    if (!is_holder_tuple(t2)) continue;
    std::vector<Rational> thresholds;
    for (const auto& x : d.witness->alphas) thresholds.push_back(Rational(1) - x);
    if (is_local(t2, thresholds)) {
      CHECK(range_membership(2, 1, t2).member);
      ++reused;
    }
  }
  CHECK(reused > 20);
}

TEST_CASE("n=4 k=2 membership implies the pair and triple constraints") {
  std::mt19937_64 rng(17);
  int members = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto t = random_holder(rng, 4, 20);
    auto d = range_membership(4, 2, t);
    if (!d.member) continue;
    ++members;
    for (int i1 = 0; i1 < 5; ++i1)
      for (int i3 = i1 + 1; i3 < 5; ++i3)
        CHECK(t.entries[i1].recip + t.entries[i3].recip < Rational(3, 2));
    for (int i1 = 0; i1 < 5; ++i1)
      for (int i2 = i1 + 1; i2 < 5; ++i2)
        for (int i3 = i2 + 1; i3 < 5; ++i3)
          CHECK(t.entries[i1].recip + t.entries[i2].recip + t.entries[i3].recip < Rational(2));
  }
  CHECK(members > 10);
}

TEST_CASE("LP agrees with the theta-grid oracle") {
  std::mt19937_64 rng(19);
  struct Case { int n, k; long long res; int trials; };
  for (const Case& c : {Case{2, 1, 64, 60}, Case{3, 1, 64, 25}, Case{4, 2, 8, 8}}) {
    for (int trial = 0; trial < c.trials; ++trial) {
      auto t = random_holder(rng, c.n);
      auto lp = range_membership(c.n, c.k, t);
      auto grid = range_grid_search(c.n, c.k, t, c.res);
      if (grid.has_value()) {
        // the oracle found an interior point with margin 1/res
        CHECK(lp.member);
        auto a = alpha_from_theta(*grid);
        CHECK(xi_feasible(c.n, c.k, a));
      }
      // boundary cases (LP slack below the grid margin) are excluded;
      // otherwise a member must be visible on the grid
      if (lp.member && !grid.has_value()) {
        // re-run LP and confirm the slack is genuinely small is implicit:
        // the grid margin excludes anything within 1/res of infeasibility.
        // Nothing to assert here beyond consistency of the two rejections.
        continue;
      }
      if (!lp.member) CHECK_FALSE(grid.has_value());
    }
  }
}

TEST_CASE("Brascamp-Lieb tuples for coordinate projections") {
  std::vector<CoordinateProjection> forget;
  for (int j = 0; j < 4; ++j) {
    CoordinateProjection p;
    p.d = 4;
    for (int ax = 0; ax < 4; ++ax)
      if (ax != j) p.kept_axes.push_back(ax);
    forget.push_back(p);
  }
  CHECK(is_brascamp_lieb_tuple(tup({{1, 3}, {1, 3}, {1, 3}, {1, 3}}), forget, 4));
  CHECK_FALSE(is_brascamp_lieb_tuple(tup({{1, 2}, {1, 2}, {1, 2}, {1, 2}}), forget, 4));

  std::vector<CoordinateProjection> ident(2);
  for (auto& p : ident) {
    p.d = 2;
    p.kept_axes = {0, 1};
  }
  CHECK(is_brascamp_lieb_tuple(tup({{1, 2}, {1, 2}}), ident, 2));

  CoordinateProjection bad;
  bad.d = 4;
  CHECK_THROWS(is_brascamp_lieb_tuple(tup({{1, 3}, {1, 3}, {1, 3}, {1, 3}}),
                                      {forget[0], forget[1], forget[2], bad}, 4));
}

TEST_CASE("Finner condition") {
  std::vector<CoordinateProjection> forget;
  for (int j = 0; j < 4; ++j) {
    CoordinateProjection p;
    p.d = 4;
    for (int ax = 0; ax < 4; ++ax)
      if (ax != j) p.kept_axes.push_back(ax);
    forget.push_back(p);
  }
  auto l3 = LebesgueExponent::from_p(Rational(3));
  std::vector<MixedExponent> all3(4, MixedExponent::uniform(3, l3));
  CHECK(finner_condition(forget, all3));

  // the H2 pattern at p=1: each function sees two axes at 2p=2, inf elsewhere
  std::vector<CoordinateProjection> h2maps(4);
  auto l2 = LebesgueExponent::from_p(Rational(2));
  h2maps[0].d = 4; h2maps[0].kept_axes = {1, 2};
  h2maps[1].d = 4; h2maps[1].kept_axes = {2, 3};
  h2maps[2].d = 4; h2maps[2].kept_axes = {0, 3};
  h2maps[3].d = 4; h2maps[3].kept_axes = {0, 1};
  std::vector<MixedExponent> h2(4, MixedExponent::uniform(2, l2));
  CHECK(finner_condition(h2maps, h2));

  // an axis seen by a single function at 2 fails
  std::vector<CoordinateProjection> solo(1);
  solo[0].d = 2;
  solo[0].kept_axes = {0, 1};
  std::vector<MixedExponent> solo_p = {MixedExponent::uniform(2, l2)};
  CHECK_FALSE(finner_condition(solo, solo_p));
}

TEST_CASE("tuple JSON round trip") {
  auto t = tup({{1, 2}, {2, 3}, {-1, 6}});
  auto back = tuple_from_json(tuple_to_json(t));
  REQUIRE(back.arity() == t.arity());
  for (int j = 0; j < t.arity(); ++j) CHECK(back.entries[j] == t.entries[j]);
  auto inf = tuple_from_json("[\"inf\",\"2\",\"2\"]");
  CHECK(inf.entries[0].is_infinity());
  CHECK(inf.entries[1].recip == Rational(1, 2));
}
