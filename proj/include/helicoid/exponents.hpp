#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "helicoid/rational.hpp"

namespace helicoid {

// A Lebesgue exponent stored by its reciprocal; recip 0 encodes p = infinity.
// Negative reciprocals are allowed: Hoelder tuples can carry 1/p_{n+1} < 0
// (the dual exponent is then below 1). Function-space code validates
// recip >= 0 at the point of use.
struct LebesgueExponent {
  Rational recip;

  LebesgueExponent() : recip(0) {}
  explicit LebesgueExponent(Rational r) : recip(r) {}

  static LebesgueExponent infinity() { return LebesgueExponent(Rational(0)); }
  static LebesgueExponent from_p(Rational p) { return LebesgueExponent(Rational(1) / p); }
  static LebesgueExponent from_recip(Rational r) { return LebesgueExponent(r); }

  bool is_infinity() const { return recip.is_zero(); }
  // Hoelder conjugate; only meaningful for recip <= 1.
  LebesgueExponent dual() const { return LebesgueExponent(Rational(1) - recip); }
  double p_value() const { return recip.is_zero() ? 0.0 : 1.0 / recip.to_double(); }

  // "num/den" reciprocal-of form is avoided in text: serialization is of p
  // itself as "num/den" or "inf".
  std::string str() const;
  static LebesgueExponent parse(const std::string& s);

  friend bool operator==(const LebesgueExponent& a, const LebesgueExponent& b) {
    return a.recip == b.recip;
  }
};

struct ExponentTuple {
  std::vector<LebesgueExponent> entries;  // arity n+1

  int arity() const { return (int)entries.size(); }
  std::string str() const;
  static ExponentTuple parse(const std::string& json_array);
};

// Subsets of {1..n+1} are stored as bitmasks over 0-based slot indices.
using SlotMask = std::uint32_t;

std::vector<SlotMask> k_subsets(int n_plus_1, int k);

struct ThetaVector {
  int n = 0;
  int k = 0;
  std::map<SlotMask, Rational> weights;  // over ordered k-subsets, sum to 1

  bool valid(std::string* why = nullptr) const;
};

struct AlphaTuple {
  int n = 0;
  int k = 0;
  std::vector<Rational> alphas;  // n+1 entries, sum k
};

// Iterated spatial norm: blocks (d_i, p_i) with sum d_i = d.
struct MixedExponent {
  std::vector<std::pair<int, LebesgueExponent>> groups;

  int total_dim() const;
  // Per-axis expansion: p for axis i in reading order.
  std::vector<LebesgueExponent> per_axis() const;
  static MixedExponent uniform(int d, LebesgueExponent p);
};

// --- operations -------------------------------------------------------------

// Sum of reciprocals equals 1; 1 < p_1..p_n <= inf; 1/n < p'_{n+1} < inf.
bool is_holder_tuple(const ExponentTuple& t);

// Strict componentwise locality: 1/q_j < a_j for every j.
bool is_local(const ExponentTuple& t, const std::vector<Rational>& a);

AlphaTuple alpha_from_theta(const ThetaVector& theta);

// alpha in Xi_{n,k}: all alpha_j in (0,1/2) and a theta certificate exists
// (exact LP feasibility over the weight simplex). k = 0 degenerates to
// alpha == 0. Throws std::invalid_argument when k >= (n+1)/2.
bool xi_feasible(int n, int k, const AlphaTuple& alphas);

struct RangeDecision {
  bool member = false;
  std::string reason;                 // set when rejected
  std::optional<AlphaTuple> witness;  // set when member
  std::optional<ThetaVector> theta;   // certificate behind the witness
};

// Membership in Range(n,k): exists theta in the simplex with
// 1/p_j < 1 - alpha_j(theta) for every j (and alpha_j in (0,1/2) strictly).
// Decided exactly by maximizing the slack. Range(n,0) = all Hoelder tuples.
RangeDecision range_membership(int n, int k, const ExponentTuple& t);

// Brute-force certificate search on the theta-grid of the given resolution
// (weights are multiples of 1/resolution); returns a strictly feasible theta
// with margin >= 1/resolution if one exists. Test oracle for range_membership.
std::optional<ThetaVector> range_grid_search(int n, int k, const ExponentTuple& t,
                                             long long resolution);

// Coordinate projection R^d -> R^{d_j}: keeps the listed axes (0-based).
struct CoordinateProjection {
  int d = 0;
  std::vector<int> kept_axes;

  int target_dim() const { return (int)kept_axes.size(); }
  bool keeps(int axis) const;
};

// Brascamp-Lieb tuple test for coordinate projections: scaling identity
// d = sum d_j/p_j plus dim V <= sum dim(L_j V)/p_j over all 2^d coordinate
// subspaces (d <= 6). Throws std::invalid_argument for d > 6.
bool is_brascamp_lieb_tuple(const ExponentTuple& t,
                            const std::vector<CoordinateProjection>& maps, int d);

// Finner condition: for every axis i, the reciprocals of the exponents of
// the functions retaining x_i sum to exactly 1 (inf on dropped axes).
bool finner_condition(const std::vector<CoordinateProjection>& maps,
                      const std::vector<MixedExponent>& tuples);

// --- serialization ----------------------------------------------------------

// JSON array of strings "num/den" / "inf" (values of p, not reciprocals).
std::string tuple_to_json(const ExponentTuple& t);
ExponentTuple tuple_from_json(const std::string& text);

std::string alphas_to_string(const AlphaTuple& a);

}  // namespace helicoid
