#include "helicoid/exponents.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "helicoid/simplex.hpp"

namespace helicoid {

std::string LebesgueExponent::str() const {
  if (recip.is_zero()) return "inf";
  Rational p = Rational(1) / recip;
  return p.str();
}

LebesgueExponent LebesgueExponent::parse(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return infinity();
  return from_p(parse_rational(s));
}

std::string ExponentTuple::str() const {
  std::string out = "(";
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) out += ", ";
    out += entries[i].str();
  }
  return out + ")";
}

ExponentTuple ExponentTuple::parse(const std::string& json_array) {
  return tuple_from_json(json_array);
}

std::vector<SlotMask> k_subsets(int n_plus_1, int k) {
  std::vector<SlotMask> out;
  std::function<void(int, int, SlotMask)> rec = [&](int next, int left, SlotMask acc) {
    if (left == 0) {
      out.push_back(acc);
      return;
    }
    for (int i = next; i <= n_plus_1 - left; ++i) rec(i + 1, left - 1, acc | (SlotMask(1) << i));
  };
  rec(0, k, 0);
  return out;
}

bool ThetaVector::valid(std::string* why) const {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (!(k >= 0 && 2 * k < n + 1)) return fail("rank constraint 0 <= k < (n+1)/2 violated");
  Rational total(0);
  for (const auto& [mask, w] : weights) {
    if ((int)__builtin_popcount(mask) != k) return fail("weight indexed by a non-k-subset");
    if (mask >= (SlotMask(1) << (n + 1))) return fail("subset out of slot range");
    if (w < Rational(0) || w > Rational(1)) return fail("weight outside [0,1]");
    total += w;
  }
  if (total != Rational(1)) return fail("weights do not sum to 1");
  return true;
}

int MixedExponent::total_dim() const {
  int d = 0;
  for (const auto& [dim, p] : groups) d += dim;
  return d;
}

std::vector<LebesgueExponent> MixedExponent::per_axis() const {
  std::vector<LebesgueExponent> out;
  for (const auto& [dim, p] : groups)
    for (int i = 0; i < dim; ++i) out.push_back(p);
  return out;
}

MixedExponent MixedExponent::uniform(int d, LebesgueExponent p) {
  return MixedExponent{{{d, p}}};
}

bool is_holder_tuple(const ExponentTuple& t) {
  const int np1 = t.arity();
  if (np1 < 2) throw std::invalid_argument("malformed tuple: arity < 2");
  const int n = np1 - 1;
  Rational sum(0);
  for (const auto& e : t.entries) sum += e.recip;
  if (sum != Rational(1)) return false;
  for (int j = 0; j < n; ++j) {
    const Rational& r = t.entries[j].recip;
    if (!(r >= Rational(0) && r < Rational(1))) return false;  // 1 < p_j <= inf
  }
  // 1/n < p'_{n+1} < inf  <=>  1-n < 1/p_{n+1} < 1
  const Rational& rl = t.entries[n].recip;
  return rl > Rational(1 - (long long)n) && rl < Rational(1);
}

bool is_local(const ExponentTuple& t, const std::vector<Rational>& a) {
  if (a.size() != t.entries.size())
    throw std::invalid_argument("locality threshold length mismatch");
  for (size_t j = 0; j < a.size(); ++j)
    if (!(t.entries[j].recip < a[j])) return false;
  return true;
}

AlphaTuple alpha_from_theta(const ThetaVector& theta) {
  std::string why;
  if (!theta.valid(&why)) throw std::invalid_argument("invalid ThetaVector: " + why);
  AlphaTuple a;
  a.n = theta.n;
  a.k = theta.k;
  a.alphas.assign(theta.n + 1, Rational(0));
  for (const auto& [mask, w] : theta.weights)
    for (int j = 0; j <= theta.n; ++j)
      if (mask & (SlotMask(1) << j)) a.alphas[j] += w;
  return a;
}

namespace {

// LP over the theta-simplex: feasibility of alpha_j(theta) {==, <, >} data.
// Variables are theta_T for the C(n+1,k) subsets.
struct ThetaIncidence {
  std::vector<SlotMask> subsets;
  int n;

  explicit ThetaIncidence(int n_, int k) : subsets(k_subsets(n_ + 1, k)), n(n_) {}
  int vars() const { return (int)subsets.size(); }
  Rational coeff(int slot, int var) const {
    return (subsets[var] & (SlotMask(1) << slot)) ? Rational(1) : Rational(0);
  }
};

}  // namespace

bool xi_feasible(int n, int k, const AlphaTuple& a) {
  if (!(k >= 0 && 2 * k < n + 1))
    throw std::invalid_argument("rank-constraint-violated: need 0 <= k < (n+1)/2");
  if ((int)a.alphas.size() != n + 1)
    throw std::invalid_argument("alpha tuple arity mismatch");
  Rational sum(0);
  for (const auto& x : a.alphas) sum += x;
  if (sum != Rational(k)) return false;
  if (k == 0) {
    for (const auto& x : a.alphas)
      if (!x.is_zero()) return false;
    return true;
  }
  const Rational half(1, 2);
  for (const auto& x : a.alphas)
    if (!(x > Rational(0) && x < half)) return false;

  ThetaIncidence inc(n, k);
  // Equalities: alpha_j(theta) = alpha_j for all j, sum theta = 1.
  RationalMatrix E(n + 2, inc.vars());
  RationalVector e(n + 2);
  for (int j = 0; j <= n; ++j) {
    for (int v = 0; v < inc.vars(); ++v) E(j, v) = inc.coeff(j, v);
    e(j) = a.alphas[j];
  }
  for (int v = 0; v < inc.vars(); ++v) E(n + 1, v) = Rational(1);
  e(n + 1) = Rational(1);
  RationalMatrix A(0, inc.vars());
  RationalVector b(0);
  return feasible_point(A, b, E, e).has_value();
}

namespace {

RangeDecision reject(const std::string& reason) {
  RangeDecision d;
  d.member = false;
  d.reason = reason;
  return d;
}

}  // namespace

RangeDecision range_membership(int n, int k, const ExponentTuple& t) {
  if (t.arity() != n + 1) throw std::invalid_argument("tuple arity must be n+1");
  if (!(k >= 0 && 2 * k < n + 1))
    throw std::invalid_argument("rank-constraint-violated: need 0 <= k < (n+1)/2");
  if (!is_holder_tuple(t)) return reject("not a Hoelder tuple");

  if (k == 0) {
    RangeDecision d;
    d.member = true;
    AlphaTuple a;
    a.n = n;
    a.k = 0;
    a.alphas.assign(n + 1, Rational(0));
    d.witness = a;
    return d;
  }

  // maximize slack t0 subject to:
  //   alpha_j(theta) + t0 <= min(1 - 1/p_j, 1/2)   (locality and alpha < 1/2)
  //   -alpha_j(theta) + t0 <= 0                    (alpha > 0)
  //   sum theta = 1 (two inequalities), theta >= 0, t0 >= 0.
  // Strict feasibility <=> optimal t0 > 0.
  ThetaIncidence inc(n, k);
  const int V = inc.vars();
  const Rational half(1, 2);
  const int rows = 2 * (n + 1) + 2;
  RationalMatrix A = RationalMatrix::Constant(rows, V + 1, Rational(0));
  RationalVector b(rows);
  for (int j = 0; j <= n; ++j) {
    Rational cap = min(Rational(1) - t.entries[j].recip, half);
    for (int v = 0; v < V; ++v) A(j, v) = inc.coeff(j, v);
    A(j, V) = Rational(1);
    b(j) = cap;
    for (int v = 0; v < V; ++v) A(n + 1 + j, v) = -inc.coeff(j, v);
    A(n + 1 + j, V) = Rational(1);
    b(n + 1 + j) = Rational(0);
  }
  for (int v = 0; v < V; ++v) {
    A(2 * n + 2, v) = Rational(1);
    A(2 * n + 3, v) = Rational(-1);
  }
  b(2 * n + 2) = Rational(1);
  b(2 * n + 3) = Rational(-1);
  RationalVector c = RationalVector::Zero(V + 1);
  c(V) = Rational(1);

  LpResult res = maximize(A, b, c);
  if (res.status == LpStatus::Infeasible || !(res.value > Rational(0)))
    return reject("no interior interpolation certificate");

  RangeDecision d;
  d.member = true;
  ThetaVector theta;
  theta.n = n;
  theta.k = k;
  for (int v = 0; v < V; ++v) theta.weights[inc.subsets[v]] = res.point(v);
  d.theta = theta;
  d.witness = alpha_from_theta(theta);
  return d;
}

std::optional<ThetaVector> range_grid_search(int n, int k, const ExponentTuple& t,
                                             long long resolution) {
  if (!is_holder_tuple(t)) return std::nullopt;
  if (k == 0) return ThetaVector{n, 0, {{SlotMask(0), Rational(1)}}};
  ThetaIncidence inc(n, k);
  const int V = inc.vars();
  const Rational margin(1, resolution);
  const Rational half(1, 2);
  std::vector<Rational> caps(n + 1);
  for (int j = 0; j <= n; ++j) caps[j] = min(Rational(1) - t.entries[j].recip, half);

  std::vector<long long> parts(V, 0);
  std::optional<ThetaVector> found;
  std::function<void(int, long long)> rec = [&](int v, long long left) {
    if (found) return;
    if (v == V - 1) {
      parts[v] = left;
      std::vector<Rational> alpha(n + 1, Rational(0));
      for (int u = 0; u < V; ++u) {
        if (parts[u] == 0) continue;
        Rational w(parts[u], resolution);
        for (int j = 0; j <= n; ++j)
          if (inc.subsets[u] & (SlotMask(1) << j)) alpha[j] += w;
      }
      for (int j = 0; j <= n; ++j) {
        if (!(alpha[j] >= margin)) return;
        if (!(alpha[j] + margin <= caps[j])) return;
      }
      ThetaVector theta;
      theta.n = n;
      theta.k = k;
      for (int u = 0; u < V; ++u)
        if (parts[u] > 0) theta.weights[inc.subsets[u]] = Rational(parts[u], resolution);
      found = theta;
      return;
    }
    for (long long p = 0; p <= left && !found; ++p) {
      parts[v] = p;
      rec(v + 1, left - p);
    }
  };
  rec(0, resolution);
  return found;
}

bool CoordinateProjection::keeps(int axis) const {
  return std::find(kept_axes.begin(), kept_axes.end(), axis) != kept_axes.end();
}

bool is_brascamp_lieb_tuple(const ExponentTuple& t,
                            const std::vector<CoordinateProjection>& maps, int d) {
  if (d < 1 || d > 6) throw std::invalid_argument("subspace check limited to d <= 6");
  if (maps.size() != t.entries.size())
    throw std::invalid_argument("one map per exponent required");
  const int np1 = t.arity();
  const int n = np1 - 1;
  for (const auto& m : maps) {
    if (m.d != d) throw std::invalid_argument("unsupported-map: dimension mismatch");
    if (m.kept_axes.empty() || (int)m.kept_axes.size() > d)
      throw std::invalid_argument("unsupported-map: not a surjective coordinate projection");
    for (int ax : m.kept_axes)
      if (ax < 0 || ax >= d) throw std::invalid_argument("unsupported-map: axis out of range");
  }
  // 1 < p_1..p_n <= inf
  for (int j = 0; j < n; ++j) {
    const Rational& r = t.entries[j].recip;
    if (!(r >= Rational(0) && r < Rational(1))) return false;
  }
  // scaling: d = sum d_j / p_j
  Rational scale(0);
  for (int j = 0; j < np1; ++j)
    scale += Rational(maps[j].target_dim()) * t.entries[j].recip;
  if (scale != Rational(d)) return false;
  // dim V <= sum dim(L_j V)/p_j over coordinate subspaces
  for (std::uint32_t vmask = 0; vmask < (1u << d); ++vmask) {
    int dimV = __builtin_popcount(vmask);
    Rational rhs(0);
    for (int j = 0; j < np1; ++j) {
      int dimLV = 0;
      for (int ax : maps[j].kept_axes)
        if (vmask & (1u << ax)) ++dimLV;
      rhs += Rational(dimLV) * t.entries[j].recip;
    }
    if (Rational(dimV) > rhs) return false;
  }
  return true;
}

bool finner_condition(const std::vector<CoordinateProjection>& maps,
                      const std::vector<MixedExponent>& tuples) {
  if (maps.size() != tuples.size())
    throw std::invalid_argument("one mixed exponent per map required");
  if (maps.empty()) return true;
  const int d = maps[0].d;
  for (int i = 0; i < d; ++i) {
    Rational col(0);
    for (size_t j = 0; j < maps.size(); ++j) {
      if (!maps[j].keeps(i)) continue;  // dropped axis contributes 1/inf = 0
      auto axes = tuples[j].per_axis();
      if ((int)axes.size() != maps[j].target_dim())
        throw std::invalid_argument("mixed exponent dimension mismatch");
      int pos = 0;
      for (int ax : maps[j].kept_axes) {
        if (ax == i) break;
        ++pos;
      }
      col += axes[pos].recip;
    }
    if (col != Rational(1)) return false;
  }
  return true;
}

std::string tuple_to_json(const ExponentTuple& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : t.entries) {
    if (e.is_infinity()) {
      arr.push_back("inf");
    } else {
      Rational p = Rational(1) / e.recip;
      arr.push_back(p.den() == 1 ? std::to_string(p.num())
                                 : std::to_string(p.num()) + "/" + std::to_string(p.den()));
    }
  }
  return arr.dump();
}

ExponentTuple tuple_from_json(const std::string& text) {
  nlohmann::json arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::invalid_argument("tuple JSON must be an array");
  ExponentTuple t;
  for (const auto& v : arr) t.entries.push_back(LebesgueExponent::parse(v.get<std::string>()));
  return t;
}

std::string alphas_to_string(const AlphaTuple& a) {
  std::string out;
  for (size_t i = 0; i < a.alphas.size(); ++i) {
    if (i) out += ";";
    out += a.alphas[i].str();
  }
  return out;
}

}  // namespace helicoid
