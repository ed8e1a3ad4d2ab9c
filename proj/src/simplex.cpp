#include "helicoid/simplex.hpp"

#include <cassert>
#include <ostream>

namespace helicoid {

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(s), 1);
  return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

namespace {

// Dictionary-form simplex on the tableau
//   D in R^{(m+2) x (n+2)}, basis B (size m), nonbasis N (size n+1),
// following the classic KACTL layout. Row m is the phase-2 objective,
// row m+1 the phase-1 objective; column n is the auxiliary variable,
// column n+1 the constants.
struct Dictionary {
  int m, n;
  std::vector<int> N, B;
  RationalMatrix D;

  Dictionary(const RationalMatrix& A, const RationalVector& b, const RationalVector& c)
      : m((int)b.size()), n((int)c.size()), N(n + 1), B(m),
        D(RationalMatrix::Zero(m + 2, n + 2)) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) D(i, j) = A(i, j);
    for (int i = 0; i < m; ++i) {
      B[i] = n + i;
      D(i, n) = Rational(-1);
      D(i, n + 1) = b(i);
    }
    for (int j = 0; j < n; ++j) {
      N[j] = j;
      D(m, j) = -c(j);
    }
    N[n] = -1;
    D(m + 1, n) = Rational(1);
  }

  void pivot(int r, int s) {
    Rational inv = Rational(1) / D(r, s);
    for (int i = 0; i < m + 2; ++i)
      if (i != r && !D(i, s).is_zero())
        for (int j = 0; j < n + 2; ++j)
          if (j != s) D(i, j) -= D(r, j) * D(i, s) * inv;
    for (int j = 0; j < n + 2; ++j)
      if (j != s) D(r, j) *= inv;
    for (int i = 0; i < m + 2; ++i)
      if (i != r) D(i, s) = -D(i, s) * inv;
    D(r, s) = inv;
    std::swap(B[r], N[s]);
  }

  // Bland's rule (least-index entering/leaving) guarantees termination.
  // objective_row is m for the real objective, m+1 for the auxiliary one;
  // the auxiliary column is ineligible once we optimize the real objective.
  bool simplex(int objective_row, bool skip_aux) {
    const int x = objective_row;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n; ++j) {
        if (skip_aux && N[j] == -1) continue;
        if (D(x, j) < Rational(0) && (s == -1 || N[j] < N[s])) s = j;
      }
      if (s == -1) return true;
      int r = -1;
      for (int i = 0; i < m; ++i) {
        if (!(D(i, s) > Rational(0))) continue;
        if (r == -1) { r = i; continue; }
        Rational lhs = D(i, n + 1) * D(r, s);
        Rational rhs = D(r, n + 1) * D(i, s);
        if (lhs < rhs || (lhs == rhs && B[i] < B[r])) r = i;
      }
      if (r == -1) return false;  // unbounded in this direction
      pivot(r, s);
    }
  }
};

}  // namespace

LpResult maximize(const RationalMatrix& A, const RationalVector& b,
                  const RationalVector& c) {
  assert(A.rows() == b.size() && A.cols() == c.size());
  Dictionary d(A, b, c);

  // Phase 1 is only needed when some constant is negative.
  int r = 0;
  for (int i = 1; i < d.m; ++i)
    if (d.D(i, d.n + 1) < d.D(r, d.n + 1)) r = i;
  if (d.m > 0 && d.D(r, d.n + 1) < Rational(0)) {
    d.pivot(r, d.n);
    if (!d.simplex(d.m + 1, false) || d.D(d.m + 1, d.n + 1) < Rational(0))
      return {LpStatus::Infeasible, Rational(0), RationalVector()};
    for (int i = 0; i < d.m; ++i)
      if (d.B[i] == -1) {
        int s = 0;
        for (int j = 1; j <= d.n; ++j)
          if (!d.D(i, j).is_zero() &&
              (d.D(i, s).is_zero() || d.N[j] < d.N[s])) s = j;
        if (!d.D(i, s).is_zero()) d.pivot(i, s);
      }
  }

  if (!d.simplex(d.m, true)) return {LpStatus::Unbounded, Rational(0), RationalVector()};

  RationalVector x = RationalVector::Zero(d.n);
  for (int i = 0; i < d.m; ++i)
    if (d.B[i] >= 0 && d.B[i] < d.n) x(d.B[i]) = d.D(i, d.n + 1);
  return {LpStatus::Optimal, d.D(d.m, d.n + 1), x};
}

std::optional<RationalVector> feasible_point(const RationalMatrix& A,
                                             const RationalVector& b,
                                             const RationalMatrix& E,
                                             const RationalVector& e) {
  const int nvars = (int)(A.cols() ? A.cols() : E.cols());
  const int mi = (int)A.rows();
  const int me = (int)E.rows();
  RationalMatrix Afull(mi + 2 * me, nvars);
  RationalVector bfull(mi + 2 * me);
  for (int i = 0; i < mi; ++i) {
    for (int j = 0; j < nvars; ++j) Afull(i, j) = A(i, j);
    bfull(i) = b(i);
  }
  for (int i = 0; i < me; ++i) {
    for (int j = 0; j < nvars; ++j) {
      Afull(mi + 2 * i, j) = E(i, j);
      Afull(mi + 2 * i + 1, j) = -E(i, j);
    }
    bfull(mi + 2 * i) = e(i);
    bfull(mi + 2 * i + 1) = -e(i);
  }
  LpResult res = maximize(Afull, bfull, RationalVector::Zero(nvars));
  if (res.status != LpStatus::Optimal) return std::nullopt;
  return res.point;
}

}  // namespace helicoid
