#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fb/tensor.hpp"

using namespace fb;
using P = Poly<Rational>;

static P pvar(const std::string& n, int e = 1) {
  return P::variable(var_id(n), e);
}
static P pcst(long n, long d = 1) { return P::constant(Rational(n, d)); }

static Mat<P> symbol_matrix(const std::string& prefix, int N) {
  Mat<P> m(N, N, P::zero());
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j)
      m.at(i, j) =
          P::variable(var_id(prefix + std::to_string(i) + std::to_string(j)));
  return m;
}

TEST_CASE("mat: arithmetic, transpose, det, block") {
  Mat<Rational> A(2, 2);
  A.at(1, 1) = 1;
  A.at(1, 2) = 2;
  A.at(2, 1) = 3;
  A.at(2, 2) = 4;
  CHECK(mat_det(A) == Rational(-2));
  CHECK(mat_det(A * A) == Rational(4));
  CHECK(A.transpose().at(1, 2) == Rational(3));
  auto inv = mat_inverse(A);
  REQUIRE(inv.has_value());
  CHECK((A * *inv == Mat<Rational>::identity(2, Rational())));
  Mat<Rational> S(2, 2);  // singular
  S.at(1, 1) = 1;
  S.at(1, 2) = 2;
  S.at(2, 1) = 2;
  S.at(2, 2) = 4;
  CHECK(!mat_inverse(S).has_value());
  CHECK(mat_rank(S) == 1);
  CHECK(mat_block(A, 2, 2, 1, 2).at(1, 2) == Rational(4));
}

TEST_CASE("symbolic determinant matches cofactor expansion at N=3") {
  auto A = symbol_matrix("x", 3);
  P det = mat_det(A);
  P ref = P::zero();
  int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                    {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
  for (int p = 0; p < 6; ++p) {
    P term = pcst(p < 3 ? 1 : -1);
    for (int i = 0; i < 3; ++i) term = term * A(i, perm[p][i]);
    ref = ref + term;
  }
  CHECK(det == ref);
}

TEST_CASE("leg embedding reproduces the Kronecker product") {
  const int N = 3;
  auto X = symbol_matrix("u", N);
  auto Y = symbol_matrix("v", N);
  P one = pcst(1);
  auto X1 = leg_embed(X, 2, 1, one);
  auto Y2 = leg_embed(Y, 2, 2, one);
  auto XY = X1 * Y2;
  CHECK((X1 * Y2 == Y2 * X1));
  for (int i = 1; i <= N; ++i)
    for (int k = 1; k <= N; ++k)
      for (int j = 1; j <= N; ++j)
        for (int l = 1; l <= N; ++l) {
          // (X (x) Y)[(i-1)N+(k-1)][(j-1)N+(l-1)] = X_ij * Y_kl
          P got = XY.get((i - 1) * N + (k - 1), (j - 1) * N + (l - 1));
          CHECK(got == X.at(i, j) * Y.at(k, l));
        }
}

TEST_CASE("partial transpose: involution, composition, full transpose") {
  const int N = 3;
  auto X = symbol_matrix("u", N);
  auto Y = symbol_matrix("v", N);
  P one = pcst(1);
  auto T = leg_embed(X, 2, 1, one) * leg_embed(Y, 2, 2, one);
  CHECK(T.partial_transpose(1).partial_transpose(1) == T);
  CHECK(T.partial_transpose(2).partial_transpose(2) == T);
  CHECK(T.partial_transpose(1).partial_transpose(2) == T.transpose());
  // (X (x) Y)^{t1} = X^T (x) Y
  CHECK(T.partial_transpose(1) ==
        leg_embed(X.transpose(), 2, 1, one) * leg_embed(Y, 2, 2, one));
}

TEST_CASE("r-matrix structure: r + r^{t1t2} = 2P and CYBE") {
  for (int N = 2; N <= 3; ++N) {
    Rational one(1);
    auto r = classical_r(N, one);
    auto P2 = permutation_p(N, one);
    CHECK(r + r.partial_transpose(1).partial_transpose(2) ==
          P2.scale(Rational(2)));
    // CYBE: [r12,r13] + [r12,r23] + [r13,r23] = 0 on three legs
    auto r12 = leg_embed_pair(r, 3, 1, 2);
    auto r13 = leg_embed_pair(r, 3, 1, 3);
    auto r23 = leg_embed_pair(r, 3, 2, 3);
    auto comm = [](const LegMatrix<Rational>& a, const LegMatrix<Rational>& b) {
      return a * b - b * a;
    };
    CHECK((comm(r12, r13) + comm(r12, r23) + comm(r13, r23)).is_zero());
  }
}

TEST_CASE("permutation operator: P^2 = 1, P (X (x) Y) P = Y (x) X") {
  const int N = 3;
  P one = pcst(1);
  auto Pm = permutation_p(N, one);
  CHECK(Pm * Pm == LegMatrix<P>::identity(2, N, one));
  auto X = symbol_matrix("u", N);
  auto Y = symbol_matrix("v", N);
  auto T = leg_embed(X, 2, 1, one) * leg_embed(Y, 2, 2, one);
  auto S = leg_embed(Y, 2, 1, one) * leg_embed(X, 2, 2, one);
  CHECK(Pm * T * Pm == S);
}

TEST_CASE("triangular projection with diagonal weight") {
  auto A = symbol_matrix("w", 3);
  auto U = triangular_project(A, true, Rational(1, 2));
  CHECK(U.at(1, 2) == A.at(1, 2));
  CHECK(U.at(2, 1).is_zero());
  CHECK(U.at(2, 2) == A.at(2, 2).scale(Rational(1, 2)));
  auto L = triangular_project(A, false, Rational(0));
  CHECK(L.at(2, 1) == A.at(2, 1));
  CHECK(L.at(1, 2).is_zero());
  CHECK(L.at(1, 1).is_zero());
  // upper(1) + lower(0) = A
  auto U1 = triangular_project(A, true, Rational(1));
  CHECK((U1 + L == A));
}

TEST_CASE("quantum R: diagonal entries equal q, off-diagonal structure") {
  for (int N = 2; N <= 3; ++N) {
    auto R = quantum_R(N);
    P q = P::variable(quantum_s_var(), 2);
    for (int i = 0; i < N; ++i) {
      int d = i * N + i;
      CHECK(R.get(d, d) == q);
    }
    // entry at row (k,l), col (l,k) for k<l is q - q^{-1}
    P qmqi = q - P::variable(quantum_s_var(), -2);
    for (int k = 1; k <= N; ++k)
      for (int l = k + 1; l <= N; ++l)
        CHECK(R.get((k - 1) * N + (l - 1), (l - 1) * N + (k - 1)) == qmqi);
    // semiclassical leading order: R - 1 has zero constant term entrywise
    // when s = 1, i.e. R(1) = identity
    std::unordered_map<std::uint32_t, Rational> s1{{quantum_s_var(), Rational(1)}};
    auto I = LegMatrix<P>::identity(2, N, P::constant(Rational(1)));
    auto D = R - I;
    bool all_vanish = true;
    for (int r = 0; r < D.dim; ++r)
      for (auto& [c, v] : D.row[r])
        if (!(v.substitute(s1).is_zero())) all_vanish = false;
    CHECK(all_vanish);
  }
}

TEST_CASE("affine R: inverse relation and parameter symmetries") {
  const int N = 2;
  P lam = pvar("lambda"), mu = pvar("mu");
  P lami = pvar("lambda", -1), mui = pvar("mu", -1);
  auto R = affine_R(N, lam, mu, +1);
  auto Ri = affine_R(N, lam, mu, -1);
  // R(la,mu;q) R(la,mu;q^{-1}) = Id
  auto prod = R * Ri;
  CHECK(prod == ScaledLeg::identity(2, N));
  // R = R^{t1 t2}(la^{-1}, mu^{-1}; q^{-1})
  auto R1 = affine_R(N, lami, mui, -1).partial_transpose(1).partial_transpose(2);
  CHECK(R == R1);
  // R = R(mu^{-1}, la^{-1}; q)
  auto R2 = affine_R(N, mui, lami, +1);
  CHECK(R == R2);
}
