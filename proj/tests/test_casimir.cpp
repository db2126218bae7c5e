#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fb/casimir.hpp"

using namespace fb;

namespace {

constexpr std::uint64_t kSeed = 20240817ULL;

RF rf_of_scaled(const Expr& e,
                const std::function<std::uint32_t(const std::string&)>& scale) {
  std::unordered_map<std::uint32_t, RF> point;
  for (auto v : expr_vars(e)) {
    RF val = RF::variable(v);
    std::uint32_t s = scale(var_name(v));
    if (s != UINT32_MAX) val = val * RF::variable(s);
    point.emplace(v, val);
  }
  return expr_eval(e, point, RF());
}

Mat<Rational> const_block(int N, int v) {
  return exp_block(N, [&](int, int) { return v; });
}

void check_family_symbolic(const PoissonAlgebra& alg, const CasimirFamily& f) {
  for (auto& [name, e] : f.members) {
    INFO(f.system << " member " << name);
    auto w = casimir_expr_symbolic(alg, e);
    if (w) {
      INFO("witness: {" << w->g1 << ", " << w->g2 << "}: " << w->detail);
    }
    CHECK(!w.has_value());
  }
}

void check_family_modular(const PoissonAlgebra& alg, const CasimirFamily& f,
                          int points, std::uint64_t seed) {
  for (auto& [name, e] : f.members) {
    INFO(f.system << " member " << name);
    auto w = casimir_expr_modular(alg, e, points, seed, kDefaultPrime);
    if (w) {
      INFO("witness: {" << w->g1 << ", " << w->g2 << "}: " << w->detail);
    }
    CHECK(!w.has_value());
  }
}

}  // namespace

TEST_CASE("corner minors: explicit small cases") {
  const int N = 3;
  auto B = expr_matrix("b", N);
  // 1x1 bottom-left minor is the (N,1) entry
  CHECK(rf_of(corner_minor(B, Corner::BottomLeft, 1)) ==
        RF::variable(var_id("b31")));
  // 2x2 upper-right minor: b12*b23 - b13*b22
  RF expect = RF::variable(var_id("b12")) * RF::variable(var_id("b23")) -
              RF::variable(var_id("b13")) * RF::variable(var_id("b22"));
  CHECK(rf_of(corner_minor(B, Corner::UpperRight, 2)) == expect);
  // d = 0 gives 1; d = N gives the full determinant for every corner
  CHECK(rf_of(corner_minor(B, Corner::PrincipalUpperLeft, 0)) ==
        RF(PolyQ::constant(Rational(1))));
  CHECK(rf_of(corner_minor(B, Corner::PrincipalBottomRight, N)) ==
        rf_of(mat_det(B)));
}

TEST_CASE("principal minor of S = A^T B^{-1} at N=2") {
  const int N = 2;
  auto A = expr_matrix("a", N), B = expr_matrix("b", N);
  auto S = A.transpose() * expr_inverse(B);
  auto v = [](const char* n) { return RF::variable(var_id(n)); };
  RF detB = v("b11") * v("b22") - v("b12") * v("b21");
  RF expect = (v("a11") * v("b22") - v("a21") * v("b21")) / detB;
  CHECK(rf_of(corner_minor(S, Corner::PrincipalUpperLeft, 1)) == expect);
  // sanity: S B = A^T
  auto SB = S * B;
  CHECK(rf_of(SB.at(1, 2)) == v("a21"));
  CHECK(rf_of(SB.at(2, 2)) == v("a22"));
}

TEST_CASE("det_pencil: boundary coefficients and the N=2 Y_1 formula") {
  const int N = 2;
  auto A = expr_matrix("a", N);
  auto B = expr_matrix("b", N), C = expr_matrix("c", N);
  auto penBC = det_pencil(B, C, 0, 1);
  CHECK(rf_of(penBC[0]) == rf_of(mat_det(B)));
  CHECK(rf_of(penBC[N]) == rf_of(mat_det(C)));
  auto pen = det_pencil(A, A.transpose(), 1, -1);
  // det(lA + l^{-1}A^T): top coefficient det A, middle 2a11a22 - a12^2 - a21^2
  CHECK(rf_of(pen[N]) == rf_of(mat_det(A)));
  auto v = [](const char* n) { return RF::variable(var_id(n)); };
  RF mid = RF(PolyQ::constant(Rational(2))) * v("a11") * v("a22") -
           v("a12") * v("a12") - v("a21") * v("a21");
  CHECK(rf_of(pen[0]) == mid);
}

TEST_CASE("chain S string: j=0,1,2 shapes") {
  const int N = 2;
  auto A = expr_matrix("a", N);
  auto B1 = expr_matrix("b1", N), B2 = expr_matrix("b2", N);
  auto S0 = build_chain_S(A, {}, QCase::II);
  CHECK(rf_of(S0.at(1, 2)) == RF::variable(var_id("a21")));
  // j=1: S B_1 = A^T; j=2: S = A^T B_1^{-1} B_2^T
  auto S1 = build_chain_S(A, {B1}, QCase::II);
  auto lhs = S1 * B1;
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j)
      CHECK(rf_of(lhs.at(i, j)) == rf_of(A.transpose().at(i, j)));
  auto S2 = build_chain_S(A, {B1, B2}, QCase::II);
  auto ref = A.transpose() * expr_inverse(B1) * B2.transpose();
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j)
      CHECK(rf_of(S2.at(i, j)) == rf_of(ref.at(i, j)));
  // case (iii) starts from A, not A^T
  auto T1 = build_chain_S(A, {B1}, QCase::III);
  auto lhs3 = T1 * B1;
  CHECK(rf_of(lhs3.at(1, 2)) == RF::variable(var_id("a12")));
}

TEST_CASE("centrality, symbolic N=2: A, B, and (B,C) families") {
  const int N = 2;
  check_family_symbolic(build_A(N).alg, family_A(N));
  check_family_symbolic(build_B(N).alg, family_B(N));
  check_family_symbolic(build_BC_pair(N).alg, family_BC(N));
}

TEST_CASE("centrality, symbolic N=2: AB families, cases (ii) and (iii)") {
  const int N = 2;
  check_family_symbolic(build_AB(N, QCase::II).alg, family_AB(N, QCase::II));
  check_family_symbolic(build_AB(N, QCase::III).alg, family_AB(N, QCase::III));
}

TEST_CASE("centrality, symbolic N=2: ABC families, cases (ii) and (iii)") {
  const int N = 2;
  check_family_symbolic(build_ABC(N, QCase::II).alg, family_ABC(N, QCase::II));
  check_family_symbolic(build_ABC(N, QCase::III).alg,
                        family_ABC(N, QCase::III));
}

TEST_CASE("centrality, modular N=3: all single-system families") {
  const int N = 3;
  check_family_modular(build_A(N).alg, family_A(N), 2, kSeed);
  check_family_modular(build_B(N).alg, family_B(N), 2, kSeed + 1);
  check_family_modular(build_BC_pair(N).alg, family_BC(N), 2, kSeed + 2);
  check_family_modular(build_AB(N, QCase::II).alg, family_AB(N, QCase::II), 2,
                       kSeed + 3);
  check_family_modular(build_AB(N, QCase::III).alg, family_AB(N, QCase::III),
                       2, kSeed + 4);
  check_family_modular(build_ABC(N, QCase::II).alg, family_ABC(N, QCase::II),
                       2, kSeed + 5);
  check_family_modular(build_ABC(N, QCase::III).alg,
                       family_ABC(N, QCase::III), 2, kSeed + 6);
}

TEST_CASE("centrality, modular: AB case (ii) at N=4") {
  const int N = 4;
  check_family_modular(build_AB(N, QCase::II).alg, family_AB(N, QCase::II), 1,
                       kSeed + 7);
}

TEST_CASE("centrality, modular N=2: B-chains j=2,3 (ii) and j=2 (iii)") {
  const int N = 2;
  check_family_modular(build_B_chain(N, 2, QCase::II).alg,
                       family_B_chain(N, 2, QCase::II), 2, kSeed + 8);
  check_family_modular(build_B_chain(N, 3, QCase::II).alg,
                       family_B_chain(N, 3, QCase::II), 2, kSeed + 9);
  check_family_modular(build_B_chain(N, 2, QCase::III).alg,
                       family_B_chain(N, 2, QCase::III), 2, kSeed + 10);
}

TEST_CASE("centrality, modular N=3: B-chain j=2 (ii)") {
  const int N = 3;
  check_family_modular(build_B_chain(N, 2, QCase::II).alg,
                       family_B_chain(N, 2, QCase::II), 1, kSeed + 11);
}

TEST_CASE("centrality, modular N=2: BC-chains j=1,2") {
  const int N = 2;
  check_family_modular(build_BC_chain(N, 1).alg, family_BC_chain(N, 1), 2,
                       kSeed + 12);
  check_family_modular(build_BC_chain(N, 2).alg, family_BC_chain(N, 2), 2,
                       kSeed + 13);
}

TEST_CASE("exponent matrices at N=3, AB case (ii)") {
  const int N = 3;
  auto built = build_AB(N, QCase::II);
  auto& alg = built.alg;
  int ga = built.grp[0], gb = built.grp[1];
  auto A = expr_matrix("a", N), B = expr_matrix("b", N);
  auto S = A.transpose() * expr_inverse(B);
  for (int p = 1; p < N; ++p) {
    Expr MS = corner_minor(S, Corner::PrincipalUpperLeft, p);
    Expr MB = corner_minor(B, Corner::UpperRight, p);
    CHECK(scaling_exponent_check(alg, MS, ga) == exp_D(N, p));
    CHECK(scaling_exponent_check(alg, MS, gb) == exp_D(N, p));
    CHECK(scaling_exponent_check(alg, MB, ga) == exp_F(N, p));
    CHECK(scaling_exponent_check(alg, MB, gb) == exp_G0(N, p));
    // the ratio M_S^p / M_B^{N-p} scales uniformly by 2 against A
    CHECK((exp_D(N, p) - exp_F(N, N - p)) == const_block(N, 2));
    Expr ratio = MS / corner_minor(B, Corner::UpperRight, N - p);
    CHECK(scaling_exponent_check(alg, ratio, ga) == const_block(N, 2));
  }
  // the determinant pencil coefficients scale uniformly against B:
  // {b_ij, det(A + lambda A^T)} = -2 b_ij det(...), i.e. {det, b_ij} = +2...
  auto pen = det_pencil(A, A.transpose(), 0, -1);
  CHECK(scaling_exponent_check(alg, pen[-1], gb) == const_block(N, 2));
}

TEST_CASE("non-scaling bracket is detected") {
  const int N = 2;
  auto built = build_AB(N, QCase::II);
  Expr bad = expr_var("a11") + expr_var("b11");
  CHECK_THROWS_AS(scaling_exponent_check(built.alg, bad, built.grp[0]),
                  NonScalingBracket);
}

TEST_CASE("chain exponent matrices at N=2, j=2 (even)") {
  const int N = 2, j = 2;
  auto built = build_B_chain(N, j, QCase::II);
  auto& alg = built.alg;
  int ga = built.grp[0], gb1 = built.grp[1], gb2 = built.grp[2];
  auto A = expr_matrix("a", N);
  auto B1 = expr_matrix("b1", N), B2 = expr_matrix("b2", N);
  auto S = build_chain_S(A, {B1, B2}, QCase::II);
  for (int p = 1; p < N; ++p) {
    Expr MS = corner_minor(S, Corner::UpperRight, p);
    Expr M1 = corner_minor(B1, Corner::UpperRight, p);
    Expr M2 = corner_minor(B2, Corner::UpperRight, p);
    CHECK(scaling_exponent_check(alg, MS, ga) == exp_D(N, p));
    CHECK(scaling_exponent_check(alg, MS, gb1) == exp_Gminus(N, p));
    CHECK(scaling_exponent_check(alg, MS, gb2) == exp_Gplus(N, p));
    CHECK(scaling_exponent_check(alg, M1, ga) == exp_F(N, p));
    CHECK(scaling_exponent_check(alg, M1, gb1) == exp_G0(N, p));
    CHECK(scaling_exponent_check(alg, M1, gb2) == exp_Gminus(N, p));
    CHECK(scaling_exponent_check(alg, M2, gb1) == exp_Gplus(N, p));
    CHECK(scaling_exponent_check(alg, M2, gb2) == exp_G0(N, p));
    CHECK(scaling_exponent_check(alg, M2, ga).is_zero());
  }
}

TEST_CASE("chain exponent matrices at N=2, j=3 (odd): E matrix") {
  const int N = 2, j = 3;
  auto built = build_B_chain(N, j, QCase::II);
  auto& alg = built.alg;
  int ga = built.grp[0], gb1 = built.grp[1], gb3 = built.grp[3];
  auto A = expr_matrix("a", N);
  std::vector<Mat<Expr>> Bs{expr_matrix("b1", N), expr_matrix("b2", N),
                            expr_matrix("b3", N)};
  auto S = build_chain_S(A, Bs, QCase::II);
  for (int p = 1; p < N; ++p) {
    Expr MS = corner_minor(S, Corner::PrincipalUpperLeft, p);
    CHECK(scaling_exponent_check(alg, MS, ga) == exp_D(N, p));
    CHECK(scaling_exponent_check(alg, MS, gb1) == exp_Gminus(N, p));
    CHECK(scaling_exponent_check(alg, MS, gb3) == exp_E(N, p));
    // modular lift agrees with the symbolic exponents
    CHECK(scaling_exponent_check_modular(alg, MS, gb3, 6, 99, kDefaultPrime) ==
          exp_E(N, p));
  }
}

TEST_CASE("modular scaling lift matches symbolic and rejects non-scaling") {
  const int N = 3;
  auto built = build_AB(N, QCase::II);
  auto A = expr_matrix("a", N), B = expr_matrix("b", N);
  auto S = A.transpose() * expr_inverse(B);
  for (int p = 1; p < N; ++p) {
    Expr MS = corner_minor(S, Corner::PrincipalUpperLeft, p);
    CHECK(scaling_exponent_check_modular(built.alg, MS, built.grp[0], 6,
                                         7 + p, kDefaultPrime) ==
          scaling_exponent_check(built.alg, MS, built.grp[0]));
  }
  Expr bad = expr_var("a11") + expr_var("b11");
  CHECK_THROWS_AS(scaling_exponent_check_modular(built.alg, bad, built.grp[0],
                                                 6, 5, kDefaultPrime),
                  NonScalingBracket);
}

TEST_CASE("K^p composites: constant brackets") {
  const int N = 2;
  // even j = 2
  {
    auto built = build_B_chain(N, 2, QCase::II);
    auto& alg = built.alg;
    Expr K1 = chain_Kp(N, 2, 1);
    CHECK(scaling_exponent_check(alg, K1, built.grp[0]) == const_block(N, 2));
    CHECK(scaling_exponent_check(alg, K1, built.grp[1]).is_zero());
    Mat<Rational> expect =
        exp_Gplus(N, 1) + exp_G0(N, 1) - exp_Gminus(N, N - 1);
    CHECK(scaling_exponent_check(alg, K1, built.grp[2]) == expect);
  }
  // odd j = 3: the product K^p K^{N-p} has constant brackets
  {
    auto built = build_B_chain(N, 3, QCase::II);
    auto& alg = built.alg;
    Expr K1 = chain_Kp(N, 3, 1);
    CHECK(scaling_exponent_check(alg, K1, built.grp[0]) == const_block(N, 2));
    CHECK(scaling_exponent_check(alg, K1, built.grp[1]).is_zero());
    CHECK(scaling_exponent_check(alg, K1, built.grp[2]).is_zero());
    Mat<Rational> expect =
        exp_E(N, 1) + exp_Gminus(N, 1) - exp_G0(N, N - 1);
    CHECK(scaling_exponent_check(alg, K1, built.grp[3]) == expect);
    Expr KK = K1 * chain_Kp(N, 3, N - 1);
    CHECK(scaling_exponent_check(alg, KK, built.grp[0]) == const_block(N, 4));
    CHECK(scaling_exponent_check(alg, KK, built.grp[3]) == const_block(N, 2));
  }
}

TEST_CASE("degree-zero homogeneity of Y_p and X_p") {
  for (int N = 2; N <= 3; ++N) {
    auto fam = family_AB(N, QCase::II);
    std::uint32_t ta = var_id("scale_a"), tb = var_id("scale_b");
    auto scale = [&](const std::string& name) -> std::uint32_t {
      if (!name.empty() && name[0] == 'a') return ta;
      if (!name.empty() && name[0] == 'b') return tb;
      return UINT32_MAX;
    };
    for (auto& [name, e] : fam.members) {
      INFO("N=" << N << " member " << name);
      CHECK(rf_of_scaled(e, scale) == rf_of(e));
    }
  }
}

TEST_CASE("family sizes and claimed independent counts") {
  CHECK(family_A(3).members.size() == 4);          // r0..r2, b1
  CHECK(family_B(3).members.size() == 3);          // c1..c3
  CHECK(family_BC(2).members.size() == 6);         // m0..m2, q0..q2
  CHECK(family_AB(2, QCase::II).members.size() == 2);   // Y1, X1
  CHECK(family_ABC(2, QCase::II).members.size() == 4);  // Y1, X1, Z1, Z2
  // chain counts: N for even j, 2[N/2] for odd j
  for (int N = 2; N <= 3; ++N) {
    auto even = family_B_chain(N, 2);
    auto odd = family_B_chain(N, 3);
    CHECK(static_cast<int>(even.members.size()) == N);
    CHECK(static_cast<int>(odd.members.size()) == 2 * (N / 2));
    CHECK(even.independent == N);
    CHECK(odd.independent == 2 * (N / 2));
  }
  // BC-chains: N(j+1) for even j, 2[N/2] + Nj for odd j
  CHECK(family_BC_chain(2, 2).members.size() == 6);
  CHECK(family_BC_chain(2, 1).members.size() == 4);
}

TEST_CASE("independence evidence: Jacobian ranks at random points") {
  CHECK(family_jacobian_rank(build_A(2).alg, family_A(2), kSeed, kDefaultPrime) == 2);
  CHECK(family_jacobian_rank(build_A(3).alg, family_A(3), kSeed, kDefaultPrime) == 3);
  CHECK(family_jacobian_rank(build_B(3).alg, family_B(3), kSeed, kDefaultPrime) == 3);
  CHECK(family_jacobian_rank(build_BC_pair(2).alg, family_BC(2), kSeed,
                             kDefaultPrime) == 4);
  CHECK(family_jacobian_rank(build_BC_pair(3).alg, family_BC(3), kSeed,
                             kDefaultPrime) == 6);
  CHECK(family_jacobian_rank(build_AB(3, QCase::II).alg,
                             family_AB(3, QCase::II), kSeed,
                             kDefaultPrime) == 2);
  CHECK(family_jacobian_rank(build_B_chain(2, 2).alg, family_B_chain(2, 2),
                             kSeed, kDefaultPrime) == 2);
  CHECK(family_jacobian_rank(build_BC_chain(2, 2).alg, family_BC_chain(2, 2),
                             kSeed, kDefaultPrime) == 6);
}

TEST_CASE("coranks: (B,C) bivector corank is exactly 2N; BC-chain rank even") {
  for (int N = 2; N <= 3; ++N) {
    auto built = build_BC_pair(N);
    int m = built.alg.size();
    CHECK(m - built.alg.bivector_rank(kSeed, kDefaultPrime) == 2 * N);
  }
  for (int j = 1; j <= 2; ++j) {
    auto built = build_BC_chain(2, j);
    CHECK(built.alg.bivector_rank(kSeed, kDefaultPrime) % 2 == 0);
  }
  // corank at a generic point is at least the family size
  auto ab = build_AB(3, QCase::II);
  int corank = ab.alg.size() - ab.alg.bivector_rank(kSeed, kDefaultPrime);
  CHECK(corank >= static_cast<int>(family_AB(3, QCase::II).members.size()));
}
