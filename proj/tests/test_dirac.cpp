#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fb/dirac.hpp"

#include <random>

using namespace fb;

namespace {

constexpr std::uint64_t kPrime = (std::uint64_t(1) << 61) - 1;
constexpr std::uint64_t kSeed = 20240824;

// Constraint index helpers for the all-ones block partition: the lower
// entries (k>l) come first in lex order, then the diagonal constraints.
int lower_index(int n, int k, int l) {
  auto v = lower_pairs(n);
  for (std::size_t t = 0; t < v.size(); ++t)
    if (v[t].first == k && v[t].second == l) return static_cast<int>(t);
  return -1;
}
int c_index(int n, int k, int l) {
  return k == l ? n * (n - 1) / 2 + (k - 1) : lower_index(n, k, l);
}

Mat<PolyQ> substituted(const Mat<PolyQ>& M,
                       const std::unordered_map<std::uint32_t, Rational>& s) {
  Mat<PolyQ> r = M;
  for (auto& e : r.d) e = e.substitute(s);
  return r;
}

Mat<RF> rf_var_matrix(const std::string& prefix, int n) {
  Mat<RF> m(n, n, RF());
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      m.at(i, j) = RF::variable(var_id(prefix + std::to_string(i) + std::to_string(j)));
  return m;
}

Mat<Fp> random_fp_matrix(int n, std::mt19937_64& rng, std::uint64_t p) {
  Mat<Fp> m(n, n, Fp(0, p));
  for (auto& e : m.d) e = Fp::raw(rng() % (p - 1) + 1, p);
  return m;
}

}  // namespace

TEST_CASE("b.u.t. constraint sets: contents and surface rules") {
  auto cs = but_constraints(2, {1, 1}, ConstraintTarget::A);
  REQUIRE(cs.constraints.size() == 3);
  CHECK(cs.constraints[0].first == "C21");
  CHECK(cs.constraints[0].second == PolyQ::variable(var_id("a21")));
  CHECK(cs.constraints[1].first == "Cdet1");
  CHECK(cs.constraints[1].second ==
        (PolyQ::variable(var_id("a11")) - PolyQ::constant(Rational(1))));
  CHECK(cs.constraints[2].second ==
        (PolyQ::variable(var_id("a22")) - PolyQ::constant(Rational(1))));
  REQUIRE(cs.surface.size() == 3);
  CHECK(cs.surface.at(var_id("a21")) == Rational(0));
  CHECK(cs.surface.at(var_id("a11")) == Rational(1));

  auto both = but_constraints(2, {1, 1}, ConstraintTarget::Both);
  CHECK(both.constraints.size() == 6);
  CHECK(both.constraints[3].first == "C*21");
  // surface rules cover only the solved A side
  CHECK(both.surface.size() == 3);

  // 2+2 block partition at N=4: one 2x2 zero block plus two det constraints
  auto blk = but_constraints(4, {2, 2}, ConstraintTarget::A);
  REQUIRE(blk.constraints.size() == 6);
  PolyQ det1 = PolyQ::variable(var_id("a11")) * PolyQ::variable(var_id("a22")) -
               PolyQ::variable(var_id("a12")) * PolyQ::variable(var_id("a21")) -
               PolyQ::constant(Rational(1));
  CHECK(blk.constraints[4].second == det1);
  // zero rules for the four killed entries; no diagonal rules for 2x2 blocks
  CHECK(blk.surface.size() == 4);

  CHECK_THROWS_AS(but_constraints(2, {1, 2}, ConstraintTarget::A),
                  std::invalid_argument);
  CHECK_THROWS_AS(but_constraints(2, {0, 2}, ConstraintTarget::A),
                  std::invalid_argument);
}

TEST_CASE("constraint Gram matches the closed form identically in b (n=2,3)") {
  for (int n : {2, 3}) {
    CAPTURE(n);
    Built ab = build_AB(n, QCase::II);
    auto cs = but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
    Mat<PolyQ> D = constraint_gram(ab.alg, cs);
    const int mc = n * (n + 1) / 2;  // constraints per matrix
    Mat<PolyQ> A = substituted(poly_matrix("a", n), cs.surface);
    Mat<PolyQ> B = poly_matrix("b", n);
    Mat<PolyQ> BAtA = B * A.transpose() * A;
    Mat<PolyQ> BAA = B * A * A;
    std::vector<std::pair<int, int>> all;
    for (auto& p : lower_pairs(n)) all.push_back(p);
    for (int k = 1; k <= n; ++k) all.push_back({k, k});
    for (auto& [k, l] : all)
      for (auto& [i, j] : all) {
        CAPTURE(k);
        CAPTURE(l);
        CAPTURE(i);
        CAPTURE(j);
        CHECK(D(c_index(n, k, l), mc + c_index(n, i, j)) ==
              gram_formula_entry(B, BAtA, BAA, k, l, i, j));
      }
  }
}

TEST_CASE("Gram corner entry at n=2 (twice the component form)") {
  Built ab = build_AB(2, QCase::II);
  auto cs = but_constraints(2, {1, 1}, ConstraintTarget::Both);
  Mat<PolyQ> D = constraint_gram(ab.alg, cs);
  auto v = [](const char* s) { return PolyQ::variable(var_id(s)); };
  PolyQ expect =
      (v("b22") * v("b11") + v("b22") * v("b12") * v("a12") + v("b21") * v("b12"))
          .scale(Rational(2));
  CHECK(D(c_index(2, 2, 1), 3 + c_index(2, 2, 1)) == expect);
}

TEST_CASE("{C,C} and {C*,C*} blocks vanish on the surface") {
  for (int n : {2, 3}) {
    CAPTURE(n);
    Built ab = build_AB(n, QCase::II);
    auto cs = but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
    const int mc = n * (n + 1) / 2;
    Mat<PolyQ> D = constraint_gram(ab.alg, cs);
    // the {C,C} block closes on the A-substitution alone
    for (int k = 0; k < mc; ++k)
      for (int l = 0; l < mc; ++l) CHECK(D(k, l).is_zero());
    // the {C*,C*} block needs the full surface: check at sampled points
    std::mt19937_64 rng(kSeed + n);
    auto pt = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, kPrime);
    REQUIRE(pt.has_value());
    Fp model(0, kPrime);
    for (int k = mc; k < 2 * mc; ++k)
      for (int l = mc; l < 2 * mc; ++l) {
        if (D(k, l).is_zero()) continue;
        CHECK(D(k, l).eval(*pt, model).is_zero());
      }
  }
}

TEST_CASE("det of the F[B] system matrix is the product of corner minors") {
  // frozen orientation: +1 at n=2, -1 at n=3,4 (symbolic), -1 at n=5 (points)
  for (int n : {2, 3, 4}) {
    CAPTURE(n);
    Mat<PolyQ> B = poly_matrix("b", n);
    PolyQ det = mat_det(avisb_matrix(B));
    PolyQ prod = PolyQ::constant(Rational(1));
    for (int d = 1; d < n; ++d) prod = prod * minor_plus(B, d) * minor_minus(B, d);
    CHECK(det == (n == 2 ? prod : -prod));
  }
  std::mt19937_64 rng(kSeed);
  for (int trial = 0; trial < 5; ++trial) {
    Mat<Fp> B = random_fp_matrix(5, rng, kPrime);
    Fp det = mat_det(avisb_matrix(B));
    Fp prod = Fp(1, kPrime);
    for (int d = 1; d < 5; ++d) prod = prod * minor_plus(B, d) * minor_minus(B, d);
    CHECK(det == -prod);
  }
}

TEST_CASE("solve_F: closed form at n=2 and upper-triangularity of B F B^T") {
  Mat<RF> B2 = rf_var_matrix("b", 2);
  Mat<RF> F2 = solve_F(B2);
  CHECK(F2.at(1, 1) == RF::constant(Rational(1)));
  CHECK(F2.at(2, 2) == RF::constant(Rational(1)));
  CHECK(F2.at(2, 1).is_zero());
  RF expect = -(RF::variable(var_id("b21")) * RF::variable(var_id("b11")) +
                RF::variable(var_id("b22")) * RF::variable(var_id("b12"))) /
              (RF::variable(var_id("b21")) * RF::variable(var_id("b12")));
  CHECK(F2.at(1, 2) == expect);

  for (int n : {2, 3, 4}) {
    CAPTURE(n);
    Mat<RF> B = rf_var_matrix("b", n);
    Mat<RF> U = B * solve_F(B) * B.transpose();
    for (int i = 2; i <= n; ++i)
      for (int j = 1; j < i; ++j) CHECK(U.at(i, j).is_zero());
  }
}

TEST_CASE("solve_F: singular system witness at n=2 with b12 = 0") {
  Mat<Fp> B(2, 2, Fp(0, kPrime));
  B.at(1, 1) = Fp(3, kPrime);
  B.at(1, 2) = Fp(0, kPrime);
  B.at(2, 1) = Fp(5, kPrime);
  B.at(2, 2) = Fp(7, kPrime);
  CHECK_THROWS_AS(solve_F(B), SingularSystem);
}

TEST_CASE("surface sampler lands on the full constraint surface") {
  for (int n : {2, 3}) {
    CAPTURE(n);
    Built ab = build_AB(n, QCase::II);
    auto cs = but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
    std::mt19937_64 rng(kSeed + 10 * n);
    auto pt = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, kPrime);
    REQUIRE(pt.has_value());
    Fp model(0, kPrime);
    for (auto& [name, c] : cs.constraints) {
      CAPTURE(name);
      CHECK(c.eval(*pt, model).is_zero());
    }
  }
}

TEST_CASE("Dirac bivector: constraints central, {a,a} unchanged (case ii)") {
  for (int n : {2, 3}) {
    CAPTURE(n);
    Built ab = build_AB(n, QCase::II);
    auto cs = but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
    std::mt19937_64 rng(kSeed + 100 * n);
    Fp model(0, kPrime);
    const int m = ab.alg.size();
    for (int trial = 0; trial < 3; ++trial) {
      auto pt = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, kPrime);
      REQUIRE(pt.has_value());
      Mat<Fp> PiD = dirac_bivector(ab.alg, cs, *pt, model);
      Mat<Fp> Pi = poisson_bivector_eval(ab.alg, *pt, model);
      // every constraint is central for the Dirac bracket
      Mat<Fp> G(static_cast<int>(cs.constraints.size()), m, ring_zero(model));
      for (std::size_t k = 0; k < cs.constraints.size(); ++k)
        for (int i = 0; i < m; ++i) {
          PolyQ d = cs.constraints[k].second.partial(ab.alg.gen_vars[i]);
          if (!d.is_zero()) G(static_cast<int>(k), i) = d.eval(*pt, model);
        }
      CHECK((G * PiD).is_zero());
      // the a-a block is untouched by the reduction
      for (int i = 0; i < n * n; ++i)
        for (int j = 0; j < n * n; ++j) CHECK(PiD(i, j) == Pi(i, j));
    }
  }
}

TEST_CASE("Dirac bracket satisfies Jacobi at sampled surface points") {
  for (int n : {2, 3}) {
    CAPTURE(n);
    Built ab = build_AB(n, QCase::II);
    auto cs = but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
    std::mt19937_64 rng(kSeed + 1000 * n);
    const int trials = n == 2 ? 3 : 1;
    for (int trial = 0; trial < trials; ++trial) {
      auto pt = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, kPrime);
      REQUIRE(pt.has_value());
      auto w = dirac_jacobi_at(ab.alg, cs, *pt, kPrime);
      if (w) {
        CAPTURE(w->g1);
        CAPTURE(w->g2);
        CAPTURE(w->g3);
      }
      CHECK(!w.has_value());
    }
  }
}

TEST_CASE("Dirac bracket is invariant under constraint reparameterization") {
  // replacing every C by 2C + C^2 leaves the on-surface bracket unchanged
  for (int n : {2, 3}) {
    CAPTURE(n);
    Built ab = build_AB(n, QCase::II);
    auto cs = but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
    ConstraintSet cs2 = cs;
    for (auto& [name, c] : cs2.constraints)
      c = c.scale(Rational(2)) + c * c;
    std::mt19937_64 rng(kSeed + 7 * n);
    auto pt = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, kPrime);
    REQUIRE(pt.has_value());
    Fp model(0, kPrime);
    Mat<Fp> P1 = dirac_bivector(ab.alg, cs, *pt, model);
    Mat<Fp> P2 = dirac_bivector(ab.alg, cs2, *pt, model);
    CHECK(P1 == P2);
    // the spec-level example: {a11*b12, b21}_D agrees entrywise too
    PolyQ f = PolyQ::variable(var_id("a11")) * PolyQ::variable(var_id("b12"));
    PolyQ g = PolyQ::variable(var_id("b21"));
    Fp v1 = ring_zero(model), v2 = ring_zero(model);
    for (int i = 0; i < ab.alg.size(); ++i)
      for (int j = 0; j < ab.alg.size(); ++j) {
        PolyQ df = f.partial(ab.alg.gen_vars[i]);
        PolyQ dg = g.partial(ab.alg.gen_vars[j]);
        if (df.is_zero() || dg.is_zero()) continue;
        Fp w = df.eval(*pt, model) * dg.eval(*pt, model);
        v1 += w * P1(i, j);
        v2 += w * P2(i, j);
      }
    CHECK(v1 == v2);
  }
}

TEST_CASE("case (i): constraints close but the Gram is singular") {
  Built ab = build_AB(2, QCase::I);
  auto cs = but_constraints(2, {1, 1}, ConstraintTarget::Both);
  std::mt19937_64 rng(kSeed + 17);
  auto pt = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, kPrime);
  REQUIRE(pt.has_value());
  Fp model(0, kPrime);
  // the full Gram vanishes on the surface: every pairwise bracket is zero
  Mat<PolyQ> D = constraint_gram(ab.alg, cs);
  for (int k = 0; k < 6; ++k)
    for (int l = 0; l < 6; ++l) {
      if (D(k, l).is_zero()) continue;
      CHECK(D(k, l).eval(*pt, model).is_zero());
    }
  CHECK_THROWS_AS(dirac_bivector(ab.alg, cs, *pt, model), SingularGram);
}

TEST_CASE("F[B] bracket signs: minus for case (i), plus after Dirac reduction") {
  CHECK(!f_bracket_sign_check(QCase::I, 3, 20, kSeed + 31, kPrime).has_value());
  CHECK(!f_bracket_sign_check(QCase::II, 2, 10, kSeed + 32, kPrime).has_value());
  CHECK(!f_bracket_sign_check(QCase::II, 3, 10, kSeed + 33, kPrime).has_value());
  CHECK(!f_bracket_sign_check(QCase::III, 2, 10, kSeed + 34, kPrime).has_value());
  CHECK(!f_bracket_sign_check(QCase::III, 3, 5, kSeed + 35, kPrime).has_value());
}

TEST_CASE("nondegeneracy probe: determinant one at B' = identity") {
  for (int n : {2, 3}) {
    CAPTURE(n);
    Mat<RF> A(n, n, RF());
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        if (i == j)
          A.at(i, j) = RF::constant(Rational(1));
        else if (i < j)
          A.at(i, j) = RF::variable(var_id("a" + std::to_string(i) + std::to_string(j)));
      }
    Mat<RF> E = Mat<RF>::identity(n, RF());
    CHECK(nondegeneracy_probe(A, E) == RF::constant(Rational(1)));
  }
  // a perturbed B' keeps the system nondegenerate at n=2
  Mat<Rational> A2(2, 2, Rational(0));
  A2(0, 0) = 1;
  A2(1, 1) = 1;
  A2(0, 1) = Rational(5, 7);
  Mat<Rational> B2(2, 2, Rational(0));
  B2(0, 0) = 1;
  B2(1, 1) = 1;
  B2(0, 1) = Rational(1, 10);
  B2(1, 0) = Rational(1, 9);
  CHECK(nondegeneracy_probe(A2, B2) != Rational(0));
}
