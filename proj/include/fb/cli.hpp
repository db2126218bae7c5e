#pragma once
// Scenario-driven batch runner: a registered catalog of named checks, a flat
// key/value scenario format, a worker pool, and deterministic JSON reports.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "fb/dirac.hpp"
#include "fb/quantum.hpp"

namespace fb {

inline constexpr const char* kToolName = "formsbench";
inline constexpr const char* kToolVersion = "1.0.0";

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& w) : std::runtime_error(w) {}
};

struct RunConfig {
  std::string backend = "symbolic";  // "symbolic" | "modular"
  std::uint64_t prime = kDefaultPrime;
  std::uint64_t seed = 20240824;
  int trials = 5;
  bool modular() const { return backend == "modular"; }
};

// A check runs under a config and reports pass/fail plus an optional witness.
struct CheckDef {
  std::string id;
  std::string group;
  bool expected_pass = true;
  std::function<std::pair<bool, std::string>(const RunConfig&)> run;
};

namespace clidetail {

inline std::pair<bool, std::string> from_jacobi(
    const std::optional<JacobiWitness>& w) {
  if (!w) return {true, ""};
  return {false, "{" + w->g1 + ", " + w->g2 + ", " + w->g3 + "}: " + w->detail};
}

inline std::pair<bool, std::string> from_pair(
    const std::optional<PairWitness>& w) {
  if (!w) return {true, ""};
  return {false, "{" + w->g1 + ", " + w->g2 + "}: " + w->detail};
}

inline std::pair<bool, std::string> jacobi_check(const Built& built,
                                                 const RunConfig& c) {
  if (!built.alg.antisymmetry_ok()) return {false, "table not antisymmetric"};
  if (c.modular())
    return from_jacobi(built.alg.jacobi_modular(c.trials, c.seed, c.prime));
  return from_jacobi(built.alg.jacobi_symbolic());
}

inline std::pair<bool, std::string> map_check(const PoissonAlgebra& src,
                                              const PoissonAlgebra& tgt,
                                              const std::vector<RF>& img,
                                              int sign, const RunConfig& c) {
  if (c.modular())
    return from_pair(
        src.map_check_modular(tgt, img, sign, c.trials, c.seed, c.prime));
  return from_pair(src.map_check_symbolic(tgt, img, sign));
}

inline std::pair<bool, std::string> family_check(const PoissonAlgebra& alg,
                                                 const CasimirFamily& fam,
                                                 const RunConfig& c,
                                                 bool force_modular = false) {
  for (auto& [name, e] : fam.members) {
    auto w = (c.modular() || force_modular)
                 ? casimir_expr_modular(alg, e, std::max(1, c.trials / 2),
                                        c.seed, c.prime)
                 : casimir_expr_symbolic(alg, e);
    if (w)
      return {false, fam.system + " member " + name + ": {" + w->g1 + ", " +
                         w->g2 + "}: " + w->detail};
  }
  return {true, ""};
}

// Exact equality of the generated table against the direct component-formula
// expansion of the quadratic r-matrix bracket for A.
inline std::pair<bool, std::string> component_table_check(int N) {
  auto sgn = [](int x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); };
  auto built = build_A(N);
  auto& P = built.alg;
  auto a = [&](int i, int j) {
    return PolyQ::variable(P.gen_var(built.grp[0], i, j));
  };
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j)
      for (int k = 1; k <= N; ++k)
        for (int l = 1; l <= N; ++l) {
          PolyQ expect =
              a(i, l) * a(k, j) * PolyQ::constant(sgn(j - l) + sgn(i - k)) +
              a(j, l) * a(i, k) * PolyQ::constant(sgn(j - k) + 1) +
              a(l, j) * a(k, i) * PolyQ::constant(sgn(i - l) - 1);
          const PolyQ& got =
              P.tab[P.gen_index(built.grp[0], i, j)]
                   [P.gen_index(built.grp[0], k, l)];
          if (!(got == expect))
            return {false, "entry {a" + std::to_string(i) + std::to_string(j) +
                               ", a" + std::to_string(k) + std::to_string(l) +
                               "} differs at N=" + std::to_string(N)};
        }
  return {true, ""};
}

inline std::vector<RF> group_rf(const Built& b, int g) {
  return flatten_images({rf_matrix(b.alg.group_matrix(b.grp[g]))});
}

inline std::pair<bool, std::string> dirac_gram_check(const RunConfig& c) {
  for (int n : {2, 3}) {
    Built ab = build_AB(n, QCase::II);
    auto cs =
        but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
    Mat<PolyQ> D = constraint_gram(ab.alg, cs);
    const int mc = n * (n + 1) / 2;
    Mat<PolyQ> A = poly_matrix("a", n);
    for (auto& e : A.d) e = e.substitute(cs.surface);
    Mat<PolyQ> B = poly_matrix("b", n);
    Mat<PolyQ> BAtA = B * A.transpose() * A;
    Mat<PolyQ> BAA = B * A * A;
    std::vector<std::pair<int, int>> all = lower_pairs(n);
    for (int k = 1; k <= n; ++k) all.push_back({k, k});
    auto cindex = [&](int k, int l) {
      if (k == l) return n * (n - 1) / 2 + (k - 1);
      auto lows = lower_pairs(n);
      for (std::size_t t = 0; t < lows.size(); ++t)
        if (lows[t] == std::make_pair(k, l)) return static_cast<int>(t);
      return -1;
    };
    for (auto& [k, l] : all)
      for (auto& [i, j] : all)
        if (!(D(cindex(k, l), mc + cindex(i, j)) ==
              gram_formula_entry(B, BAtA, BAA, k, l, i, j)))
          return {false, "Gram entry (C" + std::to_string(k) +
                             std::to_string(l) + ", C*" + std::to_string(i) +
                             std::to_string(j) + ") differs at n=" +
                             std::to_string(n)};
  }
  (void)c;
  return {true, ""};
}

inline std::pair<bool, std::string> dirac_surface_check(const RunConfig& c,
                                                        bool jacobi) {
  const int n = c.modular() ? 3 : 2;
  Built ab = build_AB(n, QCase::II);
  auto cs = but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
  std::mt19937_64 rng(c.seed);
  Fp model(0, c.prime);
  const int m = ab.alg.size();
  for (int t = 0; t < c.trials; ++t) {
    auto pt = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, c.prime);
    if (!pt) return {false, "could not sample a surface point"};
    if (jacobi) {
      auto w = dirac_jacobi_at(ab.alg, cs, *pt, c.prime);
      if (w)
        return {false, "{" + w->g1 + ", " + w->g2 + ", " + w->g3 +
                           "}: " + w->detail};
      continue;
    }
    Mat<Fp> PiD = dirac_bivector(ab.alg, cs, *pt, model);
    Mat<Fp> Pi = poisson_bivector_eval(ab.alg, *pt, model);
    Mat<Fp> G(static_cast<int>(cs.constraints.size()), m, ring_zero(model));
    for (std::size_t k = 0; k < cs.constraints.size(); ++k)
      for (int i = 0; i < m; ++i) {
        PolyQ d = cs.constraints[k].second.partial(ab.alg.gen_vars[i]);
        if (!d.is_zero()) G(static_cast<int>(k), i) = d.eval(*pt, model);
      }
    if (!(G * PiD).is_zero())
      return {false, "a constraint is not central at trial " +
                         std::to_string(t)};
    for (int i = 0; i < n * n; ++i)
      for (int j = 0; j < n * n; ++j)
        if (!(PiD(i, j) == Pi(i, j)))
          return {false, "a-a block changed by the reduction"};
  }
  return {true, ""};
}

inline std::pair<bool, std::string> dirac_detF_check(const RunConfig& c) {
  for (int n : {2, 3, 4}) {
    if (n == 4 && !c.modular()) break;
    Mat<PolyQ> B = poly_matrix("b", n);
    PolyQ det = mat_det(avisb_matrix(B));
    PolyQ prod = PolyQ::constant(Rational(1));
    for (int d = 1; d < n; ++d)
      prod = prod * minor_plus(B, d) * minor_minus(B, d);
    if (!(det == (n == 2 ? prod : -prod)))
      return {false, "determinant factorization differs at n=" +
                         std::to_string(n)};
  }
  if (c.modular()) {
    std::mt19937_64 rng(c.seed);
    for (int t = 0; t < c.trials; ++t) {
      Mat<Fp> B(5, 5, Fp(0, c.prime));
      for (auto& e : B.d) e = Fp::raw(rng() % (c.prime - 1) + 1, c.prime);
      Fp det = mat_det(avisb_matrix(B));
      Fp prod = Fp(1, c.prime);
      for (int d = 1; d < 5; ++d)
        prod = prod * minor_plus(B, d) * minor_minus(B, d);
      if (!(det == -prod))
        return {false, "determinant factorization differs at n=5, trial " +
                           std::to_string(t)};
    }
  }
  return {true, ""};
}

inline std::pair<bool, std::string> dirac_nondegeneracy_check() {
  for (int n : {2, 3}) {
    Mat<RF> A(n, n, RF());
    for (int i = 1; i <= n; ++i)
      for (int j = i; j <= n; ++j)
        A.at(i, j) = i == j ? RF::constant(Rational(1))
                            : RF::variable(var_id("a" + std::to_string(i) +
                                                  std::to_string(j)));
    Mat<RF> E = Mat<RF>::identity(n, RF());
    if (!(nondegeneracy_probe(A, E) == RF::constant(Rational(1))))
      return {false, "determinant differs from 1 at n=" + std::to_string(n)};
  }
  return {true, ""};
}

inline std::pair<bool, std::string> dirac_case_i_singular(const RunConfig& c) {
  Built ab = build_AB(2, QCase::I);
  auto cs = but_constraints(2, {1, 1}, ConstraintTarget::Both);
  std::mt19937_64 rng(c.seed);
  auto pt = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, c.prime);
  if (!pt) return {false, "could not sample a surface point"};
  Fp model(0, c.prime);
  try {
    dirac_bivector(ab.alg, cs, *pt, model);
  } catch (const SingularGram&) {
    return {true, ""};
  }
  return {false, "expected a singular Gram matrix in case (i)"};
}

inline std::pair<bool, std::string> groupoid_core_check(const RunConfig& c,
                                                        int what) {
  const int N = c.modular() ? 3 : 2;
  auto built = build_FB_groupoid(N);
  auto& P = built.alg;
  auto F = P.group_matrix(built.grp[0]);
  auto B = P.group_matrix(built.grp[1]);
  Mat<PolyQ> Ft = B * F * B.transpose();
  switch (what) {
    case 0:  // Jacobi of the pair algebra
      return jacobi_check(built, c);
    case 1: {  // total separation {Ftilde (x) F} = 0
      for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j)
          for (int k = 1; k <= N; ++k)
            for (int l = 1; l <= N; ++l)
              if (!P.pbracket(Ft.at(i, j), F.at(k, l)).is_zero())
                return {false, "{Ftilde" + std::to_string(i) +
                                   std::to_string(j) + ", F" +
                                   std::to_string(k) + std::to_string(l) +
                                   "} != 0"};
      return {true, ""};
    }
    case 2: {  // source anti-Poisson, target Poisson into the A-table
      auto target = build_A(N);
      std::vector<RF> imgF, imgFt;
      for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) {
          imgF.push_back(RF(F.at(i, j)));
          imgFt.push_back(RF(Ft.at(i, j)));
        }
      auto w1 = P.map_check_symbolic(target.alg, imgF, -1);
      if (w1) return from_pair(w1);
      return from_pair(P.map_check_symbolic(target.alg, imgFt, +1));
    }
    case 3: {  // component forms carry the documented factor 2
      PolyQ one = PolyQ::constant(Rational(1));
      auto r = classical_r(N, one);
      auto B1 = leg_embed(B, 2, 1, one);
      auto Ft2 = leg_embed(Ft, 2, 2, one);
      auto T = r * B1 * Ft2 - Ft2 * r.partial_transpose(1) * B1;
      for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j)
          for (int k = 1; k <= N; ++k)
            for (int l = 1; l <= N; ++l) {
              PolyQ lhs = P.pbracket(B.at(i, j), Ft.at(k, l));
              if (!(lhs ==
                    T.get((i - 1) * N + (k - 1), (j - 1) * N + (l - 1))))
                return {false, "tilde-table entry differs"};
              PolyQ half =
                  (B.at(k, j) * Ft.at(i, l)).scale(theta_half(i - k)) -
                  (B.at(l, j) * Ft.at(k, i)).scale(theta_half(l - i));
              if (!(lhs == half.scale(Rational(2))))
                return {false, "component form is not half the table entry"};
            }
      return {true, ""};
    }
    case 4: {  // b.u.t. reductions of F and Ftilde close without correction
      std::unordered_map<std::uint32_t, Rational> pattern;
      for (int k = 1; k <= N; ++k)
        for (int l = 1; l < k; ++l)
          pattern.emplace(P.gen_var(built.grp[0], k, l), Rational(0));
      auto w = P.pattern_reduction_check(pattern);
      if (w) return from_pair(w);
      return from_pair(groupoid_but_tilde_check(N));
    }
    default:
      return {false, "unknown sub-check"};
  }
}

}  // namespace clidetail

inline const std::vector<CheckDef>& check_catalog() {
  using namespace clidetail;
  static const std::vector<CheckDef> catalog = [] {
    std::vector<CheckDef> v;
    auto add = [&](std::string id, std::string group, bool expected,
                   std::function<std::pair<bool, std::string>(
                       const RunConfig&)> fn) {
      v.push_back({std::move(id), std::move(group), expected, std::move(fn)});
    };

    // --- classical tables and Jacobi -------------------------------------
    add("table-component-A", "classical", true, [](const RunConfig& c) {
      return component_table_check(c.modular() ? 3 : 2);
    });
    auto add_jacobi = [&](std::string id, std::function<Built(int)> build) {
      add("jacobi-" + id, "classical", true,
          [build](const RunConfig& c) {
            return jacobi_check(build(c.modular() ? 3 : 2), c);
          });
    };
    add_jacobi("A", [](int N) { return build_A(N); });
    add_jacobi("B", [](int N) { return build_B(N); });
    add_jacobi("AB-i", [](int N) { return build_AB(N, QCase::I); });
    add_jacobi("AB-ii", [](int N) { return build_AB(N, QCase::II); });
    add_jacobi("AB-iii", [](int N) { return build_AB(N, QCase::III); });
    add_jacobi("ABC-ii", [](int N) { return build_ABC(N, QCase::II); });
    add_jacobi("ABC-iii", [](int N) { return build_ABC(N, QCase::III); });
    add_jacobi("B-chain-j2", [](int N) { return build_B_chain(N, 2); });
    add_jacobi("B-chain-j3", [](int N) { return build_B_chain(N, 3); });
    add_jacobi("BC-chain-j2", [](int N) { return build_BC_chain(N, 2); });
    // negative control: an inadmissible Q must break Jacobi
    add("jacobi-Q-P12", "classical", false, [](const RunConfig& c) {
      return jacobi_check(build_AB(2, QCase::I), c).first
                 ? jacobi_check(build_AB_bad(2), c)
                 : std::pair<bool, std::string>{false, "control baseline"};
    });

    // --- Poisson / anti-Poisson maps -------------------------------------
    add("map-BABt", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto tgt = build_A(N);
      for (auto cc : {QCase::I, QCase::II, QCase::III}) {
        auto src = build_AB(N, cc);
        auto A = rf_matrix(src.alg.group_matrix(src.grp[0]));
        auto B = rf_matrix(src.alg.group_matrix(src.grp[1]));
        auto r = map_check(src.alg, tgt.alg,
                           flatten_images({B * A * B.transpose()}), +1, c);
        if (!r.first) return r;
      }
      return std::pair<bool, std::string>{true, ""};
    });
    add("map-BACt", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto tgt = build_A(N);
      for (auto cc : {QCase::I, QCase::II, QCase::III}) {
        auto src = build_ABC(N, cc);
        auto A = rf_matrix(src.alg.group_matrix(src.grp[0]));
        auto B = rf_matrix(src.alg.group_matrix(src.grp[1]));
        auto C = rf_matrix(src.alg.group_matrix(src.grp[2]));
        auto r = map_check(src.alg, tgt.alg,
                           flatten_images({B * A * C.transpose()}), +1, c);
        if (!r.first) return r;
      }
      return std::pair<bool, std::string>{true, ""};
    });
    add("map-frakA", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto tgt = build_A(N);
      for (auto cc : {QCase::II, QCase::III}) {
        auto src = build_AB(N, cc);
        auto Ainv = rf_inverse(src.alg.group_matrix(src.grp[0]));
        auto B = rf_matrix(src.alg.group_matrix(src.grp[1]));
        auto img = flatten_images({B * Ainv.transpose() * B.transpose()});
        auto r = map_check(src.alg, tgt.alg, img, +1, c);
        if (!r.first) return r;
      }
      return std::pair<bool, std::string>{true, ""};
    });
    add("map-frakA-BC", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto tgt = build_A(N);
      for (auto cc : {QCase::II, QCase::III}) {
        auto src = build_ABC(N, cc);
        auto Ainv = rf_inverse(src.alg.group_matrix(src.grp[0]));
        auto B = rf_matrix(src.alg.group_matrix(src.grp[1]));
        auto C = rf_matrix(src.alg.group_matrix(src.grp[2]));
        auto img = flatten_images({B * Ainv.transpose() * C.transpose()});
        auto r = map_check(src.alg, tgt.alg, img, +1, c);
        if (!r.first) return r;
      }
      return std::pair<bool, std::string>{true, ""};
    });
    add("map-duality-AB", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto src = build_AB(N, QCase::II);
      auto tgt = build_AB(N, QCase::III);
      auto Ainv = rf_inverse(src.alg.group_matrix(src.grp[0]));
      auto Binv = rf_inverse(src.alg.group_matrix(src.grp[1]));
      return map_check(src.alg, tgt.alg,
                       flatten_images({Ainv, Binv.transpose()}), -1, c);
    });
    add("map-duality-ABC", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto src = build_ABC(N, QCase::II);
      auto tgt = build_ABC(N, QCase::III);
      auto Ainv = rf_inverse(src.alg.group_matrix(src.grp[0]));
      auto Binv = rf_inverse(src.alg.group_matrix(src.grp[1]));
      auto Cinv = rf_inverse(src.alg.group_matrix(src.grp[2]));
      return map_check(
          src.alg, tgt.alg,
          flatten_images({Ainv, Cinv.transpose(), Binv.transpose()}), -1, c);
    });
    add("map-theta", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto src = build_BC_pair(N);
      auto Binv = rf_inverse(src.alg.group_matrix(src.grp[0]));
      auto Cinv = rf_inverse(src.alg.group_matrix(src.grp[1]));
      return map_check(src.alg, src.alg,
                       flatten_images({Cinv.transpose(), Binv.transpose()}),
                       -1, c);
    });
    add("map-BCt", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto src = build_BC_pair(N);
      auto tgt = build_A(N);
      auto B = rf_matrix(src.alg.group_matrix(src.grp[0]));
      auto C = rf_matrix(src.alg.group_matrix(src.grp[1]));
      return map_check(src.alg, tgt.alg,
                       flatten_images({B * C.transpose()}), +1, c);
    });
    add("map-chain-B-proj", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto src = build_B_chain(N, 2);
      auto tgt = build_AB(N, QCase::II);
      auto A = rf_matrix(src.alg.group_matrix(src.grp[0]));
      auto B1 = rf_matrix(src.alg.group_matrix(src.grp[1]));
      auto B2 = rf_matrix(src.alg.group_matrix(src.grp[2]));
      for (auto& img :
           {flatten_images({A, B1}), flatten_images({A, B2 * B1}),
            flatten_images({B1 * A * B1.transpose(), B2})}) {
        auto r = map_check(src.alg, tgt.alg, img, +1, c);
        if (!r.first) return r;
      }
      return std::pair<bool, std::string>{true, ""};
    });
    add("map-chain-BC-proj", "maps", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto src = build_BC_chain(N, 2);
      auto tgt = build_ABC(N, QCase::II);
      auto A = rf_matrix(src.alg.group_matrix(src.grp[0]));
      auto B1 = rf_matrix(src.alg.group_matrix(src.grp[1]));
      auto C1 = rf_matrix(src.alg.group_matrix(src.grp[2]));
      auto B2 = rf_matrix(src.alg.group_matrix(src.grp[3]));
      auto C2 = rf_matrix(src.alg.group_matrix(src.grp[4]));
      for (auto& img : {flatten_images({A, B1, C1}),
                        flatten_images({A, B2 * B1, C2 * C1}),
                        flatten_images({B1 * A * C1.transpose(), B2, C2})}) {
        auto r = map_check(src.alg, tgt.alg, img, +1, c);
        if (!r.first) return r;
      }
      return std::pair<bool, std::string>{true, ""};
    });

    // --- Casimir families -------------------------------------------------
    auto add_family =
        [&](std::string id, std::function<PoissonAlgebra(int)> alg,
            std::function<CasimirFamily(int)> fam, bool always_modular) {
          add("casimir-" + id, "casimir", true,
              [alg, fam, always_modular](const RunConfig& c) {
                const int N = c.modular() ? 3 : 2;
                return family_check(alg(N), fam(N), c, always_modular);
              });
        };
    add_family("A", [](int N) { return build_A(N).alg; },
               [](int N) { return family_A(N); }, false);
    add_family("B", [](int N) { return build_B(N).alg; },
               [](int N) { return family_B(N); }, false);
    add_family("BC", [](int N) { return build_BC_pair(N).alg; },
               [](int N) { return family_BC(N); }, false);
    add_family("AB-ii", [](int N) { return build_AB(N, QCase::II).alg; },
               [](int N) { return family_AB(N, QCase::II); }, false);
    add_family("AB-iii", [](int N) { return build_AB(N, QCase::III).alg; },
               [](int N) { return family_AB(N, QCase::III); }, false);
    add_family("ABC-ii", [](int N) { return build_ABC(N, QCase::II).alg; },
               [](int N) { return family_ABC(N, QCase::II); }, false);
    add_family("ABC-iii", [](int N) { return build_ABC(N, QCase::III).alg; },
               [](int N) { return family_ABC(N, QCase::III); }, false);
    // chain families are verified by modular sampling at N=2
    add("casimir-B-chain-j2", "casimir", true, [](const RunConfig& c) {
      return family_check(build_B_chain(2, 2).alg, family_B_chain(2, 2), c,
                          true);
    });
    add("casimir-B-chain-j3", "casimir", true, [](const RunConfig& c) {
      return family_check(build_B_chain(2, 3).alg, family_B_chain(2, 3), c,
                          true);
    });
    add("casimir-BC-chain-j2", "casimir", true, [](const RunConfig& c) {
      return family_check(build_BC_chain(2, 2).alg, family_BC_chain(2, 2), c,
                          true);
    });
    add("exponent-matrices", "casimir", true, [](const RunConfig&) {
      const int N = 3;
      auto built = build_AB(N, QCase::II);
      auto A = expr_matrix("a", N), B = expr_matrix("b", N);
      auto S = A.transpose() * expr_inverse(B);
      for (int p = 1; p < N; ++p) {
        Expr MS = corner_minor(S, Corner::PrincipalUpperLeft, p);
        Expr MB = corner_minor(B, Corner::UpperRight, p);
        if (!(scaling_exponent_check(built.alg, MS, built.grp[0]) ==
              exp_D(N, p)))
          return std::pair<bool, std::string>{false, "D differs"};
        if (!(scaling_exponent_check(built.alg, MB, built.grp[0]) ==
              exp_F(N, p)))
          return std::pair<bool, std::string>{false, "F differs"};
        if (!(scaling_exponent_check(built.alg, MB, built.grp[1]) ==
              exp_G0(N, p)))
          return std::pair<bool, std::string>{false, "G0 differs"};
      }
      return std::pair<bool, std::string>{true, ""};
    });
    add("rank-BC", "casimir", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto bc = build_BC_pair(N);
      int r = bc.alg.bivector_rank(c.seed, c.prime);
      if (r != 2 * N * N - 2 * N)
        return std::pair<bool, std::string>{
            false, "rank " + std::to_string(r) + " != " +
                       std::to_string(2 * N * N - 2 * N)};
      return std::pair<bool, std::string>{true, ""};
    });
    add("corank-A", "casimir", true, [](const RunConfig& c) {
      const int N = c.modular() ? 3 : 2;
      auto a = build_A(N);
      int cr = a.alg.size() - a.alg.bivector_rank(c.seed, c.prime);
      if (cr != N)
        return std::pair<bool, std::string>{
            false, "corank " + std::to_string(cr) + " != " +
                       std::to_string(N)};
      return std::pair<bool, std::string>{true, ""};
    });

    // --- Dirac reduction --------------------------------------------------
    add("dirac-gram", "dirac", true, dirac_gram_check);
    add("dirac-centrality", "dirac", true, [](const RunConfig& c) {
      return dirac_surface_check(c, false);
    });
    add("dirac-jacobi", "dirac", true, [](const RunConfig& c) {
      return dirac_surface_check(c, true);
    });
    add("dirac-case-i-singular", "dirac", true, dirac_case_i_singular);
    add("dirac-sign-case-i", "dirac", true, [](const RunConfig& c) {
      return from_pair(f_bracket_sign_check(QCase::I, c.modular() ? 3 : 2,
                                            c.trials, c.seed, c.prime));
    });
    add("dirac-sign-case-ii", "dirac", true, [](const RunConfig& c) {
      return from_pair(f_bracket_sign_check(QCase::II, c.modular() ? 3 : 2,
                                            c.trials, c.seed, c.prime));
    });
    add("dirac-sign-case-iii", "dirac", true, [](const RunConfig& c) {
      return from_pair(f_bracket_sign_check(QCase::III, c.modular() ? 3 : 2,
                                            c.trials, c.seed, c.prime));
    });
    add("dirac-detF", "dirac", true, dirac_detF_check);
    add("dirac-nondegeneracy", "dirac", true, [](const RunConfig&) {
      return dirac_nondegeneracy_check();
    });

    // --- groupoid pair ----------------------------------------------------
    add("groupoid-jacobi", "groupoid", true, [](const RunConfig& c) {
      return groupoid_core_check(c, 0);
    });
    add("groupoid-separation", "groupoid", true, [](const RunConfig& c) {
      return groupoid_core_check(c, 1);
    });
    add("groupoid-maps", "groupoid", true, [](const RunConfig& c) {
      return groupoid_core_check(c, 2);
    });
    add("groupoid-tilde-table", "groupoid", true, [](const RunConfig& c) {
      return groupoid_core_check(c, 3);
    });
    add("groupoid-but", "groupoid", true, [](const RunConfig& c) {
      return groupoid_core_check(c, 4);
    });
    add("groupoid-lagrangian", "groupoid", true, [](const RunConfig&) {
      return from_pair(groupoid_lagrangian_check(2));
    });

    // --- quantum identities (one check per catalog entry) -----------------
    for (const auto& e : identity_catalog()) {
      add(e.id, "quantum-identity", e.expected_pass,
          [id = e.id](const RunConfig&) {
            auto out = check_identity(id, 2);
            return std::pair<bool, std::string>{out.pass, out.witness};
          });
    }
    add("quantum-exchange-rules", "quantum", true, [](const RunConfig&) {
      auto rules = exchange_rules_from_relations();
      if (rules.rule.size() != 28)
        return std::pair<bool, std::string>{
            false, "expected 28 rules, got " +
                       std::to_string(rules.rule.size())};
      for (QRel rel : {QRel::BB, QRel::AA, QRel::AB}) {
        auto [lhs, rhs] = quantum_relation(rel, 2);
        NCMat diff = lhs - rhs;
        for (auto& entry : diff.e)
          if (!nc_normal_form(entry, rules, 4).empty())
            return std::pair<bool, std::string>{
                false, "a generating relation does not reduce to zero"};
      }
      auto w = nc_confluence_check(rules, 3);
      if (w) return std::pair<bool, std::string>{false, *w};
      return std::pair<bool, std::string>{true, ""};
    });
    add("quantum-automorphism", "quantum", true, [](const RunConfig&) {
      auto rules = exchange_rules_from_relations();
      auto rep = quantum_automorphism_check(rules, 6);
      return std::pair<bool, std::string>{rep.pass, rep.witness};
    });
    add("quantum-semiclassical", "quantum", true, [](const RunConfig&) {
      Built ii = build_AB(2, QCase::II);
      Built iii = build_AB(2, QCase::III);
      auto bb = semiclassical_expand(QRel::BB, 2, classical_bracket(ii, false));
      if (!bb.h0_ok || !bb.match)
        return std::pair<bool, std::string>{false, "b-b: " + bb.witness};
      auto aa = semiclassical_expand(QRel::AA, 2, classical_bracket(ii, true));
      if (!aa.h0_ok || !aa.match)
        return std::pair<bool, std::string>{false, "a-a: " + aa.witness};
      auto ab = semiclassical_expand(QRel::AB, 2, classical_bracket(iii, false));
      if (!ab.h0_ok || !ab.match)
        return std::pair<bool, std::string>{false, "a-b: " + ab.witness};
      return std::pair<bool, std::string>{true, ""};
    });

    return v;
  }();
  return catalog;
}

inline const CheckDef* find_check(const std::string& id) {
  for (const auto& c : check_catalog())
    if (c.id == id) return &c;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Scenario files: flat "key = value" lines followed by a [checks] table with
// one check id per line.  '#' starts a comment.
// ---------------------------------------------------------------------------
struct Scenario {
  std::string name;
  RunConfig config;
  std::string report_path;  // optional; default "<name>.report.json"
  std::vector<std::string> checks;
};

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::string line;
  bool in_checks = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[checks]") {
      in_checks = true;
      continue;
    }
    if (in_checks) {
      if (!find_check(line))
        throw SchemaError("line " + std::to_string(lineno) +
                          ": unknown check id '" + line + "'");
      sc.checks.push_back(line);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "name") {
        sc.name = val;
      } else if (key == "backend") {
        if (val != "symbolic" && val != "modular")
          throw SchemaError("backend must be 'symbolic' or 'modular'");
        sc.config.backend = val;
      } else if (key == "prime") {
        sc.config.prime = std::stoull(val);
      } else if (key == "seed") {
        sc.config.seed = std::stoull(val);
      } else if (key == "trials") {
        sc.config.trials = std::stoi(val);
        if (sc.config.trials <= 0) throw SchemaError("trials must be positive");
      } else if (key == "report") {
        sc.report_path = val;
      } else {
        throw SchemaError("unknown key '" + key + "'");
      }
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception&) {
      throw SchemaError("line " + std::to_string(lineno) +
                        ": invalid value for '" + key + "'");
    }
  }
  if (sc.name.empty()) throw SchemaError("scenario has no name");
  if (sc.checks.empty()) throw SchemaError("scenario has no checks");
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read scenario file '" + path + "'");
  try {
    return parse_scenario(in);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------
struct CheckRecord {
  std::string id;
  std::string status;           // pass | fail | error | expected-fail
  std::string expected_status;  // pass | expected-fail
  std::string witness;          // present iff status is fail or error
  double elapsed_ms = 0;
  bool as_expected = false;
};

struct Report {
  Scenario scenario;
  std::vector<CheckRecord> checks;
  bool all_expected = false;
};

inline Report run_scenario(const Scenario& sc, int jobs = 1) {
  const int n = static_cast<int>(sc.checks.size());
  std::vector<CheckRecord> records(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      const CheckDef* def = find_check(sc.checks[i]);
      CheckRecord rec;
      rec.id = def->id;
      rec.expected_status = def->expected_pass ? "pass" : "expected-fail";
      auto t0 = std::chrono::steady_clock::now();
      bool pass = false;
      try {
        auto [p, w] = def->run(sc.config);
        pass = p;
        rec.status = p ? "pass" : (def->expected_pass ? "fail" : "expected-fail");
        if (rec.status == "fail") rec.witness = w;
      } catch (const std::exception& e) {
        rec.status = "error";
        rec.witness = e.what();
      }
      auto t1 = std::chrono::steady_clock::now();
      rec.elapsed_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      rec.as_expected =
          rec.status != "error" && pass == def->expected_pass;
      records[i] = std::move(rec);
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(records.begin(), records.end(),
            [](const CheckRecord& a, const CheckRecord& b) {
              return a.id < b.id;
            });
  Report rep;
  rep.scenario = sc;
  rep.all_expected = true;
  for (auto& r : records) rep.all_expected = rep.all_expected && r.as_expected;
  rep.checks = std::move(records);
  return rep;
}

// include_timing=false produces the byte-stable form used for golden
// comparison (timing fields excluded).
inline nlohmann::ordered_json report_to_json(const Report& rep,
                                             bool include_timing = true) {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["tool_version"] = kToolVersion;
  j["scenario"] = {{"name", rep.scenario.name},
                   {"backend", rep.scenario.config.backend},
                   {"prime", rep.scenario.config.prime},
                   {"seed", rep.scenario.config.seed},
                   {"trials", rep.scenario.config.trials}};
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  int pass = 0, fail = 0, error = 0, expected_fail = 0, unexpected = 0;
  for (const auto& r : rep.checks) {
    nlohmann::ordered_json rec;
    rec["id"] = r.id;
    rec["status"] = r.status;
    rec["expected_status"] = r.expected_status;
    if (r.status == "fail" || r.status == "error") rec["witness"] = r.witness;
    if (include_timing) rec["elapsed_ms"] = r.elapsed_ms;
    checks.push_back(std::move(rec));
    if (r.status == "pass") ++pass;
    if (r.status == "fail") ++fail;
    if (r.status == "error") ++error;
    if (r.status == "expected-fail") ++expected_fail;
    if (!r.as_expected) ++unexpected;
  }
  j["summary"] = {{"total", rep.checks.size()},
                  {"pass", pass},
                  {"expected_fail", expected_fail},
                  {"fail", fail},
                  {"error", error},
                  {"unexpected", unexpected}};
  return j;
}

inline void write_report(const Report& rep, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
    out << report_to_json(rep).dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

// Command-level driver shared by the executable and the tests.
// Exit codes: 0 all checks matched their expected status; 1 some did not;
// 2 schema error; 3 internal error.
struct CliOverrides {
  std::optional<std::string> backend;
  std::optional<std::uint64_t> prime;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> report;
  int jobs = 1;
};

inline int cli_run(const std::string& path, const CliOverrides& o,
                   std::ostream& out, std::ostream& err) {
  try {
    Scenario sc = load_scenario(path);
    if (o.backend) {
      if (*o.backend != "symbolic" && *o.backend != "modular")
        throw SchemaError("backend must be 'symbolic' or 'modular'");
      sc.config.backend = *o.backend;
    }
    if (o.prime) sc.config.prime = *o.prime;
    if (o.seed) sc.config.seed = *o.seed;
    if (o.trials) {
      if (*o.trials <= 0) throw SchemaError("trials must be positive");
      sc.config.trials = *o.trials;
    }
    if (o.report) sc.report_path = *o.report;
    if (sc.report_path.empty()) sc.report_path = sc.name + ".report.json";

    Report rep = run_scenario(sc, o.jobs);
    write_report(rep, sc.report_path);
    int fail = 0, error = 0;
    for (auto& r : rep.checks) {
      if (r.status == "fail") ++fail;
      if (r.status == "error") ++error;
    }
    out << sc.name << ": " << rep.checks.size() << " checks, " << fail
        << " failed, " << error << " errored"
        << (rep.all_expected ? "" : " (unexpected outcomes)") << "; report: "
        << sc.report_path << "\n";
    return rep.all_expected ? 0 : 1;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

// ---------------------------------------------------------------------------
// Catalog listing (stable, sorted).
// ---------------------------------------------------------------------------
inline std::string list_catalog() {
  std::ostringstream out;
  out << kToolName << " " << kToolVersion << "\n\n";
  out << "algebra families:\n";
  std::vector<std::string> fams{
      "A",          "B",           "BC",          "AB(i)",
      "AB(ii)",     "AB(iii)",     "ABC(i)",      "ABC(ii)",
      "ABC(iii)",   "B-chain",     "BC-chain",    "FB-groupoid",
      "FB-groupoid-triple"};
  std::sort(fams.begin(), fams.end());
  for (auto& f : fams) out << "  " << f << "\n";
  out << "\nchecks:\n";
  std::vector<const CheckDef*> defs;
  for (const auto& c : check_catalog()) defs.push_back(&c);
  std::sort(defs.begin(), defs.end(),
            [](const CheckDef* a, const CheckDef* b) { return a->id < b->id; });
  for (auto* c : defs)
    out << "  " << c->id << " [" << c->group << "]"
        << (c->expected_pass ? "" : " (expected-fail)") << "\n";
  out << "\nquantum identity catalog:\n";
  std::vector<std::string> ids;
  for (const auto& e : identity_catalog()) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  for (auto& id : ids) out << "  " << id << "\n";
  return out.str();
}

}  // namespace fb
