#pragma once
// Central-element families: corner minors, determinant pencils, the S-matrix
// strings for chains, the Y/X/Z/K families, and the scaling-exponent calculus
// of the block integer matrices.

#include <map>
#include <unordered_set>

#include "fb/poisson.hpp"

namespace fb {

struct NonScalingBracket : std::runtime_error {
  std::string gen;
  NonScalingBracket(const std::string& g, const std::string& detail)
      : std::runtime_error("non-scaling bracket with " + g + ": " + detail),
        gen(g) {}
};

// ---------------------------------------------------------------------------
// Expression matrices and corner minors.
// ---------------------------------------------------------------------------
enum class Corner {
  BottomLeft,
  UpperRight,
  PrincipalUpperLeft,
  PrincipalBottomRight,
};

inline Mat<Expr> expr_matrix(const std::string& prefix, int N) {
  Mat<Expr> m(N, N, expr_const(Rational(0)));
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j)
      m.at(i, j) =
          expr_var(prefix + std::to_string(i) + std::to_string(j));
  return m;
}

inline Mat<Expr> expr_delete_rc(const Mat<Expr>& m, int row, int col) {
  Mat<Expr> r(m.rows - 1, m.cols - 1, expr_const(Rational(0)));
  int ri = 1;
  for (int i = 1; i <= m.rows; ++i) {
    if (i == row) continue;
    int rj = 1;
    for (int j = 1; j <= m.cols; ++j) {
      if (j == col) continue;
      r.at(ri, rj) = m.at(i, j);
      ++rj;
    }
    ++ri;
  }
  return r;
}

// Inverse as adjugate over determinant (entries share one determinant node,
// so memoized evaluation stays cheap).
inline Mat<Expr> expr_inverse(const Mat<Expr>& m) {
  const int n = m.rows;
  Expr det = mat_det(m);
  Mat<Expr> inv(n, n, expr_const(Rational(0)));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      Expr c = mat_det(expr_delete_rc(m, j, i));
      if ((i + j) & 1) c = -c;
      inv.at(i, j) = c / det;
    }
  return inv;
}

// d x d minor at the given corner of an N x N matrix (d = 0 gives 1).
inline Expr corner_minor(const Mat<Expr>& m, Corner corner, int d) {
  const int N = m.rows;
  if (d == 0) return expr_const(Rational(1));
  int r1 = 1, c1 = 1;
  switch (corner) {
    case Corner::BottomLeft:
      r1 = N - d + 1;
      c1 = 1;
      break;
    case Corner::UpperRight:
      r1 = 1;
      c1 = N - d + 1;
      break;
    case Corner::PrincipalUpperLeft:
      r1 = 1;
      c1 = 1;
      break;
    case Corner::PrincipalBottomRight:
      r1 = N - d + 1;
      c1 = N - d + 1;
      break;
  }
  return mat_det(mat_block(m, r1, r1 + d - 1, c1, c1 + d - 1));
}

// ---------------------------------------------------------------------------
// Determinant pencil det(lambda^{e1} m1 + lambda^{e2} m2): map from the
// lambda-exponent to the coefficient expression.
// ---------------------------------------------------------------------------
inline std::map<int, Expr> det_pencil(const Mat<Expr>& m1, const Mat<Expr>& m2,
                                      int e1, int e2) {
  using PE = Poly<Expr>;
  const std::uint32_t lam = var_id("lambda");
  const int n = m1.rows;
  Mat<PE> pm(n, n, PE::zero());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      PE t;
      if (!ring_is_zero(m1(i, j))) t = t + PE::variable(lam, e1, m1(i, j));
      if (!ring_is_zero(m2(i, j))) t = t + PE::variable(lam, e2, m2(i, j));
      pm(i, j) = t;
    }
  PE det = mat_det(pm);
  std::map<int, Expr> out;
  for (auto& tm : det.t) {
    int e = tm.m.exp_of(lam);
    auto it = out.find(e);
    if (it == out.end())
      out.emplace(e, tm.c);
    else
      it->second = it->second + tm.c;
  }
  return out;
}

// ---------------------------------------------------------------------------
// S-matrix string for a chain A, B_1, ..., B_j:
//   case (ii):  S = A^T B_1^{-1} B_2^T B_3^{-1} ... (B_j^{-1} odd / B_j^T even)
//   case (iii): same alternation starting from A instead of A^T.
// ---------------------------------------------------------------------------
inline Mat<Expr> build_chain_S(const Mat<Expr>& A,
                               const std::vector<Mat<Expr>>& Bs, QCase c) {
  Mat<Expr> S = (c == QCase::III) ? A : A.transpose();
  for (std::size_t k = 1; k <= Bs.size(); ++k)
    S = S * ((k % 2 == 1) ? expr_inverse(Bs[k - 1]) : Bs[k - 1].transpose());
  return S;
}

// Minor corner conventions by chain parity and case.
inline Corner chain_S_corner(int j, QCase c) {
  if (c == QCase::III)
    return (j % 2 == 1) ? Corner::PrincipalBottomRight : Corner::BottomLeft;
  return (j % 2 == 1) ? Corner::PrincipalUpperLeft : Corner::UpperRight;
}
inline Corner chain_B_corner(QCase c) {
  return (c == QCase::III) ? Corner::BottomLeft : Corner::UpperRight;
}

// ---------------------------------------------------------------------------
// Casimir families.
// ---------------------------------------------------------------------------
struct CasimirFamily {
  std::string system;
  std::vector<std::pair<std::string, Expr>> members;
  int independent = 0;  // claimed count of algebraically independent members
};

// A-matrix algebra alone: polynomial coefficients r_k of det(A + l^{-1}A^T)
// and bottom-left minor ratios b_d = M^-_d / M^-_{N-d}.
inline CasimirFamily family_A(int N, const std::string& prefix = "a") {
  CasimirFamily f{"A", {}, N};
  auto A = expr_matrix(prefix, N);
  auto pen = det_pencil(A, A.transpose(), 0, -1);
  int kmax = std::min(N, N / 2 + 1);
  for (int k = 0; k <= kmax; ++k) {
    Expr c = pen.count(-k) ? pen[-k] : expr_const(Rational(0));
    f.members.push_back({"r" + std::to_string(k), c});
  }
  for (int d = 1; d <= N / 2; ++d)
    f.members.push_back(
        {"b" + std::to_string(d),
         corner_minor(A, Corner::BottomLeft, d) /
             corner_minor(A, Corner::BottomLeft, N - d)});
  return f;
}

// Lie--Poisson B algebra alone: c_d = M^+_d(B) / M^-_{N-d}(B), d = 1..N.
inline CasimirFamily family_B(int N, const std::string& prefix = "b") {
  CasimirFamily f{"B", {}, N};
  auto B = expr_matrix(prefix, N);
  for (int d = 1; d <= N; ++d)
    f.members.push_back(
        {"c" + std::to_string(d),
         corner_minor(B, Corner::UpperRight, d) /
             corner_minor(B, Corner::BottomLeft, N - d)});
  return f;
}

// (B, C) pair: minor ratios M^-_d(B)/M^+_{N-d}(C) and pencil coefficients
// q_s of det(B + lambda C); det B and det C are shared, 2N independent.
inline CasimirFamily family_BC(int N) {
  CasimirFamily f{"BC", {}, 2 * N};
  auto B = expr_matrix("b", N), C = expr_matrix("c", N);
  for (int d = 0; d <= N; ++d)
    f.members.push_back(
        {"m" + std::to_string(d),
         corner_minor(B, Corner::BottomLeft, d) /
             corner_minor(C, Corner::UpperRight, N - d)});
  auto pen = det_pencil(B, C, 0, 1);
  for (int s = 0; s <= N; ++s)
    f.members.push_back({"q" + std::to_string(s),
                         pen.count(s) ? pen[s] : expr_const(Rational(0))});
  return f;
}

// Y_p coefficients of det(lambda A + lambda^{-1}A^T)/det A, p = 1..[N/2].
inline void append_Y(CasimirFamily& f, const Mat<Expr>& A, int N) {
  auto pen = det_pencil(A, A.transpose(), 1, -1);
  Expr detA = mat_det(A);
  for (int p = 1; p <= N / 2; ++p) {
    Expr c = pen.count(N - 2 * p) ? pen[N - 2 * p] : expr_const(Rational(0));
    f.members.push_back({"Y" + std::to_string(p), c / detA});
  }
}

// (A, B) system, cases (ii) and (iii).
inline CasimirFamily family_AB(int N, QCase c) {
  CasimirFamily f{"AB(" + qcase_name(c) + ")", {}, 2 * (N / 2)};
  auto A = expr_matrix("a", N), B = expr_matrix("b", N);
  append_Y(f, A, N);
  auto S = build_chain_S(A, {B}, c);
  Corner cs = chain_S_corner(1, c), cb = chain_B_corner(c);
  Expr detA = mat_det(A), detB = mat_det(B);
  for (int p = 1; p <= N / 2; ++p) {
    Expr x = corner_minor(S, cs, p) * corner_minor(S, cs, N - p) /
             (corner_minor(B, cb, N - p) * corner_minor(B, cb, p)) *
             (detB * detB / detA);
    f.members.push_back({"X" + std::to_string(p), x});
  }
  return f;
}

// (A, B, C) triple, cases (ii) and (iii).
inline CasimirFamily family_ABC(int N, QCase c) {
  CasimirFamily f{"ABC(" + qcase_name(c) + ")", {}, 2 * (N / 2) + N};
  auto A = expr_matrix("a", N), B = expr_matrix("b", N), C = expr_matrix("c", N);
  append_Y(f, A, N);
  Expr detA = mat_det(A), detB = mat_det(B), detC = mat_det(C);
  // case (ii): S = A^T B^{-1}, principal-upper-left minors of S and
  // upper-right minors of C; case (iii): S = A C^{-1}, bottom-right principal
  // minors of S and lower-left minors of B.
  Mat<Expr> S = (c == QCase::III) ? A * expr_inverse(C)
                                  : A.transpose() * expr_inverse(B);
  Corner cs = (c == QCase::III) ? Corner::PrincipalBottomRight
                                : Corner::PrincipalUpperLeft;
  const Mat<Expr>& M = (c == QCase::III) ? B : C;
  Corner cm = (c == QCase::III) ? Corner::BottomLeft : Corner::UpperRight;
  for (int p = 1; p <= N / 2; ++p) {
    Expr x = corner_minor(S, cs, p) * corner_minor(S, cs, N - p) /
             (corner_minor(M, cm, N - p) * corner_minor(M, cm, p)) *
             (detB * detC / detA);
    f.members.push_back({"X" + std::to_string(p), x});
  }
  auto pen = det_pencil(B, C, 0, 1);
  for (int p = 1; p <= N; ++p) {
    Expr z = pen.count(p) ? pen[p] : expr_const(Rational(0));
    f.members.push_back({"Z" + std::to_string(p), z / detB});
  }
  return f;
}

// Chain A, B_1, ..., B_j (group prefixes "a", "b1", ..., "bj").
inline CasimirFamily family_B_chain(int N, int j, QCase c = QCase::II) {
  CasimirFamily f{"B-chain j=" + std::to_string(j) + " (" + qcase_name(c) + ")",
                  {},
                  (j % 2 == 0) ? N : 2 * (N / 2)};
  auto A = expr_matrix("a", N);
  std::vector<Mat<Expr>> Bs;
  for (int k = 1; k <= j; ++k)
    Bs.push_back(expr_matrix("b" + std::to_string(k), N));
  append_Y(f, A, N);
  auto S = build_chain_S(A, Bs, c);
  Corner cs = chain_S_corner(j, c), cb = chain_B_corner(c);
  if (j % 2 == 0) {
    for (int p = 0; 2 * p < N; ++p) {
      Expr num = corner_minor(S, cs, p);
      Expr den = corner_minor(S, cs, N - p);
      for (auto& B : Bs) {
        num = num * corner_minor(B, cb, p);
        den = den * corner_minor(B, cb, N - p);
      }
      f.members.push_back({"X" + std::to_string(p), num / den});
    }
  } else {
    const int r = (j - 1) / 2;
    Expr dets = expr_const(Rational(1));
    for (int k = 1; k <= r + 1; ++k) {
      Expr d = mat_det(Bs[2 * k - 2]);
      dets = dets * d * d;
    }
    Expr dden = mat_det(A);
    for (int k = 1; k <= r; ++k) {
      Expr d = mat_det(Bs[2 * k - 1]);
      dden = dden * d * d;
    }
    for (int p = 1; p <= N / 2; ++p) {
      Expr num = corner_minor(S, cs, p) * corner_minor(S, cs, N - p);
      for (int k = 1; k <= r; ++k)
        num = num * corner_minor(Bs[2 * k - 1], cb, p) *
              corner_minor(Bs[2 * k - 1], cb, N - p);
      Expr den = expr_const(Rational(1));
      for (int k = 1; k <= r + 1; ++k)
        den = den * corner_minor(Bs[2 * k - 2], cb, p) *
              corner_minor(Bs[2 * k - 2], cb, N - p);
      f.members.push_back({"X" + std::to_string(p), num / den * (dets / dden)});
    }
  }
  return f;
}

// Chain A, (B_1, C_1), ..., (B_j, C_j) (prefixes "a", "b1", "c1", ...),
// case (ii): the S string ignores the C matrices; the X family uses
// upper-right minors of the C_k instead of the B_k.
inline CasimirFamily family_BC_chain(int N, int j) {
  CasimirFamily f{"BC-chain j=" + std::to_string(j), {}, 0};
  f.independent = (j % 2 == 0) ? N * (j + 1) : 2 * (N / 2) + N * j;
  auto A = expr_matrix("a", N);
  std::vector<Mat<Expr>> Bs, Cs;
  for (int k = 1; k <= j; ++k) {
    Bs.push_back(expr_matrix("b" + std::to_string(k), N));
    Cs.push_back(expr_matrix("c" + std::to_string(k), N));
  }
  append_Y(f, A, N);
  for (int k = 1; k <= j; ++k) {
    auto pen = det_pencil(Bs[k - 1], Cs[k - 1], 0, 1);
    Expr detB = mat_det(Bs[k - 1]);
    for (int p = 1; p <= N; ++p) {
      Expr z = pen.count(p) ? pen[p] : expr_const(Rational(0));
      f.members.push_back(
          {"Z" + std::to_string(p) + "(" + std::to_string(k) + ")", z / detB});
    }
  }
  auto S = build_chain_S(A, Bs, QCase::II);
  Corner cs = chain_S_corner(j, QCase::II), cc = Corner::UpperRight;
  if (j % 2 == 0) {
    for (int p = 0; 2 * p < N; ++p) {
      Expr num = corner_minor(S, cs, p);
      Expr den = corner_minor(S, cs, N - p);
      for (auto& C : Cs) {
        num = num * corner_minor(C, cc, p);
        den = den * corner_minor(C, cc, N - p);
      }
      f.members.push_back({"X" + std::to_string(p), num / den});
    }
  } else {
    const int r = (j - 1) / 2;
    Expr dets = expr_const(Rational(1));
    for (int k = 1; k <= r + 1; ++k)
      dets = dets * mat_det(Bs[2 * k - 2]) * mat_det(Cs[2 * k - 2]);
    Expr dden = mat_det(A);
    for (int k = 1; k <= r; ++k)
      dden = dden * mat_det(Bs[2 * k - 1]) * mat_det(Cs[2 * k - 1]);
    for (int p = 1; p <= N / 2; ++p) {
      Expr num = corner_minor(S, cs, p) * corner_minor(S, cs, N - p);
      for (int k = 1; k <= r; ++k)
        num = num * corner_minor(Cs[2 * k - 1], cc, p) *
              corner_minor(Cs[2 * k - 1], cc, N - p);
      Expr den = expr_const(Rational(1));
      for (int k = 1; k <= r + 1; ++k)
        den = den * corner_minor(Cs[2 * k - 2], cc, p) *
              corner_minor(Cs[2 * k - 2], cc, N - p);
      f.members.push_back({"X" + std::to_string(p), num / den * (dets / dden)});
    }
  }
  return f;
}

// K^p composite for a chain (case (ii)): alternating product
// M_S^p / M_{B_1}^{N-p} * M_{B_2}^p / M_{B_3}^{N-p} * ...
// ending with M_{B_j}^p (even j) or / M_{B_j}^{N-p} (odd j).
inline Expr chain_Kp(int N, int j, int p, QCase c = QCase::II) {
  auto A = expr_matrix("a", N);
  std::vector<Mat<Expr>> Bs;
  for (int k = 1; k <= j; ++k)
    Bs.push_back(expr_matrix("b" + std::to_string(k), N));
  auto S = build_chain_S(A, Bs, c);
  Corner cs = chain_S_corner(j, c), cb = chain_B_corner(c);
  Expr r = corner_minor(S, cs, p);
  for (int k = 1; k <= j; ++k) {
    Expr m = corner_minor(Bs[k - 1], cb, (k % 2 == 1) ? N - p : p);
    r = (k % 2 == 1) ? r / m : r * m;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Exponent block matrices (N x N, integer entries as Rationals).
// ---------------------------------------------------------------------------
inline Mat<Rational> exp_block(int N,
                               const std::function<int(int, int)>& entry) {
  Mat<Rational> m(N, N, Rational(0));
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j) m.at(i, j) = Rational(entry(i, j));
  return m;
}

inline Mat<Rational> exp_D(int N, int p) {
  return exp_block(N, [&](int i, int j) {
    return (i <= p && j <= p) ? 2 : ((i <= p || j <= p) ? 1 : 0);
  });
}
inline Mat<Rational> exp_F(int N, int p) {
  return exp_block(N, [&](int i, int j) {
    return (i > N - p && j > N - p) ? -2 : ((i > N - p || j > N - p) ? -1 : 0);
  });
}
inline Mat<Rational> exp_G0(int N, int p) {
  return exp_block(N, [&](int i, int j) {
    if (i <= p) return j <= N - p ? 1 : 0;
    return j <= N - p ? 0 : -1;
  });
}
inline Mat<Rational> exp_Gminus(int N, int p) {
  return exp_block(N, [&](int, int j) { return j <= p ? 1 : 0; });
}
inline Mat<Rational> exp_Gplus(int N, int p) {
  return exp_block(N, [&](int i, int) { return i > N - p ? -1 : 0; });
}
inline Mat<Rational> exp_E(int N, int p) {
  return exp_block(N, [&](int i, int) { return i <= p ? 1 : 0; });
}

// ---------------------------------------------------------------------------
// Expression variables, rational-function lift, and centrality checks.
// ---------------------------------------------------------------------------
inline std::unordered_set<std::uint32_t> expr_vars(const Expr& e) {
  std::unordered_set<std::uint32_t> out;
  std::unordered_set<const ExprNode*> seen;
  std::function<void(const Expr&)> go = [&](const Expr& n) {
    if (!n || !seen.insert(n.get()).second) return;
    if (n->op == ExprOp::Var) out.insert(n->var);
    go(n->a);
    go(n->b);
  };
  go(e);
  return out;
}

inline RF rf_of(const Expr& e) {
  std::unordered_map<std::uint32_t, RF> point;
  for (auto v : expr_vars(e)) point.emplace(v, RF::variable(v));
  return expr_eval(e, point, RF());
}

// {e, g} = 0 for every generator g, by exact rational-function arithmetic.
inline std::optional<PairWitness> casimir_expr_symbolic(
    const PoissonAlgebra& alg, const Expr& e) {
  RF u = rf_of(e);
  for (int g = 0; g < alg.size(); ++g) {
    RF br = alg.rf_bracket(u, RF::variable(alg.gen_vars[g]));
    if (!br.is_zero())
      return PairWitness{"casimir", alg.gen_names[g],
                         "residue " + br.str()};
  }
  return std::nullopt;
}

// Modular centrality: gradients of the expression DAG by dual numbers at
// random points (resampled away from denominator zeros).
inline std::optional<PairWitness> casimir_expr_modular(
    const PoissonAlgebra& alg, const Expr& e, int points, std::uint64_t seed,
    std::uint64_t prime) {
  std::mt19937_64 rng(seed);
  Fp model(0, prime);
  auto vars = expr_vars(e);
  const int m = alg.size();
  for (int pt = 0; pt < points; ++pt) {
    std::unordered_map<std::uint32_t, Fp> point;
    std::vector<Fp> grad(m, ring_zero(model));
    bool done = false;
    for (int attempt = 0; attempt < 32 && !done; ++attempt) {
      point = alg.random_point(rng, prime);
      try {
        for (int i = 0; i < m; ++i) {
          grad[i] = ring_zero(model);
          if (!vars.count(alg.gen_vars[i])) continue;
          Dual<Fp> dmodel(model, model);
          std::unordered_map<std::uint32_t, Dual<Fp>> dpoint;
          for (auto& [v, x] : point)
            dpoint.emplace(v, Dual<Fp>(x, v == alg.gen_vars[i]
                                              ? ring_one(model)
                                              : ring_zero(model)));
          grad[i] = expr_eval(e, dpoint, dmodel).b;
        }
        done = true;
      } catch (const DivisionByZero&) {
      }
    }
    if (!done)
      return PairWitness{"casimir", "", "could not sample a regular point"};
    for (int j = 0; j < m; ++j) {
      Fp s = ring_zero(model);
      for (int i = 0; i < m; ++i) {
        if (ring_is_zero(grad[i]) || alg.tab[i][j].is_zero()) continue;
        s += grad[i] * alg.tab[i][j].eval(point, model);
      }
      if (!s.is_zero())
        return PairWitness{"casimir", alg.gen_names[j],
                           "modular residue at point " + std::to_string(pt)};
    }
  }
  return std::nullopt;
}

// Numerical evidence for algebraic independence: rank of the Jacobian of the
// family at a random regular point.
inline int family_jacobian_rank(const PoissonAlgebra& alg,
                                const CasimirFamily& fam, std::uint64_t seed,
                                std::uint64_t prime) {
  std::mt19937_64 rng(seed);
  Fp model(0, prime);
  const int m = alg.size();
  for (int attempt = 0; attempt < 32; ++attempt) {
    auto point = alg.random_point(rng, prime);
    try {
      Mat<Fp> J(static_cast<int>(fam.members.size()), m, ring_zero(model));
      for (std::size_t a = 0; a < fam.members.size(); ++a) {
        auto vars = expr_vars(fam.members[a].second);
        for (int i = 0; i < m; ++i) {
          if (!vars.count(alg.gen_vars[i])) continue;
          Dual<Fp> dmodel(model, model);
          std::unordered_map<std::uint32_t, Dual<Fp>> dpoint;
          for (auto& [v, x] : point)
            dpoint.emplace(v, Dual<Fp>(x, v == alg.gen_vars[i]
                                              ? ring_one(model)
                                              : ring_zero(model)));
          J(static_cast<int>(a), i) =
              expr_eval(fam.members[a].second, dpoint, dmodel).b;
        }
      }
      return mat_rank(J);
    } catch (const DivisionByZero&) {
    }
  }
  throw std::runtime_error("family_jacobian_rank: no regular point found");
}

// ---------------------------------------------------------------------------
// Scaling-exponent check: for each generator g of the group, {minor, g} must
// equal c_g * minor * g with a constant c_g; returns the matrix of c_g.
// ---------------------------------------------------------------------------
inline Mat<Rational> scaling_exponent_check(const PoissonAlgebra& alg,
                                            const Expr& minor, int group) {
  RF u = rf_of(minor);
  const int N = alg.N;
  Mat<Rational> out(N, N, Rational(0));
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j) {
      std::uint32_t v = alg.gen_var(group, i, j);
      RF g = RF::variable(v);
      RF br = alg.rf_bracket(u, g);
      if (br.is_zero()) continue;
      RF ratio = br / (u * g);
      if (ratio.num.is_zero()) continue;
      const std::string gname = var_name(v);
      if (!(ratio.num.t.front().m == ratio.den.t.front().m))
        throw NonScalingBracket(gname, "ratio " + ratio.str());
      Rational k = ratio.num.t.front().c / ratio.den.t.front().c;
      if (!(ratio.num == ratio.den.scale(k)))
        throw NonScalingBracket(gname, "ratio " + ratio.str());
      out.at(i, j) = k;
    }
  return out;
}

// Modular variant for minors whose rational-function expansion is too large:
// at several random points {minor, g}, minor and g are evaluated in F_p and
// the exponent c_g = {minor, g} / (minor * g) is lifted to a small integer
// that must agree across all points.
inline Mat<Rational> scaling_exponent_check_modular(
    const PoissonAlgebra& alg, const Expr& minor, int group, int points,
    std::uint64_t seed, std::uint64_t prime) {
  std::mt19937_64 rng(seed);
  Fp model(0, prime);
  const int N = alg.N;
  const int m = alg.size();
  auto vars = expr_vars(minor);
  Mat<Rational> out(N, N, Rational(0));
  Mat<int> seen(N, N, 0);
  for (int pt = 0; pt < points; ++pt) {
    std::unordered_map<std::uint32_t, Fp> point;
    std::vector<Fp> grad(m, ring_zero(model));
    Fp uval = ring_zero(model);
    bool done = false;
    for (int attempt = 0; attempt < 64 && !done; ++attempt) {
      point = alg.random_point(rng, prime);
      try {
        uval = expr_eval(minor, point, model);
        if (uval.is_zero()) continue;
        for (int i = 0; i < m; ++i) {
          grad[i] = ring_zero(model);
          if (!vars.count(alg.gen_vars[i])) continue;
          Dual<Fp> dmodel(model, model);
          std::unordered_map<std::uint32_t, Dual<Fp>> dpoint;
          for (auto& [v, x] : point)
            dpoint.emplace(v, Dual<Fp>(x, v == alg.gen_vars[i]
                                              ? ring_one(model)
                                              : ring_zero(model)));
          grad[i] = expr_eval(minor, dpoint, dmodel).b;
        }
        done = true;
      } catch (const DivisionByZero&) {
      }
    }
    if (!done)
      throw std::runtime_error(
          "scaling_exponent_check_modular: no regular point found");
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) {
        std::uint32_t v = alg.gen_var(group, i, j);
        int jg = -1;
        for (int k = 0; k < m; ++k)
          if (alg.gen_vars[k] == v) jg = k;
        const std::string gname = var_name(v);
        if (jg < 0) throw NonScalingBracket(gname, "not a generator");
        Fp br = ring_zero(model);
        for (int k = 0; k < m; ++k) {
          if (ring_is_zero(grad[k]) || alg.tab[k][jg].is_zero()) continue;
          br += grad[k] * alg.tab[k][jg].eval(point, model);
        }
        Fp gval = point.at(v);
        if (gval.is_zero()) continue;  // uninformative sample for this entry
        Fp ratio = br / (uval * gval);
        bool lifted = false;
        for (int c = -4; c <= 4 && !lifted; ++c) {
          Fp cand(c, prime);
          if (cand == ratio) {
            Rational k(c);
            if (!seen.at(i, j)) {
              out.at(i, j) = k;
              seen.at(i, j) = 1;
            } else if (!(out.at(i, j) == k)) {
              throw NonScalingBracket(gname, "exponent varies across points");
            }
            lifted = true;
          }
        }
        if (!lifted)
          throw NonScalingBracket(gname, "no small integer exponent");
      }
  }
  return out;
}

}  // namespace fb
