#pragma once
// Second-class constraint machinery: b.u.t. constraint sets, the constraint
// Gram matrix, the Dirac bracket (as a point-evaluated bivector), the F[B]
// linear solver for the upper-triangular case, and nondegeneracy probes.

#include "fb/casimir.hpp"

namespace fb {

struct SingularGram : std::runtime_error {
  explicit SingularGram(const std::string& w)
      : std::runtime_error("singular constraint Gram matrix: " + w) {}
};

struct SingularSystem : std::runtime_error {
  std::string witness;
  explicit SingularSystem(const std::string& w)
      : std::runtime_error("singular linear system: " + w), witness(w) {}
};

// ---------------------------------------------------------------------------
// b.u.t. (block upper-triangular) constraint sets.
// ---------------------------------------------------------------------------
enum class ConstraintTarget { A, BABt, Both };

struct ConstraintSet {
  int N = 0;
  std::vector<std::pair<std::string, PolyQ>> constraints;
  // solved-form part of the surface (the A-side triangular rules)
  std::unordered_map<std::uint32_t, Rational> surface;
};

inline Mat<PolyQ> poly_matrix(const std::string& prefix, int N) {
  Mat<PolyQ> m(N, N, PolyQ::zero());
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j)
      m.at(i, j) =
          PolyQ::variable(var_id(prefix + std::to_string(i) + std::to_string(j)));
  return m;
}

inline ConstraintSet but_constraints(int N, const std::vector<int>& blocks,
                                     ConstraintTarget which,
                                     const std::string& pa = "a",
                                     const std::string& pb = "b") {
  int sum = 0;
  for (int b : blocks) {
    if (b <= 0) throw std::invalid_argument("block sizes must be positive");
    sum += b;
  }
  if (sum != N) throw std::invalid_argument("block sizes must partition N");
  std::vector<int> block_of(N + 1, 0), block_start;
  {
    int row = 1;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      block_start.push_back(row);
      for (int k = 0; k < blocks[bi]; ++k) block_of[row++] = static_cast<int>(bi);
    }
  }
  ConstraintSet cs;
  cs.N = N;
  auto add_matrix = [&](const Mat<PolyQ>& M, const std::string& tag,
                        bool solved) {
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) {
        if (block_of[i] <= block_of[j]) continue;
        cs.constraints.push_back(
            {tag + std::to_string(i) + std::to_string(j), M.at(i, j)});
        if (solved) {
          auto& e = M.at(i, j);
          cs.surface.emplace(e.t.front().m.e.front().first, Rational(0));
        }
      }
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      int r = block_start[bi], d = blocks[bi];
      PolyQ det = mat_det(mat_block(M, r, r + d - 1, r, r + d - 1)) -
                  PolyQ::constant(Rational(1));
      cs.constraints.push_back(
          {tag + "det" + std::to_string(bi + 1), det});
      if (solved && d == 1) {
        auto& e = M.at(r, r);
        cs.surface.emplace(e.t.front().m.e.front().first, Rational(1));
      }
    }
  };
  auto A = poly_matrix(pa, N);
  if (which == ConstraintTarget::A || which == ConstraintTarget::Both)
    add_matrix(A, "C", true);
  if (which == ConstraintTarget::BABt || which == ConstraintTarget::Both) {
    auto B = poly_matrix(pb, N);
    add_matrix(B * A * B.transpose(), "C*", false);
  }
  return cs;
}

// Gram matrix of the constraints, restricted to the solved-form surface.
inline Mat<PolyQ> constraint_gram(const PoissonAlgebra& alg,
                                  const ConstraintSet& cs) {
  const int m = static_cast<int>(cs.constraints.size());
  Mat<PolyQ> D(m, m, PolyQ::zero());
  for (int k = 0; k < m; ++k)
    for (int l = k + 1; l < m; ++l) {
      PolyQ v = alg.pbracket(cs.constraints[k].second, cs.constraints[l].second)
                    .substitute(cs.surface);
      D(k, l) = v;
      D(l, k) = -v;
    }
  return D;
}

// Closed-form {C_{k,l}, C*_{i,j}} entry (at the engine's table scale):
//   2 ( [B]_{i,k} [B A^T A]_{j,l} + [B A A]_{i,l} [B]_{j,k} ).
inline PolyQ gram_formula_entry(const Mat<PolyQ>& B, const Mat<PolyQ>& BAtA,
                                const Mat<PolyQ>& BAA, int k, int l, int i,
                                int j) {
  PolyQ v = B.at(i, k) * BAtA.at(j, l) + BAA.at(i, l) * B.at(j, k);
  return v.scale(Rational(2));
}

// ---------------------------------------------------------------------------
// The F[B] linear system (upper-triangular case): rows (k,l) with k>l and
// columns (i,j) with i<j, both lexicographically ordered;
// entries F^{k>l}_{i<j} = b_{k,i} b_{l,j}.
// ---------------------------------------------------------------------------
inline std::vector<std::pair<int, int>> lower_pairs(int n) {
  std::vector<std::pair<int, int>> v;
  for (int k = 2; k <= n; ++k)
    for (int l = 1; l < k; ++l) v.push_back({k, l});
  return v;
}
inline std::vector<std::pair<int, int>> upper_pairs(int n) {
  std::vector<std::pair<int, int>> v;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) v.push_back({i, j});
  return v;
}

template <class K>
Mat<K> avisb_matrix(const Mat<K>& B) {
  const int n = B.rows;
  auto rows = lower_pairs(n), cols = upper_pairs(n);
  const int m = static_cast<int>(rows.size());
  K model = B.d[0];
  Mat<K> F(m, m, ring_zero(model));
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      F(r, c) = B.at(rows[r].first, cols[c].first) *
                B.at(rows[r].second, cols[c].second);
  return F;
}

template <class F>
std::optional<std::vector<F>> linear_solve(Mat<F> M, std::vector<F> rhs) {
  const int n = M.rows;
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (!ring_is_zero(M(r, c))) {
        piv = r;
        break;
      }
    if (piv < 0) return std::nullopt;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(M(piv, j), M(c, j));
      std::swap(rhs[piv], rhs[c]);
    }
    F ip = ring_one(M(c, c)) / M(c, c);
    for (int j = 0; j < n; ++j) M(c, j) = M(c, j) * ip;
    rhs[c] = rhs[c] * ip;
    for (int r = 0; r < n; ++r) {
      if (r == c || ring_is_zero(M(r, c))) continue;
      F f = M(r, c);
      for (int j = 0; j < n; ++j) M(r, j) = M(r, j) - f * M(c, j);
      rhs[r] = rhs[r] - f * rhs[c];
    }
  }
  return rhs;
}

// Solve for the upper-triangular unit-diagonal A with B A B^T upper
// triangular: sum_{i<j} b_{k,i} b_{l,j} a_{i,j} = -sum_s b_{k,s} b_{l,s}.
template <class F>
Mat<F> solve_F(const Mat<F>& B) {
  const int n = B.rows;
  F model = B.d[0];
  auto rows = lower_pairs(n), cols = upper_pairs(n);
  Mat<F> M = avisb_matrix(B);
  std::vector<F> rhs;
  for (auto& [k, l] : rows) {
    F s = ring_zero(model);
    for (int t = 1; t <= n; ++t) s = s + B.at(k, t) * B.at(l, t);
    rhs.push_back(-s);
  }
  auto sol = linear_solve(M, rhs);
  if (!sol) throw SingularSystem("F[B] system matrix not invertible");
  Mat<F> A(n, n, ring_zero(model));
  for (int i = 1; i <= n; ++i) A.at(i, i) = ring_one(model);
  for (std::size_t c = 0; c < cols.size(); ++c)
    A.at(cols[c].first, cols[c].second) = (*sol)[c];
  return A;
}

// Corner minors over an arbitrary ring (Minor+/Minor- conventions).
template <class K>
K minor_plus(const Mat<K>& B, int d) {
  if (d == 0) return ring_one(B.d[0]);
  const int n = B.rows;
  return mat_det(mat_block(B, 1, d, n - d + 1, n));
}
template <class K>
K minor_minus(const Mat<K>& B, int d) {
  if (d == 0) return ring_one(B.d[0]);
  const int n = B.rows;
  return mat_det(mat_block(B, n - d + 1, n, 1, d));
}

// ---------------------------------------------------------------------------
// Full-surface sampling over F_p: random B, solve for A, rescale
// B <- diag(1/sqrt(t_k)) B so that B A B^T has unit diagonal
// (sqrt mod p = x^{(p+1)/4} for p = 3 mod 4; resample on failure).
// ---------------------------------------------------------------------------
inline std::optional<std::unordered_map<std::uint32_t, Fp>> sample_but_surface(
    const PoissonAlgebra& alg, int ga, int gb, std::mt19937_64& rng,
    std::uint64_t prime) {
  const int n = alg.N;
  Fp model(0, prime);
  for (int attempt = 0; attempt < 32; ++attempt) {
    Mat<Fp> B(n, n, ring_zero(model));
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j)
        B.at(i, j) = Fp::raw(rng() % (prime - 1) + 1, prime);
    Mat<Fp> A(n, n, ring_zero(model));
    try {
      A = solve_F(B);
    } catch (const SingularSystem&) {
      continue;
    } catch (const DivisionByZero&) {
      continue;
    }
    Mat<Fp> M = B * A * B.transpose();
    bool ok = true;
    for (int k = 1; k <= n && ok; ++k) {
      Fp t = M.at(k, k);
      if (t.is_zero()) {
        ok = false;
        break;
      }
      auto s = t.sqrt();
      if (!s || s->is_zero()) {
        ok = false;
        break;
      }
      Fp inv = s->inv();
      for (int j = 1; j <= n; ++j) B.at(k, j) = B.at(k, j) * inv;
    }
    if (!ok) continue;
    std::unordered_map<std::uint32_t, Fp> point;
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        point.emplace(alg.gen_var(ga, i, j), A.at(i, j));
        point.emplace(alg.gen_var(gb, i, j), B.at(i, j));
      }
    return point;
  }
  return std::nullopt;
}

// Dual-number matrix inverse that pivots on value parts:
// (A + eps B)^{-1} = A^{-1} - eps A^{-1} B A^{-1}.
inline std::optional<Mat<Dual<Fp>>> mat_inverse(const Mat<Dual<Fp>>& m) {
  const int n = m.rows;
  Fp model = m.d[0].a;
  Mat<Fp> A(n, n, ring_zero(model)), B(n, n, ring_zero(model));
  for (int i = 0; i < n * n; ++i) {
    A.d[i] = m.d[i].a;
    B.d[i] = m.d[i].b;
  }
  auto Ai = mat_inverse(A);
  if (!Ai) return std::nullopt;
  Mat<Fp> Bi = *Ai * B * *Ai;
  for (auto& e : Bi.d) e = -e;
  Mat<Dual<Fp>> r(n, n, ring_zero(m.d[0]));
  for (int i = 0; i < n * n; ++i) r.d[i] = Dual<Fp>(Ai->d[i], Bi.d[i]);
  return r;
}

// ---------------------------------------------------------------------------
// Dirac bivector at a point (works over Fp and Dual<Fp>):
//   Pi_D = Pi + (Pi G^T) D^{-1} (Pi G^T)^T,   D = G Pi G^T,
// where G_{k,i} = dC_k/dg_i.  The plus sign comes from
// {C_l, g_j} = -(Pi G^T)_{j,l}.  Throws SingularGram if D is not invertible.
// ---------------------------------------------------------------------------
template <class K>
Mat<K> poisson_bivector_eval(const PoissonAlgebra& alg,
                             const std::unordered_map<std::uint32_t, K>& pt,
                             const K& model) {
  const int m = alg.size();
  Mat<K> Pi(m, m, ring_zero(model));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (!alg.tab[i][j].is_zero()) Pi(i, j) = alg.tab[i][j].eval(pt, model);
  return Pi;
}

template <class K>
Mat<K> dirac_bivector(const PoissonAlgebra& alg, const ConstraintSet& cs,
                      const std::unordered_map<std::uint32_t, K>& pt,
                      const K& model) {
  const int m = alg.size();
  const int mc = static_cast<int>(cs.constraints.size());
  Mat<K> Pi = poisson_bivector_eval(alg, pt, model);
  Mat<K> G(mc, m, ring_zero(model));
  for (int k = 0; k < mc; ++k)
    for (int i = 0; i < m; ++i) {
      PolyQ d = cs.constraints[k].second.partial(alg.gen_vars[i]);
      if (!d.is_zero()) G(k, i) = d.eval(pt, model);
    }
  Mat<K> PiGt = Pi * G.transpose();
  Mat<K> D = G * PiGt;
  auto Dinv = mat_inverse(D);
  if (!Dinv) throw SingularGram("Gram not invertible at the sampled point");
  return Pi + PiGt * *Dinv * PiGt.transpose();
}

// Jacobiator of the Dirac bivector at a point, computed from dual-number
// directional derivatives; returns a witness triple on failure.
inline std::optional<JacobiWitness> dirac_jacobi_at(
    const PoissonAlgebra& alg, const ConstraintSet& cs,
    const std::unordered_map<std::uint32_t, Fp>& pt, std::uint64_t prime) {
  const int m = alg.size();
  Fp model(0, prime);
  Dual<Fp> dmodel(model, model);
  Mat<Fp> Pi(m, m, ring_zero(model));
  std::vector<Mat<Fp>> dPi;  // derivative of Pi_D in each direction
  for (int l = 0; l < m; ++l) {
    std::unordered_map<std::uint32_t, Dual<Fp>> dpt;
    for (auto& [v, x] : pt)
      dpt.emplace(v, Dual<Fp>(x, v == alg.gen_vars[l] ? ring_one(model)
                                                      : ring_zero(model)));
    Mat<Dual<Fp>> PiD = dirac_bivector(alg, cs, dpt, dmodel);
    Mat<Fp> d(m, m, ring_zero(model));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        d(i, j) = PiD(i, j).b;
        if (l == 0) Pi(i, j) = PiD(i, j).a;
      }
    dPi.push_back(std::move(d));
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = j + 1; k < m; ++k) {
        Fp J = ring_zero(model);
        for (int l = 0; l < m; ++l)
          J += Pi(l, i) * dPi[l](j, k) + Pi(l, j) * dPi[l](k, i) +
               Pi(l, k) * dPi[l](i, j);
        if (!J.is_zero())
          return JacobiWitness{alg.gen_names[i], alg.gen_names[j],
                               alg.gen_names[k], "Dirac Jacobiator residue"};
      }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Sign check for the induced brackets of F_{i,j}[B]:
//   case (i):   plain Lie-Poisson brackets give  -{a,a}|_{A=F[B]};
//   cases (ii)/(iii): Dirac brackets give        +{a,a}|_{A=F[B]}.
// ---------------------------------------------------------------------------
inline std::optional<PairWitness> f_bracket_sign_check(QCase c, int n,
                                                       int points,
                                                       std::uint64_t seed,
                                                       std::uint64_t prime) {
  std::mt19937_64 rng(seed);
  Fp model(0, prime);
  Dual<Fp> dmodel(model, model);
  auto uppers = upper_pairs(n);
  const int nu = static_cast<int>(uppers.size());

  if (c == QCase::I) {
    // F[B] with the Lie-Poisson B bracket only.
    Built bb = build_B(n);
    Built ba = build_A(n);
    const int m = bb.alg.size();
    for (int pt = 0; pt < points; ++pt) {
      for (int attempt = 0;; ++attempt) {
        if (attempt >= 32)
          return PairWitness{"", "", "could not sample a regular point"};
        auto point = bb.alg.random_point(rng, prime);
        try {
          // values and gradients of F_{i,j}[B] by dual-number linear solves
          Mat<Fp> Fv(n, n, ring_zero(model));
          std::vector<Mat<Fp>> Fg(m, Mat<Fp>(n, n, ring_zero(model)));
          for (int l = -1; l < m; ++l) {
            std::unordered_map<std::uint32_t, Dual<Fp>> dpt;
            for (auto& [v, x] : point)
              dpt.emplace(v, Dual<Fp>(x, (l >= 0 && v == bb.alg.gen_vars[l])
                                             ? ring_one(model)
                                             : ring_zero(model)));
            Mat<Dual<Fp>> B(n, n, ring_zero(dmodel));
            for (int i = 1; i <= n; ++i)
              for (int j = 1; j <= n; ++j)
                B.at(i, j) = dpt.at(bb.alg.gen_var(bb.grp[0], i, j));
            Mat<Dual<Fp>> A = solve_F(B);
            for (int i = 1; i <= n; ++i)
              for (int j = 1; j <= n; ++j) {
                if (l < 0)
                  Fv.at(i, j) = A.at(i, j).a;
                else
                  Fg[l].at(i, j) = A.at(i, j).b;
              }
          }
          Mat<Fp> Pi = poisson_bivector_eval(bb.alg, point, model);
          std::unordered_map<std::uint32_t, Fp> apoint;
          for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
              apoint.emplace(ba.alg.gen_var(ba.grp[0], i, j), Fv.at(i, j));
          for (int u = 0; u < nu; ++u)
            for (int w = u + 1; w < nu; ++w) {
              auto [i, j] = uppers[u];
              auto [s, p] = uppers[w];
              Fp lhs = ring_zero(model);
              for (int x = 0; x < m; ++x)
                for (int y = 0; y < m; ++y) {
                  if (ring_is_zero(Pi(x, y))) continue;
                  lhs += Fg[x].at(i, j) * Fg[y].at(s, p) * Pi(x, y);
                }
              const PolyQ& t =
                  ba.alg.tab[ba.alg.gen_index(ba.grp[0], i, j)]
                           [ba.alg.gen_index(ba.grp[0], s, p)];
              Fp rhs = t.is_zero() ? ring_zero(model) : t.eval(apoint, model);
              if (!(lhs == -rhs))
                return PairWitness{
                    "F" + std::to_string(i) + std::to_string(j),
                    "F" + std::to_string(s) + std::to_string(p),
                    "case (i) sign mismatch at point " + std::to_string(pt)};
            }
          break;
        } catch (const SingularSystem&) {
        } catch (const DivisionByZero&) {
        }
      }
    }
    return std::nullopt;
  }

  // cases (ii) / (iii): Dirac bracket on the b.u.t. surface
  Built ab = build_AB(n, c);
  auto cs = but_constraints(n, std::vector<int>(n, 1), ConstraintTarget::Both);
  const int m = ab.alg.size();
  for (int pt = 0; pt < points; ++pt) {
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 32)
        return PairWitness{"", "", "could not sample a regular surface point"};
      auto point = sample_but_surface(ab.alg, ab.grp[0], ab.grp[1], rng, prime);
      if (!point) continue;
      try {
        Mat<Fp> PiD = dirac_bivector(ab.alg, cs, *point, model);
        // gradients of F_{i,j}[B] (functions of b only)
        std::vector<Mat<Fp>> Fg(m, Mat<Fp>(n, n, ring_zero(model)));
        for (int l = 0; l < m; ++l) {
          std::unordered_map<std::uint32_t, Dual<Fp>> dpt;
          for (auto& [v, x] : *point)
            dpt.emplace(v, Dual<Fp>(x, v == ab.alg.gen_vars[l]
                                           ? ring_one(model)
                                           : ring_zero(model)));
          Mat<Dual<Fp>> B(n, n, ring_zero(dmodel));
          for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
              B.at(i, j) = dpt.at(ab.alg.gen_var(ab.grp[1], i, j));
          Mat<Dual<Fp>> A = solve_F(B);
          for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) Fg[l].at(i, j) = A.at(i, j).b;
        }
        for (int u = 0; u < nu; ++u)
          for (int w = u + 1; w < nu; ++w) {
            auto [i, j] = uppers[u];
            auto [s, p] = uppers[w];
            Fp lhs = ring_zero(model);
            for (int x = 0; x < m; ++x)
              for (int y = 0; y < m; ++y) {
                if (ring_is_zero(PiD(x, y))) continue;
                lhs += Fg[x].at(i, j) * Fg[y].at(s, p) * PiD(x, y);
              }
            // on the surface a = F[B], so the target is the evaluated table
            const PolyQ& t = ab.alg.tab[ab.alg.gen_index(ab.grp[0], i, j)]
                                       [ab.alg.gen_index(ab.grp[0], s, p)];
            Fp rhs = t.is_zero() ? ring_zero(model) : t.eval(*point, model);
            if (!(lhs == rhs))
              return PairWitness{
                  "F" + std::to_string(i) + std::to_string(j),
                  "F" + std::to_string(s) + std::to_string(p),
                  "case (" + qcase_name(c) + ") sign mismatch at point " +
                      std::to_string(pt)};
          }
        break;
      } catch (const SingularGram&) {
      } catch (const SingularSystem&) {
      } catch (const DivisionByZero&) {
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Nondegeneracy probe: determinant of the linear system
//   -P_{strictly upper}[ B' ( P_{-,1/2}(A' w) - P_{+,1/2}(A'^T w^T) ) B'^{-1} ]
// in the strictly lower-triangular unknown w; equals 1 at B' = identity.
// ---------------------------------------------------------------------------
template <class F>
F nondegeneracy_probe(const Mat<F>& Aprime, const Mat<F>& Bprime) {
  const int n = Aprime.rows;
  F model = Aprime.d[0];
  auto Binv = mat_inverse(Bprime);
  if (!Binv) throw SingularSystem("B' not invertible");
  auto lows = lower_pairs(n), ups = upper_pairs(n);
  const int m = static_cast<int>(lows.size());
  Mat<F> Sys(m, m, ring_zero(model));
  for (int u = 0; u < m; ++u) {
    Mat<F> W(n, n, ring_zero(model));
    W.at(lows[u].first, lows[u].second) = ring_one(model);
    Mat<F> g = triangular_project(Aprime * W, false, Rational(1, 2)) -
               triangular_project(Aprime.transpose() * W.transpose(), true,
                                  Rational(1, 2));
    Mat<F> X = Bprime * g * *Binv;
    for (int r = 0; r < m; ++r) Sys(r, u) = -X.at(ups[r].first, ups[r].second);
  }
  return mat_det(Sys);
}

}  // namespace fb
