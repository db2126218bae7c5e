#pragma once
// Dense small matrices, multi-leg tensor-product operators (N^legs square
// matrices with leg-wise structure), the classical r-matrix, the trigonometric
// quantum R-matrix, and its affine (spectral-parameter) version.

#include <cassert>
#include <map>

#include "fb/ring.hpp"

namespace fb {

// ---------------------------------------------------------------------------
// Dense rectangular matrix over a ring K (1-based accessors `at`).
// ---------------------------------------------------------------------------
template <class K>
struct Mat {
  int rows = 0, cols = 0;
  std::vector<K> d;

  Mat() = default;
  Mat(int r, int c, K fill = K()) : rows(r), cols(c), d(r * c, fill) {}
  static Mat identity(int n, const K& model) {
    Mat m(n, n, ring_zero(model));
    for (int i = 0; i < n; ++i) m(i, i) = ring_one(model);
    return m;
  }
  K& operator()(int i, int j) { return d[i * cols + j]; }           // 0-based
  const K& operator()(int i, int j) const { return d[i * cols + j]; }
  K& at(int i, int j) { return d[(i - 1) * cols + (j - 1)]; }       // 1-based
  const K& at(int i, int j) const { return d[(i - 1) * cols + (j - 1)]; }

  friend Mat operator+(const Mat& a, const Mat& b) {
    Mat r = a;
    for (std::size_t i = 0; i < r.d.size(); ++i) r.d[i] = r.d[i] + b.d[i];
    return r;
  }
  friend Mat operator-(const Mat& a, const Mat& b) {
    Mat r = a;
    for (std::size_t i = 0; i < r.d.size(); ++i) r.d[i] = r.d[i] - b.d[i];
    return r;
  }
  friend Mat operator*(const Mat& a, const Mat& b) {
    assert(a.cols == b.rows);
    K model = a.d.empty() ? (b.d.empty() ? K() : b.d[0]) : a.d[0];
    Mat r(a.rows, b.cols, ring_zero(model));
    for (int i = 0; i < a.rows; ++i)
      for (int k = 0; k < a.cols; ++k) {
        const K& aik = a(i, k);
        if (ring_is_zero(aik)) continue;
        for (int j = 0; j < b.cols; ++j) r(i, j) = r(i, j) + aik * b(k, j);
      }
    return r;
  }
  Mat operator-() const {
    Mat r = *this;
    for (auto& x : r.d) x = -x;
    return r;
  }
  Mat transpose() const {
    Mat r(cols, rows, d.empty() ? K() : d[0]);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) r(j, i) = (*this)(i, j);
    return r;
  }
  Mat scale(const K& c) const {
    Mat r = *this;
    for (auto& x : r.d) x = x * c;
    return r;
  }
  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows == b.rows && a.cols == b.cols && a.d == b.d;
  }
  bool is_zero() const {
    for (auto& x : d)
      if (!ring_is_zero(x)) return false;
    return true;
  }
};

// Field-coefficient Gaussian elimination helpers.
template <class F>
std::optional<Mat<F>> mat_inverse(const Mat<F>& m) {
  const int n = m.rows;
  F model = m.d[0];
  Mat<F> a = m, inv = Mat<F>::identity(n, model);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (!ring_is_zero(a(r, c))) {
        piv = r;
        break;
      }
    if (piv < 0) return std::nullopt;
    if (piv != c)
      for (int j = 0; j < n; ++j) {
        std::swap(a.d[piv * n + j], a.d[c * n + j]);
        std::swap(inv.d[piv * n + j], inv.d[c * n + j]);
      }
    F ip = ring_one(model) / a(c, c);
    for (int j = 0; j < n; ++j) {
      a(c, j) = a(c, j) * ip;
      inv(c, j) = inv(c, j) * ip;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c || ring_is_zero(a(r, c))) continue;
      F f = a(r, c);
      for (int j = 0; j < n; ++j) {
        a(r, j) = a(r, j) - f * a(c, j);
        inv(r, j) = inv(r, j) - f * inv(c, j);
      }
    }
  }
  return inv;
}

template <class F>
int mat_rank(Mat<F> a) {
  int rank = 0;
  int r0 = 0;
  for (int c = 0; c < a.cols && r0 < a.rows; ++c) {
    int piv = -1;
    for (int r = r0; r < a.rows; ++r)
      if (!ring_is_zero(a(r, c))) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    if (piv != r0)
      for (int j = 0; j < a.cols; ++j) std::swap(a(piv, j), a(r0, j));
    F ip = ring_one(a(r0, c)) / a(r0, c);
    for (int j = 0; j < a.cols; ++j) a(r0, j) = a(r0, j) * ip;
    for (int r = 0; r < a.rows; ++r) {
      if (r == r0 || ring_is_zero(a(r, c))) continue;
      F f = a(r, c);
      for (int j = 0; j < a.cols; ++j) a(r, j) = a(r, j) - f * a(r0, j);
    }
    ++rank;
    ++r0;
  }
  return rank;
}

// Exact determinant by column-subset dynamic programming (Laplace expansion
// memoized on column subsets); works over any commutative ring, no division.
template <class K>
K mat_det(const Mat<K>& m) {
  const int n = m.rows;
  K model = m.d.empty() ? K() : m.d[0];
  if (n == 0) return ring_one(model);
  std::vector<std::map<std::uint64_t, K>> memo(n + 1);
  // dp over rows 0..n-1; state = subset of columns already used
  std::map<std::uint64_t, K> cur;
  cur[0] = ring_one(model);
  for (int row = 0; row < n; ++row) {
    std::map<std::uint64_t, K> nxt;
    for (auto& [mask, val] : cur) {
      for (int c = 0; c < n; ++c) {
        if (mask & (1ULL << c)) continue;
        const K& e = m(row, c);
        if (ring_is_zero(e)) continue;
        // parity: inversions added = number of used columns above c
        int above = __builtin_popcountll(mask >> (c + 1));
        K term = val * e;
        if (above & 1) term = -term;
        std::uint64_t nm = mask | (1ULL << c);
        auto it = nxt.find(nm);
        if (it == nxt.end())
          nxt.emplace(nm, std::move(term));
        else
          it->second = it->second + term;
      }
    }
    cur = std::move(nxt);
  }
  auto it = cur.find((n == 64) ? ~0ULL : ((1ULL << n) - 1));
  if (it == cur.end()) return ring_zero(model);
  return it->second;
}

// Submatrix of rows [r1..r2], cols [c1..c2] (1-based, inclusive).
template <class K>
Mat<K> mat_block(const Mat<K>& m, int r1, int r2, int c1, int c2) {
  Mat<K> b(r2 - r1 + 1, c2 - c1 + 1, m.d.empty() ? K() : m.d[0]);
  for (int i = r1; i <= r2; ++i)
    for (int j = c1; j <= c2; ++j) b.at(i - r1 + 1, j - c1 + 1) = m.at(i, j);
  return b;
}

// ---------------------------------------------------------------------------
// Multi-leg operator on (C^N)^{⊗legs}: square matrix of size N^legs with
// row-sparse storage.  Index convention for 2 legs: the component with upper
// indices (i,k) and lower (j,l) sits at row (i-1)N+(k-1), col (j-1)N+(l-1);
// further legs append base-N digits the same way.
// ---------------------------------------------------------------------------
template <class K>
struct LegMatrix {
  int legs = 0;
  int N = 0;
  int dim = 0;
  std::vector<std::map<int, K>> row;

  LegMatrix() = default;
  LegMatrix(int legs_, int N_) : legs(legs_), N(N_) {
    dim = 1;
    for (int i = 0; i < legs; ++i) dim *= N;
    row.resize(dim);
  }
  static LegMatrix identity(int legs, int N, const K& model) {
    LegMatrix m(legs, N);
    for (int i = 0; i < m.dim; ++i) m.row[i][i] = ring_one(model);
    return m;
  }
  void add(int r, int c, const K& v) {
    if (ring_is_zero(v)) return;
    auto it = row[r].find(c);
    if (it == row[r].end()) {
      row[r].emplace(c, v);
    } else {
      it->second = it->second + v;
      if (ring_is_zero(it->second)) row[r].erase(it);
    }
  }
  K get(int r, int c) const {
    auto it = row[r].find(c);
    if (it != row[r].end()) return it->second;
    return K();  // only used with value-semantics rings where K() is zero-like
  }
  bool has(int r, int c) const { return row[r].count(c) != 0; }

  friend LegMatrix operator+(const LegMatrix& a, const LegMatrix& b) {
    LegMatrix r = a;
    for (int i = 0; i < b.dim; ++i)
      for (auto& [c, v] : b.row[i]) r.add(i, c, v);
    return r;
  }
  friend LegMatrix operator-(const LegMatrix& a, const LegMatrix& b) {
    LegMatrix r = a;
    for (int i = 0; i < b.dim; ++i)
      for (auto& [c, v] : b.row[i]) r.add(i, c, -v);
    return r;
  }
  LegMatrix operator-() const {
    LegMatrix r(legs, N);
    for (int i = 0; i < dim; ++i)
      for (auto& [c, v] : row[i]) r.row[i][c] = -v;
    return r;
  }
  friend LegMatrix operator*(const LegMatrix& a, const LegMatrix& b) {
    assert(a.dim == b.dim);
    LegMatrix r(a.legs, a.N);
    for (int i = 0; i < a.dim; ++i)
      for (auto& [k, av] : a.row[i])
        for (auto& [j, bv] : b.row[k]) r.add(i, j, av * bv);
    return r;
  }
  LegMatrix scale(const K& c) const {
    LegMatrix r(legs, N);
    if (ring_is_zero(c)) return r;
    for (int i = 0; i < dim; ++i)
      for (auto& [j, v] : row[i]) {
        K nv = v * c;
        if (!ring_is_zero(nv)) r.row[i][j] = nv;
      }
    return r;
  }
  bool is_zero() const {
    for (auto& m : row)
      if (!m.empty()) return false;
    return true;
  }
  friend bool operator==(const LegMatrix& a, const LegMatrix& b) {
    return (a - b).is_zero();
  }

  // digit helpers: row index -> per-leg indices (0-based digits)
  std::vector<int> digits(int idx) const {
    std::vector<int> d(legs);
    for (int l = legs - 1; l >= 0; --l) {
      d[l] = idx % N;
      idx /= N;
    }
    return d;
  }
  int undigits(const std::vector<int>& d) const {
    int idx = 0;
    for (int l = 0; l < legs; ++l) idx = idx * N + d[l];
    return idx;
  }

  // transpose on one leg (1-based leg index)
  LegMatrix partial_transpose(int leg) const {
    LegMatrix r(legs, N);
    for (int i = 0; i < dim; ++i)
      for (auto& [j, v] : row[i]) {
        auto di = digits(i), dj = digits(j);
        std::swap(di[leg - 1], dj[leg - 1]);
        r.add(undigits(di), undigits(dj), v);
      }
    return r;
  }
  LegMatrix transpose() const {
    LegMatrix r(legs, N);
    for (int i = 0; i < dim; ++i)
      for (auto& [j, v] : row[i]) r.add(j, i, v);
    return r;
  }
};

// Embed an N x N matrix into leg `leg` (1-based) of a `legs`-leg space.
template <class K>
LegMatrix<K> leg_embed(const Mat<K>& m, int legs, int leg, const K& model) {
  const int N = m.rows;
  LegMatrix<K> r(legs, N);
  // iterate over all (row, col) pairs that differ only in the chosen leg
  std::vector<int> d(legs, 0);
  for (int idx = 0; idx < r.dim; ++idx) {
    auto di = r.digits(idx);
    for (int c = 0; c < N; ++c) {
      const K& v = m(di[leg - 1], c);
      if (ring_is_zero(v)) continue;
      auto dj = di;
      dj[leg - 1] = c;
      r.add(idx, r.undigits(dj), v);
    }
  }
  (void)model;
  return r;
}

// Embed a 2-leg operator into legs (la, lb) of a `legs`-leg space,
// identity on the rest.
template <class K>
LegMatrix<K> leg_embed_pair(const LegMatrix<K>& t, int legs, int la, int lb) {
  const int N = t.N;
  LegMatrix<K> r(legs, N);
  for (int i2 = 0; i2 < t.dim; ++i2)
    for (auto& [j2, v] : t.row[i2]) {
      int ia = i2 / N, ib = i2 % N;
      int ja = j2 / N, jb = j2 % N;
      // enumerate identity digits on other legs
      int rest_dim = 1;
      for (int l = 0; l < legs - 2; ++l) rest_dim *= N;
      for (int rest = 0; rest < rest_dim; ++rest) {
        std::vector<int> di(legs), dj(legs);
        int rr = rest;
        for (int l = legs - 1; l >= 0; --l) {
          if (l + 1 == la || l + 1 == lb) continue;
          di[l] = dj[l] = rr % N;
          rr /= N;
        }
        di[la - 1] = ia;
        dj[la - 1] = ja;
        di[lb - 1] = ib;
        dj[lb - 1] = jb;
        r.add(r.undigits(di), r.undigits(dj), v);
      }
    }
  return r;
}

// theta(x): 1 for x>0, 1/2 for x=0, 0 for x<0.
inline Rational theta_half(int x) {
  if (x > 0) return Rational(1);
  if (x == 0) return Rational(1, 2);
  return Rational(0);
}

// Permutation operator P = sum_{i,j} E_ij (x) E_ji.
template <class K>
LegMatrix<K> permutation_p(int N, const K& model) {
  LegMatrix<K> r(2, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      r.add(i * N + j, j * N + i, ring_one(model));
  return r;
}

// Classical trigonometric r-matrix: r = 2 sum_{i,j} theta(i-j) E_ij (x) E_ji.
template <class K>
LegMatrix<K> classical_r(int N, const K& model) {
  LegMatrix<K> r(2, N);
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j) {
      Rational c = Rational(2) * theta_half(i - j);
      if (c == 0) continue;
      // E_ij (x) E_ji: row (i,j) digits -> col (j,i)
      r.add((i - 1) * N + (j - 1), (j - 1) * N + (i - 1), coerce(c, model));
    }
  return r;
}

// Triangular projection of an N x N matrix: keep strictly upper (or lower)
// part plus `diag_weight` times the diagonal.
template <class K>
Mat<K> triangular_project(const Mat<K>& m, bool upper, const Rational& diag_weight) {
  K model = m.d[0];
  Mat<K> r(m.rows, m.cols, ring_zero(model));
  for (int i = 1; i <= m.rows; ++i)
    for (int j = 1; j <= m.cols; ++j) {
      if (i == j) {
        r.at(i, j) = m.at(i, j) * coerce(diag_weight, model);
      } else if ((upper && i < j) || (!upper && i > j)) {
        r.at(i, j) = m.at(i, j);
      }
    }
  return r;
}

// ---------------------------------------------------------------------------
// Quantum trigonometric R-matrix over Laurent polynomials in s (q = s^2):
//   R(q) = E(x)E + sum_{k,l} E_kl (x) E_lk [ (q - q^{-1}) theta(l-k)
//                                           + (s - s^{-1})^2/2 delta_kl ].
// Diagonal entries simplify to q.  Pass sign=-1 for R(q^{-1}).
// ---------------------------------------------------------------------------
inline std::uint32_t quantum_s_var() { return var_id("s"); }

inline LegMatrix<Poly<Rational>> quantum_R(int N, int sign = +1) {
  using P = Poly<Rational>;
  const std::uint32_t s = quantum_s_var();
  auto sp = [&](int e) { return P::variable(s, e); };
  P q = sp(2 * sign), qi = sp(-2 * sign);
  P qmqi = q - qi;
  // (s^{±1} - s^{∓1})^2/2 is sign-independent
  P diag_extra = (sp(1) - sp(-1)) * (sp(1) - sp(-1)).scale(Rational(1, 2));
  LegMatrix<P> R(2, N);
  P one = P::constant(Rational(1));
  // E (x) E
  for (int i = 0; i < N * N; ++i) R.add(i, i, one);
  for (int k = 1; k <= N; ++k)
    for (int l = 1; l <= N; ++l) {
      P coef = qmqi.scale(theta_half(l - k));
      if (k == l) coef = coef + diag_extra;
      if (coef.is_zero()) continue;
      // E_kl (x) E_lk: row digits (k,l), col digits (l,k)
      R.add((k - 1) * N + (l - 1), (l - 1) * N + (k - 1), coef);
    }
  return R;
}

// ---------------------------------------------------------------------------
// Affine R-matrix with spectral parameters; entries are Laurent polynomials
// over a common scalar denominator:
//   R(la, mu; q) = (la - mu)/(q^{-1}la - q mu) sum_{i != j} E_ii (x) E_jj
//                + sum_i E_ii (x) E_ii
//                + (q^{-1} - q) la/(q^{-1}la - q mu) sum_{i<j} E_ij (x) E_ji
//                + (q^{-1} - q) mu/(q^{-1}la - q mu) sum_{i>j} E_ij (x) E_ji.
// ---------------------------------------------------------------------------
struct ScaledLeg {
  LegMatrix<Poly<Rational>> M;
  Poly<Rational> den;  // scalar denominator: the actual operator is M / den

  friend ScaledLeg operator*(const ScaledLeg& a, const ScaledLeg& b) {
    return {a.M * b.M, a.den * b.den};
  }
  friend ScaledLeg operator+(const ScaledLeg& a, const ScaledLeg& b) {
    return {a.M.scale(b.den) + b.M.scale(a.den), a.den * b.den};
  }
  friend ScaledLeg operator-(const ScaledLeg& a, const ScaledLeg& b) {
    return {a.M.scale(b.den) - b.M.scale(a.den), a.den * b.den};
  }
  ScaledLeg partial_transpose(int leg) const {
    return {M.partial_transpose(leg), den};
  }
  ScaledLeg embed_pair(int legs, int la, int lb) const {
    return {leg_embed_pair(M, legs, la, lb), den};
  }
  friend bool operator==(const ScaledLeg& a, const ScaledLeg& b) {
    return (a.M.scale(b.den) - b.M.scale(a.den)).is_zero();
  }
  static ScaledLeg identity(int legs, int N) {
    using P = Poly<Rational>;
    return {LegMatrix<P>::identity(legs, N, P::constant(Rational(1))),
            P::constant(Rational(1))};
  }
};

// la, mu are Laurent monomial arguments (e.g. variable("lambda") or its
// inverse); qsign = +1 for q, -1 for q^{-1}, with q = s^2 as above.
inline ScaledLeg affine_R(int N, const Poly<Rational>& la,
                          const Poly<Rational>& mu, int qsign = +1) {
  using P = Poly<Rational>;
  const std::uint32_t s = quantum_s_var();
  P q = P::variable(s, 2 * qsign), qi = P::variable(s, -2 * qsign);
  P den = qi * la - q * mu;
  LegMatrix<P> M(2, N);
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j) {
      if (i == j) {
        // E_ii (x) E_ii with coefficient 1 (times den)
        int d = (i - 1) * N + (i - 1);
        M.add(d, d, den);
      } else {
        int d = (i - 1) * N + (j - 1);
        M.add(d, d, la - mu);  // E_ii (x) E_jj diagonal entry
      }
    }
  P qiq = qi - q;
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j) {
      if (i == j) continue;
      P coef = qiq * (i < j ? la : mu);
      // E_ij (x) E_ji
      M.add((i - 1) * N + (j - 1), (j - 1) * N + (i - 1), coef);
    }
  return {M, den};
}

}  // namespace fb
