#pragma once
// Quantum layer: exact R-matrix identity catalog over Laurent rings, a
// bounded noncommutative exchange-rewriting engine for the N=2 quantum
// algebra, and semiclassical expansion back to the classical brackets.

#include <functional>
#include <map>
#include <set>

#include "fb/poisson.hpp"

namespace fb {

struct NonInvertibleExchange : std::runtime_error {
  explicit NonInvertibleExchange(const std::string& w)
      : std::runtime_error("exchange coefficient block is singular: " + w) {}
};
struct DegreeCapExceeded : std::runtime_error {
  explicit DegreeCapExceeded(const std::string& w)
      : std::runtime_error("word degree exceeds the cap: " + w) {}
};
struct NonConfluent : std::runtime_error {
  std::string witness;
  explicit NonConfluent(const std::string& w)
      : std::runtime_error("rewriting is not confluent at: " + w), witness(w) {}
};

// ---------------------------------------------------------------------------
// Identity catalog.
// ---------------------------------------------------------------------------
struct IdentityOutcome {
  std::string id;
  bool pass = false;           // does the identity hold as stated
  bool expected_pass = true;   // catalog expectation (documented discrepancies)
  std::string witness;
  bool ok() const { return pass == expected_pass; }
};

namespace qdetail {

inline PolyQ sq(int e) { return PolyQ::variable(quantum_s_var(), e); }

inline LegMatrix<PolyQ> swap_legs(const LegMatrix<PolyQ>& m) {
  auto P = permutation_p(m.N, PolyQ::constant(Rational(1)));
  return P * m * P;
}

template <class K>
std::string leg_diff(const LegMatrix<K>& a, const LegMatrix<K>& b) {
  for (int r = 0; r < a.dim; ++r)
    for (int c = 0; c < a.dim; ++c) {
      if (a.get(r, c) == b.get(r, c)) continue;
      return "entry (" + std::to_string(r) + "," + std::to_string(c) +
             "): " + to_string(a.get(r, c)) + " vs " + to_string(b.get(r, c));
    }
  return "";
}

inline std::string scaled_diff(const ScaledLeg& a, const ScaledLeg& b) {
  return leg_diff(a.M.scale(b.den), b.M.scale(a.den));
}

}  // namespace qdetail

struct CatalogEntry {
  std::string id;
  int legs;
  bool affine;
  bool expected_pass;
};

inline const std::vector<CatalogEntry>& identity_catalog() {
  static const std::vector<CatalogEntry> k = {
      {"R-inverse", 2, false, true},    {"R-comm-t1", 2, false, true},
      {"R-comm-t2", 2, false, true},    {"R-perm", 2, false, false},
      {"R-perm-minus", 2, false, true}, {"R-perm-P", 2, false, false},
      {"R-perm-t2", 2, false, false},   {"R-perm-t2-minus", 2, false, true},
      {"R-YB", 3, false, true},         {"YB-new", 3, false, true},
      {"RR-int", 3, false, true},       {"YB-another", 3, false, true},
      {"R-MN-inverse", 2, true, true},  {"R-1", 2, true, true},
      {"R-2", 2, true, true},           {"R-3", 2, true, true},
      {"YB-MN", 3, true, true},         {"YB-new-mn", 3, true, true},
  };
  return k;
}

inline IdentityOutcome check_identity(const std::string& id, int N) {
  using namespace qdetail;
  using L = LegMatrix<PolyQ>;
  IdentityOutcome out;
  out.id = id;
  for (auto& e : identity_catalog())
    if (e.id == id) out.expected_pass = e.expected_pass;

  auto report = [&](const L& lhs, const L& rhs) {
    out.pass = (lhs - rhs).is_zero();
    if (!out.pass) out.witness = leg_diff(lhs, rhs);
  };
  auto report_s = [&](const ScaledLeg& lhs, const ScaledLeg& rhs) {
    out.pass = (lhs == rhs);
    if (!out.pass) out.witness = scaled_diff(lhs, rhs);
  };

  L R = quantum_R(N, +1), Ri = quantum_R(N, -1);
  PolyQ one = PolyQ::constant(Rational(1));
  PolyQ qmqi = sq(2) - sq(-2);

  if (id == "R-inverse") {
    report(R * Ri, L::identity(2, N, one));
  } else if (id == "R-comm-t1") {
    L Rt = R.partial_transpose(1);
    report(R * Rt, Rt * R);
  } else if (id == "R-comm-t2") {
    L Rt = R.partial_transpose(2);
    report(R * Rt, Rt * R);
  } else if (id == "R-perm") {
    report(R + swap_legs(Ri), permutation_p(N, one).scale(qmqi));
  } else if (id == "R-perm-minus") {
    report(R - swap_legs(Ri), permutation_p(N, one).scale(qmqi));
  } else if (id == "R-perm-P") {
    report(R + swap_legs(Ri), permutation_p(N, one));
  } else if (id == "R-perm-t2") {
    L Pt = permutation_p(N, one).partial_transpose(2);
    report(Ri.partial_transpose(2) + swap_legs(R).partial_transpose(2),
           Pt.scale(qmqi));
  } else if (id == "R-perm-t2-minus") {
    L Pt = permutation_p(N, one).partial_transpose(2);
    report(swap_legs(R).partial_transpose(2) - Ri.partial_transpose(2),
           Pt.scale(qmqi));
  } else if (id == "R-YB") {
    L R12 = leg_embed_pair(R, 3, 1, 2), R13 = leg_embed_pair(R, 3, 1, 3),
      R23 = leg_embed_pair(R, 3, 2, 3);
    report(R12 * R13 * R23, R23 * R13 * R12);
  } else if (id == "YB-new") {
    L R23 = leg_embed_pair(R, 3, 2, 3);
    L R13t = leg_embed_pair(Ri, 3, 1, 3).partial_transpose(1);
    L R12t = leg_embed_pair(Ri, 3, 1, 2).partial_transpose(1);
    report(R23 * R13t * R12t, R12t * R13t * R23);
  } else if (id == "RR-int") {
    L R23t = leg_embed_pair(Ri, 3, 2, 3).partial_transpose(3);
    L R12t = leg_embed_pair(Ri, 3, 1, 2).partial_transpose(2);
    L R13 = leg_embed_pair(R, 3, 1, 3);
    report(R23t * R12t * R13, R13 * R12t * R23t);
  } else if (id == "YB-another") {
    L R23t = leg_embed_pair(R, 3, 2, 3).partial_transpose(2);
    L R12t = leg_embed_pair(Ri, 3, 1, 2).partial_transpose(2);
    L R13 = leg_embed_pair(R, 3, 1, 3);
    report(R23t * R12t * R13, R13 * R12t * R23t);
  } else {
    // affine family
    auto v = [](const char* n, int e) { return PolyQ::variable(var_id(n), e); };
    PolyQ la = v("lambda", 1), lai = v("lambda", -1);
    PolyQ mu = v("mu", 1), mui = v("mu", -1);
    PolyQ nu = v("nu", 1), nui = v("nu", -1);
    PolyQ rho = v("rho", 1);
    if (id == "R-MN-inverse") {
      report_s(affine_R(N, la, mu, +1) * affine_R(N, la, mu, -1),
               ScaledLeg::identity(2, N));
    } else if (id == "R-1") {
      report_s(affine_R(N, la, mu, +1),
               affine_R(N, lai, mui, -1).partial_transpose(1).partial_transpose(2));
    } else if (id == "R-2") {
      report_s(affine_R(N, la, mu, +1), affine_R(N, mui, lai, +1));
    } else if (id == "R-3") {
      ScaledLeg Rt = affine_R(N, rho, nu, -1).partial_transpose(1);
      report_s(affine_R(N, la, mu, +1) * Rt * affine_R(N, la, mu, -1), Rt);
    } else if (id == "YB-MN") {
      ScaledLeg R12 = affine_R(N, la, mu, +1).embed_pair(3, 1, 2);
      ScaledLeg R13 = affine_R(N, la, rho, +1).embed_pair(3, 1, 3);
      ScaledLeg R23 = affine_R(N, mu, rho, +1).embed_pair(3, 2, 3);
      report_s(R12 * R13 * R23, R23 * R13 * R12);
    } else if (id == "YB-new-mn") {
      ScaledLeg R23 = affine_R(N, mu, nu, +1).embed_pair(3, 2, 3);
      ScaledLeg R12t =
          affine_R(N, la, mui, -1).embed_pair(3, 1, 2).partial_transpose(2);
      ScaledLeg R13t =
          affine_R(N, la, nui, -1).embed_pair(3, 1, 3).partial_transpose(3);
      report_s(R23 * R12t * R13t, R13t * R12t * R23);
    } else {
      throw std::invalid_argument("unknown identity id: " + id);
    }
  }
  return out;
}

inline std::vector<IdentityOutcome> identity_suite(
    int N, const std::vector<std::string>& ids = {}) {
  std::vector<IdentityOutcome> out;
  for (auto& e : identity_catalog()) {
    if (!ids.empty() &&
        std::find(ids.begin(), ids.end(), e.id) == ids.end())
      continue;
    if (e.legs == 3 && N > 3) continue;
    out.push_back(check_identity(e.id, N));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Noncommutative words and matrices over Laurent scalars in s (q = s^2).
// Symbols encode (class, i, j); normal order puts all b's left of all a's,
// ascending by (i,j) within each class.
// ---------------------------------------------------------------------------
using Sym = std::uint16_t;
using Word = std::vector<Sym>;
using QC = RatFun<Rational>;
using NCPoly = std::map<Word, QC>;

inline Sym sym_make(bool bclass, int i, int j) {
  return static_cast<Sym>((bclass ? 256 : 0) | ((i - 1) << 4) | (j - 1));
}
inline bool sym_is_b(Sym s) { return (s & 256) != 0; }
inline int sym_i(Sym s) { return ((s >> 4) & 15) + 1; }
inline int sym_j(Sym s) { return (s & 15) + 1; }
inline std::string sym_name(Sym s) {
  return std::string(sym_is_b(s) ? "b" : "a") + std::to_string(sym_i(s)) +
         std::to_string(sym_j(s));
}
inline std::string word_name(const Word& w) {
  std::string r;
  for (Sym s : w) r += (r.empty() ? "" : ".") + sym_name(s);
  return r.empty() ? "1" : r;
}
// adjacent pair (x, y) violates the normal order
inline bool out_of_order(Sym x, Sym y) {
  if (sym_is_b(x) != sym_is_b(y)) return !sym_is_b(x);  // a before b
  return x > y;
}

inline void nc_add(NCPoly& p, const Word& w, const QC& c) {
  if (c.is_zero()) return;
  auto it = p.find(w);
  if (it == p.end()) {
    p.emplace(w, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) p.erase(it);
  }
}

struct NCMat {
  int dim = 0;
  std::vector<NCPoly> e;
  NCMat() = default;
  explicit NCMat(int d) : dim(d), e(d * d) {}
  NCPoly& at(int r, int c) { return e[r * dim + c]; }
  const NCPoly& at(int r, int c) const { return e[r * dim + c]; }
  friend NCMat operator*(const NCMat& a, const NCMat& b) {
    NCMat r(a.dim);
    for (int i = 0; i < a.dim; ++i)
      for (int k = 0; k < a.dim; ++k) {
        if (a.at(i, k).empty()) continue;
        for (int j = 0; j < a.dim; ++j) {
          if (b.at(k, j).empty()) continue;
          for (auto& [wa, ca] : a.at(i, k))
            for (auto& [wb, cb] : b.at(k, j)) {
              Word w = wa;
              w.insert(w.end(), wb.begin(), wb.end());
              nc_add(r.at(i, j), w, ca * cb);
            }
        }
      }
    return r;
  }
  friend NCMat operator-(const NCMat& a, const NCMat& b) {
    NCMat r = a;
    for (int i = 0; i < a.dim * a.dim; ++i)
      for (auto& [w, c] : b.e[i]) nc_add(r.e[i], w, -c);
    return r;
  }
};

// scalar (operator-free) two-leg R as an NC matrix
inline NCMat nc_scalar(const LegMatrix<PolyQ>& L) {
  NCMat r(L.dim);
  for (int i = 0; i < L.dim; ++i)
    for (auto& [j, v] : L.row[i]) nc_add(r.at(i, j), Word{}, QC(v));
  return r;
}

// leg embedding of the generator matrix X (a- or b-class) on leg 1 or 2
inline NCMat nc_leg_matrix(int N, bool bclass, int leg) {
  NCMat r(N * N);
  for (int i = 1; i <= N; ++i)
    for (int k = 1; k <= N; ++k)
      for (int j = 1; j <= N; ++j)
        for (int l = 1; l <= N; ++l) {
          int row = (i - 1) * N + (k - 1), col = (j - 1) * N + (l - 1);
          if (leg == 1 && k == l)
            nc_add(r.at(row, col), Word{sym_make(bclass, i, j)},
                   QC::constant(Rational(1)));
          if (leg == 2 && i == j)
            nc_add(r.at(row, col), Word{sym_make(bclass, k, l)},
                   QC::constant(Rational(1)));
        }
  return r;
}

// N x N matrix with noncommutative entries (natural quantum order)
struct NCSmall {
  int n = 0;
  std::vector<NCPoly> e;
  explicit NCSmall(int n_) : n(n_), e(n_ * n_) {}
  NCPoly& at(int i, int j) { return e[(i - 1) * n + (j - 1)]; }
  const NCPoly& at(int i, int j) const { return e[(i - 1) * n + (j - 1)]; }
  friend NCSmall operator*(const NCSmall& a, const NCSmall& b) {
    NCSmall r(a.n);
    for (int i = 1; i <= a.n; ++i)
      for (int j = 1; j <= a.n; ++j)
        for (int k = 1; k <= a.n; ++k)
          for (auto& [wa, ca] : a.at(i, k))
            for (auto& [wb, cb] : b.at(k, j)) {
              Word w = wa;
              w.insert(w.end(), wb.begin(), wb.end());
              nc_add(r.at(i, j), w, ca * cb);
            }
    return r;
  }
};

inline NCSmall nc_generators(int N, bool bclass, bool transposed = false) {
  NCSmall r(N);
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N; ++j)
      nc_add(transposed ? r.at(j, i) : r.at(i, j), Word{sym_make(bclass, i, j)},
             QC::constant(Rational(1)));
  return r;
}

// embed an NCSmall on one leg of the two-leg space
inline NCMat nc_embed(const NCSmall& m, int leg) {
  const int N = m.n;
  NCMat r(N * N);
  for (int i = 1; i <= N; ++i)
    for (int k = 1; k <= N; ++k)
      for (int j = 1; j <= N; ++j)
        for (int l = 1; l <= N; ++l) {
          int row = (i - 1) * N + (k - 1), col = (j - 1) * N + (l - 1);
          const NCPoly* src = nullptr;
          if (leg == 1 && k == l) src = &m.at(i, j);
          if (leg == 2 && i == j) src = &m.at(k, l);
          if (!src) continue;
          for (auto& [w, c] : *src) nc_add(r.at(row, col), w, c);
        }
  return r;
}

// ---------------------------------------------------------------------------
// The three generating exchange relations as (lhs, rhs) NC matrices.
// ---------------------------------------------------------------------------
enum class QRel { AA, BB, AB };

inline std::pair<NCMat, NCMat> quantum_relation(QRel rel, int N) {
  NCMat R = nc_scalar(quantum_R(N, +1));
  switch (rel) {
    case QRel::AA: {
      NCMat Rt1 = nc_scalar(quantum_R(N, +1).partial_transpose(1));
      NCMat A1 = nc_leg_matrix(N, false, 1), A2 = nc_leg_matrix(N, false, 2);
      return {R * A1 * Rt1 * A2, A2 * Rt1 * A1 * R};
    }
    case QRel::BB: {
      NCMat B1 = nc_leg_matrix(N, true, 1), B2 = nc_leg_matrix(N, true, 2);
      return {R * B1 * B2, B2 * B1 * R};
    }
    case QRel::AB:
    default: {
      NCMat Rt2i = nc_scalar(quantum_R(N, -1).partial_transpose(2));
      NCMat A2 = nc_leg_matrix(N, false, 2);
      NCMat B1 = nc_leg_matrix(N, true, 1);
      return {A2 * B1 * R, B1 * Rt2i * A2};
    }
  }
}

// ---------------------------------------------------------------------------
// Exchange rules: rewrite each out-of-order two-letter word into a Laurent
// combination of normal-ordered words, solved entry-wise from the relations.
// ---------------------------------------------------------------------------
struct ExchangeRules {
  std::map<std::pair<Sym, Sym>, NCPoly> rule;
};

inline void solve_exchange_pattern(QRel rel, int N, ExchangeRules& out) {
  auto [lhs, rhs] = quantum_relation(rel, N);
  NCMat diff = lhs - rhs;
  std::vector<NCPoly> eqs;
  for (auto& p : diff.e)
    if (!p.empty()) eqs.push_back(p);
  // column split: unknowns are out-of-order words
  std::set<Word> unknowns, knowns;
  for (auto& eq : eqs)
    for (auto& [w, c] : eq)
      (out_of_order(w[0], w[1]) ? unknowns : knowns).insert(w);
  // Gaussian elimination pivoting on the unknown columns; rules are read off
  // only after every unknown has been eliminated from every row.
  std::map<Word, std::size_t> pivot_row;
  std::vector<bool> used(eqs.size(), false);
  for (const Word& u : unknowns) {
    std::size_t piv_idx = eqs.size();
    for (std::size_t r = 0; r < eqs.size(); ++r)
      if (!used[r] && eqs[r].count(u)) {
        piv_idx = r;
        break;
      }
    if (piv_idx == eqs.size())
      throw NonInvertibleExchange("no pivot equation for " + word_name(u));
    used[piv_idx] = true;
    pivot_row[u] = piv_idx;
    QC piv = eqs[piv_idx].at(u);
    NCPoly norm;
    for (auto& [w, c] : eqs[piv_idx]) norm[w] = c / piv;
    eqs[piv_idx] = norm;
    for (std::size_t r = 0; r < eqs.size(); ++r) {
      if (r == piv_idx) continue;
      auto jt = eqs[r].find(u);
      if (jt == eqs[r].end()) continue;
      QC f = jt->second;
      NCPoly next = eqs[r];
      for (auto& [w, c] : norm) nc_add(next, w, -(f * c));
      eqs[r] = std::move(next);
    }
  }
  for (auto& [u, r] : pivot_row) {
    NCPoly rule;
    for (auto& [w, c] : eqs[r])
      if (!(w == u)) nc_add(rule, w, -c);
    for (auto& [w, c] : rule)
      if (out_of_order(w[0], w[1]))
        throw NonInvertibleExchange("rule for " + word_name(u) +
                                    " is not normal-ordered at " + word_name(w));
    out.rule[{u[0], u[1]}] = std::move(rule);
  }
  // leftover equations must carry no relation among ordered words
  for (std::size_t r = 0; r < eqs.size(); ++r)
    if (!used[r] && !eqs[r].empty())
      throw NonInvertibleExchange("residual relation at " +
                                  word_name(eqs[r].begin()->first));
}

inline ExchangeRules exchange_rules_from_relations(int N = 2) {
  if (N != 2) throw std::invalid_argument("exchange rules are built at N=2");
  ExchangeRules r;
  solve_exchange_pattern(QRel::BB, N, r);
  solve_exchange_pattern(QRel::AA, N, r);
  solve_exchange_pattern(QRel::AB, N, r);
  return r;
}

// ---------------------------------------------------------------------------
// Normal-form rewriting with memoized single-word reduction.
// ---------------------------------------------------------------------------
class Rewriter {
 public:
  Rewriter(const ExchangeRules& rules, int degree_cap, bool rightmost = false)
      : rules_(rules), cap_(degree_cap), rightmost_(rightmost) {}

  NCPoly word_nf(const Word& w) {
    if (static_cast<int>(w.size()) > cap_) throw DegreeCapExceeded(word_name(w));
    auto it = memo_.find(w);
    if (it != memo_.end()) return it->second;
    if (busy_.count(w)) throw NonConfluent(word_name(w));
    int pos = -1;
    const int last = static_cast<int>(w.size()) - 1;
    if (rightmost_) {
      for (int p = last - 1; p >= 0; --p)
        if (out_of_order(w[p], w[p + 1])) {
          pos = p;
          break;
        }
    } else {
      for (int p = 0; p < last; ++p)
        if (out_of_order(w[p], w[p + 1])) {
          pos = p;
          break;
        }
    }
    if (pos < 0) {
      NCPoly r;
      r.emplace(w, QC::constant(Rational(1)));
      memo_.emplace(w, r);
      return r;
    }
    busy_.insert(w);
    auto rit = rules_.rule.find({w[pos], w[pos + 1]});
    if (rit == rules_.rule.end())
      throw NonConfluent("no rule for " + word_name({w[pos], w[pos + 1]}));
    NCPoly acc;
    for (auto& [rw, rc] : rit->second) {
      Word nw(w.begin(), w.begin() + pos);
      nw.insert(nw.end(), rw.begin(), rw.end());
      nw.insert(nw.end(), w.begin() + pos + 2, w.end());
      for (auto& [fw, fc] : word_nf(nw)) nc_add(acc, fw, rc * fc);
    }
    busy_.erase(w);
    memo_.emplace(w, acc);
    return acc;
  }

  NCPoly reduce(const NCPoly& p) {
    NCPoly r;
    for (auto& [w, c] : p)
      for (auto& [fw, fc] : word_nf(w)) nc_add(r, fw, c * fc);
    return r;
  }

 private:
  const ExchangeRules& rules_;
  int cap_;
  bool rightmost_;
  std::map<Word, NCPoly> memo_;
  std::set<Word> busy_;
};

inline NCPoly nc_normal_form(const NCPoly& p, const ExchangeRules& rules,
                             int degree_cap = 4) {
  Rewriter rw(rules, degree_cap);
  return rw.reduce(p);
}

inline bool nc_equal(const NCPoly& a, const NCPoly& b) {
  NCPoly d = a;
  for (auto& [w, c] : b) nc_add(d, w, -c);
  return d.empty();
}

// empirical confluence probe on all words up to the given length
inline std::optional<std::string> nc_confluence_check(const ExchangeRules& rules,
                                                      int max_len = 3) {
  std::vector<Sym> syms;
  for (int cls = 0; cls < 2; ++cls)
    for (int i = 1; i <= 2; ++i)
      for (int j = 1; j <= 2; ++j) syms.push_back(sym_make(cls == 1, i, j));
  std::vector<Word> words = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (auto& w : words)
      for (Sym s : syms) {
        Word nw = w;
        nw.push_back(s);
        next.push_back(nw);
      }
    words = std::move(next);
    Rewriter left(rules, max_len), right(rules, max_len, true);
    for (auto& w : words)
      if (!nc_equal(left.word_nf(w), right.word_nf(w))) return word_name(w);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Quantum automorphism: BAB^T satisfies the a-exchange relation (N=2).
// ---------------------------------------------------------------------------
struct NCReport {
  bool pass = false;
  std::string witness;
};

inline NCReport quantum_automorphism_check(const ExchangeRules& rules,
                                           int degree_cap = 6,
                                           bool negative_control = false) {
  const int N = 2;
  NCSmall A = nc_generators(N, false), B = nc_generators(N, true),
          BT = nc_generators(N, true, true);
  NCSmall AM = B * A * BT;
  NCMat R = nc_scalar(quantum_R(N, +1));
  NCMat Rt1 =
      nc_scalar(quantum_R(N, negative_control ? -1 : +1).partial_transpose(1));
  NCMat M1 = nc_embed(AM, 1), M2 = nc_embed(AM, 2);
  NCMat lhs = R * M1 * Rt1 * M2, rhs = M2 * Rt1 * M1 * R;
  NCMat diff = lhs - rhs;
  Rewriter rw(rules, degree_cap);
  for (int r = 0; r < diff.dim; ++r)
    for (int c = 0; c < diff.dim; ++c) {
      NCPoly nf = rw.reduce(diff.at(r, c));
      if (!nf.empty())
        return {false, "entry (" + std::to_string(r) + "," + std::to_string(c) +
                           "): residue at " + word_name(nf.begin()->first)};
    }
  return {true, ""};
}

// ---------------------------------------------------------------------------
// Semiclassical expansion: q = e^hbar (s = e^{hbar/2}) truncated at hbar^3,
// O(hbar) part of each relation compared against a classical bracket table.
// ---------------------------------------------------------------------------
struct Ser {
  Rational c0, c1, c2;  // c0 + c1*hbar + c2*hbar^2 (hbar^3 = 0)
  Ser() : c0(0), c1(0), c2(0) {}
  Ser(Rational a, Rational b, Rational c)
      : c0(std::move(a)), c1(std::move(b)), c2(std::move(c)) {}
  friend Ser operator+(const Ser& x, const Ser& y) {
    return {x.c0 + y.c0, x.c1 + y.c1, x.c2 + y.c2};
  }
  friend Ser operator-(const Ser& x, const Ser& y) {
    return {x.c0 - y.c0, x.c1 - y.c1, x.c2 - y.c2};
  }
  friend Ser operator*(const Ser& x, const Ser& y) {
    return {x.c0 * y.c0, x.c0 * y.c1 + x.c1 * y.c0,
            x.c0 * y.c2 + x.c1 * y.c1 + x.c2 * y.c0};
  }
  Ser inv() const {
    if (c0 == 0) throw DivisionByZero("series with vanishing constant term");
    Rational i0 = 1 / c0;
    Rational i1 = -c1 * i0 * i0;
    Rational i2 = (c1 * c1 * i0 - c2) * i0 * i0;
    return {i0, i1, i2};
  }
  friend Ser operator/(const Ser& x, const Ser& y) { return x * y.inv(); }
  Ser operator-() const { return {-c0, -c1, -c2}; }
  friend bool operator==(const Ser& x, const Ser& y) {
    return x.c0 == y.c0 && x.c1 == y.c1 && x.c2 == y.c2;
  }
  bool is_zero() const { return c0 == 0 && c1 == 0 && c2 == 0; }
};
inline Ser ring_zero(const Ser&) { return Ser(); }
inline Ser ring_one(const Ser&) { return Ser(Rational(1), Rational(0), Rational(0)); }
inline bool ring_is_zero(const Ser& x) { return x.is_zero(); }
inline Ser coerce(const Rational& x, const Ser&) {
  return Ser(x, Rational(0), Rational(0));
}

struct SemiOutcome {
  bool h0_ok = true;   // O(1) part is a trivial identity
  bool match = true;   // O(hbar) part equals the classical table
  std::string witness;
};

inline SemiOutcome semiclassical_expand(
    QRel rel, int N,
    const std::function<PolyQ(Sym, Sym)>& bracket) {
  auto [lhs, rhs] = quantum_relation(rel, N);
  NCMat diff = lhs - rhs;
  Ser model;
  // s = exp(hbar/2)
  std::unordered_map<std::uint32_t, Ser> pt{
      {quantum_s_var(), Ser(Rational(1), Rational(1, 2), Rational(1, 8))}};
  auto gvar = [](Sym s) { return PolyQ::variable(var_id(sym_name(s))); };
  SemiOutcome out;
  for (int r = 0; r < diff.dim; ++r)
    for (int c = 0; c < diff.dim; ++c) {
      PolyQ h0, h1;
      for (auto& [w, qc] : diff.at(r, c)) {
        Ser cs = qc.num.eval(pt, model) / qc.den.eval(pt, model);
        // canonicalize x*y = y*x + hbar*{x,y}
        PolyQ mono = gvar(w[0]) * gvar(w[1]);
        h0 = h0 + mono.scale(cs.c0);
        h1 = h1 + mono.scale(cs.c1);
        if (w[0] > w[1]) h1 = h1 + bracket(w[0], w[1]).scale(cs.c0);
      }
      std::string loc =
          "entry (" + std::to_string(r) + "," + std::to_string(c) + ")";
      if (!h0.is_zero()) {
        out.h0_ok = false;
        out.witness = loc + " at order 1";
        return out;
      }
      if (!h1.is_zero()) {
        out.match = false;
        if (out.witness.empty()) out.witness = loc + " at order hbar";
      }
    }
  return out;
}

// classical table lookup on the (a, b) algebra of `built`; with transpose_a
// the a-a entries are read through the transposition a_ij -> a_ji.
inline std::function<PolyQ(Sym, Sym)> classical_bracket(const Built& built,
                                                        bool transpose_a) {
  const PoissonAlgebra* alg = &built.alg;
  int ga = built.grp[0], gb = built.grp[1];
  int N = alg->N;
  return [alg, ga, gb, N, transpose_a](Sym x, Sym y) -> PolyQ {
    auto idx = [&](bool b, int i, int j) {
      return alg->gen_index(b ? gb : ga, i, j);
    };
    if (transpose_a && !sym_is_b(x) && !sym_is_b(y)) {
      PolyQ t = alg->tab[idx(false, sym_j(x), sym_i(x))]
                        [idx(false, sym_j(y), sym_i(y))];
      std::unordered_map<std::uint32_t, std::uint32_t> swap;
      for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j)
          swap.emplace(alg->gen_var(ga, i, j), alg->gen_var(ga, j, i));
      PolyQ r;
      for (auto& tm : t.t) {
        Monomial m;
        for (auto& [v, e] : tm.m.e) {
          auto it = swap.find(v);
          m.e.push_back({it == swap.end() ? v : it->second, e});
        }
        std::sort(m.e.begin(), m.e.end());
        PolyQ term;
        term.t.push_back({m, tm.c});
        r = r + term;
      }
      return r;
    }
    return alg->tab[idx(sym_is_b(x), sym_i(x), sym_j(x))]
                   [idx(sym_is_b(y), sym_i(y), sym_j(y))];
  };
}

}  // namespace fb
