#pragma once
// Exact coefficient arithmetic: rationals, prime fields, sparse Laurent
// polynomials, rational functions, dual numbers, and expression DAGs.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fb {

using Rational = mpq_class;

inline std::string to_string(const Rational& r) { return r.get_str(); }

// ---------------------------------------------------------------------------
// Prime field with element-carried modulus (default p = 2^61 - 1).
// ---------------------------------------------------------------------------
constexpr std::uint64_t kDefaultPrime = 2305843009213693951ULL;  // 2^61 - 1

struct DivisionByZero : std::runtime_error {
  explicit DivisionByZero(const std::string& w)
      : std::runtime_error("division by zero: " + w) {}
};

class Fp {
 public:
  Fp() : v_(0), p_(kDefaultPrime) {}
  Fp(std::int64_t v, std::uint64_t p) : p_(p) {
    std::int64_t m = v % static_cast<std::int64_t>(p);
    if (m < 0) m += static_cast<std::int64_t>(p);
    v_ = static_cast<std::uint64_t>(m);
  }
  static Fp raw(std::uint64_t v, std::uint64_t p) {
    Fp x;
    x.v_ = v % p;
    x.p_ = p;
    return x;
  }
  std::uint64_t value() const { return v_; }
  std::uint64_t modulus() const { return p_; }
  bool is_zero() const { return v_ == 0; }

  friend Fp operator+(const Fp& a, const Fp& b) {
    a.chk(b);
    std::uint64_t s = a.v_ + b.v_;  // p < 2^62, no overflow
    if (s >= a.p_) s -= a.p_;
    return raw(s, a.p_);
  }
  friend Fp operator-(const Fp& a, const Fp& b) {
    a.chk(b);
    std::uint64_t s = a.v_ >= b.v_ ? a.v_ - b.v_ : a.v_ + a.p_ - b.v_;
    return raw(s, a.p_);
  }
  friend Fp operator*(const Fp& a, const Fp& b) {
    a.chk(b);
    unsigned __int128 prod = static_cast<unsigned __int128>(a.v_) * b.v_;
    return raw(static_cast<std::uint64_t>(prod % a.p_), a.p_);
  }
  Fp operator-() const { return raw(v_ == 0 ? 0 : p_ - v_, p_); }
  Fp pow(std::uint64_t e) const {
    Fp r = raw(1, p_), b = *this;
    while (e) {
      if (e & 1) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }
  Fp inv() const {
    if (v_ == 0) throw DivisionByZero("inverse of 0 in F_p");
    return pow(p_ - 2);
  }
  friend Fp operator/(const Fp& a, const Fp& b) { return a * b.inv(); }
  // Square root for p = 3 (mod 4); returns nullopt if not a residue.
  std::optional<Fp> sqrt() const {
    if (v_ == 0) return raw(0, p_);
    Fp r = pow((p_ + 1) / 4);
    if ((r * r).v_ != v_) return std::nullopt;
    return r;
  }
  friend bool operator==(const Fp& a, const Fp& b) {
    return a.v_ == b.v_ && a.p_ == b.p_;
  }
  friend bool operator!=(const Fp& a, const Fp& b) { return !(a == b); }
  Fp& operator+=(const Fp& o) { return *this = *this + o; }
  Fp& operator-=(const Fp& o) { return *this = *this - o; }
  Fp& operator*=(const Fp& o) { return *this = *this * o; }

 private:
  void chk(const Fp& o) const {
    if (p_ != o.p_) throw std::logic_error("mixed moduli in F_p arithmetic");
  }
  std::uint64_t v_;
  std::uint64_t p_;
};

inline std::string to_string(const Fp& x) { return std::to_string(x.value()); }

// ---------------------------------------------------------------------------
// Ring traits: model-based identities and coercion from Rational.
// ---------------------------------------------------------------------------
inline Rational ring_zero(const Rational&) { return Rational(0); }
inline Rational ring_one(const Rational&) { return Rational(1); }
inline bool ring_is_zero(const Rational& x) { return x == 0; }
inline Fp ring_zero(const Fp& m) { return Fp::raw(0, m.modulus()); }
inline Fp ring_one(const Fp& m) { return Fp::raw(1, m.modulus()); }
inline bool ring_is_zero(const Fp& x) { return x.is_zero(); }

inline Rational coerce(const Rational& x, const Rational&) { return x; }
inline Fp coerce(const Rational& x, const Fp& model) {
  const std::uint64_t p = model.modulus();
  mpz_class num = x.get_num(), den = x.get_den();
  mpz_class pz(static_cast<unsigned long>(p));
  mpz_class nr = num % pz, dr = den % pz;
  if (nr < 0) nr += pz;
  Fp n = Fp::raw(nr.get_ui(), p), d = Fp::raw(dr.get_ui(), p);
  if (d.is_zero()) throw DivisionByZero("rational denominator divisible by p");
  return n / d;
}

// ---------------------------------------------------------------------------
// Dual numbers (forward-mode derivative w.r.t. one designated variable).
// ---------------------------------------------------------------------------
template <class F>
struct Dual {
  F a;  // value
  F b;  // derivative
  Dual() = default;
  Dual(F v, F d) : a(std::move(v)), b(std::move(d)) {}
  friend Dual operator+(const Dual& x, const Dual& y) {
    return {x.a + y.a, x.b + y.b};
  }
  friend Dual operator-(const Dual& x, const Dual& y) {
    return {x.a - y.a, x.b - y.b};
  }
  friend Dual operator*(const Dual& x, const Dual& y) {
    return {x.a * y.a, x.b * y.a + x.a * y.b};
  }
  Dual operator-() const { return {-a, -b}; }
  friend Dual operator/(const Dual& x, const Dual& y) {
    if (ring_is_zero(y.a)) throw DivisionByZero("dual value");
    F inv_a = ring_one(y.a) / y.a;
    F val = x.a * inv_a;
    return {val, (x.b - val * y.b) * inv_a};
  }
  friend bool operator==(const Dual& x, const Dual& y) {
    return x.a == y.a && x.b == y.b;
  }
  Dual& operator+=(const Dual& o) { return *this = *this + o; }
  Dual& operator-=(const Dual& o) { return *this = *this - o; }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
};

template <class F>
Dual<F> ring_zero(const Dual<F>& m) {
  return {ring_zero(m.a), ring_zero(m.a)};
}
template <class F>
Dual<F> ring_one(const Dual<F>& m) {
  return {ring_one(m.a), ring_zero(m.a)};
}
template <class F>
bool ring_is_zero(const Dual<F>& x) {
  return ring_is_zero(x.a) && ring_is_zero(x.b);
}
template <class F>
Dual<F> coerce(const Rational& x, const Dual<F>& model) {
  return {coerce(x, model.a), ring_zero(model.a)};
}
template <class F>
std::string to_string(const Dual<F>& d) {
  return "(" + to_string(d.a) + ", " + to_string(d.b) + ")";
}

// ---------------------------------------------------------------------------
// Variable registry (process-global, thread-safe; ids are dense).
// ---------------------------------------------------------------------------
class VarRegistry {
 public:
  static VarRegistry& instance() {
    static VarRegistry reg;
    return reg;
  }
  std::uint32_t id(const std::string& name) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = by_name_.find(name);
    if (it != by_name_.end()) return it->second;
    std::uint32_t nid = static_cast<std::uint32_t>(names_.size());
    names_.push_back(name);
    by_name_.emplace(name, nid);
    return nid;
  }
  std::string name(std::uint32_t id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return names_.at(id);
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> by_name_;
};

inline std::uint32_t var_id(const std::string& name) {
  return VarRegistry::instance().id(name);
}
inline std::string var_name(std::uint32_t id) {
  return VarRegistry::instance().name(id);
}

// ---------------------------------------------------------------------------
// Monomial: sorted (var, exponent) pairs, Laurent exponents allowed.
// ---------------------------------------------------------------------------
struct Monomial {
  // sorted by variable id ascending; exponents nonzero
  std::vector<std::pair<std::uint32_t, std::int32_t>> e;

  static Monomial one() { return {}; }
  static Monomial var(std::uint32_t v, std::int32_t exp = 1) {
    Monomial m;
    if (exp != 0) m.e.push_back({v, exp});
    return m;
  }
  bool is_one() const { return e.empty(); }
  std::int32_t exp_of(std::uint32_t v) const {
    for (auto& [w, x] : e)
      if (w == v) return x;
    return 0;
  }
  int degree() const {
    int d = 0;
    for (auto& [w, x] : e) d += x;
    return d;
  }
  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial r;
    std::size_t i = 0, j = 0;
    while (i < a.e.size() || j < b.e.size()) {
      if (j >= b.e.size() || (i < a.e.size() && a.e[i].first < b.e[j].first)) {
        r.e.push_back(a.e[i++]);
      } else if (i >= a.e.size() || b.e[j].first < a.e[i].first) {
        r.e.push_back(b.e[j++]);
      } else {
        std::int32_t s = a.e[i].second + b.e[j].second;
        if (s != 0) r.e.push_back({a.e[i].first, s});
        ++i;
        ++j;
      }
    }
    return r;
  }
  Monomial inverse() const {
    Monomial r = *this;
    for (auto& [w, x] : r.e) x = -x;
    return r;
  }
  // classic lex: scan variables ascending; larger exponent first wins.
  // Compatible with multiplication (also for Laurent exponents).
  friend int cmp(const Monomial& a, const Monomial& b) {
    std::size_t i = 0, j = 0;
    while (i < a.e.size() || j < b.e.size()) {
      std::uint32_t va = i < a.e.size() ? a.e[i].first : UINT32_MAX;
      std::uint32_t vb = j < b.e.size() ? b.e[j].first : UINT32_MAX;
      std::uint32_t v = std::min(va, vb);
      std::int32_t ea = (va == v) ? a.e[i].second : 0;
      std::int32_t eb = (vb == v) ? b.e[j].second : 0;
      if (ea != eb) return ea > eb ? 1 : -1;
      if (va == v) ++i;
      if (vb == v) ++j;
    }
    return 0;
  }
  friend bool operator<(const Monomial& a, const Monomial& b) {
    return cmp(a, b) < 0;
  }
  friend bool operator>(const Monomial& a, const Monomial& b) {
    return cmp(a, b) > 0;
  }
  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.e == b.e;
  }
  std::string str() const {
    if (e.empty()) return "1";
    std::string s;
    for (auto& [v, x] : e) {
      if (!s.empty()) s += "*";
      s += var_name(v);
      if (x != 1) s += "^" + std::to_string(x);
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Sparse multivariate Laurent polynomial over a coefficient ring K.
// Canonical: terms sorted descending by monomial, no zero coefficients.
// ---------------------------------------------------------------------------
template <class K = Rational>
struct Poly {
  struct Term {
    Monomial m;
    K c;
  };
  std::vector<Term> t;  // descending by monomial

  Poly() = default;
  static Poly zero() { return {}; }
  static Poly constant(K c) {
    Poly p;
    if (!ring_is_zero(c)) p.t.push_back({Monomial::one(), std::move(c)});
    return p;
  }
  static Poly variable(std::uint32_t v, std::int32_t exp = 1,
                       K c = ring_one(K())) {
    Poly p;
    if (!ring_is_zero(c)) p.t.push_back({Monomial::var(v, exp), std::move(c)});
    return p;
  }
  bool is_zero() const { return t.empty(); }
  bool is_constant() const {
    return t.empty() || (t.size() == 1 && t[0].m.is_one());
  }
  K constant_value() const {
    if (t.empty()) return K();
    return t[0].c;
  }
  int num_terms() const { return static_cast<int>(t.size()); }
  int total_degree() const {
    int d = 0;
    for (auto& tm : t) d = std::max(d, tm.m.degree());
    return d;
  }

  friend Poly operator+(const Poly& a, const Poly& b) { return merge(a, b, 1); }
  friend Poly operator-(const Poly& a, const Poly& b) {
    return merge(a, b, -1);
  }
  Poly operator-() const {
    Poly r = *this;
    for (auto& tm : r.t) tm.c = -tm.c;
    return r;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    std::map<Monomial, K, std::greater<Monomial>> acc;
    for (auto& x : a.t)
      for (auto& y : b.t) {
        Monomial m = x.m * y.m;
        K c = x.c * y.c;
        auto it = acc.find(m);
        if (it == acc.end()) {
          if (!ring_is_zero(c)) acc.emplace(std::move(m), std::move(c));
        } else {
          it->second += c;
          if (ring_is_zero(it->second)) acc.erase(it);
        }
      }
    Poly r;
    r.t.reserve(acc.size());
    for (auto& [m, c] : acc) r.t.push_back({m, c});
    return r;
  }
  Poly& operator+=(const Poly& o) { return *this = *this + o; }
  Poly& operator-=(const Poly& o) { return *this = *this - o; }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }
  friend bool operator==(const Poly& a, const Poly& b) {
    if (a.t.size() != b.t.size()) return false;
    for (std::size_t i = 0; i < a.t.size(); ++i)
      if (!(a.t[i].m == b.t[i].m) || !(a.t[i].c == b.t[i].c)) return false;
    return true;
  }
  Poly scale(const K& c) const {
    Poly r;
    if (ring_is_zero(c)) return r;
    r.t.reserve(t.size());
    for (auto& tm : t) {
      K v = tm.c * c;
      if (!ring_is_zero(v)) r.t.push_back({tm.m, std::move(v)});
    }
    return r;
  }
  Poly mul_monomial(const Monomial& m, const K& c) const {
    Poly r;
    if (ring_is_zero(c)) return r;
    r.t.reserve(t.size());
    for (auto& tm : t) {
      K v = tm.c * c;
      if (!ring_is_zero(v)) r.t.push_back({tm.m * m, std::move(v)});
    }
    std::sort(r.t.begin(), r.t.end(),
              [](const Term& a, const Term& b) { return b.m < a.m; });
    return r;
  }
  Poly pow(int e) const {
    Poly r = constant(ring_one(K()));
    Poly b = *this;
    while (e) {
      if (e & 1) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }

  // formal partial derivative (Laurent rule d(x^e)/dx = e x^{e-1})
  Poly partial(std::uint32_t v) const {
    Poly r;
    for (auto& tm : t) {
      std::int32_t e = tm.m.exp_of(v);
      if (e == 0) continue;
      K c = tm.c * coerce(Rational(e), tm.c);
      if (ring_is_zero(c)) continue;
      r.t.push_back({tm.m * Monomial::var(v, -1), std::move(c)});
    }
    std::sort(r.t.begin(), r.t.end(),
              [](const Term& a, const Term& b) { return b.m < a.m; });
    return r;
  }

  // substitute v -> v^{-1}
  Poly invert_var(std::uint32_t v) const {
    Poly r;
    r.t.reserve(t.size());
    for (auto& tm : t) {
      std::int32_t e = tm.m.exp_of(v);
      Term nt = tm;
      if (e != 0) nt.m = tm.m * Monomial::var(v, -2 * e);
      r.t.push_back(std::move(nt));
    }
    std::sort(r.t.begin(), r.t.end(),
              [](const Term& a, const Term& b) { return b.m < a.m; });
    return r;
  }

  // Evaluate at a point: vars in `point` get values; absent vars must not
  // occur (throws).  Negative exponents invert (DivisionByZero if value 0).
  template <class F>
  F eval(const std::unordered_map<std::uint32_t, F>& point,
         const F& model) const {
    F acc = ring_zero(model);
    for (auto& tm : t) {
      F v = coerce_coeff(tm.c, model);
      for (auto& [var, e] : tm.m.e) {
        auto it = point.find(var);
        if (it == point.end())
          throw std::logic_error("unassigned variable " + var_name(var));
        F base = it->second;
        if (e < 0) {
          if (ring_is_zero(base)) throw DivisionByZero(var_name(var));
          base = ring_one(model) / base;
        }
        int ee = e < 0 ? -e : e;
        for (int k = 0; k < ee; ++k) v = v * base;
      }
      acc = acc + v;
    }
    return acc;
  }

  // Partial substitution: vars present in `point` are replaced by constants,
  // others stay symbolic.
  Poly substitute(const std::unordered_map<std::uint32_t, K>& point) const {
    Poly r;
    for (auto& tm : t) {
      Monomial rest;
      K c = tm.c;
      bool dead = false;
      for (auto& [var, e] : tm.m.e) {
        auto it = point.find(var);
        if (it == point.end()) {
          rest.e.push_back({var, e});
        } else {
          K base = it->second;
          if (e < 0) {
            if (ring_is_zero(base)) throw DivisionByZero(var_name(var));
            base = ring_one(base) / base;
          }
          int ee = e < 0 ? -e : e;
          for (int k = 0; k < ee; ++k) c = c * base;
          if (ring_is_zero(c)) {
            dead = true;
            break;
          }
        }
      }
      if (dead) continue;
      Poly term;
      term.t.push_back({rest, c});
      r = r + term;
    }
    return r;
  }

  std::vector<std::uint32_t> variables() const {
    std::vector<std::uint32_t> vs;
    for (auto& tm : t)
      for (auto& [v, e] : tm.m.e) vs.push_back(v);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
  }

  std::string str() const {
    if (t.empty()) return "0";
    std::string s;
    for (auto& tm : t) {
      if (!s.empty()) s += " + ";
      s += "(" + to_string(tm.c) + ")";
      if (!tm.m.is_one()) s += "*" + tm.m.str();
    }
    return s;
  }

 private:
  template <class F>
  static F coerce_coeff(const K& c, const F& model) {
    if constexpr (std::is_same_v<K, F>)
      return c;
    else
      return coerce(c, model);
  }
  static Poly merge(const Poly& a, const Poly& b, int sign) {
    Poly r;
    r.t.reserve(a.t.size() + b.t.size());
    std::size_t i = 0, j = 0;
    while (i < a.t.size() || j < b.t.size()) {
      int side;
      if (i >= a.t.size())
        side = 1;
      else if (j >= b.t.size())
        side = 0;
      else {
        int c = cmp(a.t[i].m, b.t[j].m);
        side = c > 0 ? 0 : (c < 0 ? 1 : 2);
      }
      if (side == 0) {
        r.t.push_back(a.t[i++]);
      } else if (side == 1) {
        K c = sign < 0 ? K(-b.t[j].c) : b.t[j].c;
        if (!ring_is_zero(c)) r.t.push_back({b.t[j].m, std::move(c)});
        ++j;
      } else {
        K c = sign < 0 ? K(a.t[i].c - b.t[j].c) : K(a.t[i].c + b.t[j].c);
        if (!ring_is_zero(c)) r.t.push_back({a.t[i].m, std::move(c)});
        ++i;
        ++j;
      }
    }
    return r;
  }
};

// Ring traits for polynomials themselves (so Poly can be a coefficient type).
template <class K>
Poly<K> ring_zero(const Poly<K>&) {
  return Poly<K>::zero();
}
template <class K>
Poly<K> ring_one(const Poly<K>&) {
  return Poly<K>::constant(ring_one(K()));
}
template <class K>
bool ring_is_zero(const Poly<K>& p) {
  return p.is_zero();
}
template <class K>
Poly<K> coerce(const Rational& x, const Poly<K>& model) {
  K inner = model.t.empty() ? K() : model.t.front().c;
  return Poly<K>::constant(coerce(x, inner));
}
template <class K>
std::string to_string(const Poly<K>& p) {
  return p.str();
}

// Canonicalization (the representation is canonical by construction; this
// re-sorts and prunes, and is idempotent).
template <class K>
Poly<K> poly_normalize(Poly<K> p) {
  std::sort(p.t.begin(), p.t.end(),
            [](auto& a, auto& b) { return b.m < a.m; });
  Poly<K> r;
  for (auto& tm : p.t) {
    if (!r.t.empty() && r.t.back().m == tm.m) {
      r.t.back().c += tm.c;
    } else {
      r.t.push_back(tm);
    }
  }
  Poly<K> out;
  for (auto& tm : r.t)
    if (!ring_is_zero(tm.c)) out.t.push_back(tm);
  return out;
}

template <class K>
Poly<K> poly_partial(const Poly<K>& p, std::uint32_t v) {
  return p.partial(v);
}

// Monomial gcd (componentwise minimum exponent, zero for absent variables).
inline Monomial monomial_meet(const Monomial& x, const Monomial& y) {
  Monomial r;
  auto exp_in = [](const Monomial& m, std::uint32_t v) {
    return m.exp_of(v);
  };
  std::vector<std::uint32_t> vars;
  for (auto& [v, e] : x.e) vars.push_back(v);
  for (auto& [v, e] : y.e) vars.push_back(v);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (auto v : vars) {
    std::int32_t m = std::min(exp_in(x, v), exp_in(y, v));
    if (m != 0) r.e.push_back({v, m});
  }
  return r;
}

template <class K>
Monomial poly_content(const Poly<K>& p) {
  Monomial g = p.t.front().m;
  for (auto& tm : p.t) g = monomial_meet(g, tm.m);
  return g;
}

// Exact division in the Laurent ring: returns nullopt if b does not divide a.
// Both operands are reduced to content-free true polynomials first; then
// leading-term lex division terminates and detects failure as soon as a
// leading monomial is not divisible.
template <class K>
std::optional<Poly<K>> poly_try_divexact(const Poly<K>& a, const Poly<K>& b) {
  if (a.is_zero()) return Poly<K>::zero();
  if (b.is_zero()) return std::nullopt;
  const K one = ring_one(a.t.front().c);
  Monomial ca = poly_content(a), cb = poly_content(b);
  Poly<K> ra = a.mul_monomial(ca.inverse(), one);
  Poly<K> rb = b.mul_monomial(cb.inverse(), one);
  Poly<K> rem = ra, q;
  while (!rem.is_zero()) {
    Monomial m = rem.t.front().m * rb.t.front().m.inverse();
    for (auto& [v, e] : m.e)
      if (e < 0) return std::nullopt;
    K c = rem.t.front().c / rb.t.front().c;
    rem = rem - rb.mul_monomial(m, c);
    Poly<K> term;
    term.t.push_back({m, c});
    q = q + term;
  }
  return q.mul_monomial(ca * cb.inverse(), one);
}

}  // namespace fb
