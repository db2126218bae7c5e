#pragma once
// Rational functions (pairs of polynomials) and immutable expression DAGs
// with memoized evaluation over any coefficient field.

#include <functional>
#include <memory>
#include <unordered_map>

#include "fb/ring.hpp"

namespace fb {

// ---------------------------------------------------------------------------
// Rational function: num/den with light normalization (no full gcd).
// Equality is decided by cross-multiplication, which is exact.
// ---------------------------------------------------------------------------
template <class K = Rational>
struct RatFun {
  Poly<K> num;
  Poly<K> den;

  RatFun() : num(), den(Poly<K>::constant(ring_one(K()))) {}
  explicit RatFun(Poly<K> n) : num(std::move(n)), den(Poly<K>::constant(ring_one(K()))) {}
  RatFun(Poly<K> n, Poly<K> d) : num(std::move(n)), den(std::move(d)) {
    if (den.is_zero()) throw DivisionByZero("rational function denominator");
    normalize();
  }
  static RatFun constant(K c) { return RatFun(Poly<K>::constant(std::move(c))); }
  static RatFun variable(std::uint32_t v) { return RatFun(Poly<K>::variable(v)); }
  bool is_zero() const { return num.is_zero(); }

  friend RatFun operator+(const RatFun& a, const RatFun& b) { return addsub(a, b, false); }
  friend RatFun operator-(const RatFun& a, const RatFun& b) { return addsub(a, b, true); }
  friend RatFun operator*(const RatFun& a, const RatFun& b) {
    return RatFun(a.num * b.num, a.den * b.den);
  }
  friend RatFun operator/(const RatFun& a, const RatFun& b) {
    if (b.num.is_zero()) throw DivisionByZero("rational function quotient");
    return RatFun(a.num * b.den, a.den * b.num);
  }
  RatFun operator-() const {
    RatFun r = *this;
    r.num = -r.num;
    return r;
  }
  RatFun& operator+=(const RatFun& o) { return *this = *this + o; }
  RatFun& operator-=(const RatFun& o) { return *this = *this - o; }
  RatFun& operator*=(const RatFun& o) { return *this = *this * o; }
  friend bool operator==(const RatFun& a, const RatFun& b) {
    return (a.num * b.den - b.num * a.den).is_zero();
  }
  friend bool operator!=(const RatFun& a, const RatFun& b) { return !(a == b); }

  std::string str() const { return "(" + num.str() + ") / (" + den.str() + ")"; }

 private:
  // Addition that avoids blowing up the denominator when one denominator
  // divides the other (the common case when summing many similar terms).
  static RatFun addsub(const RatFun& a, const RatFun& b, bool neg) {
    if (a.num.is_zero()) return neg ? -b : b;
    if (b.num.is_zero()) return a;
    if (auto q = poly_try_divexact(b.den, a.den)) {
      Poly<K> bn = neg ? -b.num : b.num;
      return RatFun(a.num * *q + bn, b.den);
    }
    if (auto q = poly_try_divexact(a.den, b.den)) {
      Poly<K> bn = neg ? -b.num : b.num;
      return RatFun(a.num + bn * *q, a.den);
    }
    Poly<K> n = neg ? a.num * b.den - b.num * a.den
                    : a.num * b.den + b.num * a.den;
    return RatFun(std::move(n), a.den * b.den);
  }

  void normalize() {
    if (num.is_zero()) {
      den = Poly<K>::constant(ring_one(K()));
      return;
    }
    // try exact cancellation of the whole denominator
    if (auto q = poly_try_divexact(num, den)) {
      num = std::move(*q);
      den = Poly<K>::constant(ring_one(K()));
      return;
    }
    // strip common monomial content and make the denominator monic-leading
    Monomial g = num.t.front().m;
    auto meet = [](const Monomial& x, const Monomial& y) {
      Monomial r;
      std::size_t i = 0, j = 0;
      while (i < x.e.size() && j < y.e.size()) {
        if (x.e[i].first < y.e[j].first)
          ++i;
        else if (y.e[j].first < x.e[i].first)
          ++j;
        else {
          std::int32_t m = std::min(x.e[i].second, y.e[j].second);
          if (m != 0) r.e.push_back({x.e[i].first, m});
          ++i;
          ++j;
        }
      }
      return r;
    };
    for (auto& tm : num.t) g = meet(g, tm.m);
    for (auto& tm : den.t) g = meet(g, tm.m);
    if (!g.is_one()) {
      Monomial gi = g.inverse();
      K one = ring_one(num.t.front().c);
      num = num.mul_monomial(gi, one);
      den = den.mul_monomial(gi, one);
    }
    K lead = den.t.front().c;
    if (!(lead == ring_one(lead))) {
      K il = ring_one(lead) / lead;
      num = num.scale(il);
      den = den.scale(il);
    }
  }
};

template <class K>
RatFun<K> ring_zero(const RatFun<K>&) {
  return RatFun<K>();
}
template <class K>
RatFun<K> ring_one(const RatFun<K>&) {
  return RatFun<K>::constant(ring_one(K()));
}
template <class K>
bool ring_is_zero(const RatFun<K>& x) {
  return x.is_zero();
}
template <class K>
RatFun<K> coerce(const Rational& x, const RatFun<K>& model) {
  K inner = model.den.t.empty() ? K() : model.den.t.front().c;
  return RatFun<K>::constant(coerce(x, inner));
}
template <class K>
std::string to_string(const RatFun<K>& x) {
  return x.str();
}

// ---------------------------------------------------------------------------
// Expression DAG (shared immutable nodes) with memoized evaluation.
// ---------------------------------------------------------------------------
enum class ExprOp { Const, Var, Add, Sub, Mul, Div, Neg };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op;
  Rational value;      // Const
  std::uint32_t var{};  // Var
  Expr a, b;

  static Expr make_const(Rational v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Const;
    n->value = std::move(v);
    return n;
  }
  static Expr make_var(std::uint32_t v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Var;
    n->var = v;
    return n;
  }
  static Expr make(ExprOp op, Expr a, Expr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
};

inline Expr expr_const(Rational v) { return ExprNode::make_const(std::move(v)); }
inline Expr expr_var(const std::string& name) { return ExprNode::make_var(var_id(name)); }

inline bool expr_is_lit(const Expr& e, long v) {
  return e && e->op == ExprOp::Const && e->value == v;
}
inline bool expr_is_zero_lit(const Expr& e) { return !e || expr_is_lit(e, 0); }

inline Expr operator+(const Expr& a, const Expr& b) {
  if (expr_is_zero_lit(a)) return expr_is_zero_lit(b) ? ExprNode::make_const(Rational(0)) : b;
  if (expr_is_zero_lit(b)) return a;
  return ExprNode::make(ExprOp::Add, a, b);
}
inline Expr operator-(const Expr& a, const Expr& b) {
  if (expr_is_zero_lit(b)) return expr_is_zero_lit(a) ? ExprNode::make_const(Rational(0)) : a;
  if (expr_is_zero_lit(a)) return ExprNode::make(ExprOp::Neg, b);
  return ExprNode::make(ExprOp::Sub, a, b);
}
inline Expr operator*(const Expr& a, const Expr& b) {
  if (expr_is_zero_lit(a) || expr_is_zero_lit(b))
    return ExprNode::make_const(Rational(0));
  if (expr_is_lit(a, 1)) return b;
  if (expr_is_lit(b, 1)) return a;
  return ExprNode::make(ExprOp::Mul, a, b);
}
inline Expr operator/(const Expr& a, const Expr& b) {
  if (expr_is_lit(b, 1)) return a;
  return ExprNode::make(ExprOp::Div, a, b);
}
inline Expr operator-(const Expr& a) {
  if (expr_is_zero_lit(a)) return ExprNode::make_const(Rational(0));
  return ExprNode::make(ExprOp::Neg, a);
}
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

// Ring traits for Expr so that matrix helpers work over expression DAGs.
// "Zero" detection is syntactic (literal 0 or empty node); evaluation decides
// semantic equality.
inline Expr ring_zero(const Expr&) { return ExprNode::make_const(Rational(0)); }
inline Expr ring_one(const Expr&) { return ExprNode::make_const(Rational(1)); }
inline bool ring_is_zero(const Expr& e) {
  return !e || (e->op == ExprOp::Const && e->value == 0);
}
inline Expr coerce(const Rational& x, const Expr&) {
  return ExprNode::make_const(x);
}

// Memoized evaluation over any field F (coerce from Rational constants).
template <class F>
F expr_eval(const Expr& e, const std::unordered_map<std::uint32_t, F>& point,
            const F& model,
            std::unordered_map<const ExprNode*, F>* memo = nullptr) {
  std::unordered_map<const ExprNode*, F> local;
  if (!memo) memo = &local;
  std::function<F(const Expr&)> go = [&](const Expr& n) -> F {
    auto it = memo->find(n.get());
    if (it != memo->end()) return it->second;
    F r = ring_zero(model);
    switch (n->op) {
      case ExprOp::Const:
        r = coerce(n->value, model);
        break;
      case ExprOp::Var: {
        auto p = point.find(n->var);
        if (p == point.end())
          throw std::logic_error("unassigned variable " + var_name(n->var));
        r = p->second;
        break;
      }
      case ExprOp::Add:
        r = go(n->a) + go(n->b);
        break;
      case ExprOp::Sub:
        r = go(n->a) - go(n->b);
        break;
      case ExprOp::Mul:
        r = go(n->a) * go(n->b);
        break;
      case ExprOp::Div: {
        F d = go(n->b);
        if (ring_is_zero(d)) throw DivisionByZero("expression denominator");
        r = go(n->a) / d;
        break;
      }
      case ExprOp::Neg:
        r = -go(n->a);
        break;
    }
    memo->emplace(n.get(), r);
    return r;
  };
  return go(e);
}

// Expand a division-free expression into a polynomial (throws on Div).
inline Poly<Rational> expr_to_poly(const Expr& e) {
  std::unordered_map<const ExprNode*, Poly<Rational>> memo;
  std::function<Poly<Rational>(const Expr&)> go =
      [&](const Expr& n) -> Poly<Rational> {
    auto it = memo.find(n.get());
    if (it != memo.end()) return it->second;
    Poly<Rational> r;
    switch (n->op) {
      case ExprOp::Const:
        r = Poly<Rational>::constant(n->value);
        break;
      case ExprOp::Var:
        r = Poly<Rational>::variable(n->var);
        break;
      case ExprOp::Add:
        r = go(n->a) + go(n->b);
        break;
      case ExprOp::Sub:
        r = go(n->a) - go(n->b);
        break;
      case ExprOp::Mul:
        r = go(n->a) * go(n->b);
        break;
      case ExprOp::Neg:
        r = -go(n->a);
        break;
      case ExprOp::Div:
        throw std::logic_error("expr_to_poly: expression contains division");
    }
    memo.emplace(n.get(), r);
    return r;
  };
  return go(e);
}

}  // namespace fb
