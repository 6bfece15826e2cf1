#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conforma/common.hpp"

namespace conforma {

// STL formulas are kept in the desugared core: atomic predicates of the form
// f > 0, negation, conjunction, and bounded Until. Or/Implies/Finally/Globally
// and True/False are rewritten at construction time.

/// Arithmetic expression over signal variables and formula parameters.
struct Expr {
  enum class Kind { Literal, Signal, Param, Add, Sub, Mul, Neg, Abs };

  Kind kind = Kind::Literal;
  double literal = 0.0;
  int ref = -1;  // signal index (Signal) or parameter index (Param)
  std::vector<Expr> kids;

  static Expr lit(double v) { return {Kind::Literal, v, -1, {}}; }
  static Expr signal(int index) { return {Kind::Signal, 0.0, index, {}}; }
  static Expr param(int index) { return {Kind::Param, 0.0, index, {}}; }
  static Expr unary(Kind k, Expr a) {
    Expr e{k, 0.0, -1, {}};
    e.kids.push_back(std::move(a));
    return e;
  }
  static Expr binary(Kind k, Expr a, Expr b) {
    Expr e{k, 0.0, -1, {}};
    e.kids.push_back(std::move(a));
    e.kids.push_back(std::move(b));
    return e;
  }

  /// Evaluates against one sample row; `params` supplies parameter values.
  double eval(std::span<const double> row, std::span<const double> params) const {
    switch (kind) {
      case Kind::Literal:
        return literal;
      case Kind::Signal:
        return row[static_cast<std::size_t>(ref)];
      case Kind::Param:
        if (static_cast<std::size_t>(ref) >= params.size())
          throw Error("formula has uninstantiated parameters");
        return params[static_cast<std::size_t>(ref)];
      case Kind::Add:
        return kids[0].eval(row, params) + kids[1].eval(row, params);
      case Kind::Sub:
        return kids[0].eval(row, params) - kids[1].eval(row, params);
      case Kind::Mul:
        return kids[0].eval(row, params) * kids[1].eval(row, params);
      case Kind::Neg:
        return -kids[0].eval(row, params);
      case Kind::Abs:
        return std::abs(kids[0].eval(row, params));
    }
    throw Error("corrupt expression node");
  }

  bool has_param() const {
    if (kind == Kind::Param) return true;
    for (const auto& k : kids)
      if (k.has_param()) return true;
    return false;
  }
};

/// Interval endpoint: a literal number of seconds or a parameter slot.
struct Endpoint {
  double value = 0.0;
  int param = -1;

  static Endpoint lit(double v) { return {v, -1}; }
  static Endpoint param_ref(int index) { return {0.0, index}; }

  bool is_param() const { return param >= 0; }
  double resolve(std::span<const double> params) const {
    if (!is_param()) return value;
    if (static_cast<std::size_t>(param) >= params.size())
      throw Error("formula has uninstantiated parameters");
    return params[static_cast<std::size_t>(param)];
  }
};

/// Desugared STL formula node.
struct Formula {
  enum class Kind { Atom, Not, And, Until };

  Kind kind = Kind::Atom;
  Expr atom;         // Atom: satisfied iff atom > 0
  Endpoint lo, hi;   // Until interval
  std::vector<Formula> kids;

  static Formula atom_gt0(Expr e) {
    Formula f;
    f.kind = Kind::Atom;
    f.atom = std::move(e);
    return f;
  }
  static Formula truth() { return atom_gt0(Expr::lit(1.0)); }
  static Formula falsity() { return atom_gt0(Expr::lit(-1.0)); }
  static Formula negation(Formula a) {
    Formula f;
    f.kind = Kind::Not;
    f.kids.push_back(std::move(a));
    return f;
  }
  static Formula conjunction(Formula a, Formula b) {
    Formula f;
    f.kind = Kind::And;
    f.kids.push_back(std::move(a));
    f.kids.push_back(std::move(b));
    return f;
  }
  static Formula until(Endpoint lo, Endpoint hi, Formula a, Formula b) {
    Formula f;
    f.kind = Kind::Until;
    f.lo = lo;
    f.hi = hi;
    f.kids.push_back(std::move(a));
    f.kids.push_back(std::move(b));
    return f;
  }
  // Derived operators, desugared on construction.
  static Formula disjunction(Formula a, Formula b) {
    return negation(conjunction(negation(std::move(a)), negation(std::move(b))));
  }
  static Formula implies(Formula a, Formula b) {
    return negation(conjunction(std::move(a), negation(std::move(b))));
  }
  static Formula finally(Endpoint lo, Endpoint hi, Formula a) {
    return until(lo, hi, truth(), std::move(a));
  }
  static Formula globally(Endpoint lo, Endpoint hi, Formula a) {
    return negation(finally(lo, hi, negation(std::move(a))));
  }

  bool has_param() const {
    if (kind == Kind::Atom) return atom.has_param();
    if (kind == Kind::Until && (lo.is_param() || hi.is_param())) return true;
    for (const auto& k : kids)
      if (k.has_param()) return true;
    return false;
  }
};

enum class Monotonicity { Increasing, Decreasing };

inline const char* to_string(Monotonicity m) {
  return m == Monotonicity::Increasing ? "increasing" : "decreasing";
}

/// Declared parameter: direction of its effect on satisfaction plus the
/// bisection bracket searched for per-trace critical values.
struct ParamDecl {
  std::string name;
  Monotonicity direction = Monotonicity::Increasing;
  double bracket_lo = 0.0;
  double bracket_hi = 1.0;
};

/// STL formula template with K named real parameters. K = 0 is the
/// degenerate literal-formula case.
struct ParameterizedFormula {
  Formula formula;
  std::vector<ParamDecl> params;
  std::vector<std::string> signature;  // declared signal variables
  std::string source;                  // original concrete syntax

  std::size_t dimension() const { return params.size(); }

  int param_index(const std::string& name) const {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

inline void substitute(Expr& e, std::span<const double> values) {
  if (e.kind == Expr::Kind::Param) {
    e = Expr::lit(values[static_cast<std::size_t>(e.ref)]);
    return;
  }
  for (auto& k : e.kids) substitute(k, values);
}

inline void substitute(Formula& f, std::span<const double> values) {
  if (f.kind == Formula::Kind::Atom) {
    substitute(f.atom, values);
    return;
  }
  if (f.kind == Formula::Kind::Until) {
    if (f.lo.is_param()) f.lo = Endpoint::lit(f.lo.resolve(values));
    if (f.hi.is_param()) f.hi = Endpoint::lit(f.hi.resolve(values));
  }
  for (auto& k : f.kids) substitute(k, values);
}

}  // namespace detail

/// Replaces every parameter slot with the given values. Empty or negative
/// intervals are preserved; the Until convention handles them at evaluation.
inline Formula instantiate(const ParameterizedFormula& pf,
                           std::span<const double> values) {
  if (values.size() != pf.params.size())
    throw Error("instantiate: expected " + std::to_string(pf.params.size()) +
                " parameter values, got " + std::to_string(values.size()));
  Formula out = pf.formula;
  detail::substitute(out, values);
  return out;
}

/// Least T such that satisfaction at time 0 depends only on the trace
/// restricted to [0, T]. Requires literal (instantiated) interval endpoints.
inline double formula_horizon(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      return 0.0;
    case Formula::Kind::Not:
      return formula_horizon(f.kids[0]);
    case Formula::Kind::And:
      return std::max(formula_horizon(f.kids[0]), formula_horizon(f.kids[1]));
    case Formula::Kind::Until: {
      if (f.lo.is_param() || f.hi.is_param())
        throw Error("formula_horizon: formula has uninstantiated parameters");
      const double t1 = f.lo.value;
      const double t2 = f.hi.value;
      if (std::isinf(t1) || std::isinf(t2))
        throw Error("unbounded-time formula not supported");
      // Convention: an empty or negative interval is constant-false and
      // depends on nothing.
      if (t2 < t1 || t1 < 0.0 || t2 < 0.0) return 0.0;
      return t2 + std::max(formula_horizon(f.kids[0]),
                           formula_horizon(f.kids[1]));
    }
  }
  throw Error("corrupt formula node");
}

}  // namespace conforma
