#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "conforma/formula.hpp"

namespace conforma {

// Concrete syntax:
//
//   phi  ::= term | "!" phi | phi "&&" phi | phi "||" phi | phi "->" phi
//          | "F[" t "," t "](" phi ")" | "G[" t "," t "](" phi ")"
//          | phi "U[" t "," t "]" phi | "(" phi ")"
//   term ::= expr cmp expr          cmp in { <, <=, >, >= }
//   expr ::= +, -, *, abs(...), numeric literals, signal and parameter names
//   t    ::= numeric literal (optionally negated) | parameter name
//
// Binding, loosest to tightest: ->  ||  &&  U  unary(!, F, G).
// "->" and "U" associate to the right. Comparisons normalize to f > 0;
// >= and <= are treated as strict (measure-zero difference under
// piecewise-constant interpolation).

namespace detail {

struct Token {
  enum class Kind {
    Ident, Number, Bang, AndAnd, OrOr, Arrow, LParen, RParen, LBracket,
    RBracket, Comma, Lt, Gt, Le, Ge, Plus, Minus, Star, End
  };
  Kind kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

inline std::vector<Token> lex_formula(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Token::Kind k, std::string s) {
    out.push_back({k, std::move(s), 0.0, line, col});
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_'))
        ++j;
      push(Token::Kind::Ident, text.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = text.c_str() + i;
      char* end = nullptr;
      const double v = std::strtod(start, &end);
      if (end == start) throw ParseError("bad numeric literal", line, col);
      Token t{Token::Kind::Number,
              std::string(start, static_cast<const char*>(end)), v, line, col};
      out.push_back(std::move(t));
      col += static_cast<int>(end - start);
      i += static_cast<std::size_t>(end - start);
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < text.size() && text[i + 1] == b;
    };
    if (two('&', '&')) { push(Token::Kind::AndAnd, "&&"); i += 2; col += 2; continue; }
    if (two('|', '|')) { push(Token::Kind::OrOr, "||"); i += 2; col += 2; continue; }
    if (two('-', '>')) { push(Token::Kind::Arrow, "->"); i += 2; col += 2; continue; }
    if (two('<', '=')) { push(Token::Kind::Le, "<="); i += 2; col += 2; continue; }
    if (two('>', '=')) { push(Token::Kind::Ge, ">="); i += 2; col += 2; continue; }
    Token::Kind k;
    switch (c) {
      case '!': k = Token::Kind::Bang; break;
      case '(': k = Token::Kind::LParen; break;
      case ')': k = Token::Kind::RParen; break;
      case '[': k = Token::Kind::LBracket; break;
      case ']': k = Token::Kind::RBracket; break;
      case ',': k = Token::Kind::Comma; break;
      case '<': k = Token::Kind::Lt; break;
      case '>': k = Token::Kind::Gt; break;
      case '+': k = Token::Kind::Plus; break;
      case '-': k = Token::Kind::Minus; break;
      case '*': k = Token::Kind::Star; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         line, col);
    }
    push(k, std::string(1, c));
    ++i;
    ++col;
  }
  out.push_back({Token::Kind::End, "", 0.0, line, col});
  return out;
}

class FormulaParser {
 public:
  FormulaParser(std::vector<Token> tokens,
                const std::vector<std::string>& signature,
                const std::vector<ParamDecl>& params)
      : tokens_(std::move(tokens)), signature_(signature), params_(params),
        param_used_(params.size(), false) {}

  Formula parse() {
    Formula f = parse_implies();
    expect(Token::Kind::End, "end of formula");
    return f;
  }

  const std::vector<bool>& params_used() const { return param_used_; }

 private:
  using Kind = Token::Kind;

  const Token& peek(int ahead = 0) const {
    const std::size_t j = pos_ + static_cast<std::size_t>(ahead);
    return tokens_[std::min(j, tokens_.size() - 1)];
  }
  const Token& advance() { return tokens_[pos_++]; }
  bool accept(Kind k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Kind k, const std::string& what) {
    if (peek().kind != k)
      throw ParseError("expected " + what + ", got '" + describe(peek()) + "'",
                       peek().line, peek().column);
    return advance();
  }
  static std::string describe(const Token& t) {
    return t.kind == Kind::End ? "end of input" : t.text;
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (accept(Kind::Arrow))
      return Formula::implies(std::move(lhs), parse_implies());
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (accept(Kind::OrOr))
      lhs = Formula::disjunction(std::move(lhs), parse_and());
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_until();
    while (accept(Kind::AndAnd))
      lhs = Formula::conjunction(std::move(lhs), parse_until());
    return lhs;
  }

  bool at_temporal(const char* name) const {
    return peek().kind == Kind::Ident && peek().text == name &&
           peek(1).kind == Kind::LBracket;
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (at_temporal("U")) {
      advance();  // U
      auto [lo, hi] = parse_interval();
      return Formula::until(lo, hi, std::move(lhs), parse_until());
    }
    return lhs;
  }

  Formula parse_unary() {
    if (accept(Kind::Bang)) return Formula::negation(parse_unary());
    if (at_temporal("F") || at_temporal("G")) {
      const bool finally = peek().text == "F";
      advance();
      auto [lo, hi] = parse_interval();
      expect(Kind::LParen, "'('");
      Formula child = parse_implies();
      expect(Kind::RParen, "')'");
      return finally ? Formula::finally(lo, hi, std::move(child))
                     : Formula::globally(lo, hi, std::move(child));
    }
    if (peek().kind == Kind::LParen) {
      // "(" may open a sub-formula or a parenthesized arithmetic expression;
      // try the comparison-term reading first and backtrack.
      const std::size_t saved = pos_;
      try {
        return parse_term();
      } catch (const ParseError&) {
        pos_ = saved;
      }
      expect(Kind::LParen, "'('");
      Formula f = parse_implies();
      expect(Kind::RParen, "')'");
      return f;
    }
    return parse_term();
  }

  Formula parse_term() {
    Expr lhs = parse_expr();
    const Token& op = peek();
    Expr atom;
    switch (op.kind) {
      case Kind::Gt:
      case Kind::Ge:
        advance();
        atom = Expr::binary(Expr::Kind::Sub, std::move(lhs), parse_expr());
        break;
      case Kind::Lt:
      case Kind::Le:
        advance();
        atom = Expr::binary(Expr::Kind::Sub, parse_expr(), std::move(lhs));
        break;
      default:
        throw ParseError("expected comparison operator, got '" +
                             describe(op) + "'",
                         op.line, op.column);
    }
    return Formula::atom_gt0(std::move(atom));
  }

  Expr parse_expr() {
    Expr lhs = parse_mul();
    while (true) {
      if (accept(Kind::Plus))
        lhs = Expr::binary(Expr::Kind::Add, std::move(lhs), parse_mul());
      else if (accept(Kind::Minus))
        lhs = Expr::binary(Expr::Kind::Sub, std::move(lhs), parse_mul());
      else
        return lhs;
    }
  }

  Expr parse_mul() {
    Expr lhs = parse_expr_unary();
    while (accept(Kind::Star))
      lhs = Expr::binary(Expr::Kind::Mul, std::move(lhs), parse_expr_unary());
    return lhs;
  }

  Expr parse_expr_unary() {
    if (accept(Kind::Minus))
      return Expr::unary(Expr::Kind::Neg, parse_expr_unary());
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& t = peek();
    if (t.kind == Kind::Number) {
      advance();
      return Expr::lit(t.number);
    }
    if (t.kind == Kind::LParen) {
      advance();
      Expr e = parse_expr();
      expect(Kind::RParen, "')'");
      return e;
    }
    if (t.kind == Kind::Ident) {
      advance();
      if (t.text == "abs") {
        expect(Kind::LParen, "'(' after abs");
        Expr e = parse_expr();
        expect(Kind::RParen, "')'");
        return Expr::unary(Expr::Kind::Abs, std::move(e));
      }
      return resolve_name(t);
    }
    throw ParseError("expected expression, got '" + describe(t) + "'",
                     t.line, t.column);
  }

  Expr resolve_name(const Token& t) {
    for (std::size_t i = 0; i < signature_.size(); ++i)
      if (signature_[i] == t.text) return Expr::signal(static_cast<int>(i));
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i].name == t.text) {
        param_used_[i] = true;
        return Expr::param(static_cast<int>(i));
      }
    throw ParseError("undeclared signal variable '" + t.text + "'",
                     t.line, t.column);
  }

  std::pair<Endpoint, Endpoint> parse_interval() {
    expect(Kind::LBracket, "'['");
    Endpoint lo = parse_endpoint();
    expect(Kind::Comma, "','");
    Endpoint hi = parse_endpoint();
    expect(Kind::RBracket, "']'");
    if (lo.is_param() && hi.is_param() && lo.param == hi.param) {
      const Token& t = peek();
      throw ParseError("parameter '" + params_[static_cast<std::size_t>(
                           lo.param)].name +
                           "' used in both interval bounds of one operator",
                       t.line, t.column);
    }
    return {lo, hi};
  }

  Endpoint parse_endpoint() {
    const Token& t = peek();
    if (accept(Kind::Minus)) {
      const Token& n = expect(Kind::Number, "numeric literal");
      return Endpoint::lit(-n.number);
    }
    if (t.kind == Kind::Number) {
      advance();
      return Endpoint::lit(t.number);
    }
    if (t.kind == Kind::Ident) {
      advance();
      for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == t.text) {
          param_used_[i] = true;
          return Endpoint::param_ref(static_cast<int>(i));
        }
      throw ParseError("interval endpoint '" + t.text +
                           "' is not a declared parameter",
                       t.line, t.column);
    }
    throw ParseError("expected interval endpoint, got '" + describe(t) + "'",
                     t.line, t.column);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::vector<std::string>& signature_;
  const std::vector<ParamDecl>& params_;
  std::vector<bool> param_used_;
};

inline void count_endpoint_roles(const Formula& f, std::vector<int>& count) {
  if (f.kind == Formula::Kind::Until) {
    if (f.lo.is_param()) ++count[static_cast<std::size_t>(f.lo.param)];
    if (f.hi.is_param()) ++count[static_cast<std::size_t>(f.hi.param)];
  }
  for (const auto& k : f.kids) count_endpoint_roles(k, count);
}

}  // namespace detail

/// Parses the documented grammar into a desugared ParameterizedFormula.
/// Every identifier must be a declared signal or parameter. A parameter may
/// fill at most one interval-endpoint slot across the whole formula; more
/// would make its monotonicity direction ambiguous.
inline ParameterizedFormula parse_formula(const std::string& text,
                                          std::vector<std::string> signature,
                                          std::vector<ParamDecl> params = {}) {
  for (const auto& s : signature) {
    if (s == "abs")
      throw ParseError("signature must not use reserved name 'abs'", 1, 1);
    for (const auto& p : params)
      if (p.name == s)
        throw ParseError("'" + s + "' declared as both signal and parameter",
                         1, 1);
  }
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = i + 1; j < params.size(); ++j)
      if (params[i].name == params[j].name)
        throw ParseError("duplicate parameter name '" + params[i].name + "'",
                         1, 1);

  detail::FormulaParser parser(detail::lex_formula(text), signature, params);
  ParameterizedFormula pf;
  pf.formula = parser.parse();
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!parser.params_used()[i])
      throw ParseError("declared parameter '" + params[i].name +
                           "' does not appear in the formula",
                       1, 1);

  std::vector<int> endpoint_roles(params.size(), 0);
  detail::count_endpoint_roles(pf.formula, endpoint_roles);
  for (std::size_t i = 0; i < params.size(); ++i)
    if (endpoint_roles[i] > 1)
      throw ParseError("parameter '" + params[i].name +
                           "' used in more than one interval endpoint",
                       1, 1);

  pf.params = std::move(params);
  pf.signature = std::move(signature);
  pf.source = text;
  return pf;
}

}  // namespace conforma
