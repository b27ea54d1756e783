#ifndef BCIDX_PARSE_HPP
#define BCIDX_PARSE_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "bcidx/length.hpp"
#include "bcidx/sexpr.hpp"
#include "bcidx/term.hpp"

namespace bcidx {

namespace detail {

inline Term term_from_sexpr(const SExpr& e, const Signature& sig) {
  if (e.atom) {
    if (e.text == "true") return mk_true();
    if (e.text == "false") return mk_false();
    if (e.text.rfind("n.", 0) == 0 && e.text.size() > 2) return mk_name(e.text.substr(2));
    throw ParseError("unknown symbol '" + e.text + "'", e.line, e.col);
  }
  if (e.items.empty() || !e.items[0].atom)
    throw ParseError("expected a symbol application", e.line, e.col);
  const std::string& head = e.items[0].text;
  auto args = [&](size_t n) {
    if (e.items.size() != n + 1)
      throw ParseError("arity mismatch: '" + head + "' expects " + std::to_string(n) +
                           " arguments, got " + std::to_string(e.items.size() - 1),
                       e.line, e.col);
    TermVec v;
    for (size_t i = 1; i <= n; ++i) v.push_back(term_from_sexpr(e.items[i], sig));
    return v;
  };
  if (head == "pair") { auto a = args(2); return mk_pair(a[0], a[1]); }
  if (head == "fst") { auto a = args(1); return mk_fst(a[0]); }
  if (head == "snd") { auto a = args(1); return mk_snd(a[0]); }
  if (head == "pk") { auto a = args(1); return mk_pk(a[0]); }
  if (head == "sk") { auto a = args(1); return mk_sk(a[0]); }
  if (head == "enc") { auto a = args(3); return mk_enc(a[0], a[1], a[2]); }
  if (head == "dec") { auto a = args(2); return mk_dec(a[0], a[1]); }
  if (head == "zero") { auto a = args(1); return mk_zero(a[0]); }
  if (head == "eq") { auto a = args(2); return mk_eq(a[0], a[1]); }
  if (head == "ite") {
    auto a = args(3);
    if (!a[0].conditional_ok())
      throw ParseError("sort mismatch: ite condition must be bool-sorted", e.line, e.col);
    return mk_ite(a[0], a[1], a[2]);
  }
  if (head == "adv") {
    if (e.items.size() < 2 || !e.items[1].atom)
      throw ParseError("adv expects an identifier", e.line, e.col);
    const std::string& id = e.items[1].text;
    if (!sig.has_adv(id))
      throw ParseError("unknown adversarial symbol '" + id + "'", e.line, e.col);
    size_t n = sig.adv_arity(id);
    if (e.items.size() != n + 2)
      throw ParseError("arity mismatch: adversarial '" + id + "' expects " + std::to_string(n) +
                           " arguments, got " + std::to_string(e.items.size() - 2),
                       e.line, e.col);
    TermVec v;
    for (size_t i = 2; i < e.items.size(); ++i) v.push_back(term_from_sexpr(e.items[i], sig));
    return mk_adv(id, std::move(v));
  }
  throw ParseError("unknown symbol '" + head + "'", e.line, e.col);
}

}  // namespace detail

inline Term parse_term(std::string_view text, const Signature& sig) {
  return detail::term_from_sexpr(parse_sexpr(text), sig);
}

inline std::string render_term(const Term& t) {
  switch (t.fn()) {
    case Fn::Name: return "n." + t.ident();
    case Fn::True: return "true";
    case Fn::False: return "false";
    case Fn::Adv: {
      std::string s = "(adv " + t.ident();
      for (const auto& a : t.args()) s += " " + render_term(a);
      s += ")";
      return s;
    }
    default: {
      std::string s = "(";
      s += fn_name(t.fn());
      for (const auto& a : t.args()) s += " " + render_term(a);
      s += ")";
      return s;
    }
  }
}

// EXPR ::= (+ (* K IDENT)...)
inline LengthExpr parse_length_expr(const SExpr& e) {
  if (!e.headed("+")) throw ParseError("expected (+ (* K IDENT)...)", e.line, e.col);
  LengthExpr r;
  for (size_t i = 1; i < e.size(); ++i) {
    const SExpr& m = e[i];
    if (!m.headed("*") || m.size() != 3 || !m[1].atom || !m[2].atom)
      throw ParseError("expected (* K IDENT)", m.line, m.col);
    long long k;
    try {
      k = std::stoll(m[1].text);
    } catch (...) {
      throw ParseError("expected an integer coefficient", m[1].line, m[1].col);
    }
    if (k <= 0) throw ParseError("coefficients must be positive", m[1].line, m[1].col);
    r.add(m[2].text, k);
  }
  return r;
}

// Shared preamble of term/goal/proof files. Returns true when `e` was a
// declaration form; the caller handles everything else.
inline bool apply_declaration(const SExpr& e, Signature& sig, LengthDecls& decls) {
  if (e.headed("decl-adv")) {
    if (e.size() != 3 || !e[1].atom || !e[2].atom)
      throw ParseError("expected (decl-adv IDENT ARITY)", e.line, e.col);
    size_t arity;
    try {
      arity = static_cast<size_t>(std::stoul(e[2].text));
    } catch (...) {
      throw ParseError("expected an arity", e[2].line, e[2].col);
    }
    sig.declare_adv(e[1].text, arity);
    return true;
  }
  if (e.headed("decl-len-const")) {
    if (e.size() != 2 || !e[1].atom)
      throw ParseError("expected (decl-len-const IDENT)", e.line, e.col);
    decls.declare_const(e[1].text);
    return true;
  }
  if (e.headed("decl-len-eq")) {
    if (e.size() != 3 || !e[1].atom || e[1].text.rfind("n.", 0) != 0)
      throw ParseError("expected (decl-len-eq n.IDENT EXPR)", e.line, e.col);
    decls.declare_name_eq(e[1].text.substr(2), parse_length_expr(e[2]));
    return true;
  }
  if (e.headed("decl-len-pad")) {
    if (e.size() != 3 || !e[1].atom)
      throw ParseError("expected (decl-len-pad IDENT EXPR)", e.line, e.col);
    sig.declare_adv(e[1].text, 1);
    decls.declare_pad(e[1].text, parse_length_expr(e[2]));
    return true;
  }
  if (e.headed("decl-len-zero")) {
    if (e.size() != 3 || !e[1].atom)
      throw ParseError("expected (decl-len-zero IDENT EXPR)", e.line, e.col);
    sig.declare_adv(e[1].text, 0);
    decls.declare_zero_const(e[1].text, parse_length_expr(e[2]));
    return true;
  }
  return false;
}

struct GoalFile {
  Signature sig;
  LengthDecls decls;
  TermVec left, right;
  TermVec hints;
};

struct TermFile {
  Signature sig;
  LengthDecls decls;
  Term term;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GoalFile parse_goal_text(std::string_view text) {
  GoalFile g;
  bool have_goal = false;
  for (const SExpr& e : parse_sexprs(text)) {
    if (apply_declaration(e, g.sig, g.decls)) continue;
    if (e.headed("hint")) {
      if (e.size() != 2) throw ParseError("expected (hint TERM)", e.line, e.col);
      g.hints.push_back(detail::term_from_sexpr(e[1], g.sig));
      continue;
    }
    if (e.headed("goal")) {
      if (have_goal) throw ParseError("duplicate goal", e.line, e.col);
      if (e.size() != 3 || !e[1].headed("left") || !e[2].headed("right"))
        throw ParseError("expected (goal (left term*) (right term*))", e.line, e.col);
      for (size_t i = 1; i < e[1].size(); ++i)
        g.left.push_back(detail::term_from_sexpr(e[1][i], g.sig));
      for (size_t i = 1; i < e[2].size(); ++i)
        g.right.push_back(detail::term_from_sexpr(e[2][i], g.sig));
      if (g.left.size() != g.right.size())
        throw ParseError("goal sides must have equal length", e.line, e.col);
      have_goal = true;
      continue;
    }
    throw ParseError("unexpected form in goal file", e.line, e.col);
  }
  if (!have_goal) throw std::runtime_error("goal file contains no (goal ...)");
  return g;
}

inline GoalFile parse_goal_file(const std::string& path) { return parse_goal_text(read_file(path)); }

inline TermFile parse_term_text(std::string_view text) {
  TermFile f;
  bool have_term = false;
  for (const SExpr& e : parse_sexprs(text)) {
    if (apply_declaration(e, f.sig, f.decls)) continue;
    if (have_term) throw ParseError("more than one term in file", e.line, e.col);
    f.term = detail::term_from_sexpr(e, f.sig);
    have_term = true;
  }
  if (!have_term) throw std::runtime_error("file contains no term");
  return f;
}

inline TermFile parse_term_file(const std::string& path) { return parse_term_text(read_file(path)); }

// >_u override: one canonical rendering per line, earlier = smaller.
inline std::vector<Term> parse_order_file(const std::string& path, const Signature& sig) {
  std::vector<Term> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == ';') continue;
    out.push_back(parse_term(line, sig));
  }
  return out;
}

}  // namespace bcidx

#endif  // BCIDX_PARSE_HPP
