#ifndef BCIDX_PROOF_IO_HPP
#define BCIDX_PROOF_IO_HPP

#include <sstream>
#include <string>

#include "bcidx/parse.hpp"
#include "bcidx/proof.hpp"

namespace bcidx {

struct ProofFile {
  Signature sig;
  LengthDecls decls;
  Derivation proof;
};

namespace detail {

inline std::vector<size_t> indices_from(const SExpr& e, size_t first) {
  std::vector<size_t> out;
  for (size_t i = first; i < e.size(); ++i) {
    if (!e[i].atom) throw ParseError("expected an index", e[i].line, e[i].col);
    out.push_back(std::stoul(e[i].text));
  }
  return out;
}

inline NameRenaming renaming_from(const SExpr& e, size_t first) {
  NameRenaming ren;
  for (size_t i = first; i < e.size(); ++i) {
    const SExpr& p = e[i];
    if (!p.is_list() || p.size() != 2 || !p[0].atom || !p[1].atom ||
        p[0].text.rfind("n.", 0) != 0 || p[1].text.rfind("n.", 0) != 0)
      throw ParseError("expected a pair (n.a n.b)", p.line, p.col);
    ren.add(p[0].text.substr(2), p[1].text.substr(2));
  }
  return ren;
}

inline CcaStructure cca_from_sexpr(const SExpr& e, const Signature& sig) {
  CcaStructure str;
  if (e.size() != 4 || !e[1].headed("keys") || !e[2].headed("renaming") || !e[3].headed("calls"))
    throw ParseError("expected (cca (keys ...) (renaming ...) (calls ...))", e.line, e.col);
  for (size_t i = 1; i < e[1].size(); ++i) {
    if (!e[1][i].atom || e[1][i].text.rfind("n.", 0) != 0)
      throw ParseError("expected a key name n.IDENT", e[1][i].line, e[1][i].col);
    str.keys.push_back(e[1][i].text.substr(2));
  }
  str.renaming = renaming_from(e[2], 1);
  for (size_t i = 1; i < e[3].size(); ++i) {
    const SExpr& c = e[3][i];
    bool is_enc = c.headed("enc-call");
    if (!is_enc && !c.headed("dec-call"))
      throw ParseError("expected (enc-call ...) or (dec-call ...)", c.line, c.col);
    if (c.size() != 4 || !c[1].atom || !c[2].headed("left") || c[2].size() != 2 ||
        !c[3].headed("right") || c[3].size() != 2)
      throw ParseError("expected (enc-call HANDLE (left TERM) (right TERM))", c.line, c.col);
    str.calls.push_back({is_enc, c[1].text, term_from_sexpr(c[2][1], sig),
                         term_from_sexpr(c[3][1], sig)});
  }
  return str;
}

inline RuleApp rule_from_sexpr(const SExpr& e, const Signature& sig) {
  if (e.atom) {
    if (e.text == "dup") return DupRule{};
    if (e.text == "sym") return SymRule{};
    throw ParseError("unknown rule '" + e.text + "'", e.line, e.col);
  }
  if (e.headed("refl")) {
    if (e.size() != 2 || !e[1].headed("ren"))
      throw ParseError("expected (refl (ren (n.a n.b)...))", e.line, e.col);
    return ReflRule{renaming_from(e[1], 1)};
  }
  if (e.headed("fa")) {
    if (e.size() != 4 || !e[1].atom || !e[2].atom || !e[3].atom)
      throw ParseError("expected (fa IDENT COUNT IDX)", e.line, e.col);
    return FaRule{e[1].text, std::stoul(e[2].text), std::stoul(e[3].text)};
  }
  if (e.headed("cs")) {
    if (e.size() != 2 || !e[1].headed("targets"))
      throw ParseError("expected (cs (targets IDX...))", e.line, e.col);
    return CsRule{indices_from(e[1], 1)};
  }
  if (e.headed("rw")) {
    if (e.size() != 4 || !e[1].atom || (e[1].text != "left" && e[1].text != "right") || !e[2].atom)
      throw ParseError("expected (rw SIDE IDX term)", e.line, e.col);
    return RwRule{e[1].text == "left", std::stoul(e[2].text), term_from_sexpr(e[3], sig)};
  }
  if (e.headed("perm")) return PermRule{indices_from(e, 1)};
  if (e.headed("restr")) return RestrRule{indices_from(e, 1)};
  if (e.headed("cca")) return CcaRule{cca_from_sexpr(e, sig)};
  throw ParseError("unknown rule form", e.line, e.col);
}

inline Derivation proof_from_sexpr(const SExpr& e, const Signature& sig) {
  if (!e.headed("rule") || e.size() < 3)
    throw ParseError("expected (rule RULE (concl ...) premise*)", e.line, e.col);
  Derivation d;
  d.rule = rule_from_sexpr(e[1], sig);
  const SExpr& c = e[2];
  if (!c.headed("concl") || c.size() != 3 || !c[1].headed("left") || !c[2].headed("right"))
    throw ParseError("expected (concl (left term*) (right term*))", c.line, c.col);
  for (size_t i = 1; i < c[1].size(); ++i)
    d.conclusion.left.push_back(term_from_sexpr(c[1][i], sig));
  for (size_t i = 1; i < c[2].size(); ++i)
    d.conclusion.right.push_back(term_from_sexpr(c[2][i], sig));
  for (size_t i = 3; i < e.size(); ++i) d.premises.push_back(proof_from_sexpr(e[i], sig));
  return d;
}

inline void render_rule(std::ostream& os, const RuleApp& rule) {
  struct V {
    std::ostream& os;
    void operator()(const ReflRule& r) {
      os << "(refl (ren";
      std::map<std::string, std::string> sorted(r.ren.pairs().begin(), r.ren.pairs().end());
      for (const auto& [a, b] : sorted) os << " (n." << a << " n." << b << ")";
      os << "))";
    }
    void operator()(const FaRule& r) { os << "(fa " << r.sym << " " << r.count << " " << r.index << ")"; }
    void operator()(const DupRule&) { os << "dup"; }
    void operator()(const CsRule& r) {
      os << "(cs (targets";
      for (size_t t : r.targets) os << " " << t;
      os << "))";
    }
    void operator()(const RwRule& r) {
      os << "(rw " << (r.left_side ? "left" : "right") << " " << r.index << " "
         << render_term(r.replacement) << ")";
    }
    void operator()(const PermRule& r) {
      os << "(perm";
      for (size_t i : r.perm) os << " " << i;
      os << ")";
    }
    void operator()(const SymRule&) { os << "sym"; }
    void operator()(const RestrRule& r) {
      os << "(restr";
      for (size_t i : r.kept) os << " " << i;
      os << ")";
    }
    void operator()(const CcaRule& r) {
      os << "(cca (keys";
      for (const auto& k : r.str.keys) os << " n." << k;
      os << ") (renaming";
      std::map<std::string, std::string> sorted(r.str.renaming.pairs().begin(),
                                                r.str.renaming.pairs().end());
      for (const auto& [a, b] : sorted) os << " (n." << a << " n." << b << ")";
      os << ") (calls";
      for (const auto& c : r.str.calls) {
        os << " (" << (c.is_enc ? "enc-call" : "dec-call") << " " << c.handle << " (left "
           << render_term(c.left) << ") (right " << render_term(c.right) << ")";
        os << ")";
      }
      os << "))";
    }
  };
  std::visit(V{os}, rule);
}

inline void render_proof_rec(std::ostream& os, const Derivation& d, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  os << pad << "(rule ";
  render_rule(os, d.rule);
  os << "\n" << pad << "  (concl (left";
  for (const auto& t : d.conclusion.left) os << " " << render_term(t);
  os << ") (right";
  for (const auto& t : d.conclusion.right) os << " " << render_term(t);
  os << "))";
  for (const auto& p : d.premises) {
    os << "\n";
    render_proof_rec(os, p, indent + 1);
  }
  os << ")";
}

inline void collect_adv_arities(const Term& t, std::map<std::string, size_t>& out) {
  if (t.is(Fn::Adv)) out[t.ident()] = t.arity();
  for (const auto& a : t.args()) collect_adv_arities(a, out);
}

inline void collect_proof_advs(const Derivation& d, std::map<std::string, size_t>& out) {
  for (const auto& t : d.conclusion.left) collect_adv_arities(t, out);
  for (const auto& t : d.conclusion.right) collect_adv_arities(t, out);
  if (auto* r = std::get_if<RwRule>(&d.rule)) collect_adv_arities(r->replacement, out);
  if (auto* r = std::get_if<CcaRule>(&d.rule))
    for (const auto& c : r->str.calls) {
      collect_adv_arities(c.left, out);
      collect_adv_arities(c.right, out);
    }
  for (const auto& p : d.premises) collect_proof_advs(p, out);
}

}  // namespace detail

inline ProofFile parse_proof_text(std::string_view text) {
  ProofFile f;
  bool have_proof = false;
  for (const SExpr& e : parse_sexprs(text)) {
    if (apply_declaration(e, f.sig, f.decls)) continue;
    if (have_proof) throw ParseError("more than one proof in file", e.line, e.col);
    f.proof = detail::proof_from_sexpr(e, f.sig);
    have_proof = true;
  }
  if (!have_proof) throw std::runtime_error("file contains no proof");
  return f;
}

inline ProofFile parse_proof_file(const std::string& path) {
  return parse_proof_text(read_file(path));
}

inline void render_length_decls(std::ostream& os, const LengthDecls& decls) {
  for (const auto& c : decls.consts()) os << "(decl-len-const " << c << ")\n";
  for (const auto& [n, e] : decls.name_eqs()) os << "(decl-len-eq n." << n << " " << e.render() << ")\n";
  for (const auto& [id, e] : decls.pads()) os << "(decl-len-pad " << id << " " << e.render() << ")\n";
  for (const auto& [id, e] : decls.zero_consts())
    os << "(decl-len-zero " << id << " " << e.render() << ")\n";
}

// Declarations are re-derived from the proof body plus the length decls so
// an emitted file always parses standalone.
inline std::string render_proof_file(const Derivation& d, const LengthDecls& decls) {
  std::ostringstream os;
  std::map<std::string, size_t> advs;
  detail::collect_proof_advs(d, advs);
  for (const auto& [id, e] : decls.pads()) advs.erase(id);
  for (const auto& [id, e] : decls.zero_consts()) advs.erase(id);
  for (const auto& [id, arity] : advs) os << "(decl-adv " << id << " " << arity << ")\n";
  render_length_decls(os, decls);
  detail::render_proof_rec(os, d, 0);
  os << "\n";
  return os.str();
}

}  // namespace bcidx

#endif  // BCIDX_PROOF_IO_HPP
