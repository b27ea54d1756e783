#ifndef BCIDX_CCA_HPP
#define BCIDX_CCA_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "bcidx/length.hpp"
#include "bcidx/parse.hpp"
#include "bcidx/rewrite.hpp"
#include "bcidx/sequent.hpp"

namespace bcidx {

// One left-right or decryption oracle call. Terms are recorded exactly as
// they appear in the conclusion sequent (right side after the renaming).
struct CcaCall {
  bool is_enc;
  std::string handle;
  Term left, right;
};

struct CcaStructure {
  std::vector<std::string> keys;  // name idents k with sk(k) in K
  NameRenaming renaming;          // mu; the instance is phi ~ psi mu
  std::vector<CcaCall> calls;     // oracle-call order
};

inline const char* kDummySymbol = "__dummy";

using GuardList = std::vector<Term>;  // eq(u, alpha) terms, canonically sorted

// elses((a=b)::G, x) = ite(eq(a,b), zero(x), elses(G, x)); elses([], x) = x.
inline Term elses(const GuardList& guards, const Term& x) {
  Term t = x;
  for (auto it = guards.rbegin(); it != guards.rend(); ++it) t = mk_ite(*it, mk_zero(x), t);
  return t;
}

struct GuardedDec {
  GuardList guards;
  Term core;  // dec(u, sk(k))
};

// Peels an elses chain: ite(eq(..), zero(core), ... core). Returns nullopt
// when the term is not of that exact shape.
inline std::optional<GuardedDec> parse_guarded_dec(const Term& t) {
  GuardList guards;
  TermVec zero_args;
  Term cur = t;
  while (cur.is(Fn::Ite) && cur.arg(0).is(Fn::Eq) && cur.arg(1).is(Fn::Zero)) {
    guards.push_back(cur.arg(0));
    zero_args.push_back(cur.arg(1).arg(0));
    cur = cur.arg(2);
  }
  if (!cur.is(Fn::Dec) || !cur.arg(1).is(Fn::Sk) || !cur.arg(1).arg(0).is_name())
    return std::nullopt;
  for (const auto& z : zero_args)
    if (z != cur) return std::nullopt;
  return GuardedDec{std::move(guards), cur};
}

namespace detail {

struct RegisteredEnc {
  std::string handle;
  Term value;  // enc(m, pk(k), r)
};

// Substitute every occurrence of a registered encryption by a fixed-body
// placeholder with the same key and randomness (outermost occurrences win),
// as in the membership test "x xi in u{enc 0 / enc _} down R".
inline Term blank_registered_encs(const Term& t, const std::vector<RegisteredEnc>& encs) {
  for (const auto& e : encs)
    if (t == e.value) return mk_enc(mk_true(), e.value.arg(1), e.value.arg(2));
  if (t.arity() == 0) return t;
  TermVec args;
  args.reserve(t.arity());
  for (const auto& a : t.args()) args.push_back(blank_registered_encs(a, encs));
  return Term::make(t.fn(), t.ident_id(), std::move(args));
}

}  // namespace detail

// Handles whose encryption randomness survives in u once every registered
// encryption body is blanked and the result R-normalized, restricted to
// encryptions under `key` (the decrypting key's name).
inline std::vector<std::string> guard_handles(const Term& u,
                                              const std::vector<detail::RegisteredEnc>& encs,
                                              const std::string& key, const CanonicalOrder& ord) {
  Term blanked = normalize(detail::blank_registered_encs(u, encs), ord);
  auto surviving = names_of(blanked);
  std::vector<std::string> out;
  for (const auto& e : encs) {
    if (e.value.arg(1).arg(0).ident() != key) continue;
    if (surviving.count(e.value.arg(2).ident())) out.push_back(e.handle);
  }
  return out;
}

namespace detail {

inline GuardList sorted_guards(const Term& u, const std::vector<std::string>& handles,
                               const std::map<std::string, Term>& enc_values) {
  GuardList g;
  for (const auto& h : handles) g.push_back(mk_eq(u, enc_values.at(h)));
  std::sort(g.begin(), g.end(), CanonicalLess{});
  return g;
}

}  // namespace detail

// The guard list a decryption of u under `pk` must carry, given the
// structure's left-side encryption calls: one eq(u, alpha) per registered
// encryption under pk that appears directly in u, in canonical order.
inline GuardList required_guards(const Term& u, const CcaStructure& str, const Term& pk,
                                 const CanonicalOrder& ord) {
  if (!pk.is(Fn::Pk) || !pk.arg(0).is_name())
    throw std::invalid_argument("required_guards: not a public key");
  const std::string key = pk.arg(0).ident();
  if (std::find(str.keys.begin(), str.keys.end(), key) == str.keys.end())
    throw std::invalid_argument("required_guards: the key's secret key is not in K");
  std::vector<detail::RegisteredEnc> encs;
  std::map<std::string, Term> values;
  for (const auto& c : str.calls)
    if (c.is_enc) {
      encs.push_back({c.handle, c.left});
      values[c.handle] = c.left;
    }
  return detail::sorted_guards(u, guard_handles(u, encs, key, ord), values);
}

// ---------------------------------------------------------------------------
// Syntactic side predicates.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string pos_str(const Position& p) {
  std::string s = "[";
  for (size_t i = 0; i < p.size(); ++i) s += (i ? "." : "") + std::to_string(p[i]);
  return s + "]";
}

// Occurrences of name `n` outside pk(n) subterms.
inline void nodec_scan(const Term& t, const std::string& n, Position& pos,
                       std::vector<Position>& out) {
  if (t.is(Fn::Pk) && t.arg(0).is_name() && t.arg(0).ident() == n) return;
  if (t.is_name() && t.ident() == n) {
    out.push_back(pos);
    return;
  }
  for (size_t i = 0; i < t.arity(); ++i) {
    pos.push_back(static_cast<uint32_t>(i));
    nodec_scan(t.arg(i), n, pos, out);
    pos.pop_back();
  }
}

// Occurrences of name `n` outside pk(n) and outside sk(n)-in-decryption-position.
inline void decpos_scan(const Term& t, const std::string& n, Position& pos,
                        std::vector<Position>& out) {
  if (t.is(Fn::Pk) && t.arg(0).is_name() && t.arg(0).ident() == n) return;
  if (t.is(Fn::Dec) && t.arg(1).is(Fn::Sk) && t.arg(1).arg(0).is_name() &&
      t.arg(1).arg(0).ident() == n) {
    pos.push_back(0);
    decpos_scan(t.arg(0), n, pos, out);
    pos.pop_back();
    return;
  }
  if (t.is_name() && t.ident() == n) {
    out.push_back(pos);
    return;
  }
  for (size_t i = 0; i < t.arity(); ++i) {
    pos.push_back(static_cast<uint32_t>(i));
    decpos_scan(t.arg(i), n, pos, out);
    pos.pop_back();
  }
}

// Occurrences of name `n` that are not the randomness argument of an
// encryption; collects the plaintext/key pairs of those that are.
inline void randpos_scan(const Term& t, const std::string& n, Position& pos,
                         std::vector<Position>& bad, std::vector<Term>& enc_occurrences) {
  if (t.is(Fn::Enc) && t.arg(2).is_name() && t.arg(2).ident() == n) {
    enc_occurrences.push_back(t);
    for (size_t i = 0; i < 2; ++i) {
      pos.push_back(static_cast<uint32_t>(i));
      randpos_scan(t.arg(i), n, pos, bad, enc_occurrences);
      pos.pop_back();
    }
    return;
  }
  if (t.is_name() && t.ident() == n) {
    bad.push_back(pos);
    return;
  }
  for (size_t i = 0; i < t.arity(); ++i) {
    pos.push_back(static_cast<uint32_t>(i));
    randpos_scan(t.arg(i), n, pos, bad, enc_occurrences);
    pos.pop_back();
  }
}

}  // namespace detail

// hiddenr(R; terms): every r in R appears only in encryption randomness
// position and always with the same encryption (single plaintext).
inline std::vector<Diag> hiddenr_violations(const std::set<std::string>& rands,
                                            const TermVec& terms) {
  std::vector<Diag> out;
  for (const auto& r : rands) {
    std::vector<Term> encs;
    for (size_t i = 0; i < terms.size(); ++i) {
      Position pos;
      std::vector<Position> bad;
      detail::randpos_scan(terms[i], r, pos, bad, encs);
      for (const auto& p : bad)
        out.push_back({"hiddenr",
                       "randomness n." + r + " appears outside encryption randomness position in component " +
                           std::to_string(i) + " at " + detail::pos_str(p),
                       {}});
    }
    for (size_t i = 1; i < encs.size(); ++i)
      if (encs[i] != encs[0]) {
        out.push_back({"hiddenr", "randomness n." + r + " is used with two distinct plaintexts", {}});
        break;
      }
  }
  return out;
}

// The four side predicates over an explicit scope, one diagnostic per
// violation with the witnessing position.
inline std::vector<Diag> check_side_conditions(const CcaStructure& str, const TermVec& terms) {
  std::vector<Diag> out;
  for (const auto& k : str.keys) {
    for (size_t i = 0; i < terms.size(); ++i) {
      Position pos;
      std::vector<Position> bad;
      detail::decpos_scan(terms[i], k, pos, bad);
      for (const auto& p : bad)
        out.push_back({"decpos",
                       "key n." + k + " outside decryption position in component " +
                           std::to_string(i) + " at " + detail::pos_str(p),
                       {}});
      pos.clear();
      bad.clear();
      detail::nodec_scan(terms[i], k, pos, bad);
      for (const auto& p : bad)
        out.push_back({"nodec",
                       "key n." + k + " occurs outside pk(n." + k + ") in component " +
                           std::to_string(i) + " at " + detail::pos_str(p),
                       {}});
    }
  }
  std::set<std::string> rands;
  for (const auto& c : str.calls)
    if (c.is_enc && c.left.is(Fn::Enc) && c.left.arg(2).is_name())
      rands.insert(c.left.arg(2).ident());
  for (const auto& r : rands)
    for (size_t i = 0; i < terms.size(); ++i)
      if (names_of(terms[i]).count(r))
        out.push_back({"freshness",
                       "randomness n." + r + " appears in component " + std::to_string(i), {}});
  auto hv = hiddenr_violations(rands, terms);
  out.insert(out.end(), hv.begin(), hv.end());
  return out;
}

// ---------------------------------------------------------------------------
// Instance verification: replay of the inductive R_CCA construction.
// ---------------------------------------------------------------------------

namespace detail {

struct Classified {
  // For each sequent index: index into calls, or -1 for base.
  std::vector<int> call_of_component;
  // For each call: matched sequent index, or -1 when dropped by Restr.
  std::vector<int> component_of_call;
  bool all_matched;
};

inline Classified classify(const Sequent& seq, const CcaStructure& str) {
  Classified c;
  c.call_of_component.assign(seq.size(), -1);
  c.component_of_call.assign(str.calls.size(), -1);
  c.all_matched = true;
  for (size_t ci = 0; ci < str.calls.size(); ++ci) {
    const auto& call = str.calls[ci];
    int found = -1;
    for (size_t i = 0; i < seq.size(); ++i) {
      if (c.call_of_component[i] != -1) continue;
      if (seq.left[i] == call.left && seq.right[i] == call.right) {
        found = static_cast<int>(i);
        break;
      }
    }
    if (found >= 0) {
      c.call_of_component[found] = static_cast<int>(ci);
      c.component_of_call[ci] = found;
    } else {
      c.all_matched = false;
    }
  }
  return c;
}

// Checks that u is t{enc handles}{dec handles} for a context t over
// Sigma \ {ite, zero} (dec arguments) or Sigma \ {zero} (enc bodies) with
// nodec(K; t), walking u and v in lockstep so both sides share one t.
struct ContextScan {
  const std::vector<std::pair<Term, Term>>& handle_values;  // (left, psi) pairs
  const std::set<std::string>& keys;
  bool allow_ite;
  Verdict& v;

  bool handles_match(const Term& a, const Term& b) const {
    for (const auto& [l, r] : handle_values)
      if (a == l && b == r) return true;
    return false;
  }

  void scan(const Term& a, const Term& b, const char* what) {
    if (handles_match(a, b)) return;
    if (a.fn() != b.fn() || a.ident_id() != b.ident_id() || a.arity() != b.arity()) {
      v.fail("cca-structure", std::string(what) + ": left and right are not built from a common "
                                                  "context over the oracle-call handles");
      return;
    }
    if (a.is(Fn::Zero)) {
      v.fail("cca-structure", std::string(what) + ": zero outside an oracle-call handle");
      return;
    }
    if (!allow_ite && a.is(Fn::Ite)) {
      v.fail("cca-structure", std::string(what) + ": conditional outside an oracle-call handle");
      return;
    }
    if (a.is_name() && keys.count(a.ident())) {
      v.fail("nodec", std::string(what) + ": key n." + a.ident() + " occurs outside pk");
      return;
    }
    if (a.is(Fn::Pk) && a.arg(0).is_name() && keys.count(a.arg(0).ident())) return;
    for (size_t i = 0; i < a.arity(); ++i) scan(a.arg(i), b.arg(i), what);
  }
};

}  // namespace detail

inline std::optional<std::pair<Sequent, CcaStructure>> try_complete_instance(
    const Sequent& seq, const CcaStructure& str, std::string* error);

// Replays the oracle-call construction over (phi, psi) with psi the
// un-renamed right side; accepts iff the sequent is exactly the constructed
// instance (base components first, calls in declared order, any positions).
inline Verdict verify_cca_instance(const Sequent& seq, const CcaStructure& str,
                                   const LengthDecls& decls, const CanonicalOrder& ord) {
  Verdict v;
  if (seq.left.size() != seq.right.size()) {
    v.fail("schema", "sequent sides have different lengths");
    return v;
  }

  std::set<std::string> keys(str.keys.begin(), str.keys.end());
  if (keys.size() != str.keys.size()) {
    v.fail("cca-structure", "duplicate key in K");
    return v;
  }
  {
    std::set<std::string> hs;
    for (const auto& c : str.calls) {
      if (!hs.insert(c.handle).second) {
        v.fail("cca-structure", "duplicate handle " + c.handle);
        return v;
      }
      if (c.is_enc &&
          !(c.left.is(Fn::Enc) && c.left.arg(1).is(Fn::Pk) && c.left.arg(1).arg(0).is_name())) {
        v.fail("cca-structure", "enc-call " + c.handle + " is not an encryption under a public key");
        return v;
      }
    }
  }
  if (!str.renaming.injective()) {
    v.fail("cca-structure", "renaming is not injective");
    return v;
  }
  NameRenaming mu_inv = str.renaming.inverse();
  {
    std::unordered_set<std::string> right_names;
    for (const auto& t : seq.right) collect_names(t, right_names);
    if (!mu_inv.injective_on(right_names)) {
      v.fail("cca-structure", "renaming does not act bijectively on the right side");
      return v;
    }
  }

  auto cls = detail::classify(seq, str);
  if (!cls.all_matched) {
    // The CCA axiom family is closed under Restr: complete the instance
    // (Prop.-style construction) and verify the completion instead.
    std::string err;
    auto completed = try_complete_instance(seq, str, &err);
    if (!completed) {
      v.fail("cca-structure", "instance cannot be completed: " + err);
      return v;
    }
    Verdict inner = verify_cca_instance(completed->first, completed->second, decls, ord);
    if (inner.ok) inner.note("cca", "Restr-weakened instance accepted via completion");
    return inner;
  }

  // psi = mu^{-1}(right).
  TermVec psi;
  psi.reserve(seq.size());
  for (const auto& t : seq.right) psi.push_back(mu_inv.apply(t));

  // Base: the no-oracle-call frame, equal on both sides, nodec(K; .).
  TermVec phi_scope, psi_scope;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (cls.call_of_component[i] != -1) continue;
    if (seq.left[i] != psi[i])
      v.fail("cca-structure",
             "base component " + std::to_string(i) + " differs between left and right (mod renaming)");
    for (const auto& k : keys) {
      Position pos;
      std::vector<Position> bad;
      detail::nodec_scan(seq.left[i], k, pos, bad);
      if (!bad.empty())
        v.fail("nodec", "key n." + k + " occurs outside pk in base component " + std::to_string(i));
    }
    phi_scope.push_back(seq.left[i]);
    psi_scope.push_back(psi[i]);
  }
  if (!v.ok) return v;

  std::vector<detail::RegisteredEnc> encsL, encsPsi;
  std::map<std::string, Term> encValL, encValPsi;
  std::vector<std::pair<Term, Term>> handle_values;  // (left, psi) of every call
  std::set<std::string> randsL, randsPsi, all_rands;

  auto run_hiddenr = [&](const TermVec& extraL, const TermVec& extraPsi) {
    TermVec lscope = phi_scope, rscope = psi_scope;
    lscope.insert(lscope.end(), extraL.begin(), extraL.end());
    rscope.insert(rscope.end(), extraPsi.begin(), extraPsi.end());
    size_t before = v.diags.size();
    for (const auto& d : hiddenr_violations(all_rands, lscope)) v.diags.push_back(d);
    for (const auto& d : hiddenr_violations(all_rands, rscope)) v.diags.push_back(d);
    if (v.diags.size() != before) v.ok = false;
  };

  for (const auto& call : str.calls) {
    int comp = cls.component_of_call[&call - str.calls.data()];
    Term lterm = seq.left[comp];
    Term pterm = psi[comp];

    if (call.is_enc) {
      if (!lterm.is(Fn::Enc) || !lterm.arg(1).is(Fn::Pk) || !lterm.arg(1).arg(0).is_name() ||
          !lterm.arg(2).is_name()) {
        v.fail("cca-structure", "enc-call " + call.handle + " left term is not enc(m, pk(k), r)");
        return v;
      }
      if (!pterm.is(Fn::Enc) || !pterm.arg(1).is(Fn::Pk) || !pterm.arg(1).arg(0).is_name() ||
          !pterm.arg(2).is_name()) {
        v.fail("cca-structure", "enc-call " + call.handle + " right term is not enc(m, pk(k), r)");
        return v;
      }
      std::string k = lterm.arg(1).arg(0).ident();
      if (!keys.count(k)) {
        v.fail("cca-structure", "enc-call " + call.handle + " uses key n." + k + " outside K");
        return v;
      }
      if (pterm.arg(1).arg(0).ident() != k) {
        v.fail("cca-structure", "enc-call " + call.handle + " uses different keys left and right");
        return v;
      }
      Term u = lterm.arg(0), w = pterm.arg(0);
      std::string rl = lterm.arg(2).ident(), rp = pterm.arg(2).ident();
      if (!randsL.insert(rl).second || !randsPsi.insert(rp).second) {
        v.fail("cca-structure", "randomness n." + rl + " used by two encryption calls");
        return v;
      }
      all_rands.insert(rl);
      all_rands.insert(rp);

      // fresh(r, r'; phi, u, psi, v)
      for (const auto& r : {rl, rp}) {
        bool hit = names_of(u).count(r) || names_of(w).count(r);
        for (const auto& t : phi_scope) hit = hit || names_of(t).count(r);
        for (const auto& t : psi_scope) hit = hit || names_of(t).count(r);
        if (hit)
          v.fail("freshness", "randomness n." + r + " of call " + call.handle +
                                  " appears in the preceding frame or bodies");
      }

      // Bodies are contexts over the previous oracle-call handles, without
      // zero, with nodec(K; t); conditionals are allowed below encryptions.
      // Enc bodies need not share a context across sides, so each side is
      // scanned against itself with same-side handle values.
      std::vector<std::pair<Term, Term>> hvL, hvPsi;
      for (const auto& [l, r] : handle_values) {
        hvL.push_back({l, l});
        hvPsi.push_back({r, r});
      }
      detail::ContextScan bodyL{hvL, keys, true, v};
      bodyL.scan(u, u, ("enc-call " + call.handle + " left body").c_str());
      detail::ContextScan bodyR{hvPsi, keys, true, v};
      bodyR.scan(w, w, ("enc-call " + call.handle + " right body").c_str());

      auto llen = length_of(u, decls), rlen = length_of(w, decls);
      if (llen && rlen) {
        if (*llen != *rlen)
          v.fail("length", "encryption call " + call.handle + " bodies have different lengths (" +
                               llen->render() + " vs " + rlen->render() + ")");
      } else {
        v.note("length", "encryption call " + call.handle +
                             " body length is not derivable; EQL side condition not checked");
      }

      run_hiddenr({u}, {w});
      if (!v.ok) return v;

      encsL.push_back({call.handle, lterm});
      encsPsi.push_back({call.handle, pterm});
      encValL[call.handle] = lterm;
      encValPsi[call.handle] = pterm;
      handle_values.push_back({lterm, pterm});
      phi_scope.push_back(lterm);
      psi_scope.push_back(pterm);
    } else {
      auto gl = parse_guarded_dec(lterm);
      auto gp = parse_guarded_dec(pterm);
      if (!gl || !gp) {
        v.fail("cca-structure",
               "dec-call " + call.handle + " is not an elses-guarded decryption");
        return v;
      }
      std::string k = gl->core.arg(1).arg(0).ident();
      if (!keys.count(k)) {
        v.fail("cca-structure", "dec-call " + call.handle + " uses key n." + k + " outside K");
        return v;
      }
      if (gp->core.arg(1).arg(0).ident() != k) {
        v.fail("cca-structure", "dec-call " + call.handle + " uses different keys left and right");
        return v;
      }
      Term u = gl->core.arg(0), w = gp->core.arg(0);

      // One shared context over enc and dec handles, if-free and zero-free.
      detail::ContextScan scan{handle_values, keys, false, v};
      scan.scan(u, w, ("dec-call " + call.handle).c_str());
      if (!v.ok) return v;

      auto yl = guard_handles(u, encsL, k, ord);
      auto yp = guard_handles(w, encsPsi, k, ord);
      if (yl != yp) {
        v.fail("cca-structure", "dec-call " + call.handle +
                                    " guard handle sets differ between left and right");
        return v;
      }
      GuardList expL = detail::sorted_guards(u, yl, encValL);
      GuardList expP = detail::sorted_guards(w, yl, encValPsi);
      if (gl->guards != expL) {
        v.fail("guard", "dec-call " + call.handle + " left guards do not match the required set (" +
                            std::to_string(gl->guards.size()) + " recorded, " +
                            std::to_string(expL.size()) + " required)");
      }
      if (gp->guards != expP) {
        v.fail("guard", "dec-call " + call.handle + " right guards do not match the required set (" +
                            std::to_string(gp->guards.size()) + " recorded, " +
                            std::to_string(expP.size()) + " required)");
      }
      run_hiddenr({u}, {w});
      if (!v.ok) return v;

      handle_values.push_back({lterm, pterm});
      phi_scope.push_back(lterm);
      psi_scope.push_back(pterm);
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Restr completion (the I^lr / I^l / I^r construction).
// ---------------------------------------------------------------------------

namespace detail {

inline bool occurs_in(const Term& needle, const Term& hay) { return contains(hay, needle); }

}  // namespace detail

// Extends a Restr-weakened instance into a full one: re-adds every oracle
// call reachable from the kept components, with dummy encryption bodies
// enc(__dummy(), pk, r) on the side where the original is not needed.
// Returns nullopt (with *error set) when the structure is unusable.
inline std::optional<std::pair<Sequent, CcaStructure>> try_complete_instance(
    const Sequent& seq, const CcaStructure& str, std::string* error) {
  auto fail = [&](const std::string& m) -> std::optional<std::pair<Sequent, CcaStructure>> {
    if (error) *error = m;
    return std::nullopt;
  };
  if (seq.left.size() != seq.right.size()) return fail("sequent sides differ in length");
  {
    std::set<std::string> hs;
    for (const auto& c : str.calls)
      if (!hs.insert(c.handle).second) return fail("duplicate handle " + c.handle);
  }

  auto cls = detail::classify(seq, str);
  size_t n = str.calls.size();

  // Dependencies via literal occurrence of call values.
  std::vector<std::set<size_t>> depsL(n), depsR(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (detail::occurs_in(str.calls[j].left, str.calls[i].left)) depsL[i].insert(j);
      if (detail::occurs_in(str.calls[j].right, str.calls[i].right)) depsR[i].insert(j);
    }

  std::vector<bool> needL(n, false), needR(n, false);
  std::vector<size_t> work;
  auto seed = [&](std::vector<bool>& need, bool left_side) {
    work.clear();
    for (size_t i = 0; i < seq.size(); ++i) {
      const Term& t = left_side ? seq.left[i] : seq.right[i];
      for (size_t j = 0; j < n; ++j)
        if (detail::occurs_in(left_side ? str.calls[j].left : str.calls[j].right, t) &&
            !need[j]) {
          need[j] = true;
          work.push_back(j);
        }
    }
    for (size_t ci = 0; ci < n; ++ci)
      if (cls.component_of_call[ci] != -1 && !need[ci]) {
        need[ci] = true;
        work.push_back(ci);
      }
    auto& deps = left_side ? depsL : depsR;
    while (!work.empty()) {
      size_t i = work.back();
      work.pop_back();
      for (size_t j : deps[i])
        if (!need[j]) {
          need[j] = true;
          work.push_back(j);
        }
    }
  };
  seed(needL, true);
  seed(needR, false);

  // Final per-side values, with dummies where a side is not needed.
  std::map<std::string, Term> finalL, finalR;
  auto dummify = [&](const CcaCall& call, bool left_side,
                     const std::map<std::string, Term>& finals) -> std::optional<Term> {
    const Term& orig = left_side ? call.left : call.right;
    if (call.is_enc) {
      if (!orig.is(Fn::Enc)) return std::nullopt;
      return mk_enc(mk_adv(kDummySymbol, {}), orig.arg(1), orig.arg(2));
    }
    auto gd = parse_guarded_dec(orig);
    if (!gd) return std::nullopt;
    // Substitute earlier calls' values by their final versions inside the
    // decrypted term, then rebuild the guards over the same handle set.
    auto subst = [&](const Term& t, auto&& self) -> Term {
      for (const auto& c2 : str.calls) {
        const Term& ov = left_side ? c2.left : c2.right;
        if (t == ov) {
          auto it = finals.find(c2.handle);
          if (it != finals.end()) return it->second;
          return t;
        }
      }
      if (t.arity() == 0) return t;
      TermVec args;
      args.reserve(t.arity());
      for (const auto& a : t.args()) args.push_back(self(a, self));
      return Term::make(t.fn(), t.ident_id(), std::move(args));
    };
    Term u2 = subst(gd->core.arg(0), subst);
    GuardList g2;
    for (const auto& g : gd->guards) g2.push_back(mk_eq(u2, subst(g.arg(1), subst)));
    std::sort(g2.begin(), g2.end(), CanonicalLess{});
    return elses(g2, mk_dec(u2, gd->core.arg(1)));
  };

  CcaStructure out_str;
  out_str.keys = str.keys;
  out_str.renaming = str.renaming;
  Sequent out_seq = seq;

  for (size_t ci = 0; ci < n; ++ci) {
    const auto& call = str.calls[ci];
    bool nl = needL[ci], nr = needR[ci];
    if (!nl && !nr) continue;  // dropped and unreferenced: omitted entirely
    Term l, r;
    if (nl) {
      l = call.left;
    } else {
      auto d = dummify(call, true, finalL);
      if (!d) return fail("cannot rebuild left side of call " + call.handle);
      l = *d;
    }
    if (nr) {
      r = call.right;
    } else {
      auto d = dummify(call, false, finalR);
      if (!d) return fail("cannot rebuild right side of call " + call.handle);
      r = *d;
    }
    finalL[call.handle] = l;
    finalR[call.handle] = r;
    out_str.calls.push_back({call.is_enc, call.handle, l, r});
    if (cls.component_of_call[ci] == -1) {
      out_seq.left.push_back(l);
      out_seq.right.push_back(r);
    }
  }
  return std::make_pair(std::move(out_seq), std::move(out_str));
}

inline std::pair<Sequent, CcaStructure> complete_instance(const Sequent& seq,
                                                          const CcaStructure& str) {
  std::string err;
  auto r = try_complete_instance(seq, str, &err);
  if (!r) throw std::runtime_error("cannot complete CCA instance: " + err);
  return *r;
}

}  // namespace bcidx

#endif  // BCIDX_CCA_HPP
