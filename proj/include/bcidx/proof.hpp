#ifndef BCIDX_PROOF_HPP
#define BCIDX_PROOF_HPP

#include <map>
#include <string>
#include <variant>

#include "bcidx/cca.hpp"
#include "bcidx/sequent.hpp"

namespace bcidx {

struct ReflRule { NameRenaming ren; };
struct FaRule { std::string sym; size_t count = 0; size_t index = 0; };
struct DupRule {};
struct CsRule { std::vector<size_t> targets; };
struct RwRule { bool left_side = true; size_t index = 0; Term replacement; };
struct PermRule { std::vector<size_t> perm; };  // premise[j] = conclusion[perm[j]]
struct SymRule {};
struct RestrRule { std::vector<size_t> kept; };  // conclusion[j] = premise[kept[j]]
struct CcaRule { CcaStructure str; };

using RuleApp = std::variant<ReflRule, FaRule, DupRule, CsRule, RwRule, PermRule, SymRule,
                             RestrRule, CcaRule>;

inline const char* rule_app_name(const RuleApp& r) {
  struct V {
    const char* operator()(const ReflRule&) { return "refl"; }
    const char* operator()(const FaRule&) { return "fa"; }
    const char* operator()(const DupRule&) { return "dup"; }
    const char* operator()(const CsRule&) { return "cs"; }
    const char* operator()(const RwRule&) { return "rw"; }
    const char* operator()(const PermRule&) { return "perm"; }
    const char* operator()(const SymRule&) { return "sym"; }
    const char* operator()(const RestrRule&) { return "restr"; }
    const char* operator()(const CcaRule&) { return "cca"; }
  };
  return std::visit(V{}, r);
}

inline size_t rule_premise_count(const RuleApp& r) {
  if (std::holds_alternative<ReflRule>(r) || std::holds_alternative<CcaRule>(r)) return 0;
  if (std::holds_alternative<CsRule>(r)) return 2;
  return 1;
}

struct Derivation {
  Sequent conclusion;
  RuleApp rule;
  std::vector<Derivation> premises;
};

// FA peels `sym` at one component; the symbol is named on the wire, the
// paper's schema being positional.
inline bool head_matches(const Term& t, const std::string& sym, size_t count) {
  if (t.arity() != count) return false;
  if (t.is(Fn::Adv)) return t.ident() == sym;
  if (t.is(Fn::Name)) return false;  // names are not function applications
  return sym == fn_name(t.fn());
}

namespace detail {

inline Sequent splice_at(const Sequent& s, size_t index) {
  Sequent p;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i == index) {
      for (const auto& a : s.left[i].args()) p.left.push_back(a);
      for (const auto& a : s.right[i].args()) p.right.push_back(a);
    } else {
      p.left.push_back(s.left[i]);
      p.right.push_back(s.right[i]);
    }
  }
  return p;
}

inline bool is_strictly_increasing(const std::vector<size_t>& v) {
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] <= v[i - 1]) return false;
  return true;
}

}  // namespace detail

// Checks one rule instance against its conclusion and premise sequents.
inline Verdict check_step(const RuleApp& rule, const Sequent& concl,
                          const std::vector<Sequent>& premises, const CanonicalOrder& ord,
                          const LengthDecls& decls) {
  Verdict v;
  if (concl.left.size() != concl.right.size()) {
    v.fail("schema", "conclusion sides have different lengths");
    return v;
  }
  for (const auto& p : premises)
    if (p.left.size() != p.right.size()) {
      v.fail("schema", "premise sides have different lengths");
      return v;
    }
  if (premises.size() != rule_premise_count(rule)) {
    v.fail("schema", std::string(rule_app_name(rule)) + " expects " +
                         std::to_string(rule_premise_count(rule)) + " premises, got " +
                         std::to_string(premises.size()));
    return v;
  }
  size_t n = concl.size();

  if (auto* r = std::get_if<ReflRule>(&rule)) {
    if (!r->ren.injective()) {
      v.fail("refl", "renaming is not injective");
      return v;
    }
    std::unordered_set<std::string> lnames;
    for (const auto& t : concl.left) collect_names(t, lnames);
    if (!r->ren.injective_on(lnames)) {
      v.fail("refl", "renaming does not act bijectively on the left-side names");
      return v;
    }
    for (size_t i = 0; i < n; ++i)
      if (r->ren.apply(concl.left[i]) != concl.right[i]) {
        v.fail("refl", "component " + std::to_string(i) + " is not the renaming of the left side");
        return v;
      }
    return v;
  }

  if (auto* r = std::get_if<FaRule>(&rule)) {
    if (r->sym == "zero") {
      v.fail("fa", "function application on zero is not allowed");
      return v;
    }
    if (r->index >= n) {
      v.fail("fa", "component index out of range");
      return v;
    }
    if (!head_matches(concl.left[r->index], r->sym, r->count) ||
        !head_matches(concl.right[r->index], r->sym, r->count)) {
      v.fail("fa", "component " + std::to_string(r->index) + " is not headed by " + r->sym + "/" +
                       std::to_string(r->count) + " on both sides");
      return v;
    }
    if (premises[0] != detail::splice_at(concl, r->index)) {
      v.fail("fa", "premise does not expose the arguments of " + r->sym);
      return v;
    }
    return v;
  }

  if (std::holds_alternative<DupRule>(rule)) {
    if (n < 2) {
      v.fail("dup", "conclusion too short");
      return v;
    }
    if (concl.left[n - 1] != concl.left[n - 2] || concl.right[n - 1] != concl.right[n - 2]) {
      v.fail("dup", "trailing components are not duplicates");
      return v;
    }
    Sequent expect{TermVec(concl.left.begin(), concl.left.end() - 1),
                   TermVec(concl.right.begin(), concl.right.end() - 1)};
    if (premises[0] != expect) {
      v.fail("dup", "premise is not the conclusion without the duplicate");
      return v;
    }
    return v;
  }

  if (auto* r = std::get_if<CsRule>(&rule)) {
    if (r->targets.empty() || !detail::is_strictly_increasing(r->targets) ||
        r->targets.back() >= n) {
      v.fail("cs", "invalid target indices");
      return v;
    }
    Term b = concl.left[r->targets[0]].is(Fn::Ite) ? concl.left[r->targets[0]].arg(0) : Term();
    Term b2 = concl.right[r->targets[0]].is(Fn::Ite) ? concl.right[r->targets[0]].arg(0) : Term();
    for (size_t t : r->targets) {
      const Term& l = concl.left[t];
      const Term& rr = concl.right[t];
      if (!l.is(Fn::Ite) || !rr.is(Fn::Ite)) {
        v.fail("cs", "target " + std::to_string(t) + " is not a conditional on both sides");
        return v;
      }
      if (l.arg(0) != b || rr.arg(0) != b2) {
        v.fail("cs", "targets do not share one conditional per side");
        return v;
      }
    }
    if (!b.if_free() || !b2.if_free()) {
      v.fail("cs", "case-study conditionals must not contain conditionals");
      return v;
    }
    // Premises: passengers (in order), the conditional, then the branches.
    auto build = [&](bool then_branch) {
      Sequent p;
      for (size_t i = 0; i < n; ++i) {
        if (std::find(r->targets.begin(), r->targets.end(), i) != r->targets.end()) continue;
        p.left.push_back(concl.left[i]);
        p.right.push_back(concl.right[i]);
      }
      p.left.push_back(b);
      p.right.push_back(b2);
      for (size_t t : r->targets) {
        p.left.push_back(concl.left[t].arg(then_branch ? 1 : 2));
        p.right.push_back(concl.right[t].arg(then_branch ? 1 : 2));
      }
      return p;
    };
    if (premises[0] != build(true)) {
      v.fail("cs", "first premise does not match the then-branches");
      return v;
    }
    if (premises[1] != build(false)) {
      v.fail("cs", "second premise does not match the else-branches");
      return v;
    }
    return v;
  }

  if (auto* r = std::get_if<RwRule>(&rule)) {
    if (r->index >= n) {
      v.fail("rw", "component index out of range");
      return v;
    }
    const TermVec& side = r->left_side ? concl.left : concl.right;
    if (!equal_mod_R(side[r->index], r->replacement, ord)) {
      v.fail("rw", "replacement is not equal modulo R to component " + std::to_string(r->index));
      return v;
    }
    Sequent expect = concl;
    (r->left_side ? expect.left : expect.right)[r->index] = r->replacement;
    if (premises[0] != expect) {
      v.fail("rw", "premise does not apply the recorded replacement");
      return v;
    }
    return v;
  }

  if (auto* r = std::get_if<PermRule>(&rule)) {
    if (r->perm.size() != n) {
      v.fail("perm", "permutation has wrong length");
      return v;
    }
    std::vector<bool> seen(n, false);
    for (size_t i : r->perm) {
      if (i >= n || seen[i]) {
        v.fail("perm", "not a permutation");
        return v;
      }
      seen[i] = true;
    }
    Sequent expect;
    for (size_t j = 0; j < n; ++j) {
      expect.left.push_back(concl.left[r->perm[j]]);
      expect.right.push_back(concl.right[r->perm[j]]);
    }
    if (premises[0] != expect) {
      v.fail("perm", "premise is not the permuted conclusion");
      return v;
    }
    return v;
  }

  if (std::holds_alternative<SymRule>(rule)) {
    if (premises[0].left != concl.right || premises[0].right != concl.left) {
      v.fail("sym", "premise is not the swapped conclusion");
      return v;
    }
    return v;
  }

  if (auto* r = std::get_if<RestrRule>(&rule)) {
    if (r->kept.size() != n || !detail::is_strictly_increasing(r->kept)) {
      v.fail("restr", "kept indices must list one strictly increasing premise index per component");
      return v;
    }
    const Sequent& p = premises[0];
    if (!r->kept.empty() && r->kept.back() >= p.size()) {
      v.fail("restr", "kept index out of range");
      return v;
    }
    for (size_t j = 0; j < n; ++j)
      if (p.left[r->kept[j]] != concl.left[j] || p.right[r->kept[j]] != concl.right[j]) {
        v.fail("restr", "conclusion is not the restriction of the premise");
        return v;
      }
    return v;
  }

  if (auto* r = std::get_if<CcaRule>(&rule)) {
    return verify_cca_instance(concl, r->str, decls, ord);
  }

  v.fail("schema", "unknown rule");
  return v;
}

namespace detail {
inline bool check_proof_rec(const Derivation& d, const CanonicalOrder& ord,
                            const LengthDecls& decls, std::vector<uint32_t>& path, Verdict& out) {
  std::vector<Sequent> prem;
  prem.reserve(d.premises.size());
  for (const auto& p : d.premises) prem.push_back(p.conclusion);
  Verdict v = check_step(d.rule, d.conclusion, prem, ord, decls);
  for (auto& nnote : v.notes) {
    nnote.path = path;
    out.notes.push_back(nnote);
  }
  if (!v.ok) {
    for (auto& diag : v.diags) {
      diag.path = path;
      out.diags.push_back(diag);
    }
    out.ok = false;
    return false;
  }
  for (size_t i = 0; i < d.premises.size(); ++i) {
    path.push_back(static_cast<uint32_t>(i));
    bool ok = check_proof_rec(d.premises[i], ord, decls, path, out);
    path.pop_back();
    if (!ok) return false;
  }
  return true;
}
}  // namespace detail

// Accepts iff every node's check_step accepts; on failure the verdict
// carries the path of the first failing node (depth-first, premise order).
inline Verdict check_proof(const Derivation& d, const CanonicalOrder& ord,
                           const LengthDecls& decls) {
  Verdict out;
  std::vector<uint32_t> path;
  detail::check_proof_rec(d, ord, decls, path, out);
  return out;
}

struct ProofStats {
  size_t height = 0;
  size_t node_count = 0;
  std::map<std::string, size_t> rule_histogram;
};

inline void proof_stats_rec(const Derivation& d, size_t depth, ProofStats& s) {
  s.node_count++;
  s.height = std::max(s.height, depth);
  s.rule_histogram[rule_app_name(d.rule)]++;
  for (const auto& p : d.premises) proof_stats_rec(p, depth + 1, s);
}

inline ProofStats proof_stats(const Derivation& d) {
  ProofStats s;
  proof_stats_rec(d, 1, s);
  return s;
}

// ---------------------------------------------------------------------------
// Restr elimination: Restr commutes through the other rules and is absorbed
// at Refl/CCA leaves (the unitary axioms are closed under Restr).
// ---------------------------------------------------------------------------

namespace detail {

using Mask = std::vector<bool>;

inline Sequent mask_sequent(const Sequent& s, const Mask& m) {
  Sequent r;
  for (size_t i = 0; i < s.size(); ++i)
    if (m[i]) {
      r.left.push_back(s.left[i]);
      r.right.push_back(s.right[i]);
    }
  return r;
}

inline size_t rank_before(const Mask& m, size_t idx) {
  size_t r = 0;
  for (size_t i = 0; i < idx; ++i)
    if (m[i]) ++r;
  return r;
}

// Proof of the masked conclusion, no larger than the input. The input must
// be valid and Restr-free below this node.
inline Derivation drop_components(const Derivation& d, const Mask& mask) {
  if (std::all_of(mask.begin(), mask.end(), [](bool b) { return b; })) return d;
  Sequent target = mask_sequent(d.conclusion, mask);

  if (std::holds_alternative<ReflRule>(d.rule) || std::holds_alternative<CcaRule>(d.rule))
    return Derivation{target, d.rule, {}};

  if (auto* r = std::get_if<FaRule>(&d.rule)) {
    Mask child(mask.begin(), mask.begin() + r->index);
    child.insert(child.end(), r->count, mask[r->index]);
    child.insert(child.end(), mask.begin() + r->index + 1, mask.end());
    Derivation sub = drop_components(d.premises[0], child);
    if (!mask[r->index]) return sub;
    FaRule nr{r->sym, r->count, rank_before(mask, r->index)};
    return Derivation{target, nr, {std::move(sub)}};
  }

  if (std::holds_alternative<DupRule>(d.rule)) {
    size_t n = d.conclusion.size();
    Mask child(mask.begin(), mask.end() - 2);
    child.push_back(mask[n - 2] || mask[n - 1]);
    Derivation sub = drop_components(d.premises[0], child);
    if (mask[n - 2] && mask[n - 1]) return Derivation{target, DupRule{}, {std::move(sub)}};
    return sub;
  }

  if (auto* r = std::get_if<CsRule>(&d.rule)) {
    std::vector<size_t> kept_targets;
    for (size_t t : r->targets)
      if (mask[t]) kept_targets.push_back(t);
    auto child_mask = [&](bool keep_cond) {
      // Premise layout: passengers, conditional, branches (target order).
      Mask m;
      for (size_t i = 0; i < d.conclusion.size(); ++i) {
        if (std::find(r->targets.begin(), r->targets.end(), i) != r->targets.end()) continue;
        m.push_back(mask[i]);
      }
      m.push_back(keep_cond);
      for (size_t t : r->targets) m.push_back(keep_cond && mask[t]);
      return m;
    };
    if (kept_targets.empty()) return drop_components(d.premises[0], child_mask(false));
    CsRule nr;
    for (size_t t : kept_targets) nr.targets.push_back(rank_before(mask, t));
    Derivation s1 = drop_components(d.premises[0], child_mask(true));
    Derivation s2 = drop_components(d.premises[1], child_mask(true));
    return Derivation{target, nr, {std::move(s1), std::move(s2)}};
  }

  if (auto* r = std::get_if<RwRule>(&d.rule)) {
    Derivation sub = drop_components(d.premises[0], mask);
    if (!mask[r->index]) return sub;
    RwRule nr{r->left_side, rank_before(mask, r->index), r->replacement};
    return Derivation{target, nr, {std::move(sub)}};
  }

  if (auto* r = std::get_if<PermRule>(&d.rule)) {
    Mask child(r->perm.size());
    for (size_t j = 0; j < r->perm.size(); ++j) child[j] = mask[r->perm[j]];
    PermRule nr;
    for (size_t j = 0; j < r->perm.size(); ++j)
      if (child[j]) nr.perm.push_back(rank_before(mask, r->perm[j]));
    Derivation sub = drop_components(d.premises[0], child);
    return Derivation{target, nr, {std::move(sub)}};
  }

  if (std::holds_alternative<SymRule>(d.rule)) {
    Derivation sub = drop_components(d.premises[0], mask);
    return Derivation{target, SymRule{}, {std::move(sub)}};
  }

  if (auto* r = std::get_if<RestrRule>(&d.rule)) {
    Mask child(d.premises[0].conclusion.size(), false);
    for (size_t j = 0; j < r->kept.size(); ++j) child[r->kept[j]] = mask[j];
    return drop_components(d.premises[0], child);
  }

  throw std::logic_error("drop_components: unhandled rule");
}

}  // namespace detail

// Returns a proof of the same conclusion with zero Restr nodes and height
// no larger than the input's. The input must pass check_proof.
inline Derivation eliminate_restr(const Derivation& d) {
  std::vector<Derivation> prem;
  prem.reserve(d.premises.size());
  for (const auto& p : d.premises) prem.push_back(eliminate_restr(p));
  if (auto* r = std::get_if<RestrRule>(&d.rule)) {
    detail::Mask mask(prem[0].conclusion.size(), false);
    for (size_t k : r->kept) mask[k] = true;
    return detail::drop_components(prem[0], mask);
  }
  return Derivation{d.conclusion, d.rule, std::move(prem)};
}

inline bool has_restr(const Derivation& d) {
  if (std::holds_alternative<RestrRule>(d.rule)) return true;
  for (const auto& p : d.premises)
    if (has_restr(p)) return true;
  return false;
}

}  // namespace bcidx

#endif  // BCIDX_PROOF_HPP
