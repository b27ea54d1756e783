#ifndef BCIDX_SEARCH_HPP
#define BCIDX_SEARCH_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <future>
#include <mutex>
#include <optional>

#include "bcidx/proof.hpp"

namespace bcidx {

// ---------------------------------------------------------------------------
// Candidate terms: the B(t, t') pool bounding everything search may introduce.
// ---------------------------------------------------------------------------

struct CandidateSet {
  TermSet terms;                        // the pool
  TermSet goal_subterms;                // subterms of the normal forms (preferred)
  std::map<std::string, TermSet> per_key;  // contributions per secret-key name
  size_t max_member_size = 0;

  std::vector<Term> conditionals() const {
    std::vector<Term> out;
    for (const auto& t : goal_subterms)
      if (t.conditional_ok() && t.if_free()) out.push_back(t);
    for (const auto& t : terms)
      if (t.conditional_ok() && t.if_free() && !goal_subterms.count(t)) out.push_back(t);
    return out;
  }
};

namespace detail {

inline void zeta_product(const Term& u, const std::vector<std::vector<Term>>& choices, size_t i,
                         TermVec& picked, TermSet& out) {
  if (i == choices.size()) {
    out.insert(Term::make(u.fn(), u.ident_id(), TermVec(picked)));
    return;
  }
  for (const auto& v : choices[i]) {
    picked[i] = v;
    zeta_product(u, choices, i + 1, picked, out);
  }
}

// zeta_K(u): un-zero decryptions under keys in K, optionally stopping at
// encryptions under K.
inline void zeta(const Term& u, const std::set<std::string>& K, TermSet& out) {
  if (u.is(Fn::Zero) && u.arg(0).is(Fn::Dec) && u.arg(0).arg(1).is(Fn::Sk) &&
      u.arg(0).arg(1).arg(0).is_name() && K.count(u.arg(0).arg(1).arg(0).ident())) {
    const Term& d = u.arg(0);
    TermSet ws;
    zeta(d.arg(0), K, ws);
    for (const auto& w : ws) out.insert(mk_dec(w, d.arg(1)));
    return;
  }
  if (u.is(Fn::Enc) && u.arg(1).is(Fn::Pk) && u.arg(1).arg(0).is_name() &&
      K.count(u.arg(1).arg(0).ident())) {
    out.insert(u);
    TermSet ms;
    zeta(u.arg(0), K, ms);
    for (const auto& m : ms) out.insert(mk_enc(m, u.arg(1), u.arg(2)));
    return;
  }
  if (u.arity() == 0) {
    out.insert(u);
    return;
  }
  std::vector<std::vector<Term>> choices;
  for (const auto& a : u.args()) {
    TermSet s;
    zeta(a, K, s);
    choices.emplace_back(s.begin(), s.end());
  }
  TermVec picked(u.arity());
  zeta_product(u, choices, 0, picked, out);
}

inline void guards_of(const TermSet& s, const std::set<std::string>& K, TermSet& out) {
  for (const auto& t : s) {
    if (!t.is(Fn::Dec) || !t.arg(1).is(Fn::Sk) || !t.arg(1).arg(0).is_name()) continue;
    const std::string k = t.arg(1).arg(0).ident();
    if (!K.count(k)) continue;
    std::unordered_set<Term, TermHash> subs;
    collect_subterms(t.arg(0), subs);
    for (const auto& a : subs)
      if (a.is(Fn::Enc) && a.arg(1).is(Fn::Pk) && a.arg(1).arg(0).is_name() &&
          a.arg(1).arg(0).ident() == k)
        out.insert(mk_eq(t.arg(0), a));
  }
}

inline std::vector<std::string> secret_keys_of(const Term& normal) {
  std::unordered_set<Term, TermHash> subs;
  collect_subterms(normal, subs);
  std::set<std::string> ks;
  for (const auto& s : subs)
    if (s.is(Fn::Sk) && s.arg(0).is_name()) ks.insert(s.arg(0).ident());
  return {ks.begin(), ks.end()};
}

inline void accumulate_candidates(const Term& t, const CanonicalOrder& ord, CandidateSet& cs) {
  Term nf = normalize(t, ord);
  TermSet pieces;
  {
    NormalFormDecomposition d;
    detail::decompose_rec(nf, d);
    std::unordered_set<Term, TermHash> subs;
    for (const auto& u : d.leaves) collect_subterms(u, subs);
    for (const auto& b : d.conds) collect_subterms(b, subs);
    for (const auto& u : subs) pieces.insert(u);
  }
  for (const auto& u : pieces) {
    cs.goal_subterms.insert(u);
    cs.terms.insert(u);
  }
  auto keys = secret_keys_of(nf);
  size_t nsub = std::min<size_t>(keys.size(), 16);
  for (size_t bits = 0; bits < (size_t{1} << nsub); ++bits) {
    std::set<std::string> K;
    for (size_t i = 0; i < nsub; ++i)
      if (bits & (size_t{1} << i)) K.insert(keys[i]);
    for (const auto& u : pieces) {
      TermSet z;
      zeta(u, K, z);
      TermSet g;
      guards_of(z, K, g);
      for (const auto& x : z) {
        cs.terms.insert(x);
        for (const auto& k : K) cs.per_key[k].insert(x);
      }
      for (const auto& x : g) {
        cs.terms.insert(x);
        for (const auto& k : K) cs.per_key[k].insert(x);
      }
    }
  }
}

}  // namespace detail

inline CandidateSet candidate_terms(const Term& t, const Term& t2, const CanonicalOrder& ord) {
  CandidateSet cs;
  detail::accumulate_candidates(t, ord, cs);
  detail::accumulate_candidates(t2, ord, cs);
  for (const auto& u : cs.terms) cs.max_member_size = std::max<size_t>(cs.max_member_size, u.size());
  return cs;
}

inline CandidateSet candidate_terms(const Sequent& goal, const CanonicalOrder& ord) {
  CandidateSet cs;
  for (const auto& t : goal.left) detail::accumulate_candidates(t, ord, cs);
  for (const auto& t : goal.right) detail::accumulate_candidates(t, ord, cs);
  for (const auto& u : cs.terms) cs.max_member_size = std::max<size_t>(cs.max_member_size, u.size());
  return cs;
}

// ---------------------------------------------------------------------------
// Leaf matching.
// ---------------------------------------------------------------------------

// Reflexivity modulo renaming: right = mu(left) for an inferred bijection.
inline std::optional<NameRenaming> match_refl(const Sequent& seq) {
  std::unordered_map<std::string, std::string> m;
  auto walk = [&](const Term& a, const Term& b, auto&& self) -> bool {
    if (a.is_name() && b.is_name()) {
      auto [it, fresh] = m.emplace(a.ident(), b.ident());
      return fresh || it->second == b.ident();
    }
    if (a.fn() != b.fn() || a.ident_id() != b.ident_id() || a.arity() != b.arity()) return false;
    for (size_t i = 0; i < a.arity(); ++i)
      if (!self(a.arg(i), b.arg(i), self)) return false;
    return true;
  };
  for (size_t i = 0; i < seq.size(); ++i)
    if (!walk(seq.left[i], seq.right[i], walk)) return std::nullopt;
  NameRenaming ren;
  std::unordered_set<std::string> img;
  for (const auto& [a, b] : m) {
    if (!img.insert(b).second) return std::nullopt;
    if (a != b) ren.add(a, b);
  }
  std::unordered_set<std::string> lnames;
  for (const auto& t : seq.left) collect_names(t, lnames);
  if (!ren.injective_on(lnames)) return std::nullopt;
  return ren;
}

// Attempts to reconstruct a CcaStructure accepted by verify_cca_instance:
// classify components as oracle calls or base frame, infer the renaming from
// the base components, order calls by value dependency.
inline std::optional<CcaStructure> cca_leaf_match(const Sequent& seq, const LengthDecls& decls,
                                                  const CanonicalOrder& ord) {
  size_t n = seq.size();
  struct Comp {
    bool enc_candidate = false;
    bool dec_candidate = false;
    bool prefer_call = false;
    std::string key;
  };
  std::vector<Comp> comps(n);
  std::vector<size_t> flexible;
  for (size_t i = 0; i < n; ++i) {
    const Term& l = seq.left[i];
    const Term& r = seq.right[i];
    Comp c;
    if (l.is(Fn::Enc) && l.arg(1).is(Fn::Pk) && l.arg(1).arg(0).is_name() && l.arg(2).is_name() &&
        r.is(Fn::Enc) && r.arg(1).is(Fn::Pk) && r.arg(1).arg(0).is_name() && r.arg(2).is_name()) {
      c.enc_candidate = true;
      c.key = l.arg(1).arg(0).ident();
      c.prefer_call = l != r;
    } else {
      auto gl = parse_guarded_dec(l);
      auto gr = parse_guarded_dec(r);
      if (gl && gr && gl->core.arg(1).arg(0).ident() == gr->core.arg(1).arg(0).ident()) {
        c.dec_candidate = true;
        c.key = gl->core.arg(1).arg(0).ident();
        c.prefer_call = true;
      }
    }
    comps[i] = c;
    if (c.enc_candidate || c.dec_candidate) flexible.push_back(i);
  }
  if (flexible.size() > 12) flexible.resize(12);

  auto attempt = [&](const std::vector<bool>& as_call) -> std::optional<CcaStructure> {
    CcaStructure str;
    std::set<std::string> keyset;
    std::vector<size_t> call_comps;
    for (size_t fi = 0; fi < flexible.size(); ++fi)
      if (as_call[fi]) {
        call_comps.push_back(flexible[fi]);
        keyset.insert(comps[flexible[fi]].key);
      }
    str.keys.assign(keyset.begin(), keyset.end());

    // Renaming from the base components (walked in parallel).
    std::unordered_map<std::string, std::string> m;
    for (size_t i = 0; i < n; ++i) {
      bool is_call = std::find(call_comps.begin(), call_comps.end(), i) != call_comps.end();
      if (is_call) continue;
      auto walk = [&](const Term& a, const Term& b, auto&& self) -> bool {
        if (a.is_name() && b.is_name()) {
          auto [it, fresh] = m.emplace(a.ident(), b.ident());
          return fresh || it->second == b.ident();
        }
        if (a.fn() != b.fn() || a.ident_id() != b.ident_id() || a.arity() != b.arity())
          return false;
        for (size_t k = 0; k < a.arity(); ++k)
          if (!self(a.arg(k), b.arg(k), self)) return false;
        return true;
      };
      if (!walk(seq.left[i], seq.right[i], walk)) return std::nullopt;
    }
    {
      std::unordered_set<std::string> img;
      for (const auto& [a, b] : m) {
        if (!img.insert(b).second) return std::nullopt;
        if (a != b) str.renaming.add(a, b);
      }
    }

    // Order calls by literal value dependency, position as tie-break.
    std::vector<size_t> order;
    std::vector<bool> placed(call_comps.size(), false);
    while (order.size() < call_comps.size()) {
      bool progress = false;
      for (size_t a = 0; a < call_comps.size(); ++a) {
        if (placed[a]) continue;
        bool ready = true;
        for (size_t b = 0; b < call_comps.size(); ++b) {
          if (a == b || placed[b]) continue;
          if (contains(seq.left[call_comps[a]], seq.left[call_comps[b]]) ||
              contains(seq.right[call_comps[a]], seq.right[call_comps[b]])) {
            ready = false;
            break;
          }
        }
        if (ready) {
          order.push_back(call_comps[a]);
          placed[a] = true;
          progress = true;
        }
      }
      if (!progress) return std::nullopt;  // dependency cycle
    }

    size_t h = 0;
    for (size_t ci : order)
      str.calls.push_back({comps[ci].enc_candidate, "x" + std::to_string(h++), seq.left[ci],
                           seq.right[ci]});
    Verdict v = verify_cca_instance(seq, str, decls, ord);
    if (v.ok) return str;
    return std::nullopt;
  };

  size_t combos = size_t{1} << flexible.size();
  std::vector<bool> as_call(flexible.size());
  for (size_t mask = 0; mask < combos; ++mask) {
    for (size_t fi = 0; fi < flexible.size(); ++fi) {
      bool bit = (mask >> fi) & 1;
      // mask bit 0 = preferred choice first.
      as_call[fi] = comps[flexible[fi]].prefer_call ? !bit : bit;
    }
    if (auto r = attempt(as_call)) return r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Bounded backward search.
// ---------------------------------------------------------------------------

struct SearchBudget {
  size_t max_depth = 12;
  size_t max_candidates = 4096;
  double timeout_seconds = 60.0;
  size_t max_nested_cs = 0;  // 0: |B(t,t')| + 1
  unsigned jobs = 1;
};

enum class SearchStatus { Found, NotFound, Timeout };

struct SearchResult {
  SearchStatus status = SearchStatus::NotFound;
  std::optional<Derivation> proof;
  size_t expanded_nodes = 0;
};

namespace detail {

struct SearchTimeout {};

enum Phase : uint8_t { kRewrite = 0, kCs = 1, kFa = 2 };

struct StateKey {
  uint8_t phase;
  uint16_t cs_left;
  Sequent seq;
  bool operator==(const StateKey& o) const {
    return phase == o.phase && cs_left == o.cs_left && seq == o.seq;
  }
};

struct StateKeyHash {
  size_t operator()(const StateKey& k) const {
    size_t h = k.phase * 31u + k.cs_left;
    for (const auto& t : k.seq.left) h = h * 1099511628211ull + t.hash();
    for (const auto& t : k.seq.right) h = h * 1099511628211ull + t.hash();
    return h;
  }
};

using PathSet = std::unordered_set<StateKey, StateKeyHash>;

class Searcher {
 public:
  Searcher(const SearchBudget& budget, const CanonicalOrder& ord, const LengthDecls& decls,
           std::vector<Term> cond_pool, std::vector<std::string> pool_keys)
      : budget_(budget),
        ord_(ord),
        decls_(decls),
        cond_pool_(std::move(cond_pool)),
        pool_keys_(std::move(pool_keys)),
        deadline_(std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(budget.timeout_seconds))) {}

  SearchResult run(const Sequent& goal) {
    SearchResult res;
    try {
      for (size_t depth = 1; depth <= budget_.max_depth; ++depth) {
        PathSet path;
        auto proof = prove(goal, kRewrite, depth, budget_.max_nested_cs, path);
        if (proof) {
          res.status = SearchStatus::Found;
          res.proof = std::move(proof);
          break;
        }
      }
    } catch (const SearchTimeout&) {
      res.status = SearchStatus::Timeout;
    }
    res.expanded_nodes = expanded_;
    return res;
  }

 private:
  void check_time() {
    if ((++expanded_ & 0x3f) == 0 && std::chrono::steady_clock::now() > deadline_)
      throw SearchTimeout{};
  }

  bool known_failure(const StateKey& k, size_t depth) {
    std::lock_guard<std::mutex> lock(memo_mu_);
    auto it = memo_.find(k);
    return it != memo_.end() && it->second >= depth;
  }

  void record_failure(const StateKey& k, size_t depth) {
    std::lock_guard<std::mutex> lock(memo_mu_);
    auto [it, fresh] = memo_.emplace(k, depth);
    if (!fresh && it->second < depth) it->second = depth;
  }

  std::optional<Derivation> prove(const Sequent& seq, Phase phase, size_t depth, size_t cs_left,
                                  PathSet& path) {
    check_time();
    StateKey key{static_cast<uint8_t>(phase), static_cast<uint16_t>(std::min<size_t>(cs_left, 0xffff)),
                 seq};
    if (path.count(key)) return std::nullopt;  // cycle: a shorter proof exists above
    if (known_failure(key, depth)) return std::nullopt;

    // Leaf closures are tried at every node.
    if (auto mu = match_refl(seq)) return Derivation{seq, ReflRule{*mu}, {}};
    if (auto str = cca_leaf_match(seq, decls_, ord_)) return Derivation{seq, CcaRule{*str}, {}};

    if (depth == 0) {
      record_failure(key, depth);
      return std::nullopt;
    }

    path.insert(key);
    std::optional<Derivation> found;

    // Forced eager dedup: removing a duplicated pair never loses provability
    // (Restr elimination), so it is the only move when one exists.
    if (dedup_exists(seq)) {
      found = dedup_move(seq, phase, depth, cs_left, path);
    } else {
      if (!found && phase <= kRewrite) found = rewrite_moves(seq, depth, cs_left, path);
      if (!found && phase <= kCs && cs_left > 0) found = cs_moves(seq, depth, cs_left, path);
      if (!found) found = fa_moves(seq, phase, depth, cs_left, path);
    }

    path.erase(key);
    if (!found) record_failure(key, depth);
    return found;
  }

  bool dedup_exists(const Sequent& seq) {
    for (size_t i = 0; i < seq.size(); ++i)
      for (size_t j = i + 1; j < seq.size(); ++j)
        if (seq.left[i] == seq.left[j] && seq.right[i] == seq.right[j]) return true;
    return false;
  }

  std::optional<Derivation> dedup_move(const Sequent& seq, Phase phase, size_t depth,
                                       size_t cs_left, PathSet& path) {
    size_t n = seq.size();
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        if (seq.left[i] != seq.left[j] || seq.right[i] != seq.right[j]) continue;
        if (j == n - 1 && i == n - 2) {
          Sequent prem{TermVec(seq.left.begin(), seq.left.end() - 1),
                       TermVec(seq.right.begin(), seq.right.end() - 1)};
          auto sub = prove(prem, phase, depth - 1, cs_left, path);
          if (!sub) return std::nullopt;
          return Derivation{seq, DupRule{}, {std::move(*sub)}};
        }
        PermRule perm;
        for (size_t k = 0; k < n; ++k)
          if (k != i && k != j) perm.perm.push_back(k);
        perm.perm.push_back(i);
        perm.perm.push_back(j);
        Sequent prem;
        for (size_t k : perm.perm) {
          prem.left.push_back(seq.left[k]);
          prem.right.push_back(seq.right[k]);
        }
        auto sub = prove(prem, phase, depth - 1, cs_left, path);
        if (!sub) return std::nullopt;
        return Derivation{seq, perm, {std::move(*sub)}};
      }
    return std::nullopt;
  }

  std::optional<Derivation> try_rw(const Sequent& seq, bool left_side, size_t index,
                                   const Term& replacement, size_t depth, size_t cs_left,
                                   PathSet& path) {
    Sequent prem = seq;
    (left_side ? prem.left : prem.right)[index] = replacement;
    auto sub = prove(prem, kRewrite, depth - 1, cs_left, path);
    if (!sub) return std::nullopt;
    return Derivation{seq, RwRule{left_side, index, replacement}, {std::move(*sub)}};
  }

  std::optional<Derivation> rewrite_moves(const Sequent& seq, size_t depth, size_t cs_left,
                                          PathSet& path) {
    size_t n = seq.size();
    // Normalization of a component.
    for (size_t i = 0; i < n; ++i)
      for (bool left : {true, false}) {
        const Term& t = left ? seq.left[i] : seq.right[i];
        Term nf = normalize(t, ord_);
        if (nf != t)
          if (auto d = try_rw(seq, left, i, nf, depth, cs_left, path)) return d;
      }
    // Guard wrapping: replace raw decryptions by their elses-guarded form
    // where that is equal modulo R (i.e. under the matching conditional).
    for (size_t i = 0; i < n; ++i)
      for (bool left : {true, false}) {
        const Term& t = left ? seq.left[i] : seq.right[i];
        for (const auto& w : guard_wrap_variants(t))
          if (w != t && equal_mod_R(t, w, ord_))
            if (auto d = try_rw(seq, left, i, w, depth, cs_left, path)) return d;
      }
    // Conditional introduction towards the other side's branching structure.
    // A candidate that matches a decryption guard also gets the variant with
    // the guarded decryption in the else branch (one Rw instead of two).
    for (size_t i = 0; i < n; ++i)
      for (bool left : {true, false}) {
        const Term& mine = left ? seq.left[i] : seq.right[i];
        const Term& other = left ? seq.right[i] : seq.left[i];
        if (mine.is(Fn::Ite) || !other.is(Fn::Ite)) continue;
        std::vector<Term> cands;
        cands.push_back(other.arg(0));
        for (const auto& c : cond_pool_)
          if (c != other.arg(0)) cands.push_back(c);
        Term wrapped = guard_wrap(mine);
        size_t tried = 0;
        for (const auto& c : cands) {
          if (tried++ >= budget_.max_candidates) break;
          if (wrapped != mine) {
            Term cand = mk_ite(c, mine, wrapped);
            if (equal_mod_R(mine, cand, ord_))
              if (auto d = try_rw(seq, left, i, cand, depth, cs_left, path)) return d;
          }
          if (auto d = try_rw(seq, left, i, mk_ite(c, mine, mine), depth, cs_left, path)) return d;
        }
      }
    return std::nullopt;
  }

  // elses-guard every raw decryption under a pool key, whole term or one
  // branch of a top-level conditional.
  std::vector<Term> guard_wrap_variants(const Term& t) {
    std::vector<Term> out;
    Term whole = guard_wrap(t);
    if (whole != t) out.push_back(whole);
    if (t.is(Fn::Ite)) {
      Term thenw = guard_wrap(t.arg(1)), elsew = guard_wrap(t.arg(2));
      if (elsew != t.arg(2)) out.push_back(mk_ite(t.arg(0), t.arg(1), elsew));
      if (thenw != t.arg(1)) out.push_back(mk_ite(t.arg(0), thenw, t.arg(2)));
    }
    return out;
  }

  Term guard_wrap(const Term& t) {
    if (auto gd = parse_guarded_dec(t); gd && !gd->guards.empty()) return t;
    TermVec args;
    args.reserve(t.arity());
    for (const auto& a : t.args()) args.push_back(guard_wrap(a));
    Term r = Term::make(t.fn(), t.ident_id(), std::move(args));
    if (r.is(Fn::Dec) && r.arg(1).is(Fn::Sk) && r.arg(1).arg(0).is_name() &&
        std::find(pool_keys_.begin(), pool_keys_.end(), r.arg(1).arg(0).ident()) !=
            pool_keys_.end()) {
      const std::string k = r.arg(1).arg(0).ident();
      std::unordered_set<Term, TermHash> subs;
      collect_subterms(r.arg(0), subs);
      GuardList g;
      for (const auto& a : subs)
        if (a.is(Fn::Enc) && a.arg(1).is(Fn::Pk) && a.arg(1).arg(0).is_name() &&
            a.arg(1).arg(0).ident() == k)
          g.push_back(mk_eq(r.arg(0), a));
      if (!g.empty()) {
        std::sort(g.begin(), g.end(), CanonicalLess{});
        return elses(g, r);
      }
    }
    return r;
  }

  std::optional<Derivation> cs_moves(const Sequent& seq, size_t depth, size_t cs_left,
                                     PathSet& path) {
    size_t n = seq.size();
    std::vector<std::pair<Term, Term>> seen;
    for (size_t i = 0; i < n; ++i) {
      if (!seq.left[i].is(Fn::Ite) || !seq.right[i].is(Fn::Ite)) continue;
      Term b = seq.left[i].arg(0), b2 = seq.right[i].arg(0);
      if (!b.if_free() || !b2.if_free()) continue;
      bool dup = false;
      for (const auto& [x, y] : seen) dup = dup || (x == b && y == b2);
      if (dup) continue;
      seen.push_back({b, b2});
      CsRule rule;
      for (size_t j = 0; j < n; ++j)
        if (seq.left[j].is(Fn::Ite) && seq.right[j].is(Fn::Ite) && seq.left[j].arg(0) == b &&
            seq.right[j].arg(0) == b2)
          rule.targets.push_back(j);
      auto build = [&](bool then_branch) {
        Sequent p;
        for (size_t j = 0; j < n; ++j) {
          if (std::find(rule.targets.begin(), rule.targets.end(), j) != rule.targets.end())
            continue;
          p.left.push_back(seq.left[j]);
          p.right.push_back(seq.right[j]);
        }
        p.left.push_back(b);
        p.right.push_back(b2);
        for (size_t j : rule.targets) {
          p.left.push_back(seq.left[j].arg(then_branch ? 1 : 2));
          p.right.push_back(seq.right[j].arg(then_branch ? 1 : 2));
        }
        return p;
      };
      Sequent p1 = build(true), p2 = build(false);
      std::optional<Derivation> s1, s2;
      if (budget_.jobs > 1) {
        PathSet path2 = path;
        auto f2 = std::async(std::launch::async,
                             [&, path2]() mutable { return prove(p2, kCs, depth - 1, cs_left - 1, path2); });
        s1 = prove(p1, kCs, depth - 1, cs_left - 1, path);
        s2 = f2.get();
      } else {
        s1 = prove(p1, kCs, depth - 1, cs_left - 1, path);
        if (s1) s2 = prove(p2, kCs, depth - 1, cs_left - 1, path);
      }
      if (s1 && s2) return Derivation{seq, rule, {std::move(*s1), std::move(*s2)}};
    }
    return std::nullopt;
  }

  std::optional<Derivation> fa_moves(const Sequent& seq, Phase phase, size_t depth, size_t cs_left,
                                     PathSet& path) {
    Phase next = phase < kFa ? kFa : phase;
    for (size_t i = 0; i < seq.size(); ++i) {
      const Term& l = seq.left[i];
      const Term& r = seq.right[i];
      if (l.is_name() || r.is_name()) continue;
      if (l.is(Fn::Zero) || l.fn() != r.fn() || l.ident_id() != r.ident_id() ||
          l.arity() != r.arity())
        continue;
      FaRule rule{l.is(Fn::Adv) ? l.ident() : fn_name(l.fn()), l.arity(), i};
      Sequent prem = detail::splice_at(seq, i);
      auto sub = prove(prem, next, depth - 1, cs_left, path);
      if (sub) return Derivation{seq, rule, {std::move(*sub)}};
    }
    return std::nullopt;
  }

  const SearchBudget& budget_;
  const CanonicalOrder& ord_;
  const LengthDecls& decls_;
  std::vector<Term> cond_pool_;
  std::vector<std::string> pool_keys_;
  std::chrono::steady_clock::time_point deadline_;
  std::mutex memo_mu_;
  std::unordered_map<StateKey, size_t, StateKeyHash> memo_;
  std::atomic<size_t> expanded_{0};
};

}  // namespace detail

// Backward proof search over the candidate pool. NotFound means the budget
// was exhausted, not that the goal is unprovable.
inline SearchResult search(const Sequent& goal, const SearchBudget& budget,
                           const CanonicalOrder& ord, const LengthDecls& decls,
                           const TermVec& hints = {}) {
  CandidateSet pool = candidate_terms(goal, ord);
  for (const auto& h : hints) pool.terms.insert(h);

  std::vector<Term> conds;
  for (const auto& h : hints)
    if (h.conditional_ok() && h.if_free()) conds.push_back(h);
  for (const auto& c : pool.conditionals())
    if (std::find(conds.begin(), conds.end(), c) == conds.end()) conds.push_back(c);
  if (conds.size() > budget.max_candidates) conds.resize(budget.max_candidates);

  std::set<std::string> keyset;
  for (const auto& [k, v] : pool.per_key) keyset.insert(k);
  std::vector<std::string> keys(keyset.begin(), keyset.end());

  SearchBudget b = budget;
  if (b.max_nested_cs == 0) b.max_nested_cs = pool.terms.size() + 1;

  detail::Searcher s(b, ord, decls, std::move(conds), std::move(keys));
  SearchResult res = s.run(goal);
  if (res.status == SearchStatus::Found) {
    Verdict v = check_proof(*res.proof, ord, decls);
    if (!v.ok) throw std::logic_error("search produced a proof that does not re-check: " +
                                      v.diags.front().message);
  }
  return res;
}

}  // namespace bcidx

#endif  // BCIDX_SEARCH_HPP
