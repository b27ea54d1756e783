#ifndef BCIDX_REWRITE_HPP
#define BCIDX_REWRITE_HPP

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>

#include "bcidx/order.hpp"
#include "bcidx/term.hpp"

namespace bcidx {

// The oriented rules of the convergent system R = R1 u R2 u R3 u R4.
// R4 swaps nested conditionals and fires only under the >_c side condition.
enum class RewriteRule : uint8_t {
  ProjPair,      // fst/snd(pair(x1,x2)) -> xi
  DecEnc,        // dec(enc(x,pk(y),z), sk(y)) -> x
  EqRefl,        // eq(x,x) -> true
  LiftF,         // f(u.., ite(b,x,y), v..) -> ite(b, f(..x..), f(..y..)), f != ite
  LiftCond,      // ite(ite(b,a,c),x,y) -> ite(b, ite(a,x,y), ite(c,x,y))
  CondCollapse,  // ite(b,x,x) -> x
  CondTrue,      // ite(true,x,y) -> x
  CondFalse,     // ite(false,x,y) -> y
  AbsorbThen,    // ite(b, ite(b,x,y), z) -> ite(b,x,z)
  AbsorbElse,    // ite(b, x, ite(b,y,z)) -> ite(b,x,z)
  SwapThen,      // ite(b, ite(a,x,y), z) -> ite(a, ite(b,x,z), ite(b,y,z))  [b >_c a]
  SwapElse,      // ite(b, x, ite(a,y,z)) -> ite(a, ite(b,x,y), ite(b,x,z))  [b >_c a]
};

inline const char* rule_name(RewriteRule r) {
  switch (r) {
    case RewriteRule::ProjPair: return "proj-pair";
    case RewriteRule::DecEnc: return "dec-enc";
    case RewriteRule::EqRefl: return "eq-refl";
    case RewriteRule::LiftF: return "lift-f";
    case RewriteRule::LiftCond: return "lift-cond";
    case RewriteRule::CondCollapse: return "cond-collapse";
    case RewriteRule::CondTrue: return "cond-true";
    case RewriteRule::CondFalse: return "cond-false";
    case RewriteRule::AbsorbThen: return "absorb-then";
    case RewriteRule::AbsorbElse: return "absorb-else";
    case RewriteRule::SwapThen: return "swap-then";
    case RewriteRule::SwapElse: return "swap-else";
  }
  return "?";
}

struct BudgetExceeded : std::runtime_error {
  BudgetExceeded() : std::runtime_error("rewrite step budget exceeded (bug: R terminates on ground terms)") {}
};

struct Redex {
  Position pos;
  RewriteRule rule;
  Term reduct;  // contractum at pos; successor term is replace_at(t, pos, reduct)
};

namespace detail {

// Normalization engine for one run: memoizes per >_u order. The step
// counter guards against implementation bugs, not user input.
class Rewriter {
 public:
  explicit Rewriter(const CanonicalOrder& ord, uint64_t budget = 10'000'000)
      : ord_(ord), budget_(budget) {}

  Term normalize(const Term& t) {
    auto it = memo_.find(t);
    if (it != memo_.end()) return it->second;
    Term r;
    if (t.arity() == 0) {
      r = t;
    } else {
      TermVec args;
      args.reserve(t.arity());
      for (const auto& a : t.args()) args.push_back(normalize(a));
      r = reduce_root(Term::make(t.fn(), t.ident_id(), std::move(args)));
    }
    memo_.emplace(t, r);
    return r;
  }

  // b >_c a per the orientation of R4: user order on if-free irreducible
  // conditionals, LPO when neither is, and irreducible below reducible.
  bool cond_greater(const Term& b, const Term& a) {
    bool an = a.if_free() && is_normal(a);
    bool bn = b.if_free() && is_normal(b);
    if (an && bn) return ord_.user_greater(b, a);
    if (!an && !bn) return lpo_greater(b, a);
    return an;  // a irreducible, b not => b >_c a
  }

  bool is_normal(const Term& t) { return normalize(t) == t; }

  uint64_t steps() const { return steps_; }

 private:
  void tick() {
    if (++steps_ > budget_) throw BudgetExceeded();
  }

  // Children are fully normal; reduce root redexes until none remain.
  Term reduce_root(Term t) {
    for (;;) {
      if (t.is(Fn::Fst) || t.is(Fn::Snd)) {
        const Term& a = t.arg(0);
        if (a.is(Fn::Pair)) {
          tick();
          return a.arg(t.is(Fn::Fst) ? 0 : 1);
        }
      } else if (t.is(Fn::Dec)) {
        const Term& c = t.arg(0);
        const Term& k = t.arg(1);
        if (c.is(Fn::Enc) && k.is(Fn::Sk) && c.arg(1).is(Fn::Pk) && c.arg(1).arg(0) == k.arg(0)) {
          tick();
          return c.arg(0);
        }
      } else if (t.is(Fn::Eq)) {
        if (t.arg(0) == t.arg(1)) {
          tick();
          return mk_true();
        }
      }
      if (t.is(Fn::Ite)) {
        const Term& b = t.arg(0);
        const Term& x = t.arg(1);
        const Term& y = t.arg(2);
        if (b.is(Fn::Ite)) {
          tick();
          Term l = reduce_root(mk_ite(b.arg(1), x, y));
          Term r = reduce_root(mk_ite(b.arg(2), x, y));
          t = reduce_root_ite(b.arg(0), std::move(l), std::move(r));
          return t;
        }
        if (b.is(Fn::True)) { tick(); return x; }
        if (b.is(Fn::False)) { tick(); return y; }
        if (x == y) { tick(); return x; }
        if (x.is(Fn::Ite) && x.arg(0) == b) {
          tick();
          t = mk_ite(b, x.arg(1), y);
          continue;
        }
        if (y.is(Fn::Ite) && y.arg(0) == b) {
          tick();
          t = mk_ite(b, x, y.arg(2));
          continue;
        }
        if (x.is(Fn::Ite) && cond_greater(b, x.arg(0))) {
          tick();
          Term l = reduce_root(mk_ite(b, x.arg(1), y));
          Term r = reduce_root(mk_ite(b, x.arg(2), y));
          return reduce_root_ite(x.arg(0), std::move(l), std::move(r));
        }
        if (y.is(Fn::Ite) && cond_greater(b, y.arg(0))) {
          tick();
          Term l = reduce_root(mk_ite(b, x, y.arg(1)));
          Term r = reduce_root(mk_ite(b, x, y.arg(2)));
          return reduce_root_ite(y.arg(0), std::move(l), std::move(r));
        }
        return t;
      }
      // R2 homomorphism: lift the leftmost ite argument of f in Sigma_s.
      if (!t.is(Fn::Ite)) {
        for (size_t i = 0; i < t.arity(); ++i) {
          if (t.arg(i).is(Fn::Ite)) {
            tick();
            const Term& c = t.arg(i);
            TermVec la = t.args(), ra = t.args();
            la[i] = c.arg(1);
            ra[i] = c.arg(2);
            Term l = reduce_root(Term::make(t.fn(), t.ident_id(), std::move(la)));
            Term r = reduce_root(Term::make(t.fn(), t.ident_id(), std::move(ra)));
            return reduce_root_ite(c.arg(0), std::move(l), std::move(r));
          }
        }
      }
      return t;
    }
  }

  Term reduce_root_ite(const Term& b, Term x, Term y) {
    return reduce_root(mk_ite(b, std::move(x), std::move(y)));
  }

  const CanonicalOrder& ord_;
  uint64_t budget_;
  uint64_t steps_ = 0;
  std::unordered_map<Term, Term, TermHash> memo_;
};

}  // namespace detail

inline Term normalize(const Term& t, const CanonicalOrder& ord) {
  detail::Rewriter rw(ord);
  return rw.normalize(t);
}

inline bool is_normal_form(const Term& t, const CanonicalOrder& ord) {
  return normalize(t, ord) == t;
}

inline bool equal_mod_R(const Term& s, const Term& t, const CanonicalOrder& ord) {
  if (s == t) return true;
  detail::Rewriter rw(ord);
  return rw.normalize(s) == rw.normalize(t);
}

// Enumerates every redex of the oriented system. Root rules are matched at
// each position; the >_c side condition of R4 is evaluated exactly.
inline void root_redexes(const Term& t, const Position& pos, detail::Rewriter& rw,
                         std::vector<Redex>& out) {
  if (t.is(Fn::Fst) || t.is(Fn::Snd)) {
    if (t.arg(0).is(Fn::Pair))
      out.push_back({pos, RewriteRule::ProjPair, t.arg(0).arg(t.is(Fn::Fst) ? 0 : 1)});
  } else if (t.is(Fn::Dec)) {
    const Term& c = t.arg(0);
    const Term& k = t.arg(1);
    if (c.is(Fn::Enc) && k.is(Fn::Sk) && c.arg(1).is(Fn::Pk) && c.arg(1).arg(0) == k.arg(0))
      out.push_back({pos, RewriteRule::DecEnc, c.arg(0)});
  } else if (t.is(Fn::Eq)) {
    if (t.arg(0) == t.arg(1)) out.push_back({pos, RewriteRule::EqRefl, mk_true()});
  }
  if (t.is(Fn::Ite)) {
    const Term& b = t.arg(0);
    const Term& x = t.arg(1);
    const Term& y = t.arg(2);
    if (b.is(Fn::Ite))
      out.push_back({pos, RewriteRule::LiftCond,
                     mk_ite(b.arg(0), mk_ite(b.arg(1), x, y), mk_ite(b.arg(2), x, y))});
    if (b.is(Fn::True)) out.push_back({pos, RewriteRule::CondTrue, x});
    if (b.is(Fn::False)) out.push_back({pos, RewriteRule::CondFalse, y});
    if (x == y) out.push_back({pos, RewriteRule::CondCollapse, x});
    if (x.is(Fn::Ite) && x.arg(0) == b)
      out.push_back({pos, RewriteRule::AbsorbThen, mk_ite(b, x.arg(1), y)});
    if (y.is(Fn::Ite) && y.arg(0) == b)
      out.push_back({pos, RewriteRule::AbsorbElse, mk_ite(b, x, y.arg(2))});
    if (x.is(Fn::Ite) && x.arg(0) != b && rw.cond_greater(b, x.arg(0)))
      out.push_back({pos, RewriteRule::SwapThen,
                     mk_ite(x.arg(0), mk_ite(b, x.arg(1), y), mk_ite(b, x.arg(2), y))});
    if (y.is(Fn::Ite) && y.arg(0) != b && rw.cond_greater(b, y.arg(0)))
      out.push_back({pos, RewriteRule::SwapElse,
                     mk_ite(y.arg(0), mk_ite(b, x, y.arg(1)), mk_ite(b, x, y.arg(2)))});
  } else {
    for (size_t i = 0; i < t.arity(); ++i) {
      if (t.arg(i).is(Fn::Ite)) {
        const Term& c = t.arg(i);
        TermVec la = t.args(), ra = t.args();
        la[i] = c.arg(1);
        ra[i] = c.arg(2);
        out.push_back({pos, RewriteRule::LiftF,
                       mk_ite(c.arg(0), Term::make(t.fn(), t.ident_id(), std::move(la)),
                              Term::make(t.fn(), t.ident_id(), std::move(ra)))});
      }
    }
  }
}

namespace detail {
inline void scan_redexes(const Term& t, Position& pos, Rewriter& rw, std::vector<Redex>& out) {
  root_redexes(t, pos, rw, out);
  for (size_t i = 0; i < t.arity(); ++i) {
    pos.push_back(static_cast<uint32_t>(i));
    scan_redexes(t.arg(i), pos, rw, out);
    pos.pop_back();
  }
}
}  // namespace detail

// Pre-order enumeration of all redexes; empty iff t is in R-normal form.
inline std::vector<Redex> rewrite_step(const Term& t, const CanonicalOrder& ord) {
  detail::Rewriter rw(ord);
  std::vector<Redex> out;
  Position pos;
  detail::scan_redexes(t, pos, rw, out);
  return out;
}

// Normal forms match the grammar  t ::= u | ite b t t  with b, u if-free.
struct IfTree {
  Term term;  // leaf when children empty, else the condition
  std::shared_ptr<IfTree> then_branch, else_branch;
  bool leaf() const { return !then_branch; }
};

struct NormalFormDecomposition {
  std::shared_ptr<IfTree> if_context;
  TermSet conds;
  TermSet leaves;
};

namespace detail {
inline std::shared_ptr<IfTree> decompose_rec(const Term& t, NormalFormDecomposition& d) {
  auto node = std::make_shared<IfTree>();
  if (t.is(Fn::Ite)) {
    node->term = t.arg(0);
    d.conds.insert(t.arg(0));
    node->then_branch = decompose_rec(t.arg(1), d);
    node->else_branch = decompose_rec(t.arg(2), d);
  } else {
    node->term = t;
    d.leaves.insert(t);
  }
  return node;
}
inline Term recompose(const IfTree& n) {
  if (n.leaf()) return n.term;
  return mk_ite(n.term, recompose(*n.then_branch), recompose(*n.else_branch));
}
}  // namespace detail

inline NormalFormDecomposition decompose(const Term& t, const CanonicalOrder& ord) {
  if (!is_normal_form(t, ord))
    throw std::invalid_argument("decompose: term is not in R-normal form");
  NormalFormDecomposition d;
  d.if_context = detail::decompose_rec(t, d);
  return d;
}

inline TermSet conds_of(const Term& normal_form) {
  TermSet s;
  NormalFormDecomposition d;
  detail::decompose_rec(normal_form, d);
  return d.conds;
}

inline TermSet leaves_of(const Term& normal_form) {
  NormalFormDecomposition d;
  detail::decompose_rec(normal_form, d);
  return d.leaves;
}

namespace detail {

// aleavest / acondst: sound over-approximations of the leaves and
// conditionals of the normal form, computed without normalizing t.
class Approx {
 public:
  explicit Approx(const CanonicalOrder& ord) : rw_(ord) {}

  const TermSet& leaves(const Term& t) {
    auto it = lmemo_.find(t);
    if (it != lmemo_.end()) return it->second;
    TermSet r;
    if (t.is(Fn::Ite)) {
      for (const auto& u : leaves(t.arg(1))) r.insert(u);
      for (const auto& u : leaves(t.arg(2))) r.insert(u);
    } else if (t.arity() == 0) {
      r.insert(t);
    } else {
      std::vector<std::vector<Term>> choices;
      for (const auto& a : t.args()) {
        const TermSet& s = leaves(a);
        choices.emplace_back(s.begin(), s.end());
      }
      TermVec picked(t.arity());
      product(t, choices, 0, picked, r);
    }
    return lmemo_.emplace(t, std::move(r)).first->second;
  }

  const TermSet& conds(const Term& t) {
    auto it = cmemo_.find(t);
    if (it != cmemo_.end()) return it->second;
    TermSet r;
    if (t.is(Fn::Ite)) {
      for (const auto& u : conds(t.arg(0))) r.insert(u);
      for (const auto& u : leaves(t.arg(0))) r.insert(u);
      for (const auto& u : conds(t.arg(1))) r.insert(u);
      for (const auto& u : conds(t.arg(2))) r.insert(u);
    } else {
      for (const auto& a : t.args())
        for (const auto& u : conds(a)) r.insert(u);
    }
    return cmemo_.emplace(t, std::move(r)).first->second;
  }

 private:
  void product(const Term& t, const std::vector<std::vector<Term>>& choices, size_t i,
               TermVec& picked, TermSet& out) {
    if (i == choices.size()) {
      out.insert(rw_.normalize(Term::make(t.fn(), t.ident_id(), TermVec(picked))));
      return;
    }
    for (const auto& v : choices[i]) {
      picked[i] = v;
      product(t, choices, i + 1, picked, out);
    }
  }

  Rewriter rw_;
  std::unordered_map<Term, TermSet, TermHash> lmemo_, cmemo_;
};

}  // namespace detail

inline TermSet approx_leaves(const Term& t, const CanonicalOrder& ord) {
  detail::Approx a(ord);
  return a.leaves(t);
}

inline TermSet approx_conds(const Term& t, const CanonicalOrder& ord) {
  detail::Approx a(ord);
  return a.conds(t);
}

}  // namespace bcidx

#endif  // BCIDX_REWRITE_HPP
