#ifndef BCIDX_ORDER_HPP
#define BCIDX_ORDER_HPP

#include <map>
#include <optional>
#include <set>

#include "bcidx/term.hpp"

namespace bcidx {

// Total, deterministic structural order on terms: symbol rank per fn_rank
// (identifiers compared as strings so the order is stable across runs),
// then arity, then arguments lexicographically. Equal iff identical.
inline int canonical_compare(const Term& s, const Term& t) {
  if (s == t) return 0;
  int rs = fn_rank(s.fn()), rt = fn_rank(t.fn());
  if (rs != rt) return rs < rt ? -1 : 1;
  if (s.fn() == Fn::Adv || s.fn() == Fn::Name) {
    if (s.ident_id() != t.ident_id()) {
      int c = s.ident().compare(t.ident());
      if (c != 0) return c < 0 ? -1 : 1;
    }
  }
  if (s.arity() != t.arity()) return s.arity() < t.arity() ? -1 : 1;
  for (size_t i = 0; i < s.arity(); ++i) {
    int c = canonical_compare(s.arg(i), t.arg(i));
    if (c != 0) return c;
  }
  return 0;
}

struct CanonicalLess {
  bool operator()(const Term& a, const Term& b) const { return canonical_compare(a, b) < 0; }
};

using TermSet = std::set<Term, CanonicalLess>;

// f >_f g on the fixed precedence with ite minimal; ties on Adv/Name broken
// by identifier.
inline int precedence_compare(const Term& s, const Term& t) {
  int rs = fn_rank(s.fn()), rt = fn_rank(t.fn());
  if (rs != rt) return rs < rt ? -1 : 1;
  if (s.fn() == Fn::Adv || s.fn() == Fn::Name) {
    int c = s.ident().compare(t.ident());
    if (c != 0) return c < 0 ? -1 : 1;
  }
  return 0;
}

inline bool lpo_greater(const Term& s, const Term& t);

inline bool lpo_ge(const Term& s, const Term& t) { return s == t || lpo_greater(s, t); }

// Lexicographic path ordering over the precedence above. Names are nullary
// function symbols.
inline bool lpo_greater(const Term& s, const Term& t) {
  for (const auto& si : s.args())
    if (lpo_ge(si, t)) return true;
  int prec = precedence_compare(s, t);
  if (prec > 0) {
    for (const auto& tj : t.args())
      if (!lpo_greater(s, tj)) return false;
    return true;
  }
  if (prec == 0 && s.fn() == t.fn() && s.arity() == t.arity()) {
    for (const auto& tj : t.args())
      if (!lpo_greater(s, tj)) return false;
    for (size_t i = 0; i < s.arity(); ++i) {
      if (s.arg(i) == t.arg(i)) continue;
      return lpo_greater(s.arg(i), t.arg(i));
    }
    return false;
  }
  return false;
}

// The user-chosen total order >_u on if-free conditionals in R-normal form
// plus the fixed symbol precedence. An override lists conditionals smallest
// first; unlisted conditionals compare by canonical_compare and sit above
// every listed one.
class CanonicalOrder {
 public:
  CanonicalOrder() = default;

  void set_user_order(std::vector<Term> smallest_first) {
    user_rank_.clear();
    for (size_t i = 0; i < smallest_first.size(); ++i)
      user_rank_.emplace(smallest_first[i], i);
  }
  bool has_user_order() const { return !user_rank_.empty(); }

  // Testing hook: flips the default >_u, giving a second total order.
  void set_reversed(bool r) { reversed_ = r; }
  bool reversed() const { return reversed_; }

  // b >_u a; both must be if-free conditionals in R-normal form.
  bool user_greater(const Term& b, const Term& a) const {
    auto rb = rank_of(b), ra = rank_of(a);
    if (rb && ra) return *rb > *ra;
    if (rb != ra) return !rb;  // unlisted above listed
    int c = canonical_compare(b, a);
    return reversed_ ? c < 0 : c > 0;
  }

 private:
  std::optional<size_t> rank_of(const Term& t) const {
    auto it = user_rank_.find(t);
    if (it == user_rank_.end()) return std::nullopt;
    return it->second;
  }
  std::map<Term, size_t, CanonicalLess> user_rank_;
  bool reversed_ = false;
};

}  // namespace bcidx

#endif  // BCIDX_ORDER_HPP
