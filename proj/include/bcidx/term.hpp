#ifndef BCIDX_TERM_HPP
#define BCIDX_TERM_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bcidx {

// Two sorts, with Bool a subsort of Message: a Bool term is accepted
// wherever a Message is expected, never the other way around.
enum class Sort : uint8_t { Message, Bool };

enum class Fn : uint8_t {
  Name,  // nullary, identifier
  Adv,   // adversarial symbol, identifier + arity from the signature
  Pair, Fst, Snd, Pk, Sk, Enc, Dec, Ite, True, False, Zero, Eq,
};

// Precedence rank used both by the LPO precedence and by the canonical
// term order: ite minimal, then true < false < zero < eq < fst < snd <
// pair < dec < enc < pk < sk < adversarial symbols < names.
inline int fn_rank(Fn f) {
  switch (f) {
    case Fn::Ite: return 0;
    case Fn::True: return 1;
    case Fn::False: return 2;
    case Fn::Zero: return 3;
    case Fn::Eq: return 4;
    case Fn::Fst: return 5;
    case Fn::Snd: return 6;
    case Fn::Pair: return 7;
    case Fn::Dec: return 8;
    case Fn::Enc: return 9;
    case Fn::Pk: return 10;
    case Fn::Sk: return 11;
    case Fn::Adv: return 12;
    case Fn::Name: return 13;
  }
  return 14;
}

inline const char* fn_name(Fn f) {
  switch (f) {
    case Fn::Name: return "name";
    case Fn::Adv: return "adv";
    case Fn::Pair: return "pair";
    case Fn::Fst: return "fst";
    case Fn::Snd: return "snd";
    case Fn::Pk: return "pk";
    case Fn::Sk: return "sk";
    case Fn::Enc: return "enc";
    case Fn::Dec: return "dec";
    case Fn::Ite: return "ite";
    case Fn::True: return "true";
    case Fn::False: return "false";
    case Fn::Zero: return "zero";
    case Fn::Eq: return "eq";
  }
  return "?";
}

namespace detail {

// Process-wide identifier interning. Append-only; ids are stable within a
// run but never compared across runs (orderings go through the strings).
class InternTable {
 public:
  static InternTable& instance() {
    static InternTable t;
    return t;
  }
  uint32_t id(const std::string& s) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ids_.find(s);
    if (it != ids_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(strings_.size());
    strings_.push_back(s);
    ids_.emplace(s, id);
    return id;
  }
  const std::string& str(uint32_t id) {
    std::lock_guard<std::mutex> lock(mu_);
    return strings_.at(id);
  }

 private:
  std::mutex mu_;
  std::vector<std::string> strings_;
  std::unordered_map<std::string, uint32_t> ids_;
};

}  // namespace detail

class Term;
using TermVec = std::vector<Term>;

struct TermNode {
  Fn fn;
  uint32_t ident;  // Name/Adv only
  TermVec args;
  size_t hash;
  uint32_t size;     // number of positions
  bool if_free;      // no ite anywhere
};

// Immutable ground term, shared by value. All operations are pure.
class Term {
 public:
  Term() = default;

  Fn fn() const { return node_->fn; }
  const TermVec& args() const { return node_->args; }
  size_t arity() const { return node_->args.size(); }
  const Term& arg(size_t i) const { return node_->args[i]; }
  size_t hash() const { return node_->hash; }
  uint32_t size() const { return node_->size; }
  bool if_free() const { return node_->if_free; }
  bool valid() const { return node_ != nullptr; }

  uint32_t ident_id() const { return node_->ident; }
  std::string ident() const { return detail::InternTable::instance().str(node_->ident); }

  Sort sort() const {
    switch (node_->fn) {
      case Fn::True:
      case Fn::False:
      case Fn::Eq:
        return Sort::Bool;
      default:
        return Sort::Message;
    }
  }

  // Acceptable in an ite condition slot: Bool-sorted terms, and adversarial
  // applications (the adversary's output read as a bit, as in the paper's
  // ite(g(), ., .) examples). Names and other builtins are not.
  bool conditional_ok() const {
    return sort() == Sort::Bool || node_->fn == Fn::Adv;
  }

  bool is(Fn f) const { return node_->fn == f; }
  bool is_name() const { return node_->fn == Fn::Name; }

  bool operator==(const Term& o) const {
    if (node_ == o.node_) return true;
    if (!node_ || !o.node_) return false;
    if (node_->hash != o.node_->hash || node_->fn != o.node_->fn ||
        node_->ident != o.node_->ident || node_->args.size() != o.node_->args.size() ||
        node_->size != o.node_->size)
      return false;
    for (size_t i = 0; i < node_->args.size(); ++i)
      if (!(node_->args[i] == o.node_->args[i])) return false;
    return true;
  }
  bool operator!=(const Term& o) const { return !(*this == o); }

  static Term make(Fn fn, uint32_t ident, TermVec args) {
    auto n = std::make_shared<TermNode>();
    n->fn = fn;
    n->ident = ident;
    n->args = std::move(args);
    size_t h = static_cast<size_t>(fn) * 1000003u + ident * 0x9e3779b97f4a7c15ull;
    uint32_t sz = 1;
    bool iff = fn != Fn::Ite;
    for (const auto& a : n->args) {
      h = h * 1099511628211ull + a.hash();
      sz += a.size();
      iff = iff && a.if_free();
    }
    n->hash = h;
    n->size = sz;
    n->if_free = iff;
    return Term(std::move(n));
  }

 private:
  explicit Term(std::shared_ptr<const TermNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const TermNode> node_;
};

struct TermHash {
  size_t operator()(const Term& t) const { return t.hash(); }
};

inline Term mk_name(const std::string& id) {
  return Term::make(Fn::Name, detail::InternTable::instance().id(id), {});
}
inline Term mk_adv(const std::string& id, TermVec args) {
  return Term::make(Fn::Adv, detail::InternTable::instance().id(id), std::move(args));
}
inline Term mk_app(Fn f, TermVec args) { return Term::make(f, 0, std::move(args)); }
inline Term mk_pair(Term a, Term b) { return mk_app(Fn::Pair, {std::move(a), std::move(b)}); }
inline Term mk_fst(Term a) { return mk_app(Fn::Fst, {std::move(a)}); }
inline Term mk_snd(Term a) { return mk_app(Fn::Snd, {std::move(a)}); }
inline Term mk_pk(Term a) { return mk_app(Fn::Pk, {std::move(a)}); }
inline Term mk_sk(Term a) { return mk_app(Fn::Sk, {std::move(a)}); }
inline Term mk_enc(Term m, Term pk, Term r) {
  return mk_app(Fn::Enc, {std::move(m), std::move(pk), std::move(r)});
}
inline Term mk_dec(Term c, Term k) { return mk_app(Fn::Dec, {std::move(c), std::move(k)}); }
inline Term mk_ite(Term b, Term x, Term y) {
  return mk_app(Fn::Ite, {std::move(b), std::move(x), std::move(y)});
}
inline Term mk_true() { return mk_app(Fn::True, {}); }
inline Term mk_false() { return mk_app(Fn::False, {}); }
inline Term mk_zero(Term a) { return mk_app(Fn::Zero, {std::move(a)}); }
inline Term mk_eq(Term a, Term b) { return mk_app(Fn::Eq, {std::move(a), std::move(b)}); }

// Adversarial part of the signature. Builtins are fixed and not stored.
class Signature {
 public:
  void declare_adv(const std::string& id, size_t arity) {
    static const std::unordered_set<std::string> reserved = {
        "pair", "fst", "snd", "pk", "sk",   "enc",  "dec", "ite",
        "true", "false", "zero", "eq", "adv", "name"};
    if (reserved.count(id))
      throw std::runtime_error("adversarial identifier collides with a builtin: " + id);
    auto it = adv_.find(id);
    if (it != adv_.end() && it->second != arity)
      throw std::runtime_error("adversarial symbol redeclared with different arity: " + id);
    adv_[id] = arity;
  }
  bool has_adv(const std::string& id) const { return adv_.count(id) != 0; }
  size_t adv_arity(const std::string& id) const { return adv_.at(id); }
  const std::unordered_map<std::string, size_t>& adversarial() const { return adv_; }

 private:
  std::unordered_map<std::string, size_t> adv_;
};

using Position = std::vector<uint32_t>;

inline bool position_valid(const Term& t, const Position& p) {
  const Term* cur = &t;
  for (uint32_t i : p) {
    if (i >= cur->arity()) return false;
    cur = &cur->arg(i);
  }
  return true;
}

inline Term subterm_at(const Term& t, const Position& p) {
  const Term* cur = &t;
  for (uint32_t i : p) {
    if (i >= cur->arity()) throw std::out_of_range("invalid position");
    cur = &cur->arg(i);
  }
  return *cur;
}

namespace detail {
inline Term replace_rec(const Term& t, const Position& p, size_t k, const Term& s) {
  if (k == p.size()) return s;
  if (p[k] >= t.arity()) throw std::out_of_range("invalid position");
  TermVec args = t.args();
  args[p[k]] = replace_rec(args[p[k]], p, k + 1, s);
  return Term::make(t.fn(), t.ident_id(), std::move(args));
}
}  // namespace detail

// Sort compatibility is the caller's duty at ite condition slots; the
// checked variant lives in the parser where user input enters.
inline Term replace_at(const Term& t, const Position& p, const Term& s) {
  return detail::replace_rec(t, p, 0, s);
}

inline bool is_if_free(const Term& t) { return t.if_free(); }

inline bool contains(const Term& t, const Term& s) {
  if (t == s) return true;
  for (const auto& a : t.args())
    if (contains(a, s)) return true;
  return false;
}

inline void collect_names(const Term& t, std::unordered_set<std::string>& out) {
  if (t.is_name()) {
    out.insert(t.ident());
    return;
  }
  for (const auto& a : t.args()) collect_names(a, out);
}

inline std::unordered_set<std::string> names_of(const Term& t) {
  std::unordered_set<std::string> s;
  collect_names(t, s);
  return s;
}

inline void collect_subterms(const Term& t, std::unordered_set<Term, TermHash>& out) {
  if (!out.insert(t).second) return;
  for (const auto& a : t.args()) collect_subterms(a, out);
}

// Finite renaming of names, identity elsewhere. Must be injective on the
// names of the term it is applied to.
class NameRenaming {
 public:
  void add(const std::string& from, const std::string& to) { map_[from] = to; }
  bool empty() const { return map_.empty(); }
  const std::unordered_map<std::string, std::string>& pairs() const { return map_; }

  std::string apply_name(const std::string& n) const {
    auto it = map_.find(n);
    return it == map_.end() ? n : it->second;
  }

  Term apply(const Term& t) const {
    if (t.is_name()) {
      auto it = map_.find(t.ident());
      return it == map_.end() ? t : mk_name(it->second);
    }
    if (t.arity() == 0) return t;
    TermVec args;
    args.reserve(t.arity());
    for (const auto& a : t.args()) args.push_back(apply(a));
    return Term::make(t.fn(), t.ident_id(), std::move(args));
  }

  // The recorded map extended by the identity must act injectively on
  // `names`; this is the bijectivity requirement of the paper's renamings.
  bool injective_on(const std::unordered_set<std::string>& names) const {
    std::unordered_map<std::string, std::string> img;
    for (const auto& n : names) {
      std::string m = apply_name(n);
      auto [it, fresh] = img.emplace(m, n);
      if (!fresh && it->second != n) return false;
    }
    return true;
  }

  NameRenaming inverse() const {
    NameRenaming inv;
    for (const auto& [a, b] : map_) inv.add(b, a);
    return inv;
  }

  bool injective() const {
    std::unordered_set<std::string> img;
    for (const auto& [a, b] : map_)
      if (!img.insert(b).second) return false;
    return true;
  }

 private:
  std::unordered_map<std::string, std::string> map_;
};

inline Term alpha_rename(const Term& t, const NameRenaming& mu) {
  if (!mu.injective() || !mu.injective_on(names_of(t)))
    throw std::invalid_argument("renaming is not injective on the names of the term");
  return mu.apply(t);
}

}  // namespace bcidx

#endif  // BCIDX_TERM_HPP
