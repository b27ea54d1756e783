#ifndef BCIDX_LENGTH_HPP
#define BCIDX_LENGTH_HPP

#include <map>
#include <optional>
#include <string>

#include <set>

#include "bcidx/term.hpp"

namespace bcidx {

// Formal non-negative integer combination of length constants; equality is
// coefficient-map equality, so commutativity is built in. Zero coefficients
// are never stored.
class LengthExpr {
 public:
  LengthExpr() = default;
  static LengthExpr constant(const std::string& c, long long k = 1) {
    LengthExpr e;
    e.add(c, k);
    return e;
  }

  void add(const std::string& c, long long k) {
    if (k == 0) return;
    auto it = coeffs_.find(c);
    if (it == coeffs_.end()) {
      coeffs_.emplace(c, k);
    } else {
      it->second += k;
      if (it->second == 0) coeffs_.erase(it);
    }
  }

  LengthExpr operator+(const LengthExpr& o) const {
    LengthExpr r = *this;
    for (const auto& [c, k] : o.coeffs_) r.add(c, k);
    return r;
  }

  bool operator==(const LengthExpr& o) const { return coeffs_ == o.coeffs_; }
  bool operator!=(const LengthExpr& o) const { return !(*this == o); }

  long long coeff(const std::string& c) const {
    auto it = coeffs_.find(c);
    return it == coeffs_.end() ? 0 : it->second;
  }
  const std::map<std::string, long long>& coeffs() const { return coeffs_; }

  // True iff the expression is exactly k * c for some k >= 1.
  std::optional<long long> pure_multiple_of(const std::string& c) const {
    if (coeffs_.size() != 1) return std::nullopt;
    auto it = coeffs_.begin();
    if (it->first != c || it->second < 1) return std::nullopt;
    return it->second;
  }

  std::string render() const {
    std::string s = "(+";
    for (const auto& [c, k] : coeffs_) s += " (* " + std::to_string(k) + " " + c + ")";
    s += ")";
    return s;
  }

 private:
  std::map<std::string, long long> coeffs_;
};

inline const char* kLEta = "l_eta";
inline const char* kLPair = "l_pair";
inline const char* kLEnc = "l_enc";
inline const char* kLBlock = "l_block";
inline const char* kLEBlock = "l_eblock";

// User length declarations: extra constants, per-name equations, and the
// pad / zero-constant symbols carrying a fixed output length.
class LengthDecls {
 public:
  void declare_const(const std::string& c) { consts_.insert(c); }

  void declare_name_eq(const std::string& name, const LengthExpr& e) {
    auto it = name_eqs_.find(name);
    if (it != name_eqs_.end() && it->second != e)
      throw std::runtime_error("conflicting length equations for name " + name);
    name_eqs_.emplace(name, e);
  }

  void declare_pad(const std::string& id, const LengthExpr& e) { pads_[id] = e; }
  void declare_zero_const(const std::string& id, const LengthExpr& e) { zeros_[id] = e; }

  std::optional<LengthExpr> name_length(const std::string& n) const {
    auto it = name_eqs_.find(n);
    if (it == name_eqs_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<LengthExpr> pad_length(const std::string& id) const {
    auto it = pads_.find(id);
    if (it == pads_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<LengthExpr> zero_const_length(const std::string& id) const {
    auto it = zeros_.find(id);
    if (it == zeros_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::string, LengthExpr>& pads() const { return pads_; }
  const std::map<std::string, LengthExpr>& zero_consts() const { return zeros_; }
  const std::set<std::string>& consts() const { return consts_; }
  const std::map<std::string, LengthExpr>& name_eqs() const { return name_eqs_; }

 private:
  std::set<std::string> consts_;
  std::map<std::string, LengthExpr> name_eqs_;
  std::map<std::string, LengthExpr> pads_;
  std::map<std::string, LengthExpr> zeros_;
};

namespace detail {

// Structural recursion on the raw term. The ite case demands that both
// branches agree, which gives branch invariance; when two =R-equal terms
// both have a length, the values coincide. Bool-sorted terms have none.
inline std::optional<LengthExpr> length_rec(const Term& t, const LengthDecls& d) {
  switch (t.fn()) {
    case Fn::Name: {
      if (auto e = d.name_length(t.ident())) return e;
      return LengthExpr::constant(kLEta);
    }
    case Fn::Adv: {
      if (t.arity() == 0) {
        if (auto e = d.zero_const_length(t.ident())) return e;
      } else if (t.arity() == 1) {
        if (auto e = d.pad_length(t.ident())) return e;
      }
      return std::nullopt;
    }
    case Fn::Pair: {
      auto a = length_rec(t.arg(0), d), b = length_rec(t.arg(1), d);
      if (!a || !b) return std::nullopt;
      return *a + *b + LengthExpr::constant(kLPair);
    }
    case Fn::Zero:
      // zero(t) returns |t| zeros; length is preserved.
      return length_rec(t.arg(0), d);
    case Fn::Enc: {
      auto m = length_rec(t.arg(0), d);
      if (!m) return std::nullopt;
      auto k = m->pure_multiple_of(kLBlock);
      if (!k) return std::nullopt;
      LengthExpr e = LengthExpr::constant(kLEBlock, *k);
      e.add(kLEnc, 1);
      return e;
    }
    case Fn::Dec: {
      auto c = length_rec(t.arg(0), d);
      if (!c) return std::nullopt;
      if (c->coeffs().size() != 2 || c->coeff(kLEnc) != 1) return std::nullopt;
      long long k = c->coeff(kLEBlock);
      if (k < 1) return std::nullopt;
      return LengthExpr::constant(kLBlock, k);
    }
    case Fn::Ite: {
      auto a = length_rec(t.arg(1), d), b = length_rec(t.arg(2), d);
      if (!a || !b || *a != *b) return std::nullopt;
      return a;
    }
    default:
      return std::nullopt;  // fst/snd/pk/sk and all Bool-sorted terms
  }
}

}  // namespace detail

inline std::optional<LengthExpr> length_of(const Term& t, const LengthDecls& d) {
  return detail::length_rec(t, d);
}

inline bool eql(const Term& u, const Term& v, const LengthDecls& d) {
  auto a = length_of(u, d), b = length_of(v, d);
  return a && b && *a == *b;
}

}  // namespace bcidx

#endif  // BCIDX_LENGTH_HPP
