#include <catch2/catch_amalgamated.hpp>

#include "bcidx/parse.hpp"
#include "bcidx/search.hpp"
#include "testutil.hpp"

using namespace bcidx;

namespace {
Term N(const char* s) { return mk_name(s); }
}

TEST_CASE("zeta un-zeroes decryptions under keys in K") {
  CanonicalOrder ord;
  Signature sig;
  sig.declare_adv("h", 1);
  Term k = N("k");
  Term w = mk_adv("h", {N("n0")});
  Term t = mk_zero(mk_dec(w, mk_sk(k)));

  CandidateSet cs = candidate_terms(t, t, ord);
  REQUIRE(cs.terms.count(mk_dec(w, mk_sk(k))) == 1);
  REQUIRE(cs.per_key.count("k") == 1);

  // Stopping at encryptions: both the encryption itself and its un-zeroed
  // body variant are candidates.
  Term inner = mk_zero(mk_dec(w, mk_sk(k)));
  Term e = mk_enc(inner, mk_pk(k), N("r"));
  CandidateSet cs2 = candidate_terms(e, e, ord);
  REQUIRE(cs2.terms.count(e) == 1);
  REQUIRE(cs2.terms.count(mk_enc(mk_dec(w, mk_sk(k)), mk_pk(k), N("r"))) == 1);
}

TEST_CASE("without secret keys the pool is the subterms of the normal forms") {
  CanonicalOrder ord;
  auto gen = testutil::make_generator(3);
  for (int i = 0; i < 40; ++i) {
    Term t = gen.random_term(14);
    if (!testutil::oracle_is_normal(t, ord)) continue;
    bool has_key = false;
    std::unordered_set<Term, TermHash> subs;
    collect_subterms(t, subs);
    for (const auto& s : subs) has_key = has_key || (s.is(Fn::Sk) && s.arg(0).is_name());
    if (has_key) continue;
    CandidateSet cs = candidate_terms(t, t, ord);
    REQUIRE(cs.terms == cs.goal_subterms);
  }
}

TEST_CASE("guards are drawn into the pool") {
  CanonicalOrder ord;
  Signature sig;
  sig.declare_adv("g", 1);
  Term k = N("k");
  Term e = mk_enc(N("m"), mk_pk(k), N("r"));
  Term t = mk_dec(mk_adv("g", {e}), mk_sk(k));
  CandidateSet cs = candidate_terms(t, t, ord);
  REQUIRE(cs.terms.count(mk_eq(mk_adv("g", {e}), e)) == 1);
}

TEST_CASE("candidate bound spot check") {
  CanonicalOrder ord;
  auto gen = testutil::make_generator(17);
  for (int i = 0; i < 25; ++i) {
    Term t = gen.random_term(12);
    Term nf = normalize(t, ord);
    if (nf.size() > 16) continue;
    CandidateSet cs = candidate_terms(t, t, ord);
    double bound = double(nf.size()) * double(nf.size()) * std::pow(2.0, double(nf.size()));
    REQUIRE(double(cs.terms.size()) <= 2 * bound);  // B(t,t) counted from both sides
    REQUIRE(cs.max_member_size <= 2 * nf.size());
  }
}

TEST_CASE("search: reflexivity closes immediately") {
  CanonicalOrder ord;
  LengthDecls decls;
  SearchBudget b;
  b.max_depth = 3;
  SearchResult r = search(Sequent{{N("n")}, {N("n")}}, b, ord, decls);
  REQUIRE(r.status == SearchStatus::Found);
  REQUIRE(proof_stats(*r.proof).node_count == 1);
}

TEST_CASE("search: the conditional-introduction example") {
  CanonicalOrder ord;
  LengthDecls decls;
  Signature sig;
  sig.declare_adv("g", 0);
  Term g = mk_adv("g", {});
  Sequent goal{{mk_ite(g, N("n0"), N("n1"))}, {N("n")}};
  SearchBudget b;
  b.max_depth = 6;
  SearchResult r = search(goal, b, ord, decls);
  REQUIRE(r.status == SearchStatus::Found);
  auto st = proof_stats(*r.proof);
  REQUIRE(st.node_count == 4);  // R, CS, Refl, Refl
  REQUIRE(st.height == 3);
  REQUIRE(check_proof(*r.proof, ord, decls).ok);
}

TEST_CASE("search: shape-mismatched goal is NotFound, not a crash") {
  CanonicalOrder ord;
  LengthDecls decls;
  SearchBudget b;
  b.max_depth = 4;
  b.timeout_seconds = 10;
  SearchResult r = search(Sequent{{N("n0")}, {mk_pair(N("n0"), N("n0"))}}, b, ord, decls);
  REQUIRE(r.status == SearchStatus::NotFound);
}

TEST_CASE("cca_leaf_match reconstructs instances") {
  CanonicalOrder ord;
  LengthDecls decls;

  // Two-key instance.
  Term pk1 = mk_pk(N("k1")), pk2 = mk_pk(N("k2"));
  Sequent s{{mk_enc(N("ma"), pk1, N("r0")), mk_enc(N("mb"), pk2, N("r1"))},
            {mk_enc(N("mc"), pk1, N("r0")), mk_enc(N("md"), pk2, N("r1"))}};
  auto str = cca_leaf_match(s, decls, ord);
  REQUIRE(str);
  REQUIRE(str->keys.size() == 2);
  REQUIRE(str->calls.size() == 2);
  REQUIRE(verify_cca_instance(s, *str, decls, ord).ok);

  // Renaming inferred from base components.
  Sequent s2{{mk_enc(N("c0"), pk1, N("ra2")), N("r")}, {mk_enc(N("c1"), pk1, N("ra2")), N("ra")}};
  auto str2 = cca_leaf_match(s2, decls, ord);
  REQUIRE(str2);
  REQUIRE(verify_cca_instance(s2, *str2, decls, ord).ok);

  // Plain mismatch has no reconstruction.
  REQUIRE_FALSE(cca_leaf_match(Sequent{{N("n0")}, {mk_pair(N("n0"), N("n0"))}}, decls, ord));

  // Guarded decryption with its encryption.
  Signature sig;
  sig.declare_adv("g", 1);
  Term al = mk_enc(N("m0"), pk1, N("r0")), ar = mk_enc(N("m1"), pk1, N("r0"));
  Term ul = mk_adv("g", {al}), ur = mk_adv("g", {ar});
  Term dl = elses({mk_eq(ul, al)}, mk_dec(ul, mk_sk(N("k1"))));
  Term dr = elses({mk_eq(ur, ar)}, mk_dec(ur, mk_sk(N("k1"))));
  Sequent s3{{al, dl}, {ar, dr}};
  auto str3 = cca_leaf_match(s3, decls, ord);
  REQUIRE(str3);
  REQUIRE(str3->calls.size() == 2);
  REQUIRE_FALSE(str3->calls[0].is_enc == str3->calls[1].is_enc);
}

TEST_CASE("search soundness on forward-constructed provable goals") {
  CanonicalOrder ord;
  LengthDecls decls;
  testutil::ProofGen pg(404);
  int found = 0;
  for (int i = 0; i < 30; ++i) {
    Derivation d = pg.random_proof(1 + static_cast<int>(pg.gen.pick(3)), false);
    REQUIRE(check_proof(d, ord, decls).ok);
    SearchBudget b;
    b.max_depth = 6;
    b.timeout_seconds = 5;
    SearchResult r = search(d.conclusion, b, ord, decls);
    if (r.status == SearchStatus::Found) {
      ++found;
      REQUIRE(check_proof(*r.proof, ord, decls).ok);
    }
  }
  REQUIRE(found >= 10);
}

TEST_CASE("budget monotonicity") {
  CanonicalOrder ord;
  LengthDecls decls;
  Signature sig;
  sig.declare_adv("g", 0);
  Term g = mk_adv("g", {});
  Sequent goal{{mk_ite(g, N("n0"), N("n1"))}, {N("n")}};
  SearchBudget b;
  b.max_depth = 6;
  SearchResult r1 = search(goal, b, ord, decls);
  REQUIRE(r1.status == SearchStatus::Found);
  SearchBudget b2 = b;
  b2.max_depth = 12;
  b2.max_candidates = b.max_candidates * 2;
  SearchResult r2 = search(goal, b2, ord, decls);
  REQUIRE(r2.status == SearchStatus::Found);
  REQUIRE(proof_stats(*r2.proof).node_count <= proof_stats(*r1.proof).node_count);
}

TEST_CASE("parallel branch search agrees with sequential") {
  CanonicalOrder ord;
  LengthDecls decls;
  Signature sig;
  sig.declare_adv("g", 0);
  Term g = mk_adv("g", {});
  Sequent goal{{mk_ite(g, N("n0"), N("n1"))}, {N("n")}};
  SearchBudget b;
  b.max_depth = 6;
  b.jobs = 2;
  SearchResult r = search(goal, b, ord, decls);
  REQUIRE(r.status == SearchStatus::Found);
  REQUIRE(proof_stats(*r.proof).node_count == 4);
}

TEST_CASE("introduced conditionals come from the candidate pool or the goal") {
  CanonicalOrder ord;
  LengthDecls decls;
  GoalFile gf = parse_goal_text(
      "(decl-adv g 1)\n(decl-len-zero zc (+ (* 1 l_block)))\n(decl-len-zero oc (+ (* 1 "
      "l_block)))\n(goal (left (pair (dec (adv g (enc (enc (adv zc) (pk n.ka) n.ra) (pk n.kb) "
      "n.rb)) (sk n.kb)) n.r)) (right (ite (eq (adv g (enc (enc (adv oc) (pk n.ka) n.ra) (pk "
      "n.kb) n.rb)) (enc (enc (adv oc) (pk n.ka) n.ra) (pk n.kb) n.rb)) (pair (dec (adv g (enc "
      "(enc (adv oc) (pk n.ka) n.ra) (pk n.kb) n.rb)) (sk n.kb)) n.r) (pair (dec (adv g (enc "
      "(enc (adv oc) (pk n.ka) n.ra) (pk n.kb) n.rb)) (sk n.kb)) n.ra))))");
  Sequent goal{gf.left, gf.right};
  SearchBudget b;
  b.max_depth = 14;
  b.timeout_seconds = 120;
  SearchResult r = search(goal, b, ord, decls, gf.hints);
  REQUIRE(r.status == SearchStatus::Found);

  CandidateSet pool = candidate_terms(goal, ord);
  auto in_pool_or_goal = [&](const Term& c) {
    if (pool.terms.count(c)) return true;
    for (const auto& t : goal.left)
      if (contains(t, c)) return true;
    for (const auto& t : goal.right)
      if (contains(t, c)) return true;
    return false;
  };
  // Every ite condition occurring in an Rw replacement is pool- or
  // goal-derived material.
  auto scan_conds = [&](const Term& t, auto&& self) -> void {
    if (t.is(Fn::Ite)) REQUIRE(in_pool_or_goal(t.arg(0)));
    for (const auto& a : t.args()) self(a, self);
  };
  auto walk = [&](const Derivation& d, auto&& self) -> void {
    if (auto* rw = std::get_if<RwRule>(&d.rule)) scan_conds(rw->replacement, scan_conds);
    for (const auto& p : d.premises) self(p, self);
  };
  walk(*r.proof, walk);
}
