#include <catch2/catch_amalgamated.hpp>

#include "bcidx/order.hpp"
#include "bcidx/parse.hpp"
#include "bcidx/term.hpp"
#include "testutil.hpp"

using namespace bcidx;

TEST_CASE("parsing the documented grammar") {
  Signature sig;
  sig.declare_adv("g", 0);

  Term t = parse_term("(ite (eq n.a n.b) true false)", sig);
  REQUIRE(t == mk_ite(mk_eq(mk_name("a"), mk_name("b")), mk_true(), mk_false()));

  Term u = parse_term("(dec (enc n.m (pk n.k) n.r) (sk n.k))", sig);
  REQUIRE(u == mk_dec(mk_enc(mk_name("m"), mk_pk(mk_name("k")), mk_name("r")),
                      mk_sk(mk_name("k"))));

  // Bool is a subsort of Message: Bool terms are accepted at Message slots.
  REQUIRE(parse_term("(pair true (eq n.a n.b))", sig) ==
          mk_pair(mk_true(), mk_eq(mk_name("a"), mk_name("b"))));

  REQUIRE_THROWS_AS(parse_term("(eq true)", sig), ParseError);          // arity
  REQUIRE_THROWS_AS(parse_term("(ite n.a n.b n.c)", sig), ParseError);  // sort
  REQUIRE_THROWS_AS(parse_term("(adv h)", sig), ParseError);            // unknown symbol
  REQUIRE_THROWS_AS(parse_term("(pair n.a", sig), ParseError);          // syntax
}

TEST_CASE("rendering is canonical") {
  Signature sig;
  sig.declare_adv("g", 0);
  REQUIRE(render_term(mk_ite(mk_adv("g", {}), mk_name("n0"), mk_name("n1"))) ==
          "(ite (adv g) n.n0 n.n1)");
  REQUIRE(render_term(mk_pk(mk_name("k"))) == "(pk n.k)");
  REQUIRE(render_term(mk_zero(mk_dec(mk_name("m"), mk_sk(mk_name("k"))))) ==
          "(zero (dec n.m (sk n.k)))");
}

TEST_CASE("parse . render is the identity on random terms") {
  auto gen = testutil::make_generator(7);
  for (int i = 0; i < 300; ++i) {
    Term t = gen.random_term_le(60);
    REQUIRE(parse_term(render_term(t), gen.sig) == t);
  }
}

TEST_CASE("positions") {
  Term a = mk_name("a"), b = mk_name("b");
  Term p = mk_pair(a, b);
  REQUIRE(subterm_at(p, {0}) == a);
  REQUIRE(subterm_at(p, {1}) == b);
  REQUIRE_THROWS_AS(subterm_at(p, {2}), std::out_of_range);
  Term z = mk_name("z");
  Term ite = mk_ite(mk_true(), a, b);
  REQUIRE(replace_at(ite, {1}, z) == mk_ite(mk_true(), z, b));
  REQUIRE(subterm_at(replace_at(p, {1}, z), {1}) == z);
  REQUIRE(subterm_at(replace_at(p, {1}, z), {0}) == a);
}

TEST_CASE("if-freeness") {
  Term a = mk_name("a"), b = mk_name("b");
  REQUIRE(is_if_free(mk_eq(a, b)));
  REQUIRE_FALSE(is_if_free(mk_ite(mk_true(), a, b)));
  REQUIRE_FALSE(is_if_free(mk_enc(mk_ite(mk_true(), a, b), mk_pk(a), b)));
}

TEST_CASE("canonical_compare is a total order") {
  REQUIRE(canonical_compare(mk_name("a"), mk_name("a")) == 0);
  auto gen = testutil::make_generator(11);
  for (int i = 0; i < 200; ++i) {
    Term x = gen.random_term(20), y = gen.random_term(20), z = gen.random_term(20);
    int xy = canonical_compare(x, y), yx = canonical_compare(y, x);
    REQUIRE(xy == -yx);
    REQUIRE((xy == 0) == (x == y));
    if (canonical_compare(x, y) < 0 && canonical_compare(y, z) < 0)
      REQUIRE(canonical_compare(x, z) < 0);
  }
}

TEST_CASE("sorting by canonical order is stable under re-sort") {
  Signature sig;
  Term u = mk_name("u");
  std::vector<Term> v = {mk_eq(u, mk_name("alpha2")), mk_eq(u, mk_name("alpha1"))};
  std::vector<Term> orig = v;
  std::sort(v.begin(), v.end(), CanonicalLess{});
  REQUIRE(std::is_permutation(v.begin(), v.end(), orig.begin()));
  auto once = v;
  std::sort(v.begin(), v.end(), CanonicalLess{});
  REQUIRE(v == once);
}

TEST_CASE("alpha renaming") {
  Term n = mk_name("n");
  NameRenaming mu;
  mu.add("n", "m");
  REQUIRE(alpha_rename(mk_pk(n), mu) == mk_pk(mk_name("m")));

  NameRenaming id;
  Term t = mk_pair(mk_name("a"), mk_name("b"));
  REQUIRE(alpha_rename(t, id) == t);

  NameRenaming swap;
  swap.add("a", "b");
  swap.add("b", "a");
  REQUIRE(alpha_rename(t, swap) == mk_pair(mk_name("b"), mk_name("a")));

  NameRenaming bad;  // not injective on {a, b}
  bad.add("a", "b");
  REQUIRE_THROWS_AS(alpha_rename(t, bad), std::invalid_argument);
}
