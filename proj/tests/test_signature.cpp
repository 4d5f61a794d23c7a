#include <doctest.h>

#include "fixtures.hpp"
#include "fit/signature.hpp"

using namespace fit;
using fixtures::sig_from;

TEST_CASE("binary tree declarations build the documented signature") {
  Signature sig = sig_from(fixtures::binary_tree_decls());
  const FeatureInfo& label = sig.feature("label");
  CHECK(label.introducer == "binary_tree");
  CHECK(label.restriction == "top");
  const FeatureInfo& ld = sig.feature("left_daughter");
  CHECK(ld.introducer == "internal_node");
  CHECK(ld.restriction == "binary_tree");
  CHECK(sig.sort("leaf").parent == "binary_tree");
  CHECK(sig.sort("binary_tree").parent == "top");
}

TEST_CASE("hierarchy cycles are rejected") {
  try {
    sig_from("a > [b]. b > [a].");
    FAIL("expected a signature error");
  } catch (const FitError& e) {
    CHECK(e.cls() == ErrorClass::Signature);
    CHECK(e.msg().find("cycle") != std::string::npos);
  }
}

TEST_CASE("multi-dimensional declaration: phrasal") {
  Signature sig = sig_from(fixtures::hpsg_decls());
  const SortInfo& phrasal = sig.sort("phrasal");
  REQUIRE(phrasal.dims.size() == 2);
  CHECK(phrasal.dims[0] == std::vector<std::string>{"headed", "non_headed"});
  CHECK(phrasal.dims[1] == std::vector<std::string>{"decl", "int", "rel"});
  REQUIRE(phrasal.intro.size() == 1);
  CHECK(phrasal.intro[0].first == "daughters");
  CHECK(sig.sort("decl").parent_dim == 1);
}

TEST_CASE("available features are inherited ancestor-first") {
  Signature sig = sig_from(fixtures::hpsg_decls());
  std::vector<std::string> got;
  for (const auto& [f, r] : sig.available_features("phrasal")) got.push_back(f);
  CHECK(got == std::vector<std::string>{"phon", "synsem", "qstore", "retrieved", "daughters"});
  CHECK(sig.available_features("top").empty());

  Signature bt = sig_from(fixtures::binary_tree_decls());
  got.clear();
  for (const auto& [f, r] : bt.available_features("internal_node")) got.push_back(f);
  CHECK(got == std::vector<std::string>{"label", "left_daughter", "right_daughter"});
}

TEST_CASE("available features of a sort extend the parent's as a prefix") {
  Signature sig = sig_from(fixtures::hpsg_decls());
  for (const std::string& name : sig.sort_order()) {
    const SortInfo& s = sig.sort(name);
    if (s.parent == "top") continue;
    const auto& mine = sig.available_features(name);
    const auto& parents = sig.available_features(s.parent);
    REQUIRE(mine.size() >= parents.size());
    for (size_t i = 0; i < parents.size(); ++i) CHECK(mine[i] == parents[i]);
  }
}

namespace {
Signature agr_sig() { return sig_from("agr fin_dom [1,2,3] * [sg,pl]."); }

uint64_t subset_of(const Signature& sig, const char* text) {
  SrcPtr t = parse_term_text(text);
  REQUIRE(t->kind == SrcKind::FinDom);
  return sig.element_subset(sig.infer_domain(t->fd), t->fd);
}
}  // namespace

TEST_CASE("element order: first dimension varies fastest") {
  Signature sig = agr_sig();
  const DomainInfo& d = sig.domain("agr");
  REQUIRE(d.size() == 6);
  CHECK(d.elements[0][0].ival == 1);
  CHECK(d.elements[0][1].sym == "sg");
  CHECK(d.elements[1][0].ival == 2);
  CHECK(d.elements[3][0].ival == 1);
  CHECK(d.elements[3][1].sym == "pl");
}

TEST_CASE("element_subset on the agreement domain") {
  Signature sig = agr_sig();
  CHECK(subset_of(sig, "3&sg.") == 0b000100);
  // {2&sg, 1&pl, 2&pl, 3&pl} — brute-force over all six tuples
  CHECK(subset_of(sig, "2 or pl.") == 0b111010);
  // complement by enumeration: all but 3&sg
  CHECK(subset_of(sig, "~(3&sg).") == 0b111011);
  CHECK(subset_of(sig, "2@agr.") == 0b010010);
}

TEST_CASE("element_subset is a boolean-algebra homomorphism") {
  Signature sig = agr_sig();
  const DomainInfo& d = sig.domain("agr");
  std::vector<FdPtr> pool = {
      fd_int(1),
      fd_int(2),
      fd_int(3),
      fd_atom("sg"),
      fd_atom("pl"),
      fd_bin(FdKind::And, fd_int(2), fd_atom("sg")),
      fd_bin(FdKind::Or, fd_int(1), fd_atom("pl")),
      fd_neg(fd_atom("sg")),
  };
  for (const FdPtr& a : pool) {
    CHECK(sig.element_subset("agr", fd_neg(a)) ==
          (d.full_mask() & ~sig.element_subset("agr", a)));
    for (const FdPtr& b : pool) {
      CHECK(sig.element_subset("agr", fd_bin(FdKind::And, a, b)) ==
            (sig.element_subset("agr", a) & sig.element_subset("agr", b)));
      CHECK(sig.element_subset("agr", fd_bin(FdKind::Or, a, b)) ==
            (sig.element_subset("agr", a) | sig.element_subset("agr", b)));
    }
  }
}

TEST_CASE("domain inference rules") {
  Signature sig = sig_from(
      "agr fin_dom [1,2,3] * [sg,pl].\n"
      "case fin_dom [nom,acc,sg2].\n");
  // unambiguous symbol resolves its domain
  SrcPtr t = parse_term_text("2 or pl.");
  CHECK(sig.infer_domain(t->fd) == "agr");
  // integers alone cannot resolve a domain
  t = parse_term_text("1 & 2.");
  CHECK_THROWS_AS(sig.infer_domain(t->fd), FitError);
  // annotation decides
  t = parse_term_text("(1 & 2)@agr.");
  CHECK(sig.infer_domain(t->fd) == "agr");
  // atoms from two different domains cannot mix
  t = parse_term_text("nom or pl.");
  CHECK_THROWS_AS(sig.infer_domain(t->fd), FitError);
  // membership is checked against the inferred domain
  t = parse_term_text("nom & 2.");
  CHECK(sig.infer_domain(t->fd) == "case");
  CHECK_THROWS_AS(sig.element_subset("case", t->fd), FitError);
}

TEST_CASE("signature validation errors") {
  auto expect_sig_error = [](const char* text, const char* needle) {
    try {
      sig_from(text);
      FAIL_CHECK("expected signature error for: " << text);
    } catch (const FitError& e) {
      CHECK(e.cls() == ErrorClass::Signature);
      CHECK_MESSAGE(e.msg().find(needle) != std::string::npos, e.msg());
    }
  };
  expect_sig_error("a > [b]. a > [c].", "only be defined once");
  expect_sig_error("a intro [f]. b intro [f].", "introduced at both");
  expect_sig_error("a intro [f:nowhere].", "neither a declared sort");
  expect_sig_error("d fin_dom [x,x].", "duplicate domain element");
  expect_sig_error("d fin_dom [x] * [y,x].", "duplicate domain element");
  expect_sig_error("a intro [f]. a fin_dom [x,y].", "both as a sort and as a finite domain");
  expect_sig_error("a > [b]. extensional [b].", "immediate subsorts of top");
  expect_sig_error("a > [c]. b > [c].", "more than one subsort declaration");
  expect_sig_error("top > [a,b].", "implicit");
}

TEST_CASE("extensionality is inherited downward") {
  Signature sig = sig_from(
      "pair > [nil_pair, cons_pair] intro [fst, snd].\n"
      "extensional [pair].\n"
      "other intro [g].\n");
  CHECK(sig.sort("pair").extensional);
  CHECK(sig.sort("nil_pair").extensional);
  CHECK(sig.sort("cons_pair").extensional);
  CHECK_FALSE(sig.sort("other").extensional);
}

TEST_CASE("sort compatibility follows dimensions") {
  Signature sig = sig_from(fixtures::hpsg_decls());
  CHECK(sig.sorts_compatible("headed", "decl"));  // different dimensions
  CHECK_FALSE(sig.sorts_compatible("headed", "non_headed"));
  CHECK_FALSE(sig.sorts_compatible("lexical", "phrasal"));
  CHECK(sig.sorts_compatible("sign", "headed"));       // ancestor
  CHECK_FALSE(sig.sorts_compatible("sign", "elist"));  // distinct roots
}

TEST_CASE("declarations and clauses may interleave in any order") {
  auto items = parse_program(
      "verb(sleeps, 3&sg).\n"
      "agr fin_dom [1,2,3] * [sg,pl].\n"
      "verb(am, 1&sg).\n");
  KnowledgeBase kb = compile_program(items, {});
  CHECK(kb.clauses.size() == 2);
  CHECK(kb.sig.is_domain("agr"));
}

TEST_CASE("templates register by name and arity, recursion allowed at build") {
  Signature sig = sig_from(
      "t := @t.\n"  // recursive-looking heads are fine until expansion
      "f(X) := g(X).\n"
      "f(a) := b.\n");
  REQUIRE(sig.templates("f", 1));
  CHECK(sig.templates("f", 1)->size() == 2);
  CHECK(sig.templates("t", 0));
  CHECK(sig.templates("f", 2) == nullptr);
}

TEST_CASE("template calls in template heads are rejected") {
  try {
    sig_from("f(@g(X)) := X.");
    FAIL("expected template error");
  } catch (const FitError& e) {
    CHECK(e.cls() == ErrorClass::Template);
  }
}
