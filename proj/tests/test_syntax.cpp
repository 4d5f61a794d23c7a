#include <doctest.h>

#include <random>

#include "fit/parser.hpp"
#include "fit/render.hpp"

using namespace fit;

TEST_CASE("feature path fact parses to a nested feature-value chain") {
  auto items = parse_program("saturated( synsem!local!cat!subcat!<elist ).", "t.fit");
  REQUIRE(items.size() == 1);
  REQUIRE(items[0].kind == ItemKind::Clause);
  CHECK(items[0].body.empty());
  const SrcPtr& head = items[0].head;
  REQUIRE(head->kind == SrcKind::Compound);
  CHECK(head->name == "saturated");
  REQUIRE(head->args.size() == 1);
  SrcPtr t = head->args[0];
  const char* feats[] = {"synsem", "local", "cat", "subcat"};
  for (const char* f : feats) {
    REQUIRE(t->kind == SrcKind::FeatVal);
    CHECK(t->name == f);
    t = t->args[0];
  }
  REQUIRE(t->kind == SrcKind::SortRef);
  CHECK(t->name == "elist");
}

TEST_CASE("atomic fact") {
  auto items = parse_program("foo.");
  REQUIRE(items.size() == 1);
  CHECK(items[0].kind == ItemKind::Clause);
  CHECK(items[0].head->kind == SrcKind::Atom);
  CHECK(items[0].head->name == "foo");
  CHECK(items[0].body.empty());
}

TEST_CASE("finite domain declaration") {
  auto items = parse_program("agr fin_dom [1,2,3] * [sg,pl].");
  REQUIRE(items.size() == 1);
  REQUIRE(items[0].kind == ItemKind::FinDomDecl);
  CHECK(items[0].name == "agr");
  REQUIRE(items[0].domain_dims.size() == 2);
  CHECK(items[0].domain_dims[0].size() == 3);
  CHECK(items[0].domain_dims[0][0].is_int);
  CHECK(items[0].domain_dims[0][0].ival == 1);
  CHECK(items[0].domain_dims[1][1].sym == "pl");
}

TEST_CASE("combined and multi-dimensional declarations") {
  auto items = parse_program(
      "sign > [lexical,phrasal] intro [phon, synsem:synsem].\n"
      "phrasal > [headed,non_headed] * [decl,int,rel] intro [daughters].");
  REQUIRE(items.size() == 2);
  CHECK(items[0].kind == ItemKind::Combined);
  CHECK(items[0].dims == std::vector<std::vector<std::string>>{{"lexical", "phrasal"}});
  CHECK(items[0].feats[0] == std::pair<std::string, std::string>{"phon", "top"});
  CHECK(items[0].feats[1] == std::pair<std::string, std::string>{"synsem", "synsem"});
  CHECK(items[1].dims ==
        std::vector<std::vector<std::string>>{{"headed", "non_headed"}, {"decl", "int", "rel"}});
}

TEST_CASE("query with a finite-domain argument") {
  auto goals = parse_query("?- verb(W, 1&sg).");
  REQUIRE(goals.size() == 1);
  const SrcPtr& g = goals[0];
  REQUIRE(g->kind == SrcKind::Compound);
  REQUIRE(g->args.size() == 2);
  CHECK(g->args[0]->kind == SrcKind::Var);
  const SrcPtr& fd = g->args[1];
  REQUIRE(fd->kind == SrcKind::FinDom);
  REQUIRE(fd->fd->kind == FdKind::And);
  CHECK(fd->fd->a->kind == FdKind::Int);
  CHECK(fd->fd->a->ival == 1);
  CHECK(fd->fd->b->kind == FdKind::Atom);
  CHECK(fd->fd->b->name == "sg");
}

TEST_CASE("trivial query") {
  auto goals = parse_query("?- true.");
  REQUIRE(goals.size() == 1);
  CHECK(goals[0]->kind == SrcKind::Atom);
  CHECK(goals[0]->name == "true");
}

TEST_CASE("cyclic description query: = binds looser than &") {
  auto goals = parse_query("?- X & f(X) = X & f(X).");
  REQUIRE(goals.size() == 1);
  const SrcPtr& g = goals[0];
  REQUIRE(g->kind == SrcKind::Compound);
  CHECK(g->name == "=");
  REQUIRE(g->args.size() == 2);
  CHECK(g->args[0]->kind == SrcKind::Conj);
  CHECK(g->args[1]->kind == SrcKind::Conj);
  CHECK(g->args[0]->args[1]->kind == SrcKind::Compound);
}

TEST_CASE("search forms") {
  SrcPtr t = parse_term_text("sign>>>head!X.");
  REQUIRE(t->kind == SrcKind::Search);
  CHECK(t->start == "sign");
  CHECK(t->name == "head");
  CHECK(t->args[0]->kind == SrcKind::Var);

  t = parse_term_text("dtrs!head_dtr! >>>head!X.");
  REQUIRE(t->kind == SrcKind::FeatVal);
  CHECK(t->name == "dtrs");
  REQUIRE(t->args[0]->kind == SrcKind::FeatVal);
  const SrcPtr& inner = t->args[0]->args[0];
  REQUIRE(inner->kind == SrcKind::Search);
  CHECK(inner->start.empty());
  CHECK(inner->name == "head");

  CHECK_THROWS_AS(parse_term_text("sign>>>head."), FitError);  // bare search
}

TEST_CASE("prefix @ is a template call, infix @ a domain annotation") {
  SrcPtr t = parse_term_text("@first(List).");
  REQUIRE(t->kind == SrcKind::TemplateCall);
  CHECK(t->name == "first");
  CHECK(t->args.size() == 1);

  t = parse_term_text("2@agr.");
  REQUIRE(t->kind == SrcKind::FinDom);
  REQUIRE(t->fd->kind == FdKind::Annot);
  CHECK(t->fd->name == "agr");
  CHECK(t->fd->a->kind == FdKind::Int);

  t = parse_term_text("X@agr.");
  REQUIRE(t->kind == SrcKind::FinDom);
  CHECK(t->fd->a->kind == FdKind::Var);
}

TEST_CASE("quotes") {
  SrcPtr t = parse_term_text("`f(a).");
  REQUIRE(t->kind == SrcKind::Quote);
  CHECK(t->args[0]->kind == SrcKind::Compound);
  t = parse_term_text("``g(<a).");
  REQUIRE(t->kind == SrcKind::DoubleQuote);
}

TEST_CASE("negation and disjunction classification") {
  SrcPtr t = parse_term_text("~(3&sg).");
  REQUIRE(t->kind == SrcKind::FinDom);
  CHECK(t->fd->kind == FdKind::Neg);

  t = parse_term_text("<a or <b.");
  CHECK(t->kind == SrcKind::Disj);

  t = parse_term_text("sleep or sleeps.");  // both atoms: finite-domain reading
  CHECK(t->kind == SrcKind::FinDom);

  t = parse_term_text("X & f(X).");
  CHECK(t->kind == SrcKind::Conj);
}

TEST_CASE("operator grouping follows the fixed table") {
  // & binds tighter than or
  SrcPtr t = parse_term_text("<a & f!x or <b & g!y.");
  REQUIRE(t->kind == SrcKind::Disj);
  CHECK(t->args[0]->kind == SrcKind::Conj);
  CHECK(t->args[1]->kind == SrcKind::Conj);
  // ! chains right
  t = parse_term_text("a!b!c!d.");
  CHECK(t->kind == SrcKind::FeatVal);
  CHECK(t->args[0]->kind == SrcKind::FeatVal);
}

TEST_CASE("syntax errors carry positions and classes") {
  try {
    parse_program("foo(\n  bar baz).", "err.fit");
    FAIL("expected a syntax error");
  } catch (const FitError& e) {
    CHECK(e.cls() == ErrorClass::Syntax);
    CHECK(e.pos().line == 2);
    CHECK(e.file() == "err.fit");
  }
  CHECK_THROWS_AS(parse_program("foo(a)"), FitError);      // unterminated
  CHECK_THROWS_AS(parse_program("a >> b."), FitError);     // unknown operator
  CHECK_THROWS_AS(parse_program("a = b = c."), FitError);  // xfx does not chain
  CHECK_THROWS_AS(parse_query("?- ."), FitError);          // empty query
  CHECK_THROWS_AS(parse_program("p(3.14)."), FitError);    // '.' must end the item
}

TEST_CASE("quoted atoms carry arbitrary UTF-8") {
  auto items = parse_program("p('na\xc3\xaf"
                             "ve', 'sm\xc3\xb8rrebr\xc3\xb8"
                             "d').");
  REQUIRE(items.size() == 1);
  CHECK(items[0].head->args[0]->name == "na\xc3\xaf"
                                        "ve");
  std::string text = render_item(items[0]);
  auto again = parse_program(text);
  CHECK(render_item(again[0]) == text);
}

TEST_CASE("pathological nesting fails cleanly, long lists are fine") {
  std::string deep;
  for (int i = 0; i < 1000; ++i) deep += "f(";
  deep += "a";
  for (int i = 0; i < 1000; ++i) deep += ")";
  try {
    parse_term_text(deep + ".");
    FAIL("expected a syntax error");
  } catch (const FitError& e) {
    CHECK(e.cls() == ErrorClass::Syntax);
    CHECK(e.msg().find("nested too deeply") != std::string::npos);
  }
  // iterative list parsing has no such bound
  std::string list = "[";
  for (int i = 0; i < 20000; ++i) list += (i ? ",x" : "x");
  list += "]";
  CHECK_NOTHROW(parse_term_text(list + "."));
}

TEST_CASE("lists") {
  SrcPtr t = parse_term_text("[a,b|T].");
  REQUIRE(t->kind == SrcKind::Compound);
  CHECK(t->name == ".");
  CHECK(t->args[1]->args[1]->kind == SrcKind::Var);
  CHECK(render_src(t) == "[a,b|T]");
}

TEST_CASE("anonymous variables stay anonymous") {
  SrcPtr t = parse_term_text("f(_, _).");
  CHECK(t->args[0]->kind == SrcKind::Var);
  CHECK(t->args[0]->name == "_");
  CHECK(render_src(t) == "f(_,_)");
}

// --- round-trip property ------------------------------------------------------

namespace {

SrcPtr random_ast(std::mt19937& rng, int depth);

FdPtr random_fd(std::mt19937& rng, int depth) {
  size_t k = rng() % (depth <= 0 ? 2u : 5u);
  switch (k) {
    case 0: return fd_atom(rng() % 2 ? "sg" : "pl");
    case 1: return fd_int(static_cast<long long>(rng() % 4));
    case 2: return fd_neg(random_fd(rng, depth - 1));
    case 3:
      return fd_bin(rng() % 2 ? FdKind::And : FdKind::Or, random_fd(rng, depth - 1),
                    random_fd(rng, depth - 1));
    default: {
      // annotation; occasionally over a variable
      FdPtr inner = rng() % 4 ? random_fd(rng, depth - 1) : fd_var("Q");
      return fd_annot(inner, "agr");
    }
  }
}

// A bare finite-domain leaf prints exactly like a plain atom/integer, so only
// connective-rooted expressions (what the parser itself produces) round-trip.
FdPtr random_fd_expr(std::mt19937& rng) {
  for (;;) {
    FdPtr e = random_fd(rng, 2);
    if (e->kind != FdKind::Atom && e->kind != FdKind::Int && e->kind != FdKind::Var) return e;
  }
}

bool fd_leafish(const SrcPtr& t) {
  return t->kind == SrcKind::Atom || t->kind == SrcKind::Int || t->kind == SrcKind::FinDom;
}

SrcPtr random_ast(std::mt19937& rng, int depth) {
  static const char* atoms[] = {"foo", "bar_1", "x", "Weird Atom", "don't", "or"};
  static const char* vars[] = {"X", "Y", "Zv", "_Under"};
  static const char* feats[] = {"synsem", "cat", "f1"};
  size_t k = rng() % (depth <= 0 ? 3u : 12u);
  switch (k) {
    case 0: return src_atom(atoms[rng() % 6]);
    case 1: return src_var(vars[rng() % 4]);
    case 2: return src_int(static_cast<long long>(rng() % 100) - 50);
    case 3: {
      std::vector<SrcPtr> args;
      size_t n = 1 + rng() % 3;
      for (size_t i = 0; i < n; ++i) args.push_back(random_ast(rng, depth - 1));
      return src_compound(atoms[rng() % 3], std::move(args));
    }
    case 4: return src_sort(atoms[rng() % 3]);
    case 5: return src_featval(feats[rng() % 3], random_ast(rng, depth - 1));
    case 6:
    case 7: {
      // conjunction/disjunction of two atoms would re-parse as a
      // finite-domain expression; force a non-leaf side
      SrcPtr l = random_ast(rng, depth - 1);
      SrcPtr r = random_ast(rng, depth - 1);
      if (fd_leafish(l) && fd_leafish(r)) l = src_featval("f1", l);
      return k == 6 ? src_conj(l, r) : src_disj(l, r);
    }
    case 8: return src_quote(random_ast(rng, depth - 1), rng() % 2 == 0);
    case 9: {
      std::vector<SrcPtr> args;
      size_t n = rng() % 3;
      for (size_t i = 0; i < n; ++i) args.push_back(random_ast(rng, depth - 1));
      return src_template(atoms[rng() % 3], std::move(args));
    }
    case 10: {
      std::string start = rng() % 2 ? "" : "sign";
      return src_search(start, feats[rng() % 3], random_ast(rng, depth - 1));
    }
    default: return src_findom(random_fd_expr(rng));
  }
}

}  // namespace

TEST_CASE("the parser throws or succeeds on arbitrary byte soup, never worse") {
  std::mt19937 rng(0xf0220);
  const char pool[] = "ab X,()[]|<>&!~`@*=:-.'%0123 \n\\\"$_?";
  for (int i = 0; i < 800; ++i) {
    std::string s;
    size_t len = rng() % 40;
    for (size_t j = 0; j < len; ++j) {
      if (rng() % 20 == 0)
        s += static_cast<char>(rng() % 256);
      else
        s += pool[rng() % (sizeof(pool) - 1)];
    }
    try {
      parse_program(s, "<fuzz>");
    } catch (const FitError& e) {
      CHECK(e.cls() == ErrorClass::Syntax);
    }
  }
}

TEST_CASE("round trip: render(plain) then parse is the identity") {
  std::mt19937 rng(20240817);
  for (int i = 0; i < 500; ++i) {
    SrcPtr t = random_ast(rng, 4);
    std::string text = render_src(t);
    SrcPtr back;
    CAPTURE(text);
    REQUIRE_NOTHROW(back = parse_term_text(text + " ."));
    CHECK(src_equal(t, back));
  }
}

TEST_CASE("round trip: pretty style re-parses to the same term") {
  std::mt19937 rng(99);
  for (int i = 0; i < 200; ++i) {
    SrcPtr t = random_ast(rng, 4);
    std::string text = render(t, RenderStyle::Pretty);
    SrcPtr back;
    CAPTURE(text);
    REQUIRE_NOTHROW(back = parse_term_text(text + " ."));
    CHECK(src_equal(t, back));
  }
}

TEST_CASE("item round trip over the documentation programs") {
  const char* programs[] = {
      "binary_tree > [leaf,internal_node] intro [label].",
      "hfp( sign>>>head!X & dtrs!head_dtr! >>>head!X ).",
      "semantics(synsem!local!cont!Sem) := Sem.",
      "member(Element,List) :- member(Element,@rest(List)).",
      "verb(sleep, ~(3&sg)).",
      "np('I', 1&sg).",
      "extensional [elist,nelist].",
  };
  for (const char* p : programs) {
    auto items = parse_program(p);
    REQUIRE(items.size() == 1);
    std::string text = render_item(items[0]);
    auto again = parse_program(text);
    REQUIRE(again.size() == 1);
    CHECK(render_item(again[0]) == text);
  }
}
