#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "fit/cli.hpp"

using namespace fit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) {
    fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(path / name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

struct Run {
  int exit;
  std::string out;
  std::string err;
};

Run compile_files(const std::vector<std::string>& files, CompileOptions opts = {}) {
  std::ostringstream out, err;
  std::istringstream in;
  CliStreams io{out, err, in};
  int code = cmd_compile(files, opts, io);
  return {code, out.str(), err.str()};
}

Run query_kb(const std::string& kb, const std::string& goal, bool pretty = false,
             bool no_cyclic = false) {
  std::ostringstream out, err;
  std::istringstream in;
  CliStreams io{out, err, in};
  int code = cmd_query(kb, goal, pretty, no_cyclic, io);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("cmd_compile writes deterministic program text and a loadable base") {
  TempDir dir;
  std::string src = dir.file("member.fit", fixtures::member_program());
  Run r = compile_files({src});
  REQUIRE(r.exit == 0);
  std::string text = dir.slurp("member.pl");
  CHECK(text.find("member(A,[A|_]).") != std::string::npos);
  CHECK(text.find("member(A,[_|B]) :- member(A,B).") != std::string::npos);
  CHECK(text.find("% options:") != std::string::npos);

  // byte-identical on a second run
  Run r2 = compile_files({src});
  REQUIRE(r2.exit == 0);
  CHECK(dir.slurp("member.pl") == text);

  Run q = query_kb((dir.path / "member.kb").string(), "?- member(X, [a,b,c]).");
  CHECK(q.exit == 0);
  CHECK(q.out == "X = a ;\nX = b ;\nX = c ;\nno\n");
}

TEST_CASE("declarations may be distributed across files") {
  TempDir dir;
  std::string decls = dir.file("decls.fit", "agr fin_dom [1,2,3] * [sg,pl].\n");
  std::string lex = dir.file("lex.fit",
                             "verb(sleeps,3&sg).\n"
                             "verb(am, 1&sg).\n");
  Run r = compile_files({lex, decls});  // clauses before declarations
  REQUIRE(r.exit == 0);
  Run q = query_kb((dir.path / "lex.kb").string(), "?- verb(W, 1&sg).");
  CHECK(q.out == "W = am ;\nno\n");
}

TEST_CASE("the documented lexicon session") {
  TempDir dir;
  std::string src = dir.file("lexicon.fit", fixtures::lexicon_program());
  Run r = compile_files({src});
  REQUIRE(r.exit == 0);
  std::string text = dir.slurp("lexicon.pl");
  // facts carry 7-argument '$agr' terms
  CHECK(text.find("'$agr'(1,1,A,A,_,_,0)") != std::string::npos);  // 2 or pl
  std::string kb = (dir.path / "lexicon.kb").string();
  CHECK(query_kb(kb, "?- verb(W, 1&sg).").out == "W = sleep ;\nW = am ;\nno\n");
  CHECK(query_kb(kb, "?- verb(sleeps, 2@agr).").out == "no\n");
  Run join = query_kb(kb, "?- np(you, A), verb(are, A).");
  CHECK(join.exit == 0);
  CHECK(join.out.find("A = ") == 0);
  CHECK(join.out.find("no\n") != std::string::npos);
  CHECK(query_kb(kb, "?- fail_pred(X).").out == "no\n");
}

TEST_CASE("compile errors: structured diagnostics, nonzero exit") {
  TempDir dir;
  std::string src = dir.file("cyclic.fit", "a > [b].\nb > [a].\n");
  Run r = compile_files({src});
  CHECK(r.exit == 1);
  CHECK(r.err.find("cyclic.fit") != std::string::npos);
  CHECK(r.err.find("signature:") != std::string::npos);

  std::string bad = dir.file("bad.fit", "p(.\n");
  Run r2 = compile_files({bad});
  CHECK(r2.exit == 1);
  CHECK(r2.err.find("syntax:") != std::string::npos);
  CHECK(r2.err.find("bad.fit:1") != std::string::npos);

  Run r3 = compile_files({(dir.path / "missing.fit").string()});
  CHECK(r3.exit == 1);

  Run r4 = compile_files({});
  CHECK(r4.exit == 2);
}

TEST_CASE("query compile errors do not kill the session; -e exits 1") {
  TempDir dir;
  std::string src = dir.file("p.fit", "p(a).");
  REQUIRE(compile_files({src}).exit == 0);
  std::string kb = (dir.path / "p.kb").string();
  Run r = query_kb(kb, "?- q(<nosort).");
  CHECK(r.exit == 1);
  CHECK(r.err.find("signature:") != std::string::npos);

  // interactive: error, then a working query, then EOF
  std::istringstream in("q(<nosort).\np(X).\n;\n");
  std::ostringstream out, err;
  CliStreams io{out, err, in};
  CHECK(cmd_query(kb, std::nullopt, false, false, io) == 0);
  CHECK(err.str().find("signature:") != std::string::npos);
  CHECK(out.str().find("X = a") != std::string::npos);
  CHECK(out.str().find("no\n") != std::string::npos);
}

TEST_CASE("cyclic answers print fully by default, truncated with --no-cyclic") {
  TempDir dir;
  std::string src = dir.file("cyc.fit", "cyc(X) :- X = f(X).\n");
  REQUIRE(compile_files({src}).exit == 0);
  std::string kb = (dir.path / "cyc.kb").string();
  Run full = query_kb(kb, "?- cyc(X).");
  CHECK(full.out == "X = A & f(A) ;\nno\n");
  Run cut = query_kb(kb, "?- cyc(X).", false, true);
  CHECK(cut.out == "X = f(f(f('...'))) ;\nno\n");
  CHECK(cut.err.find("warning") != std::string::npos);
}

TEST_CASE("--no-feature-search turns '>>>' into a compile error") {
  TempDir dir;
  std::string src = dir.file("sem.fit", fixtures::sem_p_program());
  CompileOptions opts;
  opts.feature_search = false;
  Run r = compile_files({src}, opts);
  CHECK(r.exit == 1);
  CHECK(r.err.find("search:") != std::string::npos);
}

TEST_CASE("-o chooses the output path; .kb lands beside it") {
  TempDir dir;
  std::string src = dir.file("m.fit", "p(a).");
  CompileOptions opts;
  opts.emit = (dir.path / "out" ).string() + ".pl";
  fs::create_directories(dir.path / "sub");
  opts.emit = (dir.path / "sub" / "prog.pl").string();
  Run r = compile_files({src}, opts);
  REQUIRE(r.exit == 0);
  CHECK(fs::exists(dir.path / "sub" / "prog.pl"));
  CHECK(fs::exists(dir.path / "sub" / "prog.kb"));
}

TEST_CASE("emitted text and serialized base produce identical solutions") {
  TempDir dir;
  std::string program = std::string(fixtures::lexicon_program()) + fixtures::member_program() +
                        fixtures::sem_p_program() +
                        // one coreferent object reached through two argument handles
                        "dtr intro [d].\ndup(<dtr & X, X & <dtr).\n";
  std::string src = dir.file("all.fit", program);
  REQUIRE(compile_files({src}).exit == 0);

  KnowledgeBase kb = load_kb((dir.path / "all.kb").string());
  KnowledgeBase kb_text =
      load_plain_program(dir.slurp("all.pl"), kb.sig, kb.layouts, kb.opts);

  const char* queries[] = {
      "?- verb(W, 1&sg).",
      "?- verb(W, pl).",
      "?- np(N, A).",
      "?- member(X, [a,b,c]).",
      "?- np(you, A), verb(are, A).",
      "?- sem_p(S).",
      "?- dup(A, B).",
  };
  for (const char* q : queries) {
    CAPTURE(q);
    CHECK(fixtures::solve_all(kb, q) == fixtures::solve_all(kb_text, q));
  }
  // two handles, one identity: the display shows a single tagged object
  CHECK(fixtures::solve_all(kb, "?- dup(A, B).") ==
        std::vector<std::string>{"A = C & <dtr,\nB = C"});
}

TEST_CASE("knowledge bases round-trip through serialization") {
  std::string program = std::string(fixtures::lexicon_program()) + fixtures::member_program();
  KnowledgeBase kb = fixtures::kb_from(program);
  std::string blob = save_kb_text(kb);
  KnowledgeBase back = load_kb_text(blob);
  CHECK(back.clauses.size() == kb.clauses.size());
  CHECK(save_kb_text(back) == blob);  // stable across a round trip
  CHECK(fixtures::solve_all(back, "?- verb(W, 1&sg).") ==
        fixtures::solve_all(kb, "?- verb(W, 1&sg)."));
  // clauses with cycles survive, including cyclic feature structures
  KnowledgeBase cyc = fixtures::kb_from(
      std::string(fixtures::binary_tree_decls()) +
      "c(X) :- X = f(X).\nd(X & g(X)).\ne(X & <internal_node & left_daughter!X).\n");
  KnowledgeBase cyc2 = load_kb_text(save_kb_text(cyc));
  CHECK(fixtures::solve_all(cyc2, "?- d(Y).") == fixtures::solve_all(cyc, "?- d(Y)."));
  CHECK(fixtures::solve_all(cyc2, "?- e(Y).") == fixtures::solve_all(cyc, "?- e(Y)."));
  CHECK(fixtures::solve_all(cyc2, "?- e(Y).") ==
        std::vector<std::string>{"Y = A & <internal_node & left_daughter!A"});

  // extensional declarations and templates survive serialization: templates
  // still expand in queries against a loaded base
  KnowledgeBase ext = fixtures::kb_from(
      "pair intro [fst, snd].\nextensional [pair].\n"
      "first([First|Rest]) := First.\n"
      "p(fst!a).\n");
  KnowledgeBase ext2 = load_kb_text(save_kb_text(ext));
  CHECK(ext2.sig.sort("pair").extensional);
  CHECK(ext2.layouts.sort("pair").identity_slot == -1);
  CHECK(fixtures::solve_all(ext2, "?- p(X & fst!@first([a,b])).") ==
        std::vector<std::string>{"X = <pair & fst!a"});
}

TEST_CASE("shared clause substructure survives emission via naming equations") {
  // compile-time conjunction makes the two head arguments one node
  KnowledgeBase kb = fixtures::kb_from("p(X & f(Y), X).\n");
  std::string text = emit_program(kb, {});
  CHECK(text.find("p(A,A) :- A = f(_).") != std::string::npos);
  KnowledgeBase kb_text = load_plain_program(text, kb.sig, kb.layouts, kb.opts);
  CHECK(fixtures::solve_all(kb_text, "?- p(U, V).") == fixtures::solve_all(kb, "?- p(U, V)."));
}

TEST_CASE("--no-sort-check compiles ill-restricted programs and queries") {
  TempDir dir;
  std::string src = dir.file("lax.fit",
                             std::string(fixtures::binary_tree_decls()) +
                                 "odd(left_daughter!foo).\n");
  CHECK(compile_files({src}).exit == 1);  // restriction violation by default
  CompileOptions opts;
  opts.sort_check = false;
  REQUIRE(compile_files({src}, opts).exit == 0);
  // the recorded option also governs query compilation against this base
  Run q = query_kb((dir.path / "lax.kb").string(), "?- odd(X).");
  CHECK(q.exit == 0);
  CHECK(q.out.find("left_daughter!foo") != std::string::npos);
}

TEST_CASE("interactive session: ';' requests more, newline stops") {
  TempDir dir;
  std::string src = dir.file("m.fit", fixtures::member_program());
  REQUIRE(compile_files({src}).exit == 0);
  std::string kb = (dir.path / "m.kb").string();

  std::istringstream in("member(X, [a,b,c]).\n;\n\n");
  std::ostringstream out, err;
  CliStreams io{out, err, in};
  REQUIRE(cmd_query(kb, std::nullopt, false, false, io) == 0);
  std::string s = out.str();
  CHECK(s.find("X = a ? ") != std::string::npos);
  CHECK(s.find("X = b ? ") != std::string::npos);
  CHECK(s.find("X = c") == std::string::npos);  // stopped after the second

  // exhaustion prints 'no'
  std::istringstream in2("member(X, [a]).\n;\n");
  std::ostringstream out2, err2;
  CliStreams io2{out2, err2, in2};
  REQUIRE(cmd_query(kb, std::nullopt, false, false, io2) == 0);
  CHECK(out2.str().find("no\n") != std::string::npos);
}

TEST_CASE("head features percolate through search paths end to end") {
  // The head value asserted on the mother surfaces on the head daughter:
  // declarations, feature search, compile-time unification and decoding all
  // cooperate.
  TempDir dir;
  std::string src = dir.file("hfp.fit", R"(
sign > [lexical,phrasal] intro [phon, synsem:synsem, daughters:dtrs].
synsem intro [local:local].
local intro [cat:cat].
cat intro [head].
dtrs intro [head_dtr:sign, adj_dtr:sign].

hfp( sign>>>head!X & daughters!head_dtr! >>>head!X ).
)");
  REQUIRE(compile_files({src}).exit == 0);
  Run q = query_kb((dir.path / "hfp.kb").string(),
                   "?- hfp(<sign & >>>head!foo & daughters!head_dtr!>>>head!H).");
  CHECK(q.exit == 0);
  CHECK(q.out.find("H = foo") == 0);
}

TEST_CASE("pretty query output stays re-parseable") {
  TempDir dir;
  std::string src =
      dir.file("h.fit", std::string(fixtures::hpsg_decls()) +
                            "sat( synsem!local!cat!subcat!<elist ).\n");
  REQUIRE(compile_files({src}).exit == 0);
  Run r = query_kb((dir.path / "h.kb").string(), "?- sat(S).", true);
  REQUIRE(r.exit == 0);
  CHECK(r.out.find("synsem!(\n") != std::string::npos);
  // strip "S = " and the " ;\nno" tail, re-parse the pretty block
  std::string body = r.out.substr(4, r.out.rfind(" ;\n") - 4);
  CHECK_NOTHROW(parse_term_text(body + " ."));
}
