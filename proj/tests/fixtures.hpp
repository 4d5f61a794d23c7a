#pragma once

// Shared fixtures and helpers for the test suites: the running examples from
// the language documentation (HPSG-style signature, binary trees, the
// agreement lexicon, member via templates, the semantics-principle clause)
// plus random signature/description generators for the property tests.

#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fit/cli.hpp"
#include "fit/compile.hpp"
#include "fit/decode.hpp"
#include "fit/kb.hpp"
#include "fit/oracle.hpp"
#include "fit/parser.hpp"
#include "fit/render.hpp"
#include "fit/solve.hpp"

namespace fixtures {

// --- canonical example programs --------------------------------------------

inline const char* binary_tree_decls() {
  return R"(
binary_tree > [leaf,internal_node] intro [label].
internal_node intro [left_daughter:binary_tree, right_daughter:binary_tree].
)";
}

inline const char* hpsg_decls() {
  return R"(
sign > [lexical,phrasal] intro [phon, synsem:synsem, qstore, retrieved].
phrasal > [headed,non_headed] * [decl,int,rel] intro [daughters].
synsem intro [local:local].
local intro [cat:cat, cont].
cat intro [head, subcat:list].
list > [elist,nelist].
)";
}

inline const char* lexicon_program() {
  return R"(
agr fin_dom [1,2,3] * [sg,pl].

verb(sleeps,3&sg).
verb(sleep, ~(3&sg)).
verb(am,    1&sg).
verb(is,    3&sg).
verb(are,   2 or pl).

np('I',     1&sg).
np(you,     2@agr).
)";
}

inline const char* member_program() {
  return R"(
first([First|Rest]) := First.
rest([First|Rest])  := Rest.

member(@first(List),List).

member(Element,List) :-
     member(Element,@rest(List)).
)";
}

inline const char* sem_p_program() {
  return R"(
sign > [head_adj, head_comp, head_marker, head_filler]
     intro [cont, adj_dtr:sign, head_dtr:sign].

sem_p(  (<head_adj &
         >>>cont!X & >>>adj_dtr!>>>cont!X )
      or
        ( (   <head_comp
           or <head_marker
           or <head_filler
          ) &
          >>>cont!Y & >>>head_dtr!>>>cont!Y )
     ).
)";
}

// --- small helpers -----------------------------------------------------------

inline fit::Signature sig_from(const std::string& text) {
  return fit::build_signature(fit::parse_program(text, "<fixture>"));
}

inline fit::KnowledgeBase kb_from(const std::string& text, fit::CompileOptions opts = {}) {
  return fit::compile_program(fit::parse_program(text, "<fixture>"), opts);
}

struct CompiledDesc {
  fit::Store store;
  fit::TermPtr term;
  std::map<std::string, fit::TermPtr> vars;
};

// Compiles one description (text must end with '.'); template and
// disjunction expansion applied, all consistent alternatives returned.
inline std::vector<CompiledDesc> compile_desc_all(const std::string& text,
                                                  const fit::Signature& sig,
                                                  const fit::LayoutTable& lt,
                                                  fit::CompileOptions opts = {}) {
  fit::SrcPtr t = fit::parse_term_text(text, "<desc>");
  std::vector<fit::SrcPtr> expanded;
  for (const fit::SrcPtr& e : fit::expand_templates(t, sig))
    fit::expand_disjunctions(e, expanded);
  std::vector<CompiledDesc> out;
  for (const fit::SrcPtr& alt : expanded) {
    CompiledDesc d;
    fit::TermCompiler tc(sig, lt, d.store, opts, "<desc>");
    try {
      d.term = tc.compile(alt, {});
    } catch (const fit::Inconsistent&) {
      continue;
    }
    d.vars = tc.varmap();
    out.push_back(std::move(d));
  }
  return out;
}

inline CompiledDesc compile_desc(const std::string& text, const fit::Signature& sig,
                                 const fit::LayoutTable& lt, fit::CompileOptions opts = {}) {
  fit::SrcPtr t = fit::parse_term_text(text, "<desc>");
  std::vector<fit::SrcPtr> expanded;
  for (const fit::SrcPtr& e : fit::expand_templates(t, sig))
    fit::expand_disjunctions(e, expanded);
  CompiledDesc d;
  fit::TermCompiler tc(sig, lt, d.store, opts, "<desc>");
  try {
    d.term = tc.compile(expanded.at(0), {});
  } catch (const fit::Inconsistent& inc) {
    throw inc.error;
  }
  d.vars = tc.varmap();
  return d;
}

// Runs a query and returns each solution rendered as "X = term" (vars
// comma-joined), plain style.
inline std::vector<std::string> solve_all(const fit::KnowledgeBase& kb, const std::string& query,
                                          size_t limit = 200) {
  std::vector<std::string> out;
  std::ostringstream warn;
  std::vector<fit::SrcPtr> goals = fit::parse_query(query, "<query>");
  fit::cli_detail::run_goals(kb, goals, false, true, warn, [&](const std::string& s) {
    out.push_back(s);
    return out.size() < limit;
  });
  return out;
}

// --- randomized fixtures -----------------------------------------------------

struct RandomSig {
  std::string text;
  fit::Signature sig;
  fit::LayoutTable lt;
  std::vector<std::string> sorts;
  std::vector<std::string> features;
  bool has_domain = false;
};

// A random signature: <= 10 sorts, at most 2 dimensions per sort, <= 8
// features, occasionally one small finite domain. All sorts intensional.
inline RandomSig random_signature(std::mt19937& rng) {
  auto pick = [&](size_t n) { return static_cast<size_t>(rng() % n); };
  RandomSig out;

  size_t nsorts = 3 + pick(8);  // 3..10
  std::vector<std::string> names;
  for (size_t i = 0; i < nsorts; ++i) names.push_back("s" + std::to_string(i));

  // parent[i] < i, or top (-1); s0 is always a root.
  std::vector<int> parent(nsorts, -1);
  for (size_t i = 1; i < nsorts; ++i)
    parent[i] = (pick(4) == 0) ? -1 : static_cast<int>(pick(i));

  // Children of one parent split into one or two dimensions.
  std::map<int, std::vector<std::string>> kids;
  for (size_t i = 1; i < nsorts; ++i) kids[parent[static_cast<size_t>(i)]].push_back(names[i]);
  // (parent -1 children are roots; they need no declaration of their own)

  std::ostringstream decl;
  bool domain = pick(2) == 0;
  if (domain) decl << "d0 fin_dom [e0,e1] * [e2,e3,e4].\n";

  size_t nfeats = 1 + pick(8);  // 1..8
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> intro;
  for (size_t i = 0; i < nfeats; ++i) {
    std::string f = "f" + std::to_string(i);
    std::string at = names[pick(nsorts)];
    std::string restr = "top";
    size_t kind = pick(10);
    if (kind < 5)
      restr = "top";
    else if (kind < 9 || !domain)
      restr = names[pick(nsorts)];
    else
      restr = "d0";
    intro[at].emplace_back(f, restr);
    out.features.push_back(f);
  }

  // A root with no subsorts and no features never appears in any declaration
  // and so does not exist; drop it from the pool, and retarget restrictions
  // that would name a dropped sort.
  std::set<std::string> live;
  for (size_t i = 0; i < nsorts; ++i) {
    bool is_root = parent[i] == -1;
    bool has_kids = kids.count(static_cast<int>(i)) && !kids[static_cast<int>(i)].empty();
    if (is_root && !has_kids && !intro.count(names[i])) continue;
    live.insert(names[i]);
  }
  if (live.empty()) {
    intro[names[0]].emplace_back("f_keep", "top");
    live.insert(names[0]);
  }
  for (auto& [at, fs] : intro)
    for (auto& [f, r] : fs)
      if (r != "top" && r != "d0" && !live.count(r)) r = "top";
  for (const std::string& s : names)
    if (live.count(s)) out.sorts.push_back(s);

  for (size_t i = 0; i < nsorts; ++i) {
    const std::string& s = names[i];
    if (!live.count(s)) continue;
    auto k = kids.find(static_cast<int>(i));
    bool has_kids = k != kids.end() && !k->second.empty();
    bool has_intro = intro.count(s) > 0;
    if (!has_kids && !has_intro) continue;
    decl << s;
    if (has_kids) {
      // split children into up to two dimensions
      std::vector<std::string> d1, d2;
      for (const std::string& c : k->second) (pick(2) ? d1 : d2).push_back(c);
      if (d1.empty()) std::swap(d1, d2);
      decl << " > [";
      for (size_t j = 0; j < d1.size(); ++j) decl << (j ? "," : "") << d1[j];
      decl << "]";
      if (!d2.empty()) {
        decl << " * [";
        for (size_t j = 0; j < d2.size(); ++j) decl << (j ? "," : "") << d2[j];
        decl << "]";
      }
    }
    if (has_intro) {
      decl << " intro [";
      const auto& fs = intro[s];
      for (size_t j = 0; j < fs.size(); ++j) {
        decl << (j ? "," : "") << fs[j].first;
        if (fs[j].second != "top") decl << ":" << fs[j].second;
      }
      decl << "]";
    }
    decl << ".\n";
  }

  out.text = decl.str();
  out.has_domain = domain;
  out.sig = sig_from(out.text);
  out.lt = fit::compute_layouts(out.sig);
  return out;
}

// A random description: sorts, feature values, conjunction, variables for
// coreference, plain terms, finite-domain expressions. Depth-bounded, no
// quotes, no searches, no templates.
inline fit::SrcPtr random_desc(std::mt19937& rng, const RandomSig& rs, int depth,
                               std::vector<std::string>& varpool) {
  auto pick = [&](size_t n) { return static_cast<size_t>(rng() % n); };
  size_t kind = pick(depth <= 0 ? 4u : 8u);
  switch (kind) {
    case 0:
      return fit::src_sort(rs.sorts[pick(rs.sorts.size())]);
    case 1: {
      if (varpool.empty()) varpool.push_back("V0");
      if (varpool.size() < 3 && pick(2)) varpool.push_back("V" + std::to_string(varpool.size()));
      return fit::src_var(varpool[pick(varpool.size())]);
    }
    case 2:
      return fit::src_atom(pick(2) ? "a" : "b");
    case 3: {
      if (!rs.has_domain) return fit::src_int(static_cast<long long>(pick(5)));
      // nonempty random subset of d0 as a disjunction of element conjunctions
      const fit::DomainInfo& d = rs.sig.domain("d0");
      uint64_t mask = 0;
      while (!mask) mask = rng() & d.full_mask();
      fit::FdPtr expr;
      for (int k = 0; k < d.size(); ++k) {
        if (!((mask >> k) & 1)) continue;
        fit::FdPtr conj;
        for (const fit::DomAtom& a : d.elements[static_cast<size_t>(k)]) {
          fit::FdPtr leaf = a.is_int ? fit::fd_int(a.ival) : fit::fd_atom(a.sym);
          conj = conj ? fit::fd_bin(fit::FdKind::And, conj, leaf) : leaf;
        }
        expr = expr ? fit::fd_bin(fit::FdKind::Or, expr, conj) : conj;
      }
      return fit::src_findom(expr);
    }
    case 4: {
      const std::string& f = rs.features[pick(rs.features.size())];
      return fit::src_featval(f, random_desc(rng, rs, depth - 1, varpool));
    }
    case 5:
      return fit::src_conj(random_desc(rng, rs, depth - 1, varpool),
                           random_desc(rng, rs, depth - 1, varpool));
    case 6: {
      std::vector<fit::SrcPtr> args;
      size_t n = 1 + pick(2);
      for (size_t i = 0; i < n; ++i) args.push_back(random_desc(rng, rs, depth - 1, varpool));
      return fit::src_compound(n == 1 ? "g" : "h", std::move(args));
    }
    default: {
      const std::string& f = rs.features[pick(rs.features.size())];
      return fit::src_featval(f, random_desc(rng, rs, depth - 1, varpool));
    }
  }
}

}  // namespace fixtures
