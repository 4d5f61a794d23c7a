#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fit/ast.hpp"
#include "fit/core_term.hpp"
#include "fit/layout.hpp"
#include "fit/signature.hpp"

namespace fit {

// Compile-time toggles exposed by the CLI.
struct CompileOptions {
  bool sort_check = true;      // restriction enforcement during compilation
  bool feature_search = true;  // '>>>' resolution; off makes any search an error
  bool cyclic_print = true;    // print cyclic answers fully (else truncate)
  bool pretty = false;
  std::string emit;  // target path for emitted program text
};

// One compiled clause. Terms live against the clause-local frozen store,
// which carries only the bindings needed to tie cyclic structures.
struct CoreClause {
  TermPtr head;
  std::vector<TermPtr> body;
  Store store;
  SourcePos pos;
  std::string file;

  std::pair<std::string, int> predicate() const {
    TermPtr h = store.deref(head);
    if (h->kind == Tk::Comp) return {h->fun, static_cast<int>(h->args.size())};
    return {h->fun, 0};
  }
};

struct KnowledgeBase {
  Signature sig;
  LayoutTable layouts;
  CompileOptions opts;
  std::vector<CoreClause> clauses;
  std::vector<Item> decl_items;  // declarations in source order, for serialization
  std::map<std::pair<std::string, int>, std::vector<size_t>> index;

  void add_clause(CoreClause c) {
    index[c.predicate()].push_back(clauses.size());
    clauses.push_back(std::move(c));
  }

  const std::vector<size_t>* lookup(const std::string& f, int arity) const {
    auto it = index.find({f, arity});
    return it == index.end() ? nullptr : &it->second;
  }
};

}  // namespace fit
