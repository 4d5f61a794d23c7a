#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fit/compile.hpp"
#include "fit/errors.hpp"
#include "fit/kb.hpp"
#include "fit/parser.hpp"
#include "fit/render.hpp"

// Versioned knowledge-base file. Declarations travel as re-rendered source
// text (they re-parse to identical items and the layouts are a deterministic
// function of the signature); compiled clauses travel as node tables so
// shared and cyclic structure survives the round trip byte-exactly.

namespace fit {

namespace kbio_detail {

using nlohmann::json;

struct NodeTable {
  json nodes = json::array();
  std::map<const CoreTerm*, int> memo;

  // No dereferencing here: cycles must travel through the binds list, which
  // keeps the node table itself acyclic.
  int add(const Store& store, const TermPtr& t) {
    (void)store;
    switch (t->kind) {
      case Tk::Var: {
        auto it = memo.find(t.get());
        if (it != memo.end()) return it->second;
        nodes.push_back(json::array({"v", t->var}));
        int idx = static_cast<int>(nodes.size()) - 1;
        memo[t.get()] = idx;
        return idx;
      }
      case Tk::Atom: {
        nodes.push_back(json::array({"a", t->fun}));
        return static_cast<int>(nodes.size()) - 1;
      }
      case Tk::Num: {
        nodes.push_back(json::array({"n", t->num}));
        return static_cast<int>(nodes.size()) - 1;
      }
      case Tk::Comp: {
        auto it = memo.find(t.get());
        if (it != memo.end()) return it->second;
        json kids = json::array();
        for (const TermPtr& a : t->args) kids.push_back(add(store, a));
        nodes.push_back(json::array({"c", t->fun, kids}));
        int idx = static_cast<int>(nodes.size()) - 1;
        memo[t.get()] = idx;
        return idx;
      }
    }
    return -1;
  }
};

inline TermPtr node_of(const json& nodes, int idx, Store& store,
                       std::vector<TermPtr>& built) {
  if (built[static_cast<size_t>(idx)]) return built[static_cast<size_t>(idx)];
  const json& n = nodes[static_cast<size_t>(idx)];
  const std::string tag = n.at(0).get<std::string>();
  TermPtr t;
  if (tag == "v") {
    int id = n.at(1).get<int>();
    while (store.nvars() <= id) store.fresh();
    t = store.var_node(id);
  } else if (tag == "a") {
    t = mk_atom(n.at(1).get<std::string>());
  } else if (tag == "n") {
    t = mk_int(n.at(1).get<long long>());
  } else if (tag == "c") {
    std::vector<TermPtr> args;
    for (const json& k : n.at(2)) args.push_back(node_of(nodes, k.get<int>(), store, built));
    t = mk_comp(n.at(1).get<std::string>(), std::move(args));
  } else {
    throw FitError(ErrorClass::Io, "corrupt knowledge base: bad node tag");
  }
  built[static_cast<size_t>(idx)] = t;
  return t;
}

}  // namespace kbio_detail

inline std::string save_kb_text(const KnowledgeBase& kb) {
  using nlohmann::json;
  json j;
  j["format"] = "fit-kb";
  j["version"] = 1;
  j["options"] = {{"sort_check", kb.opts.sort_check},
                  {"feature_search", kb.opts.feature_search},
                  {"cyclic_print", kb.opts.cyclic_print}};
  json decls = json::array();
  for (const Item& it : kb.decl_items) decls.push_back(render_item(it));
  j["decls"] = decls;

  json clauses = json::array();
  for (const CoreClause& c : kb.clauses) {
    kbio_detail::NodeTable table;
    json jc;
    jc["head"] = table.add(c.store, c.head);
    json body = json::array();
    for (const TermPtr& g : c.body) body.push_back(table.add(c.store, g));
    jc["body"] = body;
    json binds = json::array();
    for (const auto& [var, t] : c.store.bound_vars())
      binds.push_back(json::array({var, table.add(c.store, t)}));
    jc["binds"] = binds;
    jc["nvars"] = c.store.nvars();
    jc["nodes"] = table.nodes;
    jc["file"] = c.file;
    jc["line"] = c.pos.line;
    clauses.push_back(std::move(jc));
  }
  j["clauses"] = clauses;
  return j.dump(1);
}

inline KnowledgeBase load_kb_text(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw FitError(ErrorClass::Io, std::string("cannot parse knowledge base: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "fit-kb")
    throw FitError(ErrorClass::Io, "not a fit knowledge base");
  if (j.value("version", 0) != 1)
    throw FitError(ErrorClass::Io, "unsupported knowledge-base version");

  CompileOptions opts;
  opts.sort_check = j["options"].value("sort_check", true);
  opts.feature_search = j["options"].value("feature_search", true);
  opts.cyclic_print = j["options"].value("cyclic_print", true);

  std::string decl_text;
  for (const json& d : j["decls"]) decl_text += d.get<std::string>() + "\n";
  std::vector<Item> items = parse_program(decl_text, "<kb>");

  KnowledgeBase kb;
  kb.opts = opts;
  kb.decl_items = items;
  kb.sig = build_signature(items);
  kb.layouts = compute_layouts(kb.sig);

  for (const json& jc : j["clauses"]) {
    CoreClause c;
    c.file = jc.value("file", "");
    c.pos.line = jc.value("line", 0);
    const json& nodes = jc.at("nodes");
    std::vector<TermPtr> built(nodes.size());
    int nvars = jc.at("nvars").get<int>();
    while (c.store.nvars() < nvars) c.store.fresh();
    c.head = kbio_detail::node_of(nodes, jc.at("head").get<int>(), c.store, built);
    for (const json& b : jc.at("body"))
      c.body.push_back(kbio_detail::node_of(nodes, b.get<int>(), c.store, built));
    for (const json& bind : jc.at("binds")) {
      int var = bind.at(0).get<int>();
      TermPtr t = kbio_detail::node_of(nodes, bind.at(1).get<int>(), c.store, built);
      c.store.bind_frozen(var, t);
    }
    kb.add_clause(std::move(c));
  }
  return kb;
}

// Loads emitted program text (plain clauses, no declarations) against an
// existing signature: every term is taken structurally, '$'-functors and all.
inline KnowledgeBase load_plain_program(const std::string& text, const Signature& sig,
                                        const LayoutTable& layouts,
                                        const CompileOptions& opts = {}) {
  KnowledgeBase kb;
  kb.sig = sig;
  kb.layouts = layouts;
  kb.opts = opts;
  for (const Item& it : parse_program(text, "<plain>")) {
    if (it.kind != ItemKind::Clause)
      throw FitError(ErrorClass::Syntax, "plain program may only contain clauses", it.pos,
                     it.file);
    CoreClause c;
    c.pos = it.pos;
    c.file = it.file;
    Store work;
    TermCompiler wtc(kb.sig, kb.layouts, work, kb.opts, it.file);
    TermPtr head = wtc.compile_raw(it.head);
    std::vector<TermPtr> body;
    for (const SrcPtr& g : it.body) body.push_back(wtc.compile_raw(g));
    Copier copier(work, c.store);
    c.head = copier.copy(head);
    for (const TermPtr& g : body) c.body.push_back(copier.copy(g));
    kb.add_clause(std::move(c));
  }
  return kb;
}

inline void save_kb(const KnowledgeBase& kb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FitError(ErrorClass::Io, "cannot write " + path);
  out << save_kb_text(kb);
}

inline KnowledgeBase load_kb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FitError(ErrorClass::Io, "cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_kb_text(text);
}

}  // namespace fit
