#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fit/errors.hpp"

// Surface-language AST: terms, finite-domain expressions and top-level items.
// Nodes are immutable and shared; the parser produces them and every later
// stage (templates, disjunction expansion, compilation, decoding) works on
// rebuilt copies.

namespace fit {

struct SourceTerm;
struct FinDomExpr;
using SrcPtr = std::shared_ptr<const SourceTerm>;
using FdPtr = std::shared_ptr<const FinDomExpr>;

enum class FdKind { Atom, Int, Var, Annot, Neg, And, Or };

struct FinDomExpr {
  FdKind kind;
  std::string name;   // Atom symbol | Var name | Annot domain name
  long long ival = 0; // Int
  FdPtr a, b;         // Annot/Neg inner = a; And/Or children = a, b
};

inline FdPtr fd_atom(std::string s) {
  auto e = std::make_shared<FinDomExpr>();
  e->kind = FdKind::Atom;
  e->name = std::move(s);
  return e;
}
inline FdPtr fd_int(long long v) {
  auto e = std::make_shared<FinDomExpr>();
  e->kind = FdKind::Int;
  e->ival = v;
  return e;
}
inline FdPtr fd_var(std::string s) {
  auto e = std::make_shared<FinDomExpr>();
  e->kind = FdKind::Var;
  e->name = std::move(s);
  return e;
}
inline FdPtr fd_annot(FdPtr inner, std::string domain) {
  auto e = std::make_shared<FinDomExpr>();
  e->kind = FdKind::Annot;
  e->a = std::move(inner);
  e->name = std::move(domain);
  return e;
}
inline FdPtr fd_neg(FdPtr inner) {
  auto e = std::make_shared<FinDomExpr>();
  e->kind = FdKind::Neg;
  e->a = std::move(inner);
  return e;
}
inline FdPtr fd_bin(FdKind k, FdPtr l, FdPtr r) {
  auto e = std::make_shared<FinDomExpr>();
  e->kind = k;
  e->a = std::move(l);
  e->b = std::move(r);
  return e;
}

enum class SrcKind {
  SortRef,      // <sort                          name = sort
  FeatVal,      // feature!value                  name = feature, args[0] = value
  Conj,         // a & b                          args[0], args[1]
  Disj,         // a or b                         args[0], args[1]
  TemplateCall, // @name(args...)                 name, args
  Quote,        // `term                          args[0]
  DoubleQuote,  // ``term                         args[0]
  Search,       // [sort]>>>feature!value         start, name = feature, args[0] = value
  FinDom,       // finite-domain expression       fd
  Var,          // variable                       name
  Atom,         // plain atom                     name (quoted flag irrelevant after lexing)
  Int,          // integer                        ival
  Compound,     // f(args...)                     name, args
};

struct SourceTerm {
  SrcKind kind;
  std::string name;
  long long ival = 0;
  std::vector<SrcPtr> args;
  FdPtr fd;
  std::string start;          // Search: explicit start sort ("" = inferred)
  SourcePos pos;
  // Template bookkeeping: the chain of template names/arities whose bodies
  // produced this call node. Used to detect recursive template chains.
  std::vector<std::pair<std::string, int>> tpath;

  SourceTerm() = default;
  SourceTerm(const SourceTerm&) = default;
  SourceTerm& operator=(const SourceTerm&) = default;

  // Long chains (list cells in particular) must not destroy recursively.
  ~SourceTerm() {
    if (args.empty()) return;
    std::vector<SrcPtr> stack(std::make_move_iterator(args.begin()),
                              std::make_move_iterator(args.end()));
    args.clear();
    while (!stack.empty()) {
      SrcPtr t = std::move(stack.back());
      stack.pop_back();
      if (t && t.use_count() == 1) {
        auto* m = const_cast<SourceTerm*>(t.get());
        for (SrcPtr& a : m->args) stack.push_back(std::move(a));
        m->args.clear();
      }
    }
  }
};

namespace detail {
inline std::shared_ptr<SourceTerm> new_src(SrcKind k, SourcePos pos) {
  auto t = std::make_shared<SourceTerm>();
  t->kind = k;
  t->pos = pos;
  return t;
}
}  // namespace detail

inline SrcPtr src_atom(std::string name, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::Atom, pos);
  t->name = std::move(name);
  return t;
}
inline SrcPtr src_var(std::string name, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::Var, pos);
  t->name = std::move(name);
  return t;
}
inline SrcPtr src_int(long long v, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::Int, pos);
  t->ival = v;
  return t;
}
inline SrcPtr src_compound(std::string f, std::vector<SrcPtr> args, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::Compound, pos);
  t->name = std::move(f);
  t->args = std::move(args);
  return t;
}
inline SrcPtr src_sort(std::string s, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::SortRef, pos);
  t->name = std::move(s);
  return t;
}
inline SrcPtr src_featval(std::string f, SrcPtr v, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::FeatVal, pos);
  t->name = std::move(f);
  t->args = {std::move(v)};
  return t;
}
inline SrcPtr src_conj(SrcPtr l, SrcPtr r, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::Conj, pos);
  t->args = {std::move(l), std::move(r)};
  return t;
}
inline SrcPtr src_disj(SrcPtr l, SrcPtr r, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::Disj, pos);
  t->args = {std::move(l), std::move(r)};
  return t;
}
inline SrcPtr src_template(std::string name, std::vector<SrcPtr> args, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::TemplateCall, pos);
  t->name = std::move(name);
  t->args = std::move(args);
  return t;
}
inline SrcPtr src_quote(SrcPtr inner, bool dbl, SourcePos pos = {}) {
  auto t = detail::new_src(dbl ? SrcKind::DoubleQuote : SrcKind::Quote, pos);
  t->args = {std::move(inner)};
  return t;
}
inline SrcPtr src_search(std::string start, std::string feat, SrcPtr v, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::Search, pos);
  t->start = std::move(start);
  t->name = std::move(feat);
  t->args = {std::move(v)};
  return t;
}
inline SrcPtr src_findom(FdPtr e, SourcePos pos = {}) {
  auto t = detail::new_src(SrcKind::FinDom, pos);
  t->fd = std::move(e);
  return t;
}

// Exact structural equality (variable names compared literally).
inline bool fd_equal(const FdPtr& a, const FdPtr& b);
inline bool src_equal(const SrcPtr& a, const SrcPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name || a->ival != b->ival || a->start != b->start)
    return false;
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!src_equal(a->args[i], b->args[i])) return false;
  return fd_equal(a->fd, b->fd);
}
inline bool fd_equal(const FdPtr& a, const FdPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name || a->ival != b->ival) return false;
  return fd_equal(a->a, b->a) && fd_equal(a->b, b->b);
}

// Flattens nested conjunctions into the sequence of conjuncts, left to right.
inline void flatten_conj(const SrcPtr& t, std::vector<SrcPtr>& out) {
  if (t->kind == SrcKind::Conj) {
    flatten_conj(t->args[0], out);
    flatten_conj(t->args[1], out);
  } else {
    out.push_back(t);
  }
}

// An atom of a finite-domain dimension: a symbol or an integer.
struct DomAtom {
  bool is_int = false;
  long long ival = 0;
  std::string sym;

  bool operator==(const DomAtom& o) const {
    return is_int == o.is_int && ival == o.ival && sym == o.sym;
  }
  std::string text() const { return is_int ? std::to_string(ival) : sym; }
};

enum class ItemKind {
  Subsort,      // Super > [Sub,...] * ...
  Intro,        // Sort intro [f:r, ...]
  Combined,     // Super > [...] intro [...]
  FinDomDecl,   // Name fin_dom [..] * [..]
  TemplateDef,  // Head := Value
  Extensional,  // extensional [s1,...]
  Clause,       // Head :- Body. | Fact.
};

struct Item {
  ItemKind kind;
  SourcePos pos;
  std::string file;

  std::string name;                                        // super / sort / domain
  std::vector<std::vector<std::string>> dims;              // sort dimensions
  std::vector<std::pair<std::string, std::string>> feats;  // feature -> restriction ("top" if omitted)
  std::vector<std::vector<DomAtom>> domain_dims;           // finite-domain dimensions
  std::vector<std::string> ext_sorts;                      // extensional declaration
  SrcPtr tmpl_head, tmpl_value;                            // template definition
  SrcPtr head;                                             // clause head
  std::vector<SrcPtr> body;                                // clause body goals
};

}  // namespace fit
