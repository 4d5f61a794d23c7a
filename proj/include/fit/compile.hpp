#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fit/ast.hpp"
#include "fit/errors.hpp"
#include "fit/kb.hpp"
#include "fit/layout.hpp"
#include "fit/signature.hpp"
#include "fit/unify.hpp"

// Translation from surface terms to flat terms: template expansion, feature
// search resolution, sort inference from feature use, restriction
// enforcement, compile-time disjunction expansion and finite-domain encoding.

namespace fit {

// Raised when a (non-disjunctive) description is unsatisfiable; disjunct
// combinations failing with this are dropped rather than reported.
struct Inconsistent {
  FitError error;
};

// ---------------------------------------------------------------------------
// Source-level substitution and unification, used for template head matching.

using SrcSubst = std::map<std::string, SrcPtr>;

namespace detail {

inline SrcPtr rebuild(const SrcPtr& t, std::vector<SrcPtr> new_args, FdPtr new_fd) {
  auto n = std::make_shared<SourceTerm>(*t);
  n->args = std::move(new_args);
  n->fd = std::move(new_fd);
  return n;
}

inline FdPtr fd_map(const FdPtr& e, const SrcSubst& s);
inline SrcPtr su_walk(const SrcPtr& t, const SrcSubst& s);

inline SrcPtr su_walk(const SrcPtr& t, const SrcSubst& s) {
  if (t->kind == SrcKind::Var) {
    auto it = s.find(t->name);
    if (it != s.end()) return su_walk(it->second, s);
    return t;
  }
  bool changed = false;
  std::vector<SrcPtr> args;
  args.reserve(t->args.size());
  for (const SrcPtr& a : t->args) {
    SrcPtr b = su_walk(a, s);
    changed |= b != a;
    args.push_back(std::move(b));
  }
  FdPtr fd = t->fd ? fd_map(t->fd, s) : nullptr;
  changed |= fd != t->fd;
  if (!changed) return t;
  return rebuild(t, std::move(args), std::move(fd));
}

inline FdPtr fd_map(const FdPtr& e, const SrcSubst& s) {
  if (!e) return e;
  if (e->kind == FdKind::Var) {
    auto it = s.find(e->name);
    if (it == s.end()) return e;
    SrcPtr w = su_walk(it->second, s);
    switch (w->kind) {
      case SrcKind::Var: return fd_var(w->name);
      case SrcKind::Atom: return fd_atom(w->name);
      case SrcKind::Int: return fd_int(w->ival);
      case SrcKind::FinDom: return w->fd;
      default:
        throw FitError(ErrorClass::Template,
                       "cannot splice a structured term into a finite-domain expression",
                       w->pos);
    }
  }
  FdPtr a = fd_map(e->a, s), b = fd_map(e->b, s);
  if (a == e->a && b == e->b) return e;
  auto n = std::make_shared<FinDomExpr>(*e);
  n->a = a;
  n->b = b;
  return n;
}

inline bool su_occurs(const std::string& var, const SrcPtr& t, const SrcSubst& s) {
  SrcPtr w = su_walk(t, s);
  if (w->kind == SrcKind::Var) return w->name == var;
  for (const SrcPtr& a : w->args)
    if (su_occurs(var, a, s)) return true;
  return false;
}

// Structural unification over source terms; variables bind into `s`.
inline bool su_unify(const SrcPtr& ta, const SrcPtr& tb, SrcSubst& s) {
  SrcPtr a = su_walk(ta, s);
  SrcPtr b = su_walk(tb, s);
  if (a->kind == SrcKind::Var && b->kind == SrcKind::Var && a->name == b->name) return true;
  if (a->kind == SrcKind::Var) {
    if (su_occurs(a->name, b, s)) return false;
    s[a->name] = b;
    return true;
  }
  if (b->kind == SrcKind::Var) {
    if (su_occurs(b->name, a, s)) return false;
    s[b->name] = a;
    return true;
  }
  if (a->kind != b->kind || a->name != b->name || a->ival != b->ival || a->start != b->start ||
      a->args.size() != b->args.size())
    return false;
  if ((a->fd == nullptr) != (b->fd == nullptr)) return false;
  if (a->fd && !fd_equal(a->fd, b->fd)) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!su_unify(a->args[i], b->args[i], s)) return false;
  return true;
}

inline void collect_fd_var_names(const FdPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == FdKind::Var) out.insert(e->name);
  collect_fd_var_names(e->a, out);
  collect_fd_var_names(e->b, out);
}

inline void collect_var_names(const SrcPtr& t, std::set<std::string>& out) {
  if (t->kind == SrcKind::Var) out.insert(t->name);
  if (t->fd) collect_fd_var_names(t->fd, out);
  for (const SrcPtr& a : t->args) collect_var_names(a, out);
}

inline std::string rename_one(const std::string& name, std::map<std::string, std::string>& ren,
                              const std::set<std::string>& used, int& counter) {
  auto it = ren.find(name);
  if (it == ren.end()) {
    std::string fresh;
    do {
      fresh = "_T" + std::to_string(counter++);
    } while (used.count(fresh));
    it = ren.emplace(name, fresh).first;
  }
  return it->second;
}

inline FdPtr fd_rename(const FdPtr& e, std::map<std::string, std::string>& ren,
                       const std::set<std::string>& used, int& counter) {
  if (!e) return e;
  if (e->kind == FdKind::Var) {
    auto n = std::make_shared<FinDomExpr>(*e);
    n->name = rename_one(e->name, ren, used, counter);
    return n;
  }
  FdPtr a = fd_rename(e->a, ren, used, counter);
  FdPtr b = fd_rename(e->b, ren, used, counter);
  if (a == e->a && b == e->b) return e;
  auto n = std::make_shared<FinDomExpr>(*e);
  n->a = a;
  n->b = b;
  return n;
}

// Standardizes a template definition apart: every variable gets a fresh name
// not used anywhere in the term under expansion.
inline SrcPtr rename_vars(const SrcPtr& t, std::map<std::string, std::string>& ren,
                          const std::set<std::string>& used, int& counter) {
  if (t->kind == SrcKind::Var) {
    auto n = std::make_shared<SourceTerm>(*t);
    if (t->name == "_") {
      do {
        n->name = "_A" + std::to_string(counter++);
      } while (used.count(n->name));
    } else {
      n->name = rename_one(t->name, ren, used, counter);
    }
    return n;
  }
  FdPtr fd = t->fd ? fd_rename(t->fd, ren, used, counter) : nullptr;
  if (t->args.empty() && fd == t->fd) return t;
  std::vector<SrcPtr> args;
  args.reserve(t->args.size());
  for (const SrcPtr& a : t->args) args.push_back(rename_vars(a, ren, used, counter));
  return rebuild(t, std::move(args), fd);
}

// Replaces one node (by identity) and stamps template-path bookkeeping onto
// the replacement's calls.
inline SrcPtr replace_node(const SrcPtr& t, const SourceTerm* target, const SrcPtr& repl,
                           bool& found) {
  if (t.get() == target) {
    found = true;
    return repl;
  }
  if (t->kind == SrcKind::Quote) return t;  // quoted terms are opaque
  if (t->args.empty()) return t;
  bool changed = false;
  std::vector<SrcPtr> args;
  args.reserve(t->args.size());
  for (const SrcPtr& a : t->args) {
    SrcPtr b = replace_node(a, target, repl, found);
    changed |= b != a;
    args.push_back(std::move(b));
  }
  if (!changed) return t;
  return rebuild(t, std::move(args), t->fd);
}

inline SrcPtr stamp_tpath(const SrcPtr& t,
                          const std::vector<std::pair<std::string, int>>& path) {
  if (t->kind == SrcKind::Quote) return t;
  bool changed = false;
  std::vector<SrcPtr> args;
  args.reserve(t->args.size());
  for (const SrcPtr& a : t->args) {
    SrcPtr b = stamp_tpath(a, path);
    changed |= b != a;
    args.push_back(std::move(b));
  }
  if (t->kind == SrcKind::TemplateCall) {
    auto n = std::make_shared<SourceTerm>(*t);
    n->args = std::move(args);
    n->tpath = path;
    return n;
  }
  if (!changed) return t;
  return rebuild(t, std::move(args), t->fd);
}

inline const SourceTerm* find_first_call(const SrcPtr& t) {
  if (t->kind == SrcKind::Quote) return nullptr;
  if (t->kind == SrcKind::TemplateCall) return t.get();
  for (const SrcPtr& a : t->args)
    if (const SourceTerm* c = find_first_call(a)) return c;
  return nullptr;
}

inline const SourceTerm* find_first_disj(const SrcPtr& t) {
  if (t->kind == SrcKind::Quote) return nullptr;
  if (t->kind == SrcKind::Disj) return t.get();
  for (const SrcPtr& a : t->args)
    if (const SourceTerm* d = find_first_disj(a)) return d;
  return nullptr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Template expansion.

inline void expand_templates_rec(const SrcPtr& t, const Signature& sig,
                                 std::vector<SrcPtr>& out, int& counter) {
  const SourceTerm* call = detail::find_first_call(t);
  if (!call) {
    out.push_back(t);
    return;
  }
  int arity = static_cast<int>(call->args.size());
  for (const auto& [name, ar] : call->tpath) {
    if (name == call->name && ar == arity)
      throw FitError(ErrorClass::Template,
                     "recursive template chain through @" + call->name + "/" +
                         std::to_string(arity),
                     call->pos);
  }
  const std::vector<TemplateDefn>* defs = sig.templates(call->name, arity);
  if (!defs)
    throw FitError(ErrorClass::Template,
                   "undefined template @" + call->name + "/" + std::to_string(arity), call->pos);

  std::set<std::string> used;
  detail::collect_var_names(t, used);

  std::vector<std::pair<std::string, int>> path = call->tpath;
  path.emplace_back(call->name, arity);

  bool any = false;
  for (const TemplateDefn& def : *defs) {
    std::map<std::string, std::string> ren;
    SrcPtr head = detail::rename_vars(def.head, ren, used, counter);
    SrcPtr value = detail::rename_vars(def.value, ren, used, counter);

    SrcSubst subst;
    bool ok = true;
    for (size_t i = 0; ok && i < call->args.size(); ++i)
      ok = detail::su_unify(call->args[i], head->args[i], subst);
    if (!ok) continue;
    any = true;

    // Stamp the definition's own calls before substituting: calls spliced in
    // through the arguments keep their original expansion paths, so nesting
    // a template inside its own argument list is not recursion.
    SrcPtr repl = detail::su_walk(detail::stamp_tpath(value, path), subst);
    bool found = false;
    SrcPtr t2 = detail::replace_node(t, call, repl, found);
    t2 = detail::su_walk(t2, subst);
    expand_templates_rec(t2, sig, out, counter);
  }
  if (!any)
    throw FitError(ErrorClass::Template,
                   "no definition head of template @" + call->name + "/" +
                       std::to_string(arity) + " matches this call",
                   call->pos);
}

// Expands every template call, yielding one result per combination of
// matching definitions (relational templates), definition order, depth-first.
inline std::vector<SrcPtr> expand_templates(const SrcPtr& t, const Signature& sig) {
  std::vector<SrcPtr> out;
  int counter = 0;
  expand_templates_rec(t, sig, out, counter);
  return out;
}

// ---------------------------------------------------------------------------
// Disjunction expansion (source level; quotes stay opaque).

inline void expand_disjunctions(const SrcPtr& t, std::vector<SrcPtr>& out) {
  const SourceTerm* d = detail::find_first_disj(t);
  if (!d) {
    out.push_back(t);
    return;
  }
  for (int branch = 0; branch < 2; ++branch) {
    bool found = false;
    SrcPtr t2 = detail::replace_node(t, d, d->args[static_cast<size_t>(branch)], found);
    expand_disjunctions(t2, out);
  }
}

// ---------------------------------------------------------------------------
// Feature search.

// All repeat-free feature paths from `start` to `feature`. Traversal steps
// through declared-sort restrictions only; a path may not reuse a feature,
// and may not re-enter a structure of a sort already on the path — "already
// visited" is subsumption-aware, so searching from head_adj never tunnels
// into an embedded sign.
inline void enumerate_feature_paths(const Signature& sig, const std::string& start,
                                    const std::string& feature,
                                    std::vector<std::vector<std::string>>& out) {
  std::vector<std::string> path;
  std::vector<std::string> seen_sorts{start};
  std::set<std::string> seen_feats;
  struct Rec {
    const Signature& sig;
    const std::string& target;
    std::vector<std::vector<std::string>>& out;
    std::vector<std::string>& path;
    std::vector<std::string>& seen_sorts;
    std::set<std::string>& seen_feats;

    bool visited(const std::string& r) const {
      for (const std::string& v : seen_sorts)
        if (sig.sorts_compatible(r, v)) return true;
      return false;
    }

    void go(const std::string& sort) {
      for (const auto& [f, r] : sig.available_features(sort)) {
        if (seen_feats.count(f)) continue;
        if (f == target) {
          path.push_back(f);
          out.push_back(path);
          path.pop_back();
          continue;
        }
        if (!sig.is_declared_sort(r) || visited(r)) continue;
        path.push_back(f);
        seen_feats.insert(f);
        seen_sorts.push_back(r);
        go(r);
        seen_sorts.pop_back();
        seen_feats.erase(f);
        path.pop_back();
      }
    }
  } rec{sig, feature, out, path, seen_sorts, seen_feats};
  rec.go(start);
}

inline std::vector<std::string> resolve_search(const Signature& sig, const std::string& start,
                                               const std::string& feature, SourcePos pos = {},
                                               const std::string& file = {}) {
  if (!sig.is_declared_sort(start))
    throw FitError(ErrorClass::Search, "feature search from unknown sort '" + start + "'", pos,
                   file);
  if (!sig.is_feature(feature))
    throw FitError(ErrorClass::Search, "feature search for undefined feature '" + feature + "'",
                   pos, file);
  std::vector<std::vector<std::string>> paths;
  enumerate_feature_paths(sig, start, feature, paths);
  if (paths.empty())
    throw FitError(ErrorClass::Search,
                   "no repeat-free path from sort '" + start + "' to feature '" + feature + "'",
                   pos, file);
  if (paths.size() > 1) {
    std::string msg = "ambiguous feature search from '" + start + "' to '" + feature +
                      "': candidates are";
    for (const auto& p : paths) {
      msg += " ";
      for (size_t i = 0; i < p.size(); ++i) msg += (i ? "!" : "") + p[i];
      msg += ";";
    }
    msg.pop_back();
    throw FitError(ErrorClass::Search, msg, pos, file);
  }
  return paths.front();
}

// ---------------------------------------------------------------------------
// Term compilation (input must be template- and disjunction-free).

class TermCompiler {
 public:
  TermCompiler(const Signature& sig, const LayoutTable& lt, Store& store,
               const CompileOptions& opts, const std::string& file = {})
      : sig_(sig), lt_(lt), store_(store), opts_(opts), file_(file) {}

  struct Ctx {
    std::string feat_restr_sort;   // restriction of the enclosing feature, if a sort
    std::string domain;            // restriction of the enclosing feature, if a domain
    std::vector<std::string> conj_sorts;  // explicit <Sort conjuncts of the enclosing group
  };

  std::map<std::string, TermPtr>& varmap() { return varmap_; }
  std::vector<std::string>& var_order() { return var_order_; }

  TermPtr compile(const SrcPtr& t, const Ctx& ctx) {
    switch (t->kind) {
      case SrcKind::Var:
        return var(t->name);
      case SrcKind::Int:
        if (!ctx.domain.empty()) {
          uint64_t m = sig_.element_subset(ctx.domain, fd_int(t->ival));
          return encode_subset(store_, sig_, lt_, ctx.domain, m, t->pos, file_);
        }
        return mk_int(t->ival);
      case SrcKind::Atom:
        if (!ctx.domain.empty() && atom_in_domain(ctx.domain, t->name)) {
          uint64_t m = sig_.element_subset(ctx.domain, fd_atom(t->name));
          return encode_subset(store_, sig_, lt_, ctx.domain, m, t->pos, file_);
        }
        check_reserved(t->name, t->pos);
        return mk_atom(t->name);
      case SrcKind::Compound: {
        check_reserved(t->name, t->pos);
        std::vector<TermPtr> args;
        args.reserve(t->args.size());
        for (const SrcPtr& a : t->args) args.push_back(compile(a, {}));
        return mk_comp(t->name, std::move(args));
      }
      case SrcKind::SortRef: {
        if (!sig_.is_declared_sort(t->name))
          throw FitError(ErrorClass::Signature, "undefined sort: " + t->name, t->pos, file_);
        return skeleton(store_, sig_, lt_, t->name);
      }
      case SrcKind::FeatVal:
        return compile_featval(t, ctx);
      case SrcKind::Conj:
        return compile_conj(t, ctx);
      case SrcKind::Search:
        return compile_search(t, ctx);
      case SrcKind::FinDom:
        return compile_findom(t, ctx);
      case SrcKind::Quote:
        return raw(t->args[0]);
      case SrcKind::DoubleQuote:
        return compile_doublequote(t->args[0]);
      case SrcKind::Disj:
        throw FitError(ErrorClass::Inconsistency,
                       "internal: disjunction reached the term compiler", t->pos, file_);
      case SrcKind::TemplateCall:
        throw FitError(ErrorClass::Template,
                       "internal: template call reached the term compiler", t->pos, file_);
    }
    throw FitError(ErrorClass::Syntax, "unhandled term", t->pos, file_);
  }

  // Unification that raises Inconsistent on failure.
  void must_unify(const TermPtr& a, const TermPtr& b, const SrcPtr& at) {
    if (!fit::unify(store_, a, b))
      throw Inconsistent{FitError(ErrorClass::Inconsistency,
                                  "inconsistent description: " + describe(at), at->pos, file_)};
  }

  // Raw structural translation (what quoting does), for loading plain
  // logic-program text.
  TermPtr compile_raw(const SrcPtr& t) { return raw(t); }

 private:
  const Signature& sig_;
  const LayoutTable& lt_;
  Store& store_;
  CompileOptions opts_;  // by value: callers may hand in a temporary
  std::string file_;
  std::map<std::string, TermPtr> varmap_;
  std::vector<std::string> var_order_;

  static std::string describe(const SrcPtr& t);

  TermPtr var(const std::string& name) {
    if (name == "_") return store_.fresh();
    auto it = varmap_.find(name);
    if (it == varmap_.end()) {
      it = varmap_.emplace(name, store_.fresh()).first;
      var_order_.push_back(name);
    }
    return it->second;
  }

  bool atom_in_domain(const std::string& dname, const std::string& sym) const {
    for (const auto& dim : sig_.domain(dname).dims)
      for (const DomAtom& a : dim)
        if (!a.is_int && a.sym == sym) return true;
    return false;
  }

  void check_reserved(const std::string& f, SourcePos pos) const {
    if (!f.empty() && f[0] == '$')
      throw FitError(ErrorClass::Signature,
                     "functor '" + f + "' is reserved ('$'-prefixed names encode sorts)", pos,
                     file_);
  }

  TermPtr compile_featval(const SrcPtr& t, const Ctx&) {
    if (!sig_.is_feature(t->name))
      throw FitError(ErrorClass::Signature, "undefined feature: " + t->name, t->pos, file_);
    const FeatureInfo& fi = sig_.feature(t->name);
    Skeleton sk = skeleton_ex(store_, sig_, lt_, fi.introducer);
    int slot = lt_.feature_slot(fi.introducer, t->name);

    Ctx vctx;
    if (sig_.is_declared_sort(fi.restriction)) vctx.feat_restr_sort = fi.restriction;
    if (sig_.is_domain(fi.restriction)) vctx.domain = fi.restriction;

    TermPtr value = compile(t->args[0], vctx);
    if (opts_.sort_check && sig_.is_declared_sort(fi.restriction))
      must_unify(value, skeleton(store_, sig_, lt_, fi.restriction), t);
    must_unify(sk.self->args[static_cast<size_t>(slot)], value, t);
    return sk.root;
  }

  TermPtr compile_conj(const SrcPtr& t, const Ctx& ctx) {
    std::vector<SrcPtr> members;
    flatten_conj(t, members);
    Ctx mctx;
    mctx.feat_restr_sort = ctx.feat_restr_sort;
    mctx.domain = ctx.domain;
    for (const SrcPtr& m : members)
      if (m->kind == SrcKind::SortRef) mctx.conj_sorts.push_back(m->name);

    TermPtr first;
    for (const SrcPtr& m : members) {
      TermPtr c = compile(m, mctx);
      if (!first)
        first = c;
      else
        must_unify(first, c, m);
    }
    return first;
  }

  TermPtr compile_search(const SrcPtr& t, const Ctx& ctx) {
    if (!opts_.feature_search)
      throw FitError(ErrorClass::Search,
                     "feature search ('>>>') is disabled (--no-feature-search)", t->pos, file_);
    std::string start = t->start;
    bool explicit_start = !start.empty();
    if (!explicit_start) {
      if (!ctx.feat_restr_sort.empty())
        start = ctx.feat_restr_sort;
      else if (!ctx.conj_sorts.empty())
        start = ctx.conj_sorts.front();
      else
        throw FitError(ErrorClass::Search,
                       "feature search '>>>" + t->name +
                           "' has no inferable start sort (no sortal restriction or <Sort "
                           "conjunct in scope)",
                       t->pos, file_);
    }
    std::vector<std::string> path = resolve_search(sig_, start, t->name, t->pos, file_);
    SrcPtr chain = t->args[0];
    for (auto it = path.rbegin(); it != path.rend(); ++it)
      chain = src_featval(*it, chain, t->pos);
    if (explicit_start) chain = src_conj(src_sort(start, t->pos), chain, t->pos);
    return compile(chain, ctx);
  }

  TermPtr compile_findom(const SrcPtr& t, const Ctx& ctx) {
    std::string dname = !ctx.domain.empty() ? ctx.domain
                                            : sig_.infer_domain(t->fd, t->pos, file_);
    uint64_t subset = sig_.element_subset(dname, t->fd);
    TermPtr enc = encode_subset(store_, sig_, lt_, dname, subset, t->pos, file_);
    // A variable in the expression (X@agr) names the whole value.
    std::set<std::string> fdvars;
    detail::collect_fd_var_names(t->fd, fdvars);
    for (const std::string& name : fdvars) must_unify(var(name), enc, t);
    return enc;
  }

  // Quoted terms become the raw structure of the surface syntax.
  TermPtr raw(const SrcPtr& t) {
    switch (t->kind) {
      case SrcKind::Var: return var(t->name);
      case SrcKind::Atom: return mk_atom(t->name);
      case SrcKind::Int: return mk_int(t->ival);
      case SrcKind::Compound: {
        std::vector<TermPtr> args;
        for (const SrcPtr& a : t->args) args.push_back(raw(a));
        return mk_comp(t->name, std::move(args));
      }
      case SrcKind::SortRef: return mk_comp("<", {mk_atom(t->name)});
      case SrcKind::FeatVal: return mk_comp("!", {mk_atom(t->name), raw(t->args[0])});
      case SrcKind::Conj: return mk_comp("&", {raw(t->args[0]), raw(t->args[1])});
      case SrcKind::Disj: return mk_comp("or", {raw(t->args[0]), raw(t->args[1])});
      case SrcKind::Quote: return mk_comp("`", {raw(t->args[0])});
      case SrcKind::DoubleQuote: return mk_comp("``", {raw(t->args[0])});
      case SrcKind::Search: {
        TermPtr fv = mk_comp("!", {mk_atom(t->name), raw(t->args[0])});
        if (t->start.empty()) return mk_comp(">>>", {fv});
        return mk_comp(">>>", {mk_atom(t->start), fv});
      }
      case SrcKind::TemplateCall: {
        std::vector<TermPtr> args;
        for (const SrcPtr& a : t->args) args.push_back(raw(a));
        return mk_comp("@", {mk_comp(t->name, std::move(args))});
      }
      case SrcKind::FinDom: return raw_fd(t->fd);
    }
    return mk_atom("?");
  }

  TermPtr raw_fd(const FdPtr& e) {
    switch (e->kind) {
      case FdKind::Atom: return mk_atom(e->name);
      case FdKind::Int: return mk_int(e->ival);
      case FdKind::Var: return var(e->name);
      case FdKind::Annot: return mk_comp("@", {raw_fd(e->a), mk_atom(e->name)});
      case FdKind::Neg: return mk_comp("~", {raw_fd(e->a)});
      case FdKind::And: return mk_comp("&", {raw_fd(e->a), raw_fd(e->b)});
      case FdKind::Or: return mk_comp("or", {raw_fd(e->a), raw_fd(e->b)});
    }
    return mk_atom("?");
  }

  // Double quote: the outermost functor stays untranslated, arguments are
  // compiled normally.
  TermPtr compile_doublequote(const SrcPtr& t) {
    switch (t->kind) {
      case SrcKind::Compound: {
        std::vector<TermPtr> args;
        for (const SrcPtr& a : t->args) args.push_back(compile(a, {}));
        return mk_comp(t->name, std::move(args));
      }
      case SrcKind::Var:
      case SrcKind::Atom:
      case SrcKind::Int:
        return compile(t, {});
      case SrcKind::SortRef: return mk_comp("<", {mk_atom(t->name)});
      case SrcKind::FeatVal:
        return mk_comp("!", {mk_atom(t->name), compile(t->args[0], {})});
      case SrcKind::Conj:
        return mk_comp("&", {compile(t->args[0], {}), compile(t->args[1], {})});
      default:
        return raw(t);
    }
  }
};

// ---------------------------------------------------------------------------
// Clause and program compilation.

struct CompiledGoals {
  Store store;
  TermPtr head;                 // null for queries
  std::vector<TermPtr> goals;
  std::vector<std::pair<std::string, TermPtr>> vars;  // named vars, first-occurrence order
};

namespace detail {

// Compiles one disjunction-free clause/query alternative on a fresh store.
inline CompiledGoals compile_alternative(const SrcPtr& head, const std::vector<SrcPtr>& body,
                                         const Signature& sig, const LayoutTable& lt,
                                         const CompileOptions& opts, const std::string& file) {
  CompiledGoals out;
  TermCompiler tc(sig, lt, out.store, opts, file);
  if (head) out.head = tc.compile(head, {});
  for (const SrcPtr& g : body) {
    TermPtr cg = tc.compile(g, {});
    TermPtr d = out.store.deref(cg);
    if (d->kind != Tk::Comp && d->kind != Tk::Atom)
      throw FitError(ErrorClass::Syntax, "goal is not callable", g->pos, file);
    out.goals.push_back(cg);
  }
  for (const std::string& name : tc.var_order())
    out.vars.emplace_back(name, tc.varmap().at(name));
  return out;
}

inline SrcPtr wrap_clause(const SrcPtr& head, const std::vector<SrcPtr>& body) {
  // Queries carry no head; a placeholder keeps the wrapper shape uniform.
  SrcPtr t = head ? head : src_atom("true");
  for (const SrcPtr& g : body) t = src_conj(t, g, g->pos);
  return t;
}

// Splits the wrapper built by wrap_clause back into head + goals.
inline void unwrap_clause(const SrcPtr& t, size_t ngoals, SrcPtr& head,
                          std::vector<SrcPtr>& body) {
  std::vector<SrcPtr> parts;
  SrcPtr cur = t;
  for (size_t i = 0; i < ngoals; ++i) {
    parts.push_back(cur->args[1]);
    cur = cur->args[0];
  }
  head = cur;
  body.assign(parts.rbegin(), parts.rend());
}

}  // namespace detail

// Compiles one source clause into its expansion alternatives: template
// alternatives × disjunct combinations, left-to-right depth-first, dropping
// combinations whose compile-time unification fails. A clause with zero
// consistent alternatives is an error.
inline std::vector<CoreClause> compile_clause(const Item& item, const Signature& sig,
                                              const LayoutTable& lt, const CompileOptions& opts) {
  SrcPtr wrapped = detail::wrap_clause(item.head, item.body);
  std::vector<SrcPtr> expanded;
  for (const SrcPtr& t : expand_templates(wrapped, sig))
    expand_disjunctions(t, expanded);

  std::vector<CoreClause> out;
  std::optional<FitError> first_failure;
  for (const SrcPtr& alt : expanded) {
    SrcPtr head;
    std::vector<SrcPtr> body;
    detail::unwrap_clause(alt, item.body.size(), head, body);
    try {
      CompiledGoals cg = detail::compile_alternative(head, body, sig, lt, opts, item.file);
      CoreClause clause;
      clause.pos = item.pos;
      clause.file = item.file;
      Copier copier(cg.store, clause.store);
      clause.head = copier.copy(cg.head);
      for (const TermPtr& g : cg.goals) clause.body.push_back(copier.copy(g));
      out.push_back(std::move(clause));
    } catch (const Inconsistent& inc) {
      if (!first_failure) first_failure = inc.error;
    } catch (FitError& e) {
      if (e.cls() == ErrorClass::EmptyDomain && expanded.size() > 1) {
        if (!first_failure) first_failure = e;
        continue;
      }
      throw;
    }
  }
  if (out.empty()) {
    if (first_failure) {
      if (expanded.size() > 1)
        throw FitError(ErrorClass::Inconsistency,
                       "clause has no consistent expansion (" +
                           std::to_string(expanded.size()) + " combinations all fail)",
                       item.pos, item.file);
      throw *first_failure;
    }
    throw FitError(ErrorClass::Inconsistency, "clause has no consistent expansion", item.pos,
                   item.file);
  }
  return out;
}

inline KnowledgeBase compile_program(const std::vector<Item>& items, const CompileOptions& opts) {
  KnowledgeBase kb;
  kb.opts = opts;
  kb.sig = build_signature(items);
  kb.layouts = compute_layouts(kb.sig);
  for (const Item& it : items) {
    if (it.kind == ItemKind::Clause) {
      for (CoreClause& c : compile_clause(it, kb.sig, kb.layouts, opts))
        kb.add_clause(std::move(c));
    } else {
      kb.decl_items.push_back(it);
    }
  }
  return kb;
}

// Query compilation: same expansion pipeline as clause bodies; alternatives
// are solved in order.
inline std::vector<CompiledGoals> compile_query_goals(const std::vector<SrcPtr>& goals,
                                                      const Signature& sig, const LayoutTable& lt,
                                                      const CompileOptions& opts,
                                                      const std::string& file = {}) {
  Item pseudo;
  pseudo.kind = ItemKind::Clause;
  pseudo.file = file;
  SrcPtr wrapped = detail::wrap_clause(nullptr, goals);
  std::vector<SrcPtr> expanded;
  for (const SrcPtr& t : expand_templates(wrapped, sig)) expand_disjunctions(t, expanded);

  std::vector<CompiledGoals> out;
  std::optional<FitError> first_failure;
  for (const SrcPtr& alt : expanded) {
    SrcPtr head;
    std::vector<SrcPtr> body;
    detail::unwrap_clause(alt, goals.size(), head, body);
    try {
      out.push_back(detail::compile_alternative(nullptr, body, sig, lt, opts, file));
    } catch (const Inconsistent& inc) {
      if (!first_failure) first_failure = inc.error;
    } catch (FitError& e) {
      if (e.cls() == ErrorClass::EmptyDomain && expanded.size() > 1) {
        if (!first_failure) first_failure = e;
        continue;
      }
      throw;
    }
  }
  if (out.empty()) {
    if (first_failure) throw *first_failure;
    throw FitError(ErrorClass::Inconsistency, "query has no consistent expansion");
  }
  return out;
}

inline std::string TermCompiler::describe(const SrcPtr& t) {
  switch (t->kind) {
    case SrcKind::SortRef: return "<" + t->name;
    case SrcKind::FeatVal: return t->name + "!...";
    case SrcKind::Conj: return "conjunction";
    default: return "term";
  }
}

}  // namespace fit
