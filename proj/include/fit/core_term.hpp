#pragma once

#include <cassert>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

// Plain first-order terms and the variable binding store. Terms are immutable
// trees; cyclic (rational) structures exist only through variable bindings,
// never through node pointers, so reference counting stays leak-free.
// Variable ids are local to one Store.

namespace fit {

struct CoreTerm;
using TermPtr = std::shared_ptr<const CoreTerm>;

enum class Tk { Var, Atom, Num, Comp };

struct CoreTerm {
  Tk kind;
  int var = -1;
  long long num = 0;
  std::string fun;  // atom name / compound functor
  std::vector<TermPtr> args;

  CoreTerm() = default;
  CoreTerm(const CoreTerm&) = default;
  CoreTerm& operator=(const CoreTerm&) = default;

  // Compiled lexica hold very long list chains; destruction must stay
  // iterative.
  ~CoreTerm() {
    if (args.empty()) return;
    std::vector<TermPtr> stack(std::make_move_iterator(args.begin()),
                               std::make_move_iterator(args.end()));
    args.clear();
    while (!stack.empty()) {
      TermPtr t = std::move(stack.back());
      stack.pop_back();
      if (t && t.use_count() == 1) {
        auto* m = const_cast<CoreTerm*>(t.get());
        for (TermPtr& a : m->args) stack.push_back(std::move(a));
        m->args.clear();
      }
    }
  }
};

inline TermPtr mk_var(int id) {
  auto t = std::make_shared<CoreTerm>();
  t->kind = Tk::Var;
  t->var = id;
  return t;
}
inline TermPtr mk_atom(std::string name) {
  auto t = std::make_shared<CoreTerm>();
  t->kind = Tk::Atom;
  t->fun = std::move(name);
  return t;
}
inline TermPtr mk_int(long long v) {
  auto t = std::make_shared<CoreTerm>();
  t->kind = Tk::Num;
  t->num = v;
  return t;
}
inline TermPtr mk_comp(std::string f, std::vector<TermPtr> args) {
  if (args.empty()) return mk_atom(std::move(f));  // arity 0 collapses to an atom
  auto t = std::make_shared<CoreTerm>();
  t->kind = Tk::Comp;
  t->fun = std::move(f);
  t->args = std::move(args);
  return t;
}

class Store {
 public:
  struct Mark {
    size_t trail;
    size_t vars;
  };

  int nvars() const { return static_cast<int>(bind_.size()); }

  TermPtr fresh() {
    int id = static_cast<int>(bind_.size());
    bind_.push_back(nullptr);
    varnode_.push_back(mk_var(id));
    return varnode_.back();
  }

  TermPtr var_node(int id) const { return varnode_[static_cast<size_t>(id)]; }
  bool bound(int id) const { return bind_[static_cast<size_t>(id)] != nullptr; }
  const TermPtr& binding(int id) const { return bind_[static_cast<size_t>(id)]; }

  void bind(int id, TermPtr t) {
    assert(!bind_[static_cast<size_t>(id)]);
    bind_[static_cast<size_t>(id)] = std::move(t);
    trail_.push_back(id);
  }

  // Binds without trailing: for building frozen stores (compiled clauses).
  void bind_frozen(int id, TermPtr t) { bind_[static_cast<size_t>(id)] = std::move(t); }

  Mark mark() const { return {trail_.size(), bind_.size()}; }

  void undo(Mark m) {
    while (trail_.size() > m.trail) {
      bind_[static_cast<size_t>(trail_.back())] = nullptr;
      trail_.pop_back();
    }
    bind_.resize(m.vars);
    varnode_.resize(m.vars);
  }

  TermPtr deref(TermPtr t) const {
    while (t->kind == Tk::Var) {
      const TermPtr& b = bind_[static_cast<size_t>(t->var)];
      if (!b) break;
      t = b;
    }
    return t;
  }

  // Frozen bindings, for serialization.
  std::vector<std::pair<int, TermPtr>> bound_vars() const {
    std::vector<std::pair<int, TermPtr>> out;
    for (size_t i = 0; i < bind_.size(); ++i)
      if (bind_[i]) out.emplace_back(static_cast<int>(i), bind_[i]);
    return out;
  }

 private:
  std::vector<TermPtr> bind_;
  std::vector<TermPtr> varnode_;
  std::vector<int> trail_;
};

// Copies a term from one store into another, renaming variables and
// preserving sharing and cycles. Re-entrant nodes are tied with a fresh
// destination variable bound to the copied node.
class Copier {
 public:
  Copier(const Store& src, Store& dst) : src_(src), dst_(dst) {}

  TermPtr copy(TermPtr t) {
    t = src_.deref(t);
    switch (t->kind) {
      case Tk::Var: {
        auto [it, inserted] = varmap_.try_emplace(t->var, nullptr);
        if (inserted) it->second = dst_.fresh();
        return it->second;
      }
      case Tk::Atom:
      case Tk::Num:
        return t;  // no store-local state; share the node
      case Tk::Comp: {
        auto done = done_.find(t.get());
        if (done != done_.end()) return done->second;
        auto prog = in_progress_.find(t.get());
        if (prog != in_progress_.end()) {
          if (!prog->second) prog->second = dst_.fresh();
          return prog->second;
        }
        in_progress_.emplace(t.get(), nullptr);
        std::vector<TermPtr> args;
        args.reserve(t->args.size());
        for (const TermPtr& a : t->args) args.push_back(copy(a));
        TermPtr node = mk_comp(t->fun, std::move(args));
        TermPtr placeholder = in_progress_[t.get()];
        in_progress_.erase(t.get());
        if (placeholder) dst_.bind(placeholder->var, node);
        done_.emplace(t.get(), node);
        return node;
      }
    }
    return t;
  }

 private:
  const Store& src_;
  Store& dst_;
  std::unordered_map<int, TermPtr> varmap_;
  std::unordered_map<const CoreTerm*, TermPtr> done_;
  std::unordered_map<const CoreTerm*, TermPtr> in_progress_;
};

inline TermPtr copy_into(const Store& src, Store& dst, const TermPtr& t) {
  Copier c(src, dst);
  return c.copy(t);
}

// Structural equality up to a bijective variable renaming; cycle-safe.
// Sharing differences between equal trees are not distinguished.
class VariantEq {
 public:
  VariantEq(const Store& sa, const Store& sb) : sa_(sa), sb_(sb) {}

  bool eq(TermPtr a, TermPtr b) {
    a = sa_.deref(a);
    b = sb_.deref(b);
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case Tk::Var: {
        auto ia = a2b_.find(a->var);
        auto ib = b2a_.find(b->var);
        if (ia == a2b_.end() && ib == b2a_.end()) {
          a2b_[a->var] = b->var;
          b2a_[b->var] = a->var;
          return true;
        }
        return ia != a2b_.end() && ib != b2a_.end() && ia->second == b->var &&
               ib->second == a->var;
      }
      case Tk::Atom: return a->fun == b->fun;
      case Tk::Num: return a->num == b->num;
      case Tk::Comp: {
        if (a->fun != b->fun || a->args.size() != b->args.size()) return false;
        auto key = std::make_pair(a.get(), b.get());
        if (seen_.count(key)) return true;
        seen_[key] = true;
        for (size_t i = 0; i < a->args.size(); ++i)
          if (!eq(a->args[i], b->args[i])) return false;
        return true;
      }
    }
    return false;
  }

 private:
  const Store& sa_;
  const Store& sb_;
  std::map<int, int> a2b_, b2a_;
  std::map<std::pair<const CoreTerm*, const CoreTerm*>, bool> seen_;
};

inline bool variant_equal(const Store& sa, const TermPtr& a, const Store& sb, const TermPtr& b) {
  VariantEq v(sa, sb);
  return v.eq(a, b);
}

}  // namespace fit
