#pragma once

#include <set>
#include <utility>
#include <vector>

#include "fit/core_term.hpp"

namespace fit {

// Rational-tree unification: no occur check, so a variable may be bound into
// a term containing itself. Termination on cyclic inputs comes from cutting
// recursion when a compound pair is already being unified higher up the
// stack; a pair can only recur by travelling through a variable cycle, and
// there are finitely many node pairs.
class Unifier {
 public:
  explicit Unifier(Store& s) : s_(s) {}

  bool unify(TermPtr a, TermPtr b) {
    a = s_.deref(a);
    b = s_.deref(b);
    if (a.get() == b.get()) return true;
    if (a->kind == Tk::Var) {
      if (b->kind == Tk::Var && b->var == a->var) return true;
      s_.bind(a->var, b);
      return true;
    }
    if (b->kind == Tk::Var) {
      s_.bind(b->var, a);
      return true;
    }
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case Tk::Atom: return a->fun == b->fun;
      case Tk::Num: return a->num == b->num;
      case Tk::Comp: {
        if (a->fun != b->fun || a->args.size() != b->args.size()) return false;
        for (const auto& p : inflight_)
          if (p.first == a.get() && p.second == b.get()) return true;
        inflight_.emplace_back(a.get(), b.get());
        bool ok = true;
        for (size_t i = 0; ok && i < a->args.size(); ++i)
          ok = unify(a->args[i], b->args[i]);
        inflight_.pop_back();
        return ok;
      }
      default: return false;
    }
  }

 private:
  Store& s_;
  std::vector<std::pair<const CoreTerm*, const CoreTerm*>> inflight_;
};

// Attempts unification; on failure the store is restored to its prior state.
inline bool unify(Store& s, const TermPtr& a, const TermPtr& b) {
  Store::Mark m = s.mark();
  Unifier u(s);
  if (u.unify(a, b)) return true;
  s.undo(m);
  return false;
}

// Print-time occur check: returns the set of compound nodes through which the
// term re-enters itself, in first-encounter order. Sharing without cycles
// yields an empty result.
inline std::vector<const CoreTerm*> find_cycles(const Store& s, const TermPtr& root) {
  std::vector<const CoreTerm*> entries;
  std::set<const CoreTerm*> entry_set;
  std::set<const CoreTerm*> open, done;

  // Explicit stack; frames carry the next child index to visit.
  struct Frame {
    TermPtr node;
    size_t next = 0;
  };
  std::vector<Frame> stack;

  auto push = [&](TermPtr t) {
    t = s.deref(t);
    if (t->kind != Tk::Comp) return;
    if (open.count(t.get())) {
      if (!entry_set.count(t.get())) {
        entry_set.insert(t.get());
        entries.push_back(t.get());
      }
      return;
    }
    if (done.count(t.get())) return;
    open.insert(t.get());
    stack.push_back({t, 0});
  };

  push(root);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.node->args.size()) {
      TermPtr child = f.node->args[f.next++];
      push(child);
    } else {
      open.erase(f.node.get());
      done.insert(f.node.get());
      stack.pop_back();
    }
  }
  return entries;
}

}  // namespace fit
