#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fit/core_term.hpp"
#include "fit/errors.hpp"
#include "fit/kb.hpp"
#include "fit/unify.hpp"

// Depth-first SLD resolution: leftmost goal selection, source clause order,
// solutions enumerated on demand. Builtins are 'true' and '='; everything
// else resolves against the knowledge base.

namespace fit {

struct SolveOptions {
  bool error_on_unknown = false;  // undefined predicate: error instead of failure
  uint64_t step_limit = 0;        // 0 = unbounded; counts clause applications
};

class Solver {
 public:
  Solver(const KnowledgeBase& kb, Store& store, const std::vector<TermPtr>& goals,
         SolveOptions opt = {})
      : kb_(kb), store_(store), opt_(opt) {
    for (auto it = goals.rbegin(); it != goals.rend(); ++it)
      goals_ = std::make_shared<GoalNode>(*it, goals_);
  }

  // Advances to the next solution. On true the store holds the bindings;
  // calling again backtracks into the remaining search space.
  bool next() {
    if (exhausted_) return false;
    bool ok;
    if (!started_) {
      started_ = true;
      ok = run();
    } else {
      ok = backtrack() && run();
    }
    if (!ok) exhausted_ = true;
    return ok;
  }

  uint64_t steps() const { return steps_; }
  bool hit_step_limit() const { return hit_limit_; }

 private:
  struct GoalNode {
    TermPtr goal;
    std::shared_ptr<const GoalNode> next;

    GoalNode() = default;
    GoalNode(TermPtr g, std::shared_ptr<const GoalNode> n)
        : goal(std::move(g)), next(std::move(n)) {}
    ~GoalNode() {  // iterative teardown of long pending-goal chains
      auto n = std::move(next);
      while (n && n.use_count() == 1)
        n = std::move(const_cast<GoalNode*>(n.get())->next);
    }
  };
  using Goals = std::shared_ptr<const GoalNode>;

  struct Choice {
    Goals goals;  // goal list whose head is being resolved
    const std::vector<size_t>* clauses;
    size_t cursor;
    Store::Mark mark;
  };

  const KnowledgeBase& kb_;
  Store& store_;
  SolveOptions opt_;
  Goals goals_;
  std::vector<Choice> stack_;
  bool started_ = false;
  bool exhausted_ = false;
  bool hit_limit_ = false;
  uint64_t steps_ = 0;

  bool run() {
    for (;;) {
      if (!goals_) return true;  // all goals solved
      TermPtr g = store_.deref(goals_->goal);
      if (g->kind == Tk::Atom && g->fun == "true") {
        goals_ = goals_->next;
        continue;
      }
      if (g->kind == Tk::Comp && g->fun == "=" && g->args.size() == 2) {
        if (fit::unify(store_, g->args[0], g->args[1])) {
          goals_ = goals_->next;
          continue;
        }
        if (!backtrack()) return false;
        continue;
      }
      std::string fun;
      int arity = 0;
      if (g->kind == Tk::Comp) {
        fun = g->fun;
        arity = static_cast<int>(g->args.size());
      } else if (g->kind == Tk::Atom) {
        fun = g->fun;
      } else {
        throw FitError(ErrorClass::Inconsistency, "goal is not callable");
      }
      const std::vector<size_t>* clauses = kb_.lookup(fun, arity);
      if (!clauses || clauses->empty()) {
        if (opt_.error_on_unknown)
          throw FitError(ErrorClass::Signature,
                         "unknown predicate " + fun + "/" + std::to_string(arity));
        if (!backtrack()) return false;
        continue;
      }
      stack_.push_back({goals_, clauses, 0, store_.mark()});
      if (!backtrack()) return false;
    }
  }

  // Retries the topmost choice point with its next clause; on success the
  // goal list is replaced by the clause body plus the remaining goals.
  bool backtrack() {
    while (!stack_.empty()) {
      Choice& c = stack_.back();
      store_.undo(c.mark);
      if (c.cursor >= c.clauses->size()) {
        stack_.pop_back();
        continue;
      }
      if (opt_.step_limit && steps_ >= opt_.step_limit) {
        hit_limit_ = true;
        return false;
      }
      size_t idx = (*c.clauses)[c.cursor++];
      const CoreClause& cl = kb_.clauses[idx];

      Copier copier(cl.store, store_);
      TermPtr head = copier.copy(cl.head);
      Unifier u(store_);
      if (!u.unify(c.goals->goal, head)) continue;  // next loop undoes partial bindings

      ++steps_;
      Goals rest = c.goals->next;
      std::vector<TermPtr> body;
      body.reserve(cl.body.size());
      for (const TermPtr& b : cl.body) body.push_back(copier.copy(b));
      for (auto it = body.rbegin(); it != body.rend(); ++it)
        rest = std::make_shared<GoalNode>(*it, rest);
      goals_ = rest;
      return true;
    }
    return false;
  }
};

// A self-contained answer: the query's named variables materialized into an
// independent store (sharing and cycles preserved).
struct Solution {
  Store store;
  std::vector<std::pair<std::string, TermPtr>> vars;
};

inline Solution snapshot_solution(const Store& s,
                                  const std::vector<std::pair<std::string, TermPtr>>& vars) {
  Solution sol;
  Copier c(s, sol.store);
  for (const auto& [name, t] : vars) sol.vars.emplace_back(name, c.copy(t));
  return sol;
}

}  // namespace fit
