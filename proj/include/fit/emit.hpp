#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fit/kb.hpp"
#include "fit/render.hpp"
#include "fit/unify.hpp"

// Emits the compiled program as plain logic-program text: one clause per
// line, canonical functor notation, '$'-functors quoted so any standard
// reader accepts them. Shared and cyclic subterms cannot be written as a
// finite tree, so they are named by a variable and tied with '=' goals at
// the front of the body; under rational-tree unification the loaded clause
// behaves identically.

namespace fit {

class ClauseEmitter {
 public:
  explicit ClauseEmitter(const CoreClause& c) : c_(c) {}

  std::string emit() {
    count_refs(c_.head);
    for (const TermPtr& g : c_.body) count_refs(g);

    std::string head = render(c_.head);
    std::vector<std::string> body_txt;
    for (const TermPtr& g : c_.body) body_txt.push_back(render(g));

    // All naming equations first, then the original goals.
    std::vector<std::string> goals = equations_;
    goals.insert(goals.end(), body_txt.begin(), body_txt.end());

    std::string out = head;
    if (!goals.empty()) {
      out += " :- ";
      for (size_t i = 0; i < goals.size(); ++i) {
        if (i) out += ", ";
        out += goals[i];
      }
    }
    out += ".";
    return out;
  }

 private:
  const CoreClause& c_;
  std::map<const CoreTerm*, int> ref_count_;
  std::set<const CoreTerm*> cyclic_;
  std::set<const CoreTerm*> open_;
  std::map<const CoreTerm*, std::string> node_names_;
  std::set<const CoreTerm*> node_emitted_;
  std::map<int, int> var_count_;
  std::map<int, std::string> var_names_;
  std::vector<std::string> equations_;
  int name_counter_ = 0;

  std::string fresh_name() {
    int round = name_counter_ / 26;
    char letter = static_cast<char>('A' + name_counter_ % 26);
    ++name_counter_;
    std::string n(1, letter);
    if (round > 0) n += std::to_string(round);
    return n;
  }

  void count_refs(TermPtr t) {
    t = c_.store.deref(t);
    if (t->kind == Tk::Var) {
      ++var_count_[t->var];
      return;
    }
    if (t->kind != Tk::Comp) return;
    ++ref_count_[t.get()];
    if (open_.count(t.get())) {
      cyclic_.insert(t.get());
      return;
    }
    if (ref_count_[t.get()] > 1) return;
    open_.insert(t.get());
    for (const TermPtr& a : t->args) count_refs(a);
    open_.erase(t.get());
  }

  bool tagged(const CoreTerm* n) const {
    auto it = ref_count_.find(n);
    return (it != ref_count_.end() && it->second > 1) || cyclic_.count(n) > 0;
  }

  std::string render(TermPtr t) {
    t = c_.store.deref(t);
    switch (t->kind) {
      case Tk::Var: {
        if (var_count_[t->var] <= 1) return "_";
        auto it = var_names_.find(t->var);
        if (it == var_names_.end()) it = var_names_.emplace(t->var, fresh_name()).first;
        return it->second;
      }
      case Tk::Num:
        return std::to_string(t->num);
      case Tk::Atom:
        return quote_atom(t->fun);
      case Tk::Comp: {
        if (tagged(t.get())) {
          auto it = node_names_.find(t.get());
          if (it != node_names_.end()) return it->second;
          std::string name = fresh_name();
          node_names_.emplace(t.get(), name);
          equations_.push_back(name + " = " + render_node(t));
          return name;
        }
        return render_node(t);
      }
    }
    return "?";
  }

  std::string render_node(const TermPtr& t) {
    // List sugar keeps lexica readable.
    if (t->fun == "." && t->args.size() == 2) return render_list(t);
    std::string out = quote_atom(t->fun) + "(";
    for (size_t i = 0; i < t->args.size(); ++i) {
      if (i) out += ",";
      out += render(t->args[i]);
    }
    return out + ")";
  }

  std::string render_list(const TermPtr& head) {
    std::string out = "[";
    TermPtr cur = head;
    bool first = true;
    for (;;) {
      out += (first ? "" : ",") + render(cur->args[0]);
      first = false;
      TermPtr tail = c_.store.deref(cur->args[1]);
      if (tail->kind == Tk::Atom && tail->fun == "[]") break;
      if (tail->kind == Tk::Comp && tail->fun == "." && tail->args.size() == 2 &&
          !tagged(tail.get())) {
        cur = tail;
        continue;
      }
      out += "|" + render(cur->args[1]);
      break;
    }
    return out + "]";
  }
};

inline uint32_t fnv1a(const std::string& s) {
  uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

inline std::string options_hash(const CompileOptions& o) {
  std::string key = std::string("sort_check=") + (o.sort_check ? "1" : "0") +
                    ",feature_search=" + (o.feature_search ? "1" : "0");
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", fnv1a(key));
  return buf;
}

inline std::string emit_program(const KnowledgeBase& kb, const std::vector<std::string>& sources) {
  std::string out = "% generated by fitc\n";
  for (const std::string& s : sources) out += "% source: " + s + "\n";
  out += "% options: sort_check=" + std::string(kb.opts.sort_check ? "on" : "off") +
         " feature_search=" + (kb.opts.feature_search ? "on" : "off") + " (hash " +
         options_hash(kb.opts) + ")\n";
  std::pair<std::string, int> prev{"", -1};
  for (const CoreClause& c : kb.clauses) {
    auto pred = c.predicate();
    if (pred != prev) out += "\n";
    prev = pred;
    ClauseEmitter e(c);
    out += e.emit() + "\n";
  }
  return out;
}

}  // namespace fit
