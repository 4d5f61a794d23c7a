#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fit/ast.hpp"
#include "fit/core_term.hpp"
#include "fit/errors.hpp"
#include "fit/layout.hpp"
#include "fit/signature.hpp"
#include "fit/unify.hpp"

// Inverts the flat-term encoding: '$'-functors map back to `<Sort & f!v` form
// showing the most specific instantiated sort per dimension and only features
// whose slots are bound; finite-domain terms decode to a canonical expression
// for their remaining subset; shared and cyclic substructures are tagged
// `Tag & Term` on first occurrence and appear as the bare tag afterwards.

namespace fit {

struct DecodeOptions {
  bool cyclic_print = true;            // false: unfold cycles 3 deep, then '...'
  std::set<std::string> reserved;      // names not to use (query variables)
};

class Decoder {
 public:
  Decoder(const Store& store, const Signature& sig, const LayoutTable& lt,
          DecodeOptions opts = {})
      : store_(store), sig_(sig), lt_(lt), opts_(std::move(opts)) {}

  // First pass; call once per term of the solution so sharing is detected
  // across all of them.
  void analyze(const TermPtr& term) { visit(term); }

  SrcPtr decode(const TermPtr& term) { return dec(term); }

  bool truncated() const { return truncated_; }

  // Fresh display names: A, B, ..., Z, A1, B1, ... skipping reserved ones.
  std::string fresh_name() {
    for (;;) {
      int round = counter_ / 26;
      char letter = static_cast<char>('A' + counter_ % 26);
      ++counter_;
      std::string name(1, letter);
      if (round > 0) name += std::to_string(round);
      if (!opts_.reserved.count(name) && !used_.count(name)) {
        used_.insert(name);
        return name;
      }
    }
  }

 private:
  const Store& store_;
  const Signature& sig_;
  const LayoutTable& lt_;
  DecodeOptions opts_;

  std::map<const CoreTerm*, int> count_;
  std::set<const CoreTerm*> cyclic_;
  std::map<const CoreTerm*, std::string> tags_;
  std::set<const CoreTerm*> emitted_;
  std::map<const CoreTerm*, int> unfold_;  // truncation bookkeeping
  std::map<int, std::string> var_names_;
  std::set<std::string> used_;
  std::set<const CoreTerm*> open_;
  std::map<int, TermPtr> id_reps_;  // identity variable -> representative node
  int counter_ = 0;
  bool truncated_ = false;

  // Unification can leave several physical nodes for one coreferent object;
  // their identity variables are unified, so the first node seen for an
  // identity stands for all of them. Extensional sorts carry no identity and
  // keep plain value semantics.
  TermPtr canonical(TermPtr t) {
    if (t->kind != Tk::Comp) return t;
    auto it = lt_.sort_of_functor.find(t->fun);
    if (it == lt_.sort_of_functor.end()) return t;
    const SortLayout& l = lt_.sort(it->second);
    if (l.identity_slot < 0 || static_cast<int>(t->args.size()) != l.arity) return t;
    TermPtr id = store_.deref(t->args[static_cast<size_t>(l.identity_slot)]);
    if (id->kind != Tk::Var) return t;
    auto [pos, inserted] = id_reps_.try_emplace(id->var, t);
    (void)inserted;
    return pos->second;
  }

  [[noreturn]] void decode_error(const std::string& msg) const {
    throw FitError(ErrorClass::Decode, msg);
  }

  bool is_sort_functor(const std::string& f, std::string* sort = nullptr) const {
    auto it = lt_.sort_of_functor.find(f);
    if (it == lt_.sort_of_functor.end()) return false;
    if (sort) *sort = it->second;
    return true;
  }
  bool is_domain_functor(const std::string& f, std::string* dom = nullptr) const {
    auto it = lt_.domain_of_functor.find(f);
    if (it == lt_.domain_of_functor.end()) return false;
    if (dom) *dom = it->second;
    return true;
  }

  // --- analysis ---------------------------------------------------------------

  void visit(TermPtr t) {
    t = store_.deref(t);
    if (t->kind != Tk::Comp) return;
    t = canonical(t);
    if (open_.count(t.get())) {
      cyclic_.insert(t.get());
      ++count_[t.get()];
      return;
    }
    if (count_.count(t.get())) {
      ++count_[t.get()];
      return;
    }
    count_[t.get()] = 1;

    std::string sort, dom;
    if (is_sort_functor(t->fun, &sort)) {
      open_.insert(t.get());
      visit_sort_unit(t, sort);
      open_.erase(t.get());
      return;
    }
    if (is_domain_functor(t->fun, &dom)) return;  // innards carry no subterms to show

    open_.insert(t.get());
    for (const TermPtr& a : t->args) visit(a);
    open_.erase(t.get());
  }

  void visit_sort_unit(const TermPtr& node, const std::string& sortname) {
    const SortLayout& l = lt_.sort(sortname);
    if (node->kind == Tk::Comp &&
        static_cast<int>(node->args.size()) != l.arity)
      return;  // malformed; reported during decode
    if (node->kind == Tk::Comp) {
      for (const auto& [f, pos] : l.feature_slots) {
        TermPtr slot = store_.deref(node->args[static_cast<size_t>(pos)]);
        if (slot->kind == Tk::Var) continue;  // omitted feature
        visit(slot);
      }
      const SortInfo& info = sig_.sort(sortname);
      for (size_t d = 0; d < l.dim_slots.size(); ++d) {
        TermPtr sub = store_.deref(node->args[static_cast<size_t>(l.dim_slots[d])]);
        if (sub->kind == Tk::Var) continue;
        std::string subsort;
        if ((sub->kind == Tk::Comp || sub->kind == Tk::Atom) &&
            is_sort_functor(sub->fun, &subsort)) {
          (void)info;
          visit_sort_unit(sub, subsort);  // nested dimension node, same unit
        }
      }
    }
  }

  // --- decoding ---------------------------------------------------------------

  SrcPtr dec(TermPtr t) {
    t = store_.deref(t);
    switch (t->kind) {
      case Tk::Var: {
        auto it = var_names_.find(t->var);
        if (it == var_names_.end()) it = var_names_.emplace(t->var, fresh_name()).first;
        return src_var(it->second);
      }
      case Tk::Num:
        return src_int(t->num);
      case Tk::Atom: {
        if (!t->fun.empty() && t->fun[0] == '$') {
          std::string sort;
          if (is_sort_functor(t->fun, &sort)) {
            if (lt_.sort(sort).arity != 0 || sig_.sort(sort).parent != "top")
              decode_error("malformed '$'-term: " + t->fun);
            return src_sort(sort);
          }
          decode_error("malformed '$'-term: " + t->fun);
        }
        return src_atom(t->fun);
      }
      case Tk::Comp:
        return dec_compound(canonical(t));
    }
    decode_error("unreachable term kind");
  }

  SrcPtr dec_compound(const TermPtr& t) {
    std::string sort, dom;
    bool is_sort = is_sort_functor(t->fun, &sort);
    bool is_dom = !is_sort && is_domain_functor(t->fun, &dom);
    if (!is_sort && !is_dom && t->fun[0] == '$')
      decode_error("malformed '$'-term: " + t->fun);

    bool cyc = cyclic_.count(t.get()) > 0;
    bool shared = count_[t.get()] > 1;

    if (cyc && !opts_.cyclic_print) {
      int& depth = unfold_[t.get()];
      if (depth >= 3) {
        truncated_ = true;
        return src_atom("...");
      }
      ++depth;
      SrcPtr body = dec_unit(t, is_sort, sort, is_dom, dom);
      --depth;
      return body;
    }

    if (cyc || shared) {
      auto it = tags_.find(t.get());
      if (it != tags_.end() && emitted_.count(t.get())) return src_var(it->second);
      if (it == tags_.end()) it = tags_.emplace(t.get(), fresh_name()).first;
      emitted_.insert(t.get());
      // Full-domain values tagged for sharing collapse to the annotated var.
      if (is_dom) {
        auto subset = decode_subset(store_, sig_, lt_, dom, t);
        if (subset && *subset == sig_.domain(dom).full_mask())
          return src_findom(fd_annot(fd_var(it->second), dom));
      }
      SrcPtr body = dec_unit(t, is_sort, sort, is_dom, dom);
      return src_conj(src_var(it->second), body);
    }
    return dec_unit(t, is_sort, sort, is_dom, dom);
  }

  SrcPtr dec_unit(const TermPtr& t, bool is_sort, const std::string& sort, bool is_dom,
                  const std::string& dom) {
    if (is_sort) {
      if (sig_.sort(sort).parent != "top")
        decode_error("malformed '$'-term (nested sort used as a value): " + t->fun);
      return dec_sort_unit(t, sort);
    }
    if (is_dom) return dec_findom_unit(t, dom);
    std::vector<SrcPtr> args;
    args.reserve(t->args.size());
    for (const TermPtr& a : t->args) args.push_back(dec(a));
    return src_compound(t->fun, std::move(args));
  }

  // One sorted value: most specific sort per dimension plus bound features.
  SrcPtr dec_sort_unit(const TermPtr& root, const std::string& rootsort) {
    std::vector<std::string> sorts;
    std::vector<std::pair<std::string, SrcPtr>> feats;
    gather(root, rootsort, sorts, feats);
    std::vector<SrcPtr> parts;
    for (const std::string& s : sorts) parts.push_back(src_sort(s));
    for (auto& [f, v] : feats) parts.push_back(src_featval(f, v));
    SrcPtr out = parts.back();
    for (size_t i = parts.size() - 1; i-- > 0;) out = src_conj(parts[i], out);
    return out;
  }

  void gather(const TermPtr& node, const std::string& sortname, std::vector<std::string>& sorts,
              std::vector<std::pair<std::string, SrcPtr>>& feats) {
    const SortLayout& l = lt_.sort(sortname);
    const SortInfo& info = sig_.sort(sortname);
    if (node->kind == Tk::Atom) {
      if (l.arity != 0) decode_error("malformed '$'-term: " + node->fun);
    } else if (static_cast<int>(node->args.size()) != l.arity) {
      decode_error("malformed '$'-term: " + node->fun + "/" +
                   std::to_string(node->args.size()));
    }

    if (node->kind == Tk::Comp) {
      for (const auto& [f, pos] : l.feature_slots) {
        TermPtr slot = store_.deref(node->args[static_cast<size_t>(pos)]);
        if (slot->kind == Tk::Var) continue;  // uninstantiated features are omitted
        // An untouched domain-restricted slot (still the full domain, not
        // shared) carries no information either.
        std::string slotdom;
        if (slot->kind == Tk::Comp && is_domain_functor(slot->fun, &slotdom) &&
            count_[slot.get()] <= 1 && !cyclic_.count(slot.get())) {
          auto subset = decode_subset(store_, sig_, lt_, slotdom, slot);
          if (subset && *subset == sig_.domain(slotdom).full_mask()) continue;
        }
        feats.emplace_back(f, dec(slot));
      }
    }

    bool any_dim = false;
    if (node->kind == Tk::Comp) {
      for (size_t d = 0; d < l.dim_slots.size(); ++d) {
        TermPtr sub = store_.deref(node->args[static_cast<size_t>(l.dim_slots[d])]);
        if (sub->kind == Tk::Var) continue;
        std::string subsort;
        if ((sub->kind == Tk::Comp || sub->kind == Tk::Atom) &&
            is_sort_functor(sub->fun, &subsort) && sig_.sort(subsort).parent == sortname) {
          any_dim = true;
          gather(sub, subsort, sorts, feats);
        } else {
          decode_error("malformed '$'-term in dimension slot of " + info.name);
        }
      }
    }
    if (!any_dim) sorts.push_back(sortname);
  }

  SrcPtr dec_findom_unit(const TermPtr& t, const std::string& dom) {
    auto subset = decode_subset(store_, sig_, lt_, dom, t);
    if (!subset) decode_error("malformed '$'-term: " + t->fun);
    const DomainInfo& d = sig_.domain(dom);
    if (*subset == 0) decode_error("finite-domain term denotes the empty set");
    if (*subset == d.full_mask())
      return src_findom(fd_annot(fd_var(fresh_name()), dom));

    auto atom_of = [](const DomAtom& a) {
      return a.is_int ? fd_int(a.ival) : fd_atom(a.sym);
    };
    bool needs_annot = false;
    FdPtr expr;
    for (int k = 0; k < d.size(); ++k) {
      if (!((*subset >> k) & 1)) continue;
      FdPtr conj;
      for (const DomAtom& a : d.elements[static_cast<size_t>(k)]) {
        if (a.is_int || sig_.domains_of_atom(a.sym).size() != 1) needs_annot = true;
        conj = conj ? fd_bin(FdKind::And, conj, atom_of(a)) : atom_of(a);
      }
      expr = expr ? fd_bin(FdKind::Or, expr, conj) : conj;
    }
    if (needs_annot) expr = fd_annot(expr, dom);
    return src_findom(expr);
  }
};

// Convenience single-term decode.
inline SrcPtr decode(const Store& store, const TermPtr& term, const Signature& sig,
                     const LayoutTable& lt, DecodeOptions opts = {}) {
  Decoder d(store, sig, lt, std::move(opts));
  d.analyze(term);
  return d.decode(term);
}

}  // namespace fit
