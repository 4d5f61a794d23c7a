#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fit/core_term.hpp"
#include "fit/errors.hpp"
#include "fit/signature.hpp"

// The flat-term encoding scheme. Each sort owns a reserved '$'-prefixed
// functor whose arguments are: an identity variable (intensional top-level
// sorts only), one slot per dimension, one slot per feature introduced at
// that sort. A finite domain with n elements is a functor of n+1 arguments
// where element k owns the adjacent argument pair (k, k+1); excluding an
// element unifies its pair, and the anchors 1 / 0 at the ends make the
// all-excluded term unsatisfiable.

namespace fit {

struct SortLayout {
  std::string functor;
  int arity = 0;
  int identity_slot = -1;          // -1 = absent
  std::vector<int> dim_slots;      // one per dimension, declaration order
  std::vector<std::pair<std::string, int>> feature_slots;  // own features only
};

struct DomainLayout {
  std::string functor;
  int arity = 0;  // n + 1
};

struct LayoutTable {
  std::map<std::string, SortLayout> sorts;
  std::map<std::string, DomainLayout> domains;

  const SortLayout& sort(const std::string& s) const {
    auto it = sorts.find(s);
    if (it == sorts.end()) throw FitError(ErrorClass::Signature, "unknown sort: " + s);
    return it->second;
  }
  const DomainLayout& domain(const std::string& d) const {
    auto it = domains.find(d);
    if (it == domains.end()) throw FitError(ErrorClass::Signature, "unknown finite domain: " + d);
    return it->second;
  }

  // Reverse maps for decoding.
  std::map<std::string, std::string> sort_of_functor;
  std::map<std::string, std::string> domain_of_functor;

  int feature_slot(const std::string& sort, const std::string& feature) const {
    for (const auto& [f, pos] : this->sort(sort).feature_slots)
      if (f == feature) return pos;
    throw FitError(ErrorClass::Signature,
                   "feature '" + feature + "' has no slot at sort '" + sort + "'");
  }
};

inline LayoutTable compute_layouts(const Signature& sig) {
  LayoutTable t;
  for (const std::string& name : sig.sort_order()) {
    const SortInfo& s = sig.sort(name);
    SortLayout l;
    l.functor = "$" + name;
    int pos = 0;
    if (s.parent == "top" && !s.extensional) l.identity_slot = pos++;
    for (size_t d = 0; d < s.dims.size(); ++d) l.dim_slots.push_back(pos++);
    for (const auto& [f, r] : s.intro) l.feature_slots.emplace_back(f, pos++);
    l.arity = pos;
    t.sort_of_functor[l.functor] = name;
    t.sorts.emplace(name, std::move(l));
  }
  for (const std::string& name : sig.domain_order()) {
    const DomainInfo& d = sig.domain(name);
    DomainLayout l;
    l.functor = "$" + name;
    l.arity = d.size() + 1;
    t.domain_of_functor[l.functor] = name;
    t.domains.emplace(name, std::move(l));
  }
  return t;
}

// Encodes a non-empty subset of a domain's elements. Excluded elements have
// their adjacent argument pair unified by construction; a run of exclusions
// touching an anchor is collapsed onto that anchor.
inline TermPtr encode_subset(Store& store, const Signature& sig, const LayoutTable& lt,
                             const std::string& dname, uint64_t subset,
                             SourcePos pos = {}, const std::string& file = {}) {
  const DomainInfo& d = sig.domain(dname);
  const DomainLayout& l = lt.domain(dname);
  subset &= d.full_mask();
  if (subset == 0)
    throw FitError(ErrorClass::EmptyDomain,
                   "finite-domain description denotes the empty set over domain " + dname, pos,
                   file);
  int n = d.size();
  int last_included = -1;
  for (int k = 0; k < n; ++k)
    if ((subset >> k) & 1) last_included = k;

  // Argument positions form runs: boundary b starts a new run iff element
  // b-1 is included. The run holding position 0 is the 1 anchor, the run
  // holding position n is the 0 anchor, every other run is one fresh var.
  std::vector<TermPtr> args(static_cast<size_t>(n) + 1);
  TermPtr rep;
  for (int b = 0; b <= n; ++b) {
    bool starts_run = (b == 0) || ((subset >> (b - 1)) & 1);
    if (starts_run) {
      if (b == 0)
        rep = mk_int(1);
      else if (b > last_included)
        rep = mk_int(0);
      else
        rep = store.fresh();
    }
    args[static_cast<size_t>(b)] = rep;
  }
  return mk_comp(l.functor, std::move(args));
}

inline TermPtr encode_full_domain(Store& store, const Signature& sig, const LayoutTable& lt,
                                  const std::string& dname) {
  return encode_subset(store, sig, lt, dname, sig.domain(dname).full_mask());
}

// Reads back which elements remain: element k is excluded iff its argument
// pair has been unified (same variable, or equal constants).
inline std::optional<uint64_t> decode_subset(const Store& store, const Signature& sig,
                                             const LayoutTable& lt, const std::string& dname,
                                             const TermPtr& term) {
  const DomainInfo& d = sig.domain(dname);
  const DomainLayout& l = lt.domain(dname);
  TermPtr t = store.deref(term);
  if (t->kind != Tk::Comp || t->fun != l.functor ||
      static_cast<int>(t->args.size()) != l.arity)
    return std::nullopt;
  auto same = [&](const TermPtr& a, const TermPtr& b) {
    TermPtr x = store.deref(a), y = store.deref(b);
    if (x.get() == y.get()) return true;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
      case Tk::Var: return x->var == y->var;
      case Tk::Atom: return x->fun == y->fun;
      case Tk::Num: return x->num == y->num;
      case Tk::Comp: return false;
    }
    return false;
  };
  uint64_t subset = 0;
  for (int k = 0; k < d.size(); ++k)
    if (!same(t->args[static_cast<size_t>(k)], t->args[static_cast<size_t>(k) + 1]))
      subset |= 1ull << k;
  return subset;
}

// The most general term of a sort: every ancestor's dimension slot is
// instantiated down to the sort, everything else is fresh. Feature slots
// restricted to a finite domain are pre-filled with the full-domain encoding
// (domains cannot recurse, so this stays finite). skeleton(top) is a fresh
// variable.
struct Skeleton {
  TermPtr root;  // the whole encoded term
  TermPtr self;  // the node whose functor belongs to the requested sort
};

inline Skeleton skeleton_ex(Store& store, const Signature& sig, const LayoutTable& lt,
                            const std::string& sortname) {
  if (sortname == "top") {
    TermPtr v = store.fresh();
    return {v, v};
  }
  const SortInfo& s = sig.sort(sortname);

  auto build_node = [&](const std::string& name, TermPtr child_dim,
                        int child_dim_index) -> TermPtr {
    const SortInfo& info = sig.sort(name);
    const SortLayout& l = lt.sort(name);
    std::vector<TermPtr> args(static_cast<size_t>(l.arity));
    if (l.identity_slot >= 0) args[static_cast<size_t>(l.identity_slot)] = store.fresh();
    for (size_t d = 0; d < l.dim_slots.size(); ++d) {
      if (child_dim && static_cast<int>(d) == child_dim_index)
        args[static_cast<size_t>(l.dim_slots[d])] = child_dim;
      else
        args[static_cast<size_t>(l.dim_slots[d])] = store.fresh();
    }
    for (size_t i = 0; i < l.feature_slots.size(); ++i) {
      const std::string& restr = info.intro[i].second;
      TermPtr slot;
      if (sig.is_domain(restr))
        slot = encode_full_domain(store, sig, lt, restr);
      else
        slot = store.fresh();
      args[static_cast<size_t>(l.feature_slots[i].second)] = slot;
    }
    return mk_comp(l.functor, std::move(args));
  };

  TermPtr node = build_node(sortname, nullptr, -1);
  TermPtr self = node;
  // Wrap upwards along the ancestry.
  const std::vector<std::string>& chain = s.chain;
  for (size_t i = chain.size(); i-- > 1;) {
    const SortInfo& child = sig.sort(chain[i]);
    node = build_node(chain[i - 1], node, child.parent_dim);
  }
  return {node, self};
}

inline TermPtr skeleton(Store& store, const Signature& sig, const LayoutTable& lt,
                        const std::string& sortname) {
  return skeleton_ex(store, sig, lt, sortname).root;
}

}  // namespace fit
