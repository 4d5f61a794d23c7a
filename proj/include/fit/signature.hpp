#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fit/ast.hpp"
#include "fit/errors.hpp"

// Validated registry of sorts, features, finite domains and templates.
// Immutable after build; every later stage reads it concurrently.

namespace fit {

struct SortInfo {
  std::string name;
  std::string parent = "top";
  int parent_dim = 0;
  std::vector<std::vector<std::string>> dims;              // subsort choices per dimension
  std::vector<std::pair<std::string, std::string>> intro;  // feature -> restriction
  bool extensional = false;
  SourcePos decl_pos;
  std::string decl_file;

  // Derived during validation:
  std::vector<std::string> chain;  // ancestors, top-level sort first, self last
  std::vector<std::pair<std::string, std::string>> avail;  // inherited + own features
  // (parent sort, dimension index) -> immediate child on this sort's chain;
  // two sorts are incompatible iff they disagree on a shared key.
  std::vector<std::pair<std::pair<std::string, int>, std::string>> chain_steps;
};

struct FeatureInfo {
  std::string name;
  std::string introducer;
  std::string restriction;  // sort name, domain name, or "top"
};

struct DomainInfo {
  std::string name;
  std::vector<std::vector<DomAtom>> dims;
  std::vector<std::vector<DomAtom>> elements;  // tuples; first dimension varies fastest

  int size() const { return static_cast<int>(elements.size()); }
  uint64_t full_mask() const {
    return elements.size() >= 64 ? ~0ull : ((1ull << elements.size()) - 1);
  }
};

struct TemplateDefn {
  SrcPtr head;
  SrcPtr value;
  SourcePos pos;
  std::string file;
};

class Signature {
 public:
  bool is_sort(const std::string& s) const { return s == "top" || sorts_.count(s) > 0; }
  bool is_declared_sort(const std::string& s) const { return sorts_.count(s) > 0; }
  bool is_domain(const std::string& s) const { return domains_.count(s) > 0; }
  bool is_feature(const std::string& f) const { return features_.count(f) > 0; }

  const SortInfo& sort(const std::string& s) const {
    auto it = sorts_.find(s);
    if (it == sorts_.end())
      throw FitError(ErrorClass::Signature, "unknown sort: " + s);
    return it->second;
  }
  const FeatureInfo& feature(const std::string& f) const {
    auto it = features_.find(f);
    if (it == features_.end())
      throw FitError(ErrorClass::Signature, "undefined feature: " + f);
    return it->second;
  }
  const DomainInfo& domain(const std::string& d) const {
    auto it = domains_.find(d);
    if (it == domains_.end())
      throw FitError(ErrorClass::Signature, "unknown finite domain: " + d);
    return it->second;
  }

  const std::vector<std::string>& sort_order() const { return sort_order_; }
  const std::vector<std::string>& domain_order() const { return domain_order_; }

  const std::vector<TemplateDefn>* templates(const std::string& name, int arity) const {
    auto it = templates_.find({name, arity});
    return it == templates_.end() ? nullptr : &it->second;
  }

  // Whether two sorts can describe one object: they must not pick different
  // subsorts in the same dimension of a shared ancestor (top's implicit
  // dimension makes distinct top-level sorts exclusive).
  bool sorts_compatible(const std::string& a, const std::string& b) const {
    if (a == b) return true;
    for (const auto& [ka, va] : sort(a).chain_steps)
      for (const auto& [kb, vb] : sort(b).chain_steps)
        if (ka == kb && va != vb) return false;
    return true;
  }

  // Features available at a sort: introduced there or at any ancestor,
  // ancestor-first, declaration order within each sort.
  const std::vector<std::pair<std::string, std::string>>& available_features(
      const std::string& s) const {
    static const std::vector<std::pair<std::string, std::string>> none;
    if (s == "top") return none;
    return sort(s).avail;
  }

  // --- finite-domain semantics ---------------------------------------------

  // Set of elements denoted by an expression, as a bitmask over the domain's
  // element order.
  uint64_t element_subset(const std::string& dname, const FdPtr& e) const {
    const DomainInfo& d = domain(dname);
    switch (e->kind) {
      case FdKind::Atom:
      case FdKind::Int: {
        DomAtom a;
        a.is_int = e->kind == FdKind::Int;
        a.ival = e->ival;
        a.sym = e->name;
        uint64_t m = 0;
        for (size_t k = 0; k < d.elements.size(); ++k)
          for (const DomAtom& t : d.elements[k])
            if (t == a) m |= 1ull << k;
        if (!m)
          throw FitError(ErrorClass::Signature,
                         "'" + a.text() + "' is not an element of domain " + dname);
        return m;
      }
      case FdKind::Var:
        return d.full_mask();
      case FdKind::Annot:
        if (e->name != dname)
          throw FitError(ErrorClass::Signature, "domain annotation @" + e->name +
                                                    " conflicts with domain " + dname);
        return element_subset(dname, e->a);
      case FdKind::Neg:
        return d.full_mask() & ~element_subset(dname, e->a);
      case FdKind::And:
        return element_subset(dname, e->a) & element_subset(dname, e->b);
      case FdKind::Or:
        return element_subset(dname, e->a) | element_subset(dname, e->b);
    }
    return 0;
  }

  // Which domain an unannotated expression belongs to. An annotation wins;
  // otherwise symbol atoms that occur in exactly one domain vote. Integers
  // never vote, mirroring the rule that a bare 2 would be read as the
  // integer 2.
  std::string infer_domain(const FdPtr& e, const SourcePos& pos = {},
                           const std::string& file = {}) const {
    std::string annot, vote;
    collect_domain_hints(e, annot, vote, pos, file);
    if (!annot.empty()) return annot;
    if (!vote.empty()) return vote;
    throw FitError(ErrorClass::Signature,
                   "cannot determine the finite domain of this expression; "
                   "annotate it with @Domain",
                   pos, file);
  }

  const std::set<std::string>& domains_of_atom(const std::string& sym) const {
    static const std::set<std::string> none;
    auto it = atom_domains_.find(sym);
    return it == atom_domains_.end() ? none : it->second;
  }

  // --- construction ----------------------------------------------------------

  friend Signature build_signature(const std::vector<Item>& items);

 private:
  std::map<std::string, SortInfo> sorts_;
  std::map<std::string, FeatureInfo> features_;
  std::map<std::string, DomainInfo> domains_;
  std::map<std::pair<std::string, int>, std::vector<TemplateDefn>> templates_;
  std::vector<std::string> sort_order_;
  std::vector<std::string> domain_order_;
  std::map<std::string, std::set<std::string>> atom_domains_;  // symbol -> domains containing it

  void collect_domain_hints(const FdPtr& e, std::string& annot, std::string& vote,
                            const SourcePos& pos, const std::string& file) const {
    switch (e->kind) {
      case FdKind::Annot: {
        if (!is_domain(e->name))
          throw FitError(ErrorClass::Signature, "unknown finite domain: " + e->name, pos, file);
        if (!annot.empty() && annot != e->name)
          throw FitError(ErrorClass::Signature,
                         "conflicting domain annotations: @" + annot + " and @" + e->name, pos,
                         file);
        annot = e->name;
        collect_domain_hints(e->a, annot, vote, pos, file);
        return;
      }
      case FdKind::Atom: {
        const auto& ds = domains_of_atom(e->name);
        if (ds.size() == 1) {
          const std::string& d = *ds.begin();
          if (!vote.empty() && vote != d)
            throw FitError(ErrorClass::Signature,
                           "atoms from different domains in one expression: " + vote + " vs " + d,
                           pos, file);
          vote = d;
        } else if (ds.empty()) {
          throw FitError(ErrorClass::Signature,
                         "'" + e->name + "' is not an element of any declared finite domain", pos,
                         file);
        }
        // A symbol living in several domains neither votes nor errors here;
        // membership is checked once the domain is known.
        return;
      }
      case FdKind::Neg:
        collect_domain_hints(e->a, annot, vote, pos, file);
        return;
      case FdKind::And:
      case FdKind::Or:
        collect_domain_hints(e->a, annot, vote, pos, file);
        collect_domain_hints(e->b, annot, vote, pos, file);
        return;
      case FdKind::Int:
      case FdKind::Var:
        return;
    }
  }
};

inline Signature build_signature(const std::vector<Item>& items) {
  Signature sig;

  auto err = [](const std::string& msg, const Item& it) -> FitError {
    return FitError(ErrorClass::Signature, msg, it.pos, it.file);
  };

  auto touch_sort = [&](const std::string& name, const Item& it) -> SortInfo& {
    if (name == "top")
      throw err("'top' is implicit and may not be declared", it);
    auto [iter, inserted] = sig.sorts_.try_emplace(name);
    if (inserted) {
      iter->second.name = name;
      iter->second.decl_pos = it.pos;
      iter->second.decl_file = it.file;
      sig.sort_order_.push_back(name);
    }
    return iter->second;
  };

  std::set<std::string> has_subsort_decl;   // appeared left of '>'
  std::set<std::string> claimed_subsorts;   // appeared in some dimension list

  // Pass 1: register everything.
  for (const Item& it : items) {
    switch (it.kind) {
      case ItemKind::Subsort:
      case ItemKind::Combined: {
        SortInfo& s = touch_sort(it.name, it);
        if (has_subsort_decl.count(it.name))
          throw err("sort '" + it.name + "' must only be defined once", it);
        has_subsort_decl.insert(it.name);
        s.dims = it.dims;
        for (size_t d = 0; d < it.dims.size(); ++d) {
          for (const std::string& sub : it.dims[d]) {
            SortInfo& c = touch_sort(sub, it);
            if (claimed_subsorts.count(sub))
              throw err("sort '" + sub + "' appears in more than one subsort declaration", it);
            claimed_subsorts.insert(sub);
            c.parent = it.name;
            c.parent_dim = static_cast<int>(d);
          }
        }
        if (it.kind == ItemKind::Combined) {
          if (!s.intro.empty())
            throw err("sort '" + it.name + "' introduces features in two declarations", it);
          s.intro = it.feats;
        }
        break;
      }
      case ItemKind::Intro: {
        SortInfo& s = touch_sort(it.name, it);
        if (!s.intro.empty())
          throw err("sort '" + it.name + "' introduces features in two declarations", it);
        s.intro = it.feats;
        break;
      }
      case ItemKind::FinDomDecl: {
        if (sig.domains_.count(it.name))
          throw err("finite domain '" + it.name + "' must only be defined once", it);
        DomainInfo d;
        d.name = it.name;
        d.dims = it.domain_dims;
        // Duplicate element atoms anywhere in one domain are rejected.
        std::vector<DomAtom> seen;
        for (const auto& dim : d.dims)
          for (const DomAtom& a : dim) {
            if (std::find(seen.begin(), seen.end(), a) != seen.end())
              throw err("duplicate domain element '" + a.text() + "' in domain " + it.name, it);
            seen.push_back(a);
          }
        size_t count = 1;
        for (const auto& dim : d.dims) count *= dim.size();
        if (count > 62) throw err("finite domain '" + it.name + "' is too large (max 62 elements)", it);
        for (size_t k = 0; k < count; ++k) {
          std::vector<DomAtom> tuple;
          size_t rest = k;
          for (const auto& dim : d.dims) {
            tuple.push_back(dim[rest % dim.size()]);
            rest /= dim.size();
          }
          d.elements.push_back(std::move(tuple));
        }
        sig.domains_.emplace(it.name, std::move(d));
        sig.domain_order_.push_back(it.name);
        break;
      }
      case ItemKind::TemplateDef: {
        const SrcPtr& h = it.tmpl_head;
        // Template calls inside head patterns have no matching semantics.
        std::vector<const SourceTerm*> stack;
        for (const SrcPtr& a : h->args) stack.push_back(a.get());
        while (!stack.empty()) {
          const SourceTerm* n = stack.back();
          stack.pop_back();
          if (n->kind == SrcKind::TemplateCall)
            throw FitError(ErrorClass::Template,
                           "template calls are not allowed inside template heads", it.pos,
                           it.file);
          for (const SrcPtr& a : n->args) stack.push_back(a.get());
        }
        int arity = h->kind == SrcKind::Compound ? static_cast<int>(h->args.size()) : 0;
        sig.templates_[{h->name, arity}].push_back({h, it.tmpl_value, it.pos, it.file});
        break;
      }
      case ItemKind::Extensional:
      case ItemKind::Clause:
        break;
    }
  }

  // Pass 2: validation and derived data.
  for (const auto& [name, _] : sig.sorts_) {
    if (sig.domains_.count(name))
      throw FitError(ErrorClass::Signature,
                     "'" + name + "' is declared both as a sort and as a finite domain");
  }

  // Hierarchy must be acyclic; compute chains root-first.
  for (const std::string& name : sig.sort_order_) {
    std::vector<std::string> chain;
    std::set<std::string> seen;
    std::string cur = name;
    while (cur != "top") {
      const SortInfo& info = sig.sorts_.at(cur);
      if (seen.count(cur))
        throw FitError(ErrorClass::Signature,
                       "sort hierarchy contains a cycle through '" + cur + "'", info.decl_pos,
                       info.decl_file);
      seen.insert(cur);
      chain.push_back(cur);
      cur = info.parent;
    }
    std::reverse(chain.begin(), chain.end());
    SortInfo& s = sig.sorts_.at(name);
    s.chain = chain;
    s.chain_steps.push_back({{"top", 0}, chain.front()});
    for (size_t i = 0; i + 1 < chain.size(); ++i)
      s.chain_steps.push_back({{chain[i], sig.sorts_.at(chain[i + 1]).parent_dim}, chain[i + 1]});
  }

  // Features: one introducer each; restrictions must resolve.
  for (const std::string& name : sig.sort_order_) {
    SortInfo& s = sig.sorts_.at(name);
    for (const auto& [f, r] : s.intro) {
      auto [iter, inserted] = sig.features_.try_emplace(f);
      if (!inserted)
        throw FitError(ErrorClass::Signature,
                       "feature '" + f + "' is introduced at both '" +
                           iter->second.introducer + "' and '" + name + "'",
                       s.decl_pos, s.decl_file);
      iter->second.name = f;
      iter->second.introducer = name;
      iter->second.restriction = r;
    }
  }
  for (const auto& [f, info] : sig.features_) {
    const std::string& r = info.restriction;
    if (r != "top" && !sig.sorts_.count(r) && !sig.domains_.count(r)) {
      const SortInfo& at = sig.sorts_.at(info.introducer);
      throw FitError(ErrorClass::Signature,
                     "restriction '" + r + "' of feature '" + f +
                         "' is neither a declared sort nor a finite domain",
                     at.decl_pos, at.decl_file);
    }
  }

  // Extensionality: immediate subsorts of top only, inherited downward.
  for (const Item& it : items) {
    if (it.kind != ItemKind::Extensional) continue;
    for (const std::string& s : it.ext_sorts) {
      auto iter = sig.sorts_.find(s);
      if (iter == sig.sorts_.end()) throw err("unknown sort '" + s + "' in extensional declaration", it);
      if (iter->second.parent != "top")
        throw err("only immediate subsorts of top may be declared extensional ('" + s + "')", it);
      iter->second.extensional = true;
    }
  }
  for (const std::string& name : sig.sort_order_) {
    SortInfo& s = sig.sorts_.at(name);
    s.extensional = sig.sorts_.at(s.chain.front()).extensional;
  }

  // Available features, ancestor-first.
  for (const std::string& name : sig.sort_order_) {
    SortInfo& s = sig.sorts_.at(name);
    for (const std::string& anc : s.chain) {
      const SortInfo& a = sig.sorts_.at(anc);
      for (const auto& fr : a.intro) s.avail.push_back(fr);
    }
  }

  // Atom -> domain index for inference.
  for (const auto& [dname, d] : sig.domains_) {
    for (const auto& dim : d.dims)
      for (const DomAtom& a : dim)
        if (!a.is_int) sig.atom_domains_[a.sym].insert(dname);
  }

  return sig;
}

}  // namespace fit
