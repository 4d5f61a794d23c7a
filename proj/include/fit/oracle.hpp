#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fit/ast.hpp"
#include "fit/signature.hpp"

// Brute-force reference semantics used to generate expected values and drive
// property tests: an explicit-graph feature-structure unifier, subset
// semantics for finite domains, and exhaustive feature-path enumeration.
// Deliberately shares no code with the layout/compile/engine pipeline; only
// the validated Signature is common ground. Desk-scale performance is fine.

namespace fit::oracle {

struct UnifyFail {};

struct Node {
  std::vector<std::string> sorts;    // asserted sorts, unreduced
  std::map<std::string, int> feats;  // feature -> node id

  enum class PK { None, Atom, Num, Comp };
  PK pk = PK::None;
  std::string fun;
  long long num = 0;
  std::vector<int> args;

  bool has_dom = false;
  std::string domain;
  uint64_t subset = 0;

  bool open() const {
    return pk == PK::None && !has_dom && sorts.empty() && feats.empty();
  }
};

class FeatureGraph {
 public:
  const Signature* sig = nullptr;

  int add_node() {
    nodes_.push_back({});
    uf_.push_back(static_cast<int>(uf_.size()));
    return static_cast<int>(uf_.size()) - 1;
  }
  int find(int n) const {
    while (uf_[static_cast<size_t>(n)] != n) n = uf_[static_cast<size_t>(n)];
    return n;
  }
  Node& at(int n) { return nodes_[static_cast<size_t>(find(n))]; }
  const Node& at(int n) const { return nodes_[static_cast<size_t>(find(n))]; }
  size_t size() const { return nodes_.size(); }

  // Two sorts are compatible unless their root-paths pick different subsorts
  // in the same dimension of a shared ancestor. The implicit top dimension
  // makes distinct top-level sorts mutually exclusive.
  static bool sorts_compatible(const Signature& sig, const std::string& a,
                               const std::string& b) {
    if (a == b) return true;
    const auto& sa = sig.sort(a).chain_steps;
    const auto& sb = sig.sort(b).chain_steps;
    for (const auto& [ka, va] : sa)
      for (const auto& [kb, vb] : sb)
        if (ka == kb && va != vb) return false;
    return true;
  }

  // Node-merging unification; throws UnifyFail and leaves the graph partly
  // merged (callers copy first when they need rollback).
  void unify(int a, int b) {
    std::vector<std::pair<int, int>> pending{{a, b}};
    while (!pending.empty()) {
      auto [x, y] = pending.back();
      pending.pop_back();
      int rx = find(x), ry = find(y);
      if (rx == ry) continue;
      Node& nx = nodes_[static_cast<size_t>(rx)];
      Node& ny = nodes_[static_cast<size_t>(ry)];
      uf_[static_cast<size_t>(ry)] = rx;

      for (const std::string& s : ny.sorts) {
        for (const std::string& t : nx.sorts)
          if (!sorts_compatible(*sig, s, t)) throw UnifyFail{};
        if (std::find(nx.sorts.begin(), nx.sorts.end(), s) == nx.sorts.end())
          nx.sorts.push_back(s);
      }

      if (ny.pk != Node::PK::None) {
        if (nx.pk == Node::PK::None) {
          nx.pk = ny.pk;
          nx.fun = ny.fun;
          nx.num = ny.num;
          nx.args = ny.args;
        } else {
          if (nx.pk != ny.pk) throw UnifyFail{};
          switch (nx.pk) {
            case Node::PK::Atom:
              if (nx.fun != ny.fun) throw UnifyFail{};
              break;
            case Node::PK::Num:
              if (nx.num != ny.num) throw UnifyFail{};
              break;
            case Node::PK::Comp:
              if (nx.fun != ny.fun || nx.args.size() != ny.args.size()) throw UnifyFail{};
              for (size_t i = 0; i < nx.args.size(); ++i)
                pending.emplace_back(nx.args[i], ny.args[i]);
              break;
            case Node::PK::None:
              break;
          }
        }
      }

      if (ny.has_dom) {
        if (nx.has_dom) {
          if (nx.domain != ny.domain) throw UnifyFail{};
          nx.subset &= ny.subset;
          if (nx.subset == 0) throw UnifyFail{};
        } else {
          nx.has_dom = true;
          nx.domain = ny.domain;
          nx.subset = ny.subset;
        }
      }

      for (const auto& [f, child] : ny.feats) {
        auto it = nx.feats.find(f);
        if (it == nx.feats.end())
          nx.feats[f] = child;
        else
          pending.emplace_back(it->second, child);
      }

      // A plain term is neither sorted, nor findom-valued, nor feature-bearing.
      if (nx.pk != Node::PK::None && (!nx.sorts.empty() || nx.has_dom || !nx.feats.empty()))
        throw UnifyFail{};
      if (nx.has_dom && (!nx.sorts.empty() || !nx.feats.empty())) throw UnifyFail{};
    }
  }

 private:
  std::vector<Node> nodes_;
  std::vector<int> uf_;
};

// Unifies two rooted graphs (already living in one FeatureGraph arena).
inline bool fs_unify(FeatureGraph& g, int root1, int root2) {
  try {
    g.unify(root1, root2);
    return true;
  } catch (const UnifyFail&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Building graphs from descriptions.

class GraphBuilder {
 public:
  GraphBuilder(const Signature& sig, FeatureGraph& g) : sig_(sig), g_(g) { g_.sig = &sig; }

  // Throws UnifyFail on inconsistent descriptions; FitError on unknown
  // names, exactly like the compiler.
  int build(const SrcPtr& t, const std::string& domain_ctx = {},
            const std::string& restr_ctx = {}, const std::vector<std::string>& conj_sorts = {}) {
    switch (t->kind) {
      case SrcKind::Var: {
        if (t->name == "_") return g_.add_node();
        auto it = vars_.find(t->name);
        if (it == vars_.end()) it = vars_.emplace(t->name, g_.add_node()).first;
        return it->second;
      }
      case SrcKind::Int: {
        if (!domain_ctx.empty())
          return findom_node(domain_ctx, sig_.element_subset(domain_ctx, fd_int(t->ival)));
        int n = g_.add_node();
        g_.at(n).pk = Node::PK::Num;
        g_.at(n).num = t->ival;
        return n;
      }
      case SrcKind::Atom: {
        if (!domain_ctx.empty() && atom_in_domain(domain_ctx, t->name))
          return findom_node(domain_ctx, sig_.element_subset(domain_ctx, fd_atom(t->name)));
        int n = g_.add_node();
        g_.at(n).pk = Node::PK::Atom;
        g_.at(n).fun = t->name;
        return n;
      }
      case SrcKind::Compound: {
        std::vector<int> args;
        for (const SrcPtr& a : t->args) args.push_back(build(a));
        int n = g_.add_node();
        g_.at(n).pk = Node::PK::Comp;
        g_.at(n).fun = t->name;
        g_.at(n).args = std::move(args);
        return n;
      }
      case SrcKind::SortRef: {
        int n = g_.add_node();
        assert_sort(n, t->name);
        return n;
      }
      case SrcKind::FeatVal: {
        const FeatureInfo& fi = sig_.feature(t->name);
        int parent = g_.add_node();
        assert_sort(parent, fi.introducer);
        int child = build_restricted(t->args[0], fi.restriction);
        g_.at(parent).feats[t->name] = child;
        return parent;
      }
      case SrcKind::Conj: {
        std::vector<SrcPtr> members;
        flatten_conj(t, members);
        std::vector<std::string> sorts;
        for (const SrcPtr& m : members)
          if (m->kind == SrcKind::SortRef) sorts.push_back(m->name);
        int first = -1;
        for (const SrcPtr& m : members) {
          int n = build(m, domain_ctx, restr_ctx, sorts);
          if (first < 0)
            first = n;
          else
            g_.unify(first, n);
        }
        return first;
      }
      case SrcKind::FinDom: {
        std::string dname = !domain_ctx.empty() ? domain_ctx : sig_.infer_domain(t->fd);
        uint64_t subset = sig_.element_subset(dname, t->fd);
        if (subset == 0) throw UnifyFail{};
        int n = findom_node(dname, subset);
        std::set<std::string> fdvars;
        collect_fd_vars(t->fd, fdvars);
        for (const std::string& v : fdvars) {
          auto it = vars_.find(v);
          if (it == vars_.end()) it = vars_.emplace(v, g_.add_node()).first;
          g_.unify(it->second, n);
        }
        return n;
      }
      case SrcKind::Search: {
        std::string start = t->start;
        if (start.empty()) {
          if (!restr_ctx.empty())
            start = restr_ctx;
          else if (!conj_sorts.empty())
            start = conj_sorts.front();
          else
            throw FitError(ErrorClass::Search, "search has no inferable start sort", t->pos);
        }
        auto paths = enumerate_paths(sig_, start, t->name);
        if (paths.size() != 1)
          throw FitError(ErrorClass::Search, "search is not uniquely resolvable", t->pos);
        SrcPtr chain = t->args[0];
        const auto& p = paths.front();
        for (auto it = p.rbegin(); it != p.rend(); ++it) chain = src_featval(*it, chain);
        if (!t->start.empty()) chain = src_conj(src_sort(start), chain);
        return build(chain, domain_ctx, restr_ctx, conj_sorts);
      }
      default:
        throw FitError(ErrorClass::Syntax, "oracle cannot interpret this term form", t->pos);
    }
  }

  // All repeat-free paths from a sort to a feature, sorted lexicographically.
  // Sort visiting is subsumption-aware, mirroring the compiler's rule.
  static std::vector<std::vector<std::string>> enumerate_paths(const Signature& sig,
                                                               const std::string& start,
                                                               const std::string& feature) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> path;
    std::vector<std::string> sorts_seen{start};
    std::set<std::string> feats_seen;
    dfs_paths(sig, start, feature, path, sorts_seen, feats_seen, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  const Signature& sig_;
  FeatureGraph& g_;
  std::map<std::string, int> vars_;

  static void dfs_paths(const Signature& sig, const std::string& sort,
                        const std::string& target, std::vector<std::string>& path,
                        std::vector<std::string>& sorts_seen, std::set<std::string>& feats_seen,
                        std::vector<std::vector<std::string>>& out) {
    for (const auto& [f, r] : sig.available_features(sort)) {
      if (feats_seen.count(f)) continue;
      if (f == target) {
        path.push_back(f);
        out.push_back(path);
        path.pop_back();
        continue;
      }
      if (!sig.is_declared_sort(r)) continue;
      bool blocked = false;
      for (const std::string& v : sorts_seen)
        if (FeatureGraph::sorts_compatible(sig, r, v)) {
          blocked = true;
          break;
        }
      if (blocked) continue;
      path.push_back(f);
      feats_seen.insert(f);
      sorts_seen.push_back(r);
      dfs_paths(sig, r, target, path, sorts_seen, feats_seen, out);
      sorts_seen.pop_back();
      feats_seen.erase(f);
      path.pop_back();
    }
  }

  static void collect_fd_vars(const FdPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == FdKind::Var) out.insert(e->name);
    collect_fd_vars(e->a, out);
    collect_fd_vars(e->b, out);
  }

  bool atom_in_domain(const std::string& dname, const std::string& sym) const {
    for (const auto& dim : sig_.domain(dname).dims)
      for (const DomAtom& a : dim)
        if (!a.is_int && a.sym == sym) return true;
    return false;
  }

  int findom_node(const std::string& dname, uint64_t subset) {
    if (subset == 0) throw UnifyFail{};
    int n = g_.add_node();
    g_.at(n).has_dom = true;
    g_.at(n).domain = dname;
    g_.at(n).subset = subset;
    return n;
  }

  void assert_sort(int n, const std::string& s) {
    if (!sig_.is_declared_sort(s))
      throw FitError(ErrorClass::Signature, "undefined sort: " + s);
    Node& node = g_.at(n);
    if (node.pk != Node::PK::None || node.has_dom) throw UnifyFail{};  // not a sorted object
    for (const std::string& t : node.sorts)
      if (!FeatureGraph::sorts_compatible(sig_, s, t)) throw UnifyFail{};
    if (std::find(node.sorts.begin(), node.sorts.end(), s) == node.sorts.end())
      node.sorts.push_back(s);
  }

  int build_restricted(const SrcPtr& v, const std::string& restriction) {
    std::string dom_ctx, restr_ctx;
    if (sig_.is_domain(restriction)) dom_ctx = restriction;
    if (sig_.is_declared_sort(restriction)) restr_ctx = restriction;
    int child = build(v, dom_ctx, restr_ctx);
    if (!restr_ctx.empty()) assert_sort(child, restr_ctx);
    if (!dom_ctx.empty()) {
      int full = findom_node(dom_ctx, sig_.domain(dom_ctx).full_mask());
      g_.unify(child, full);
    }
    return child;
  }
};

inline std::vector<std::vector<std::string>> enumerate_paths(const Signature& sig,
                                                             const std::string& start,
                                                             const std::string& feature) {
  return GraphBuilder::enumerate_paths(sig, start, feature);
}

// All 2^n subsets of a domain, driving the exhaustive encoding test.
inline std::vector<uint64_t> findom_sets(const DomainInfo& d) {
  std::vector<uint64_t> out;
  uint64_t n = 1ull << d.size();
  out.reserve(static_cast<size_t>(n));
  for (uint64_t m = 0; m < n; ++m) out.push_back(m);
  return out;
}

// ---------------------------------------------------------------------------
// Disjunction expansion, oracle-side (independent little walker).

namespace detail {
inline SrcPtr pick_branch(const SrcPtr& t, const SourceTerm* target, int branch) {
  if (t.get() == target) return t->args[static_cast<size_t>(branch)];
  if (t->kind == SrcKind::Quote) return t;
  if (t->args.empty()) return t;
  auto n = std::make_shared<SourceTerm>(*t);
  for (SrcPtr& a : n->args) a = pick_branch(a, target, branch);
  return n;
}
inline const SourceTerm* first_disj(const SrcPtr& t) {
  if (t->kind == SrcKind::Quote) return nullptr;
  if (t->kind == SrcKind::Disj) return t.get();
  for (const SrcPtr& a : t->args)
    if (const SourceTerm* d = first_disj(a)) return d;
  return nullptr;
}
}  // namespace detail

inline void expand_disj(const SrcPtr& t, std::vector<SrcPtr>& out) {
  const SourceTerm* d = detail::first_disj(t);
  if (!d) {
    out.push_back(t);
    return;
  }
  for (int branch = 0; branch < 2; ++branch)
    expand_disj(detail::pick_branch(t, d, branch), out);
}

// How many disjunct combinations of a clause are consistent, judged purely by
// graph unification.
inline int count_consistent_combinations(const SrcPtr& head, const std::vector<SrcPtr>& body,
                                         const Signature& sig) {
  SrcPtr whole = head;
  for (const SrcPtr& g : body) whole = src_conj(whole, g);
  std::vector<SrcPtr> combos;
  expand_disj(whole, combos);
  int ok = 0;
  for (const SrcPtr& c : combos) {
    FeatureGraph g;
    GraphBuilder b(sig, g);
    try {
      // Arguments of the head/goals are the descriptions; the predicate
      // wrapper itself is a plain term and builds fine.
      b.build(c);
      ++ok;
    } catch (const UnifyFail&) {
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Display-level graph equivalence: same specific sorts, same plain values,
// same finite-domain subsets, same feature edges and the same coreference
// classes over content-bearing nodes. Feature edges to contentless targets
// (pure variables, or an unshared full domain) are invisible to the decoder
// and are canonicalized away on both sides before comparison.

class IsoChecker {
 public:
  IsoChecker(const FeatureGraph& g1, const FeatureGraph& g2, const Signature& sig)
      : g1_(g1), g2_(g2), sig_(sig) {}

  bool equivalent(int r1, int r2) {
    auto k1 = canonical_edges(g1_, r1);
    auto k2 = canonical_edges(g2_, r2);
    return bisim(r1, r2, k1, k2);
  }

 private:
  const FeatureGraph& g1_;
  const FeatureGraph& g2_;
  const Signature& sig_;
  std::map<int, int> m12_, m21_;

  using EdgeSet = std::map<int, std::map<std::string, int>>;  // node -> kept feats

  EdgeSet canonical_edges(const FeatureGraph& g, int root) const {
    // reference counts over reachable reps
    std::map<int, int> refs;
    std::vector<int> work{g.find(root)};
    refs[g.find(root)] = 1;
    std::set<int> seen;
    while (!work.empty()) {
      int n = work.back();
      work.pop_back();
      if (seen.count(n)) continue;
      seen.insert(n);
      const Node& node = g.at(n);
      for (const auto& [f, c] : node.feats) {
        int rc = g.find(c);
        ++refs[rc];
        work.push_back(rc);
      }
      for (int a : node.args) {
        int ra = g.find(a);
        ++refs[ra];
        work.push_back(ra);
      }
    }
    EdgeSet out;
    for (int n : seen) {
      std::map<std::string, int> kept;
      for (const auto& [f, c] : g.at(n).feats) {
        int rc = g.find(c);
        const Node& cn = g.at(rc);
        bool drop = false;
        if (cn.open()) drop = true;
        else if (cn.has_dom && cn.sorts.empty() && cn.feats.empty() &&
                 cn.pk == Node::PK::None &&
                 cn.subset == sig_.domain(cn.domain).full_mask() && refs[rc] <= 1)
          drop = true;
        if (!drop) kept[f] = rc;
      }
      out[n] = std::move(kept);
    }
    return out;
  }

  std::vector<std::string> specific_sorts(const FeatureGraph& g, int n) const {
    const Node& node = g.at(n);
    std::vector<std::string> out;
    for (const std::string& s : node.sorts) {
      bool dominated = false;
      for (const std::string& t : node.sorts) {
        if (t == s) continue;
        const auto& chain = sig_.sort(t).chain;
        if (std::find(chain.begin(), chain.end(), s) != chain.end() && t != s) {
          dominated = true;
          break;
        }
      }
      if (!dominated) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool bisim(int a, int b, const EdgeSet& k1, const EdgeSet& k2) {
    int ra = g1_.find(a), rb = g2_.find(b);
    auto ia = m12_.find(ra);
    auto ib = m21_.find(rb);
    if (ia != m12_.end() || ib != m21_.end())
      return ia != m12_.end() && ib != m21_.end() && ia->second == rb && ib->second == ra;
    m12_[ra] = rb;
    m21_[rb] = ra;

    const Node& na = g1_.at(ra);
    const Node& nb = g2_.at(rb);
    if (specific_sorts(g1_, ra) != specific_sorts(g2_, rb)) return false;
    if (na.pk != nb.pk) return false;
    if (na.pk == Node::PK::Atom && na.fun != nb.fun) return false;
    if (na.pk == Node::PK::Num && na.num != nb.num) return false;
    if (na.pk == Node::PK::Comp &&
        (na.fun != nb.fun || na.args.size() != nb.args.size()))
      return false;
    if (na.has_dom != nb.has_dom) return false;
    if (na.has_dom && (na.domain != nb.domain || na.subset != nb.subset)) return false;

    const auto& ea = k1.at(ra);
    const auto& eb = k2.at(rb);
    if (ea.size() != eb.size()) return false;
    for (const auto& [f, ca] : ea) {
      auto it = eb.find(f);
      if (it == eb.end()) return false;
      if (!bisim(ca, it->second, k1, k2)) return false;
    }
    for (size_t i = 0; i < na.args.size(); ++i)
      if (!bisim(na.args[i], nb.args[i], k1, k2)) return false;
    return true;
  }
};

inline bool graphs_equivalent(const FeatureGraph& g1, int r1, const FeatureGraph& g2, int r2,
                              const Signature& sig) {
  IsoChecker c(g1, g2, sig);
  return c.equivalent(r1, r2);
}

}  // namespace fit::oracle
