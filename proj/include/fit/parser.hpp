#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fit/ast.hpp"
#include "fit/lexer.hpp"

// Operator-precedence parser for the surface language. The operator table is
// fixed; user programs cannot change it. Lower precedence binds tighter.
//
//   1200  :- :=           xfx        1160  intro         xfx
//   1150  > fin_dom       xfx        1150  extensional   prefix
//   1000  ,               xfy         745  =             xfx
//    740  or              xfy         730  &             xfy
//    700  >>>             prefix + infix (atom left, value parses at 700)
//    650  !               infix (atom left, value parses at 700)
//    600  ~               prefix      550  < ` `` @      prefix
//    400  *               yfx         200  : (pairs)     xfy
//    150  @ (annotation)  xfx, primaries only
//
// The value operand of ! and >>> admits precedence 700 so feature paths can
// continue with a search, as in  dtrs!head_dtr!>>>head!X.

namespace fit {

class Parser {
 public:
  Parser(std::string_view src, std::string file = {})
      : file_(std::move(file)) {
    Lexer lx(src, file_);
    toks_ = lx.tokenize();
  }

  std::vector<Item> parse_program() {
    std::vector<Item> items;
    while (!at(Tok::Eof)) {
      SrcPtr t = parse_term(1200);
      expect_end();
      items.push_back(classify_item(t));
    }
    return items;
  }

  std::vector<SrcPtr> parse_query() {
    if (at(Tok::Eof)) fail("empty query", cur().pos);
    SrcPtr t = parse_term(1200);
    expect_end();
    if (!at(Tok::Eof)) fail("single query expected", cur().pos);
    if (t->kind == SrcKind::Compound && t->name == "?-" && t->args.size() == 1)
      t = t->args[0];
    std::vector<SrcPtr> goals;
    flatten_goals(t, goals);
    if (goals.empty()) fail("empty query", t->pos);
    return goals;
  }

  // Parses a single term followed by '.', mostly for tests.
  SrcPtr parse_single_term() {
    SrcPtr t = parse_term(1200);
    expect_end();
    return t;
  }

 private:
  struct InfixOp {
    int prec;
    int left_max;
    int right_max;
  };
  struct PrefixOp {
    int prec;
    int arg_max;
  };

  std::vector<Token> toks_;
  size_t p_ = 0;
  std::string file_;
  int depth_ = 0;

  // Keeps degenerate inputs from exhausting the C stack, with headroom for
  // instrumented builds whose frames are much larger; real programs are
  // nowhere near this (lists parse iteratively and do not count).
  static constexpr int kMaxDepth = 200;

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth)
        throw FitError(ErrorClass::Syntax, "expression nested too deeply", p.cur().pos, p.file_);
    }
    ~DepthGuard() { --p.depth_; }
  };

  static const std::map<std::string, InfixOp>& infix_table() {
    static const std::map<std::string, InfixOp> t = {
        {":-", {1200, 1199, 1199}}, {":=", {1200, 1199, 1199}},
        {"intro", {1160, 1159, 1159}},
        {">", {1150, 1149, 1149}},  {"fin_dom", {1150, 1149, 1149}},
        {",", {1000, 999, 1000}},
        {"=", {745, 744, 744}},
        {"or", {740, 739, 740}},    {"&", {730, 729, 730}},
        {">>>", {700, 0, 700}},     {"!", {650, 0, 700}},
        {"*", {400, 400, 399}},     {":", {200, 199, 200}},
        {"@", {150, 0, 0}},
    };
    return t;
  }
  static const std::map<std::string, PrefixOp>& prefix_table() {
    static const std::map<std::string, PrefixOp> t = {
        {"?-", {1200, 1199}}, {"extensional", {1150, 1149}},
        {">>>", {700, 700}},  {"~", {600, 600}},
        {"<", {550, 0}},      {"`", {550, 550}},
        {"``", {550, 550}},   {"@", {550, 550}},
        {"-", {200, 0}},
    };
    return t;
  }

  const Token& cur() const { return toks_[p_]; }
  const Token& peek(size_t k = 1) const {
    size_t i = p_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }
  Token take() { return toks_[p_++]; }

  [[noreturn]] void fail(const std::string& msg, SourcePos pos) const {
    throw FitError(ErrorClass::Syntax, msg, pos, file_);
  }

  void expect_end() {
    if (at(Tok::End)) {
      take();
      return;
    }
    if (at(Tok::Eof)) fail("unterminated clause (missing '.')", cur().pos);
    fail("unexpected '" + cur().text + "'", cur().pos);
  }

  static void flatten_goals(const SrcPtr& t, std::vector<SrcPtr>& out) {
    if (t->kind == SrcKind::Compound && t->name == "," && t->args.size() == 2) {
      flatten_goals(t->args[0], out);
      flatten_goals(t->args[1], out);
    } else {
      out.push_back(t);
    }
  }

  // A token that may begin a term.
  bool starts_term(const Token& t) const {
    switch (t.kind) {
      case Tok::Atom:
      case Tok::Var:
      case Tok::Int:
      case Tok::LParen:
      case Tok::LBracket:
        return true;
      case Tok::Sym:
        return prefix_table().count(t.text) > 0;
      default:
        return false;
    }
  }

  bool is_operator_token(const Token& t, const std::string& name) const {
    if (t.kind == Tok::Sym) return t.text == name;
    if (t.kind == Tok::Atom && !t.quoted) return t.text == name;
    return false;
  }

  // --- finite-domain classification ---------------------------------------

  static bool fd_convertible(const SrcPtr& t) {
    return t->kind == SrcKind::Atom || t->kind == SrcKind::Int || t->kind == SrcKind::FinDom;
  }
  static FdPtr to_fd(const SrcPtr& t) {
    switch (t->kind) {
      case SrcKind::Atom: return fd_atom(t->name);
      case SrcKind::Int: return fd_int(t->ival);
      case SrcKind::FinDom: return t->fd;
      default: return nullptr;
    }
  }

  // --- terms ----------------------------------------------------------------

  SrcPtr parse_term(int maxp) {
    DepthGuard guard(*this);
    SrcPtr left = parse_primary_or_prefix();
    int left_cp = 0;  // precedence of the operator that built `left`

    for (;;) {
      const Token& t = cur();
      std::string opname;
      if (t.kind == Tok::Sym)
        opname = t.text;
      else if (t.kind == Tok::Atom && !t.quoted && infix_table().count(t.text))
        opname = t.text;
      else if (t.kind == Tok::Comma)
        opname = ",";
      else
        break;

      auto it = infix_table().find(opname);
      if (it == infix_table().end()) break;
      const InfixOp& op = it->second;
      if (op.prec > maxp || left_cp > op.left_max) break;

      SourcePos pos = t.pos;
      take();
      left = build_infix(opname, left, pos, op);
      left_cp = op.prec;
    }
    return left;
  }

  SrcPtr build_infix(const std::string& opname, SrcPtr l, SourcePos pos, const InfixOp& op) {
    if (opname == "!") {
      if (l->kind != SrcKind::Atom) fail("feature name expected before '!'", pos);
      SrcPtr v = parse_term(op.right_max);
      return src_featval(l->name, v, pos);
    }
    if (opname == ">>>") {
      if (l->kind != SrcKind::Atom) fail("sort name expected before '>>>'", pos);
      SrcPtr r = parse_term(op.right_max);
      if (r->kind != SrcKind::FeatVal)
        fail("'>>>' must be followed by Feature!Value", pos);
      return src_search(l->name, r->name, r->args[0], pos);
    }
    if (opname == "@") {
      FdPtr fl;
      if (l->kind == SrcKind::Var)
        fl = fd_var(l->name);
      else if (fd_convertible(l))
        fl = to_fd(l);
      else
        fail("finite-domain expression expected before '@'", pos);
      SrcPtr r = parse_term(op.right_max);
      if (r->kind != SrcKind::Atom) fail("finite-domain name expected after '@'", pos);
      return src_findom(fd_annot(fl, r->name), pos);
    }

    SrcPtr r = parse_term(op.right_max);
    if (opname == "&") {
      if (fd_convertible(l) && fd_convertible(r))
        return src_findom(fd_bin(FdKind::And, to_fd(l), to_fd(r)), pos);
      return src_conj(l, r, pos);
    }
    if (opname == "or") {
      if (fd_convertible(l) && fd_convertible(r))
        return src_findom(fd_bin(FdKind::Or, to_fd(l), to_fd(r)), pos);
      return src_disj(l, r, pos);
    }
    return src_compound(opname, {l, r}, pos);
  }

  SrcPtr parse_primary_or_prefix() {
    const Token& t = cur();
    SourcePos pos = t.pos;
    switch (t.kind) {
      case Tok::Int: {
        Token tk = take();
        return src_int(tk.ival, pos);
      }
      case Tok::Var: {
        Token tk = take();
        return src_var(tk.text, pos);
      }
      case Tok::LParen: {
        take();
        SrcPtr inner = parse_term(1200);
        if (!at(Tok::RParen)) fail("expected ')'", cur().pos);
        take();
        return inner;
      }
      case Tok::LBracket:
        return parse_list();
      case Tok::Atom: {
        Token tk = take();
        if (at(Tok::LParen)) return parse_compound(tk.text, pos);
        if (!tk.quoted) {
          auto pit = prefix_table().find(tk.text);
          if (pit != prefix_table().end() && starts_term(cur()))
            return build_prefix(tk.text, pos, pit->second);
        }
        return src_atom(tk.text, pos);
      }
      case Tok::Sym: {
        auto pit = prefix_table().find(t.text);
        if (pit == prefix_table().end()) fail("unexpected '" + t.text + "'", pos);
        Token tk = take();
        return build_prefix(tk.text, pos, pit->second);
      }
      default:
        fail("unexpected '" + t.text + "'", pos);
    }
  }

  SrcPtr build_prefix(const std::string& opname, SourcePos pos, const PrefixOp& op) {
    if (opname == "<") {
      SrcPtr a = parse_term(op.arg_max);
      if (a->kind != SrcKind::Atom) fail("sort name expected after '<'", pos);
      return src_sort(a->name, pos);
    }
    if (opname == "`" || opname == "``") {
      SrcPtr a = parse_term(op.arg_max);
      return src_quote(a, opname == "``", pos);
    }
    if (opname == "@") {
      SrcPtr a = parse_term(op.arg_max);
      if (a->kind == SrcKind::Atom) return src_template(a->name, {}, pos);
      if (a->kind == SrcKind::Compound) return src_template(a->name, a->args, pos);
      fail("template name expected after '@'", pos);
    }
    if (opname == "~") {
      SrcPtr a = parse_term(op.arg_max);
      if (!fd_convertible(a))
        fail("'~' applies to finite-domain expressions", pos);
      return src_findom(fd_neg(to_fd(a)), pos);
    }
    if (opname == ">>>") {
      SrcPtr a = parse_term(op.arg_max);
      if (a->kind != SrcKind::FeatVal)
        fail("'>>>' must be followed by Feature!Value", pos);
      return src_search("", a->name, a->args[0], pos);
    }
    if (opname == "-") {
      SrcPtr a = parse_term(op.arg_max);
      if (a->kind == SrcKind::Int) return src_int(-a->ival, pos);
      return src_compound("-", {a}, pos);
    }
    // extensional, ?-
    SrcPtr a = parse_term(op.arg_max);
    return src_compound(opname, {a}, pos);
  }

  SrcPtr parse_compound(const std::string& functor, SourcePos pos) {
    take();  // '('
    std::vector<SrcPtr> args;
    if (!at(Tok::RParen)) {
      for (;;) {
        args.push_back(parse_term(999));
        if (at(Tok::Comma)) {
          take();
          continue;
        }
        break;
      }
    }
    if (!at(Tok::RParen)) fail("expected ')' in argument list", cur().pos);
    take();
    if (args.empty()) fail("empty argument list", pos);
    return src_compound(functor, std::move(args), pos);
  }

  SrcPtr parse_list() {
    SourcePos pos = cur().pos;
    take();  // '['
    if (at(Tok::RBracket)) {
      take();
      return src_atom("[]", pos);
    }
    std::vector<SrcPtr> elems;
    for (;;) {
      elems.push_back(parse_term(999));
      if (at(Tok::Comma)) {
        take();
        continue;
      }
      break;
    }
    SrcPtr tail = src_atom("[]", pos);
    if (at(Tok::Bar)) {
      take();
      tail = parse_term(999);
    }
    if (!at(Tok::RBracket)) fail("expected ']'", cur().pos);
    take();
    for (auto it = elems.rbegin(); it != elems.rend(); ++it)
      tail = src_compound(".", {*it, tail}, (*it)->pos);
    return tail;
  }

  // --- item classification --------------------------------------------------

  static std::optional<std::vector<SrcPtr>> list_elems(const SrcPtr& t) {
    std::vector<SrcPtr> out;
    const SourceTerm* cur = t.get();
    for (;;) {
      if (cur->kind == SrcKind::Atom && cur->name == "[]") return out;
      if (cur->kind == SrcKind::Compound && cur->name == "." && cur->args.size() == 2) {
        out.push_back(cur->args[0]);
        cur = cur->args[1].get();
        continue;
      }
      return std::nullopt;
    }
  }

  std::vector<std::string> sort_list(const SrcPtr& t, const char* what) {
    auto elems = list_elems(t);
    if (!elems) fail(std::string("list of ") + what + " expected", t->pos);
    std::vector<std::string> names;
    for (auto& e : *elems) {
      if (e->kind != SrcKind::Atom) fail(std::string(what) + " name expected", e->pos);
      names.push_back(e->name);
    }
    if (names.empty()) fail(std::string("empty ") + what + " list", t->pos);
    return names;
  }

  std::vector<std::vector<std::string>> star_dims(const SrcPtr& t) {
    if (t->kind == SrcKind::Compound && t->name == "*" && t->args.size() == 2) {
      auto dims = star_dims(t->args[0]);
      dims.push_back(sort_list(t->args[1], "sort"));
      return dims;
    }
    return {sort_list(t, "sort")};
  }

  std::vector<std::vector<DomAtom>> star_domain_dims(const SrcPtr& t) {
    if (t->kind == SrcKind::Compound && t->name == "*" && t->args.size() == 2) {
      auto dims = star_domain_dims(t->args[0]);
      dims.push_back(domain_atoms(t->args[1]));
      return dims;
    }
    return {domain_atoms(t)};
  }

  std::vector<DomAtom> domain_atoms(const SrcPtr& t) {
    auto elems = list_elems(t);
    if (!elems) fail("list of domain elements expected", t->pos);
    std::vector<DomAtom> out;
    for (auto& e : *elems) {
      DomAtom a;
      if (e->kind == SrcKind::Atom) {
        a.sym = e->name;
      } else if (e->kind == SrcKind::Int) {
        a.is_int = true;
        a.ival = e->ival;
      } else {
        fail("domain element must be an atom or integer", e->pos);
      }
      out.push_back(std::move(a));
    }
    if (out.empty()) fail("empty domain dimension", t->pos);
    return out;
  }

  void parse_feat_specs(const SrcPtr& t, Item& item) {
    auto elems = list_elems(t);
    if (!elems) fail("list of feature declarations expected", t->pos);
    if (elems->empty()) fail("empty feature list", t->pos);
    for (auto& e : *elems) {
      if (e->kind == SrcKind::Atom) {
        item.feats.emplace_back(e->name, "top");
      } else if (e->kind == SrcKind::Compound && e->name == ":" && e->args.size() == 2 &&
                 e->args[0]->kind == SrcKind::Atom && e->args[1]->kind == SrcKind::Atom) {
        item.feats.emplace_back(e->args[0]->name, e->args[1]->name);
      } else {
        fail("feature declaration must be Feature or Feature:Restriction", e->pos);
      }
    }
  }

  void check_clause_head(const SrcPtr& h) {
    if (h->kind == SrcKind::Atom || h->kind == SrcKind::Compound) return;
    if (h->kind == SrcKind::Var) fail("clause head may not be a variable", h->pos);
    fail("clause head must be an atom or compound term", h->pos);
  }

  Item classify_item(const SrcPtr& t) {
    Item item;
    item.pos = t->pos;
    item.file = file_;

    if (t->kind == SrcKind::Compound && t->args.size() == 2) {
      const std::string& f = t->name;
      if (f == ":-") {
        check_clause_head(t->args[0]);
        item.kind = ItemKind::Clause;
        item.head = t->args[0];
        flatten_goals(t->args[1], item.body);
        return item;
      }
      if (f == ":=") {
        const SrcPtr& h = t->args[0];
        if (h->kind != SrcKind::Atom && h->kind != SrcKind::Compound)
          fail("template head must be an atom or compound term", h->pos);
        item.kind = ItemKind::TemplateDef;
        item.tmpl_head = h;
        item.tmpl_value = t->args[1];
        return item;
      }
      if (f == "intro") {
        const SrcPtr& lhs = t->args[0];
        if (lhs->kind == SrcKind::Atom) {
          item.kind = ItemKind::Intro;
          item.name = lhs->name;
        } else if (lhs->kind == SrcKind::Compound && lhs->name == ">" && lhs->args.size() == 2 &&
                   lhs->args[0]->kind == SrcKind::Atom) {
          item.kind = ItemKind::Combined;
          item.name = lhs->args[0]->name;
          item.dims = star_dims(lhs->args[1]);
        } else {
          fail("left side of 'intro' must be Sort or Sort > [...]", lhs->pos);
        }
        parse_feat_specs(t->args[1], item);
        return item;
      }
      if (f == ">") {
        if (t->args[0]->kind != SrcKind::Atom) fail("sort name expected before '>'", t->pos);
        item.kind = ItemKind::Subsort;
        item.name = t->args[0]->name;
        item.dims = star_dims(t->args[1]);
        return item;
      }
      if (f == "fin_dom") {
        if (t->args[0]->kind != SrcKind::Atom)
          fail("domain name expected before 'fin_dom'", t->pos);
        item.kind = ItemKind::FinDomDecl;
        item.name = t->args[0]->name;
        item.domain_dims = star_domain_dims(t->args[1]);
        return item;
      }
      if (f == ",") fail("unexpected ',' at top level", t->pos);
    }
    if (t->kind == SrcKind::Compound && t->name == "extensional" && t->args.size() == 1) {
      item.kind = ItemKind::Extensional;
      item.ext_sorts = sort_list(t->args[0], "sort");
      return item;
    }
    if (t->kind == SrcKind::Compound && t->name == "?-")
      fail("queries are not allowed in program files", t->pos);

    check_clause_head(t);
    item.kind = ItemKind::Clause;
    item.head = t;
    return item;
  }
};

inline std::vector<Item> parse_program(std::string_view text, std::string file = {}) {
  Parser p(text, std::move(file));
  return p.parse_program();
}

inline std::vector<SrcPtr> parse_query(std::string_view text, std::string file = {}) {
  Parser p(text, std::move(file));
  return p.parse_query();
}

inline SrcPtr parse_term_text(std::string_view text, std::string file = {}) {
  Parser p(text, std::move(file));
  return p.parse_single_term();
}

}  // namespace fit
