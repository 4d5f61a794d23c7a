#pragma once

#include <set>
#include <string>
#include <vector>

#include "fit/ast.hpp"

// Text output for surface terms. The plain style is single-line and every
// rendering re-parses to a structurally identical term; the pretty style
// breaks conjunctions one conjunct per line, indenting two spaces per
// feature depth.

namespace fit {

inline bool atom_needs_quotes(const std::string& s) {
  if (s == "[]") return false;
  if (s.empty()) return true;
  // Word operators would be re-read as operators when left bare.
  if (s == "or" || s == "intro" || s == "fin_dom" || s == "extensional") return true;
  if (!std::islower(static_cast<unsigned char>(s[0]))) return true;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return true;
  return false;
}

inline std::string quote_atom(const std::string& s) {
  if (!atom_needs_quotes(s)) return s;
  std::string out = "'";
  for (char c : s) {
    switch (c) {
      case '\'': out += "\\'"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c; break;
    }
  }
  out += "'";
  return out;
}

namespace detail {

// Compounds the parser builds from operator syntax; rendered back as operators.
inline bool render_as_infix(const std::string& f) {
  static const std::set<std::string> ops = {":-", ":=", "intro", ">", "fin_dom",
                                            "*", ":", "="};
  return ops.count(f) > 0;
}
inline int infix_render_prec(const std::string& f) {
  if (f == ":-" || f == ":=") return 1200;
  if (f == "intro") return 1160;
  if (f == ">" || f == "fin_dom") return 1150;
  if (f == "=") return 745;
  if (f == "*") return 400;
  return 200;  // ":"
}

struct Rendered {
  std::string text;
  int prec;
};

inline Rendered render_fd(const FdPtr& e);
inline Rendered render_node(const SrcPtr& t);

inline std::string wrap(const Rendered& r, int maxp) {
  if (r.prec > maxp) return "(" + r.text + ")";
  return r.text;
}

inline bool is_list_cell(const SrcPtr& t) {
  return t->kind == SrcKind::Compound && t->name == "." && t->args.size() == 2;
}

inline Rendered render_list(const SrcPtr& t) {
  std::string out = "[";
  const SourceTerm* cur = t.get();
  bool first = true;
  for (;;) {
    out += (first ? "" : ",");
    out += wrap(render_node(cur->args[0]), 999);
    first = false;
    const SourceTerm* tail = cur->args[1].get();
    if (tail->kind == SrcKind::Atom && tail->name == "[]") break;
    if (tail->kind == SrcKind::Compound && tail->name == "." && tail->args.size() == 2) {
      cur = tail;
      continue;
    }
    out += "|" + wrap(render_node(cur->args[1]), 999);
    break;
  }
  out += "]";
  return {out, 0};
}

inline Rendered render_fd(const FdPtr& e) {
  switch (e->kind) {
    case FdKind::Atom: return {quote_atom(e->name), 0};
    case FdKind::Int:
      return {std::to_string(e->ival), e->ival < 0 ? 200 : 0};
    case FdKind::Var: return {e->name, 0};
    case FdKind::Annot: {
      Rendered inner = render_fd(e->a);
      return {wrap(inner, 149) + "@" + quote_atom(e->name), 150};
    }
    case FdKind::Neg: {
      Rendered inner = render_fd(e->a);
      return {"~" + wrap(inner, 600), 600};
    }
    case FdKind::And: {
      Rendered l = render_fd(e->a), r = render_fd(e->b);
      return {wrap(l, 729) + " & " + wrap(r, 730), 730};
    }
    case FdKind::Or: {
      Rendered l = render_fd(e->a), r = render_fd(e->b);
      return {wrap(l, 739) + " or " + wrap(r, 740), 740};
    }
  }
  return {"?", 0};
}

inline Rendered render_node(const SrcPtr& t) {
  switch (t->kind) {
    case SrcKind::Var: return {t->name, 0};
    case SrcKind::Atom: return {quote_atom(t->name), 0};
    case SrcKind::Int: return {std::to_string(t->ival), t->ival < 0 ? 200 : 0};
    case SrcKind::SortRef: return {"<" + quote_atom(t->name), 550};
    case SrcKind::FeatVal: {
      Rendered v = render_node(t->args[0]);
      return {quote_atom(t->name) + "!" + wrap(v, 700), 650};
    }
    case SrcKind::Conj: {
      Rendered l = render_node(t->args[0]), r = render_node(t->args[1]);
      return {wrap(l, 729) + " & " + wrap(r, 730), 730};
    }
    case SrcKind::Disj: {
      Rendered l = render_node(t->args[0]), r = render_node(t->args[1]);
      return {wrap(l, 739) + " or " + wrap(r, 740), 740};
    }
    case SrcKind::Search: {
      Rendered v = render_node(t->args[0]);
      std::string out;
      if (!t->start.empty()) out += quote_atom(t->start);
      out += ">>>" + quote_atom(t->name) + "!" + wrap(v, 700);
      return {out, 700};
    }
    case SrcKind::Quote: {
      // `` would lex as the double-quote token; parenthesize a quoted quote.
      Rendered v = render_node(t->args[0]);
      bool inner_quote = t->args[0]->kind == SrcKind::Quote ||
                         t->args[0]->kind == SrcKind::DoubleQuote;
      return {"`" + wrap(v, inner_quote ? -1 : 550), 550};
    }
    case SrcKind::DoubleQuote: {
      Rendered v = render_node(t->args[0]);
      return {"``" + wrap(v, 550), 550};
    }
    case SrcKind::TemplateCall: {
      std::string out = "@" + quote_atom(t->name);
      if (!t->args.empty()) {
        out += "(";
        for (size_t i = 0; i < t->args.size(); ++i) {
          if (i) out += ",";
          out += wrap(render_node(t->args[i]), 999);
        }
        out += ")";
      }
      return {out, 550};
    }
    case SrcKind::FinDom: return render_fd(t->fd);
    case SrcKind::Compound: {
      if (is_list_cell(t)) return render_list(t);
      if (t->args.size() == 2 && render_as_infix(t->name)) {
        int p = infix_render_prec(t->name);
        Rendered l = render_node(t->args[0]), r = render_node(t->args[1]);
        // The table ops here are xfx except ':' (xfy) and '*' (yfx).
        int lm = t->name == "*" ? p : p - 1;
        int rm = t->name == ":" ? p : p - 1;
        return {wrap(l, lm) + " " + t->name + " " + wrap(r, rm), p};
      }
      if (t->args.size() == 1 && (t->name == "extensional" || t->name == "?-")) {
        Rendered a = render_node(t->args[0]);
        return {t->name + " " + wrap(a, 1149), 1150};
      }
      if (t->args.size() == 1 && t->name == "-" && t->args[0]->kind != SrcKind::Int) {
        Rendered a = render_node(t->args[0]);
        return {"-" + wrap(a, 0), 200};
      }
      std::string out = quote_atom(t->name) + "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) out += ",";
        out += wrap(render_node(t->args[i]), 999);
      }
      out += ")";
      return {out, 0};
    }
  }
  return {"?", 0};
}

// --- pretty style -----------------------------------------------------------
//
// Same precedence discipline as the plain printer, but conjunctions and
// disjunctions break one conjunct per line and a conjunction under a feature
// opens an indented block, two spaces per feature depth.

inline Rendered pretty_rec(const SrcPtr& t, int depth) {
  std::string pad(static_cast<size_t>(2 * depth), ' ');
  switch (t->kind) {
    case SrcKind::Conj: {
      Rendered l = pretty_rec(t->args[0], depth);
      Rendered r = pretty_rec(t->args[1], depth);
      return {wrap(l, 729) + " &\n" + pad + wrap(r, 730), 730};
    }
    case SrcKind::Disj: {
      Rendered l = pretty_rec(t->args[0], depth);
      Rendered r = pretty_rec(t->args[1], depth);
      return {wrap(l, 739) + " or\n" + pad + wrap(r, 740), 740};
    }
    case SrcKind::FeatVal: {
      Rendered v = pretty_rec(t->args[0], depth + 1);
      std::string head = quote_atom(t->name) + "!";
      if (v.prec > 700) {
        std::string inner_pad(static_cast<size_t>(2 * (depth + 1)), ' ');
        return {head + "(\n" + inner_pad + v.text + " )", 650};
      }
      return {head + v.text, 650};
    }
    default:
      return render_node(t);
  }
}

inline std::string pretty_node(const SrcPtr& t, int depth) { return pretty_rec(t, depth).text; }

}  // namespace detail

inline std::string render_src(const SrcPtr& t) { return detail::render_node(t).text; }

enum class RenderStyle { Plain, Pretty };

inline std::string render(const SrcPtr& t, RenderStyle style = RenderStyle::Plain) {
  if (style == RenderStyle::Plain) return render_src(t);
  return detail::pretty_node(t, 0);
}

// Declarations rendered back to source text (used by the knowledge-base file).
inline std::string render_item(const Item& item) {
  auto list_of = [](const std::vector<std::string>& xs) {
    std::string out = "[";
    for (size_t i = 0; i < xs.size(); ++i) {
      if (i) out += ",";
      out += quote_atom(xs[i]);
    }
    return out + "]";
  };
  auto dims_of = [&](const std::vector<std::vector<std::string>>& dims) {
    std::string out;
    for (size_t i = 0; i < dims.size(); ++i) {
      if (i) out += " * ";
      out += list_of(dims[i]);
    }
    return out;
  };
  auto feats_of = [](const std::vector<std::pair<std::string, std::string>>& fs) {
    std::string out = "[";
    for (size_t i = 0; i < fs.size(); ++i) {
      if (i) out += ",";
      out += quote_atom(fs[i].first);
      if (fs[i].second != "top") out += ":" + quote_atom(fs[i].second);
    }
    return out + "]";
  };

  switch (item.kind) {
    case ItemKind::Subsort:
      return quote_atom(item.name) + " > " + dims_of(item.dims) + ".";
    case ItemKind::Intro:
      return quote_atom(item.name) + " intro " + feats_of(item.feats) + ".";
    case ItemKind::Combined:
      return quote_atom(item.name) + " > " + dims_of(item.dims) + " intro " +
             feats_of(item.feats) + ".";
    case ItemKind::FinDomDecl: {
      std::string out = quote_atom(item.name) + " fin_dom ";
      for (size_t i = 0; i < item.domain_dims.size(); ++i) {
        if (i) out += " * ";
        out += "[";
        for (size_t j = 0; j < item.domain_dims[i].size(); ++j) {
          if (j) out += ",";
          const DomAtom& a = item.domain_dims[i][j];
          out += a.is_int ? std::to_string(a.ival) : quote_atom(a.sym);
        }
        out += "]";
      }
      return out + ".";
    }
    case ItemKind::TemplateDef:
      return render_src(item.tmpl_head) + " := " + render_src(item.tmpl_value) + ".";
    case ItemKind::Extensional:
      return "extensional " + list_of(item.ext_sorts) + ".";
    case ItemKind::Clause: {
      std::string out = render_src(item.head);
      if (!item.body.empty()) {
        out += " :- ";
        for (size_t i = 0; i < item.body.size(); ++i) {
          if (i) out += ", ";
          out += detail::wrap(detail::render_node(item.body[i]), 999);
        }
      }
      return out + ".";
    }
  }
  return ".";
}

}  // namespace fit
