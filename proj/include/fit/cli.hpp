#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fit/compile.hpp"
#include "fit/decode.hpp"
#include "fit/emit.hpp"
#include "fit/errors.hpp"
#include "fit/kb_io.hpp"
#include "fit/parser.hpp"
#include "fit/render.hpp"
#include "fit/solve.hpp"

// Command implementations behind the fitc executable; in-process so the test
// suite can drive them directly. Exit codes: 0 success, 1 compile error,
// 2 usage error.

namespace fit {

struct CliStreams {
  std::ostream& out;
  std::ostream& err;
  std::istream& in;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FitError(ErrorClass::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string default_output_path(const std::string& first_input) {
  std::filesystem::path p(first_input);
  p.replace_extension(".pl");
  return p.string();
}

inline std::string kb_path_for(const std::string& out_path) {
  std::filesystem::path p(out_path);
  p.replace_extension(".kb");
  return p.string();
}

// Compiles source files (declarations merged across files before clause
// compilation) and writes the program text plus the loadable knowledge base.
inline int cmd_compile(const std::vector<std::string>& files, CompileOptions opts,
                       CliStreams io) {
  if (files.empty()) {
    io.err << "usage: fitc compile <files...>\n";
    return 2;
  }
  try {
    std::vector<Item> items;
    for (const std::string& f : files) {
      std::vector<Item> part = parse_program(read_file(f), f);
      items.insert(items.end(), part.begin(), part.end());
    }
    KnowledgeBase kb = compile_program(items, opts);

    std::string out_path = opts.emit.empty() ? default_output_path(files[0]) : opts.emit;
    std::string kb_path = kb_path_for(out_path);
    {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw FitError(ErrorClass::Io, "cannot write " + out_path);
      out << emit_program(kb, files);
    }
    save_kb(kb, kb_path);
    return 0;
  } catch (const FitError& e) {
    io.err << e.format() << "\n";
    return 1;
  }
}

namespace cli_detail {

// One solution rendered as "X = term, Y = term" (or "yes" for ground goals).
inline std::string format_solution(const KnowledgeBase& kb, const Store& store,
                                   const std::vector<std::pair<std::string, TermPtr>>& vars,
                                   bool pretty, bool cyclic_print, bool& truncated) {
  std::vector<std::pair<std::string, TermPtr>> shown;
  DecodeOptions dopts;
  dopts.cyclic_print = cyclic_print;
  for (const auto& [name, t] : vars) {
    if (!name.empty() && name[0] == '_') continue;
    shown.emplace_back(name, t);
    dopts.reserved.insert(name);
  }
  if (shown.empty()) return "yes";
  Decoder dec(store, kb.sig, kb.layouts, dopts);
  for (const auto& [name, t] : shown) dec.analyze(t);
  std::string out;
  for (size_t i = 0; i < shown.size(); ++i) {
    if (i) out += ",\n";
    SrcPtr d = dec.decode(shown[i].second);
    out += shown[i].first + " = " + render(d, pretty ? RenderStyle::Pretty : RenderStyle::Plain);
  }
  truncated = dec.truncated();
  return out;
}

// Runs one parsed query against the knowledge base. The callback receives
// each formatted solution and returns false to stop early.
template <typename OnSolution>
inline void run_goals(const KnowledgeBase& kb, const std::vector<SrcPtr>& goals, bool pretty,
                      bool cyclic_print, std::ostream& err, OnSolution&& on_solution) {
  std::vector<CompiledGoals> alts =
      compile_query_goals(goals, kb.sig, kb.layouts, kb.opts, "<query>");
  for (CompiledGoals& alt : alts) {
    Solver solver(kb, alt.store, alt.goals);
    while (solver.next()) {
      bool truncated = false;
      std::string text =
          format_solution(kb, alt.store, alt.vars, pretty, cyclic_print, truncated);
      if (truncated)
        err << "warning: cyclic term truncated after depth 3 (cyclic printing is off)\n";
      if (!on_solution(text)) return;
    }
  }
}

}  // namespace cli_detail

// -e "<goal>": prints every solution followed by ' ;', then 'no'.
// Interactive: reads queries from the input stream; ';' asks for the next
// solution, anything else stops; 'no' is printed on exhaustion.
inline int cmd_query(const std::string& kb_file, const std::optional<std::string>& goal,
                     bool pretty, bool no_cyclic, CliStreams io) {
  KnowledgeBase kb;
  try {
    kb = load_kb(kb_file);
  } catch (const FitError& e) {
    io.err << e.format() << "\n";
    return 1;
  }
  bool cyclic_print = kb.opts.cyclic_print && !no_cyclic;

  if (goal) {
    try {
      std::vector<SrcPtr> goals = parse_query(*goal, "<query>");
      cli_detail::run_goals(kb, goals, pretty, cyclic_print, io.err, [&](const std::string& s) {
        io.out << s << " ;\n";
        return true;
      });
      io.out << "no\n";
      return 0;
    } catch (const FitError& e) {
      io.err << e.format() << "\n";
      return 1;
    }
  }

  // Interactive session. Query errors do not end the session.
  std::string line;
  for (;;) {
    io.out << "?- " << std::flush;
    if (!std::getline(io.in, line)) break;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      std::vector<SrcPtr> goals = parse_query(line, "<query>");
      bool stopped = false;
      cli_detail::run_goals(kb, goals, pretty, cyclic_print, io.err, [&](const std::string& s) {
        io.out << s << " ? " << std::flush;
        std::string reply;
        if (!std::getline(io.in, reply) || reply != ";") {
          stopped = true;
          io.out << "\n";
          return false;
        }
        return true;
      });
      if (!stopped) io.out << "no\n";
    } catch (const FitError& e) {
      io.err << e.format() << "\n";
    }
  }
  return 0;
}

}  // namespace fit
