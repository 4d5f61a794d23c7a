// fitc — compiler and query shell for logic programs with sorted feature
// terms. `fitc compile` turns source files into plain logic-program text plus
// a loadable knowledge base; `fitc query` runs goals against a compiled base.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fit/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fitc - sorted-feature-term logic programming"};
  app.require_subcommand(1);

  auto* compile = app.add_subcommand("compile", "compile source files");
  std::vector<std::string> files;
  fit::CompileOptions opts;
  std::string out_path;
  bool no_sort_check = false, no_feature_search = false, no_cyclic = false;
  compile->add_option("files", files, "source files (.fit)")->required();
  compile->add_option("-o,--output", out_path, "emitted program path (default: first input with .pl)");
  compile->add_flag("--no-sort-check", no_sort_check, "skip restriction enforcement");
  compile->add_flag("--no-feature-search", no_feature_search, "reject '>>>' searches");
  compile->add_flag("--no-cyclic", no_cyclic, "truncate cyclic answers when printing");
  compile->add_flag("--pretty", opts.pretty, "pretty-print feature terms in output");

  auto* query = app.add_subcommand("query", "run queries against a knowledge base");
  std::string kb_file;
  std::string goal;
  bool qpretty = false, qno_cyclic = false;
  query->add_option("kb", kb_file, "knowledge base (.kb)")->required();
  query->add_option("-e,--exec", goal, "run one query and print all solutions");
  query->add_flag("--pretty", qpretty, "pretty-print solutions");
  query->add_flag("--no-cyclic", qno_cyclic, "truncate cyclic answers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  fit::CliStreams io{std::cout, std::cerr, std::cin};
  if (compile->parsed()) {
    opts.sort_check = !no_sort_check;
    opts.feature_search = !no_feature_search;
    opts.cyclic_print = !no_cyclic;
    opts.emit = out_path;
    return fit::cmd_compile(files, opts, io);
  }
  std::optional<std::string> g;
  if (!goal.empty()) g = goal;
  return fit::cmd_query(kb_file, g, qpretty, qno_cyclic, io);
}
