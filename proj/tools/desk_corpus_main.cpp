#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "desk_corpus.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic four-category desk corpus in the dirs layout"};
  ltsg::desk::DeskCorpusOptions options;
  std::string out;
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--docs-per-category", options.docs_per_category)->capture_default_str();
  app.add_option("--seed", options.seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    const auto corpus = ltsg::desk::generate(options);
    ltsg::desk::write_dirs(corpus, out);
    std::cerr << "wrote " << corpus.docs.size() << " documents to " << out << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
