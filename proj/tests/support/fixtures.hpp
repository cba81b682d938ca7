#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vcl/corpus.hpp"

namespace vcl::test {

struct Snippet {
  std::string name;
  std::string code;
};

std::string fixture_path(const std::string& relative);
std::string read_file(const std::string& path);

/// The //@@-separated snippets of snippets.c.
std::vector<Snippet> parser_snippets();

/// Functions in fixtures/interp, sorted by file name.
std::vector<Snippet> interpretable_functions();

/// Every fixture program: snippets, interpretable functions, svg_probe.c and
/// mi_golden.c.
std::vector<Snippet> all_fixture_programs();

/// Toy set for the reference classifier: "BAD" marks vulnerable samples.
Dataset toy_dataset(std::size_t per_class, std::uint64_t seed = 0);

}  // namespace vcl::test
