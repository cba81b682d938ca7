#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vcl/util.hpp"

namespace vcl::test {

std::string fixture_path(const std::string& relative) {
  return std::string(VCL_FIXTURE_DIR) + "/" + relative;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<Snippet> parser_snippets() {
  std::istringstream in(read_file(fixture_path("snippets.c")));
  std::vector<Snippet> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("//@@ ", 0) == 0) {
      out.push_back({line.substr(5), ""});
    } else if (!out.empty()) {
      out.back().code += line + "\n";
    }
  }
  return out;
}

std::vector<Snippet> interpretable_functions() {
  std::vector<Snippet> out;
  for (const auto& e : std::filesystem::directory_iterator(fixture_path("interp")))
    out.push_back({e.path().stem().string(), read_file(e.path().string())});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

std::vector<Snippet> all_fixture_programs() {
  auto out = parser_snippets();
  for (auto& s : interpretable_functions()) out.push_back(std::move(s));
  out.push_back({"svg_probe", read_file(fixture_path("svg_probe.c"))});
  out.push_back({"mi_golden", read_file(fixture_path("mi_golden.c"))});
  return out;
}

Dataset toy_dataset(std::size_t per_class, std::uint64_t seed) {
  static const char* kFiller[] = {"x = x + 1;", "y = f(y);", "if (a) { b = 2; }", "n--;",
                                  "while (k) { k = k - 1; }", "return 0;"};
  Rng rng(seed);
  std::vector<FunctionSample> samples;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int label = i % 2 == 0 ? 1 : 0;
    std::string code = "int toy(int x) {\n";
    for (int k = 0; k < 3; ++k) code += std::string(kFiller[uniform_below(rng, 6)]) + "\n";
    // repeated so the marker outweighs the random filler
    for (int k = 0; k < 3; ++k) code += label ? "BAD(x);\n" : "GOOD(x);\n";
    code += "}\n";
    samples.push_back({"toy-" + std::to_string(i), code, label, std::nullopt});
  }
  return Dataset("toy", std::move(samples));
}

}  // namespace vcl::test
