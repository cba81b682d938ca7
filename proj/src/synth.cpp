#include "vcl/synth.hpp"

#include <cmath>
#include <numeric>

#include "vcl/util.hpp"

namespace vcl {

namespace {

constexpr const char* kVars[] = {"len", "size", "count", "off", "pos", "idx", "n", "total",
                                 "width", "height", "depth", "flags", "mode", "level", "step",
                                 "nb", "bits", "ret", "state", "limit"};
constexpr const char* kCalls[] = {"av_log", "read_header", "parse_chunk", "update_state",
                                  "check_range", "init_table", "emit_token", "flush_buffer",
                                  "decode_block", "skip_bytes", "get_bits", "put_bits"};
// Weak signals: more frequent in vulnerable functions, never decisive.
constexpr const char* kRiskyCalls[] = {"memcpy", "strcpy", "sprintf", "alloca"};
// Loop bodies: vulnerable loops mostly copy, normal loops mostly do not.
constexpr const char* kCopyCalls[] = {"copy_bytes", "fill_buffer", "append_data"};

template <typename T, std::size_t N>
const T& pick(const T (&items)[N], Rng& rng) {
  return items[uniform_below(rng, N)];
}

bool chance(Rng& rng, double p) { return uniform_unit(rng) < p; }

std::string num(Rng& rng, std::uint64_t below) { return std::to_string(uniform_below(rng, below)); }

std::string filler(Rng& rng, const std::string& a, const std::string& b) {
  switch (uniform_below(rng, 7)) {
    case 0: return a + " = " + a + " + " + num(rng, 16) + ";";
    case 1: return "if (" + a + " > " + num(rng, 64) + ") {\n        " + b + " = " + b + " - 1;\n    }";
    case 2: return std::string(pick(kCalls, rng)) + "(ctx, " + a + ");";
    case 3: return "if (" + a + " && " + b + ") {\n        " + pick(kCalls, rng) + "(ctx, " + b + ");\n    }";
    case 4: return "for (i = 0; i < " + a + "; i++) {\n        " + b + " += i;\n    }";
    case 5: return b + " = " + a + " * " + num(rng, 8) + " + " + b + ";";
    default:
      return "if (" + a + " == " + num(rng, 8) + ")\n        return -1;";
  }
}

// Early exit of the same shape as the pattern, inside a for loop.
std::string decoy(Rng& rng, const std::string& a, const std::string& b) {
  return "for (i = 0; i < " + a + "; i++) {\n        if (!(" + b + " > i)) {\n            "
         "break;\n        }\n        " + pick(kCalls, rng) + "(ctx, i);\n    }";
}

std::string loop(Rng& rng, PlantKind kind, bool copies, const std::string& a,
                 const std::string& b) {
  const std::string cond = a + " < " + b;
  const std::string body = "        " + a + " += " + std::to_string(1 + uniform_below(rng, 4)) +
                           ";\n        " + (copies ? pick(kCopyCalls, rng) : pick(kCalls, rng)) +
                           "(ctx, " + a + ");\n";
  if (kind == PlantKind::Pattern)
    return "while (1) {\n        if (!(" + cond + ")) {\n            break;\n        }\n" + body +
           "    }";
  return "while (" + cond + ") {\n" + body + "    }";
}

std::vector<PlantKind> plan_kinds(const SynthSpec& spec) {
  std::vector<std::size_t> order(spec.size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, 0));
  shuffle(std::span<std::size_t>(order), rng);
  const auto vulnerable =
      static_cast<std::size_t>(std::llround(spec.vulnerable_fraction * double(spec.size)));
  const auto hidden =
      static_cast<std::size_t>(std::llround(spec.hidden_fraction * double(vulnerable)));
  std::vector<PlantKind> kinds(spec.size, PlantKind::None);
  for (std::size_t k = 0; k < vulnerable; ++k)
    kinds[order[k]] = k < hidden ? PlantKind::Hidden : PlantKind::Pattern;
  return kinds;
}

std::string function_code(std::size_t index, PlantKind kind, Rng& rng) {
  const std::string x = pick(kVars, rng), b = pick(kVars, rng);
  const std::string y = b == x ? std::string("m") : b;
  std::string code = "static int fn_" + std::to_string(index) + "(void *ctx, int " + x +
                     ", int " + y + ")\n{\n    int i = 0;\n";
  const bool vulnerable = kind != PlantKind::None;
  if (chance(rng, vulnerable ? 0.35 : 0.15))
    code += std::string("    ") + pick(kRiskyCalls, rng) + "(ctx, " + x + ");\n";
  const auto before = 1 + uniform_below(rng, 4), after = uniform_below(rng, 4);
  for (std::size_t s = 0; s < before; ++s) code += "    " + filler(rng, x, y) + "\n";
  // Normal functions loop too, so a bare while is no giveaway.
  if (vulnerable || chance(rng, 0.5))
    code += "    " + loop(rng, vulnerable ? kind : PlantKind::Hidden,
                          chance(rng, vulnerable ? 0.7 : 0.3), x, y) + "\n";
  if (!vulnerable && chance(rng, 0.15)) code += "    " + decoy(rng, x, y) + "\n";
  for (std::size_t s = 0; s < after; ++s) code += "    " + filler(rng, y, x) + "\n";
  code += "    return " + x + ";\n}\n";
  return code;
}

}  // namespace

PlantKind plant_kind(const SynthSpec& spec, std::size_t index) {
  return plan_kinds(spec).at(index);
}

Dataset synthetic_corpus(const SynthSpec& spec) {
  if (spec.size < 2) throw ConfigError("synthetic corpus needs at least 2 samples");
  if (!(spec.vulnerable_fraction > 0.0 && spec.vulnerable_fraction < 1.0) ||
      !(spec.hidden_fraction >= 0.0 && spec.hidden_fraction <= 1.0))
    throw ConfigError("synthetic fractions out of range");
  const auto kinds = plan_kinds(spec);
  std::vector<FunctionSample> samples;
  samples.reserve(spec.size);
  for (std::size_t i = 0; i < spec.size; ++i) {
    Rng rng(derive_seed(spec.seed, i + 1));
    samples.push_back({"syn-" + std::to_string(i), function_code(i, kinds[i], rng),
                       kinds[i] == PlantKind::None ? 0 : 1, std::string("synthetic")});
  }
  return Dataset("synthetic", std::move(samples));
}

}  // namespace vcl
