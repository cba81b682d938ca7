#pragma once

// Synthetic corpus with a planted vulnerability pattern.
//
// Vulnerable functions contain a loop of the form
//     while (1) { if (!(C)) { break; } ... }
// except for a `hidden_fraction` of them, which carry the plain
// `while (C) { ... }` loop the pattern rewrites from. Both classes share the
// same filler statements; a few weak signal tokens lean towards the
// vulnerable class.

#include <cstdint>

#include "vcl/corpus.hpp"

namespace vcl {

struct SynthSpec {
  std::size_t size = 2000;
  double vulnerable_fraction = 0.4;
  double hidden_fraction = 0.3;
  std::uint64_t seed = 0;
};

enum class PlantKind { None, Pattern, Hidden };

/// Deterministic in `spec`. Sample ids are "syn-<index>".
Dataset synthetic_corpus(const SynthSpec& spec);

/// How a synthetic sample was generated, recovered from its index and `spec`.
PlantKind plant_kind(const SynthSpec& spec, std::size_t index);

}  // namespace vcl
