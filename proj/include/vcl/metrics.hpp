#pragma once

// Code complexity metrics and the code-based difficulty score.
//
// Halstead classification: identifiers and literals are operands; keywords,
// operators and punctuation other than the delimiters ';', '{' and '}' are
// operators. Comments and whitespace are ignored.
//
// Cyclomatic complexity is 1 plus one per If, While, DoWhile, For with a
// condition, Ternary, && and || operator, and `case` label inside an Opaque
// run.

#include <cmath>
#include <span>
#include <string_view>
#include <type_traits>

#include <Eigen/Core>

#include "vcl/corpus.hpp"
#include "vcl/cparse.hpp"
#include "vcl/difficulty_score.hpp"

namespace vcl {

struct HalsteadCounts {
  std::size_t distinct_operators = 0;  // eta1
  std::size_t distinct_operands = 0;   // eta2
  std::size_t total_operators = 0;     // N1
  std::size_t total_operands = 0;      // N2

  std::size_t length() const noexcept { return total_operators + total_operands; }
  std::size_t vocabulary() const noexcept { return distinct_operators + distinct_operands; }
  /// N * log2(eta); zero when the vocabulary has fewer than two entries.
  double volume() const noexcept {
    return vocabulary() < 2 ? 0.0 : static_cast<double>(length()) * std::log2(vocabulary());
  }
};

struct ComplexityReport {
  std::size_t sloc = 0;
  std::size_t cyclomatic = 1;
  double halstead_volume = 0.0;
  double maintainability_index = 0.0;
  double difficulty = 0.0;  // -maintainability_index
};

/// Lines holding at least one token that is neither comment nor whitespace.
std::size_t sloc(std::span<const Token> tokens);

std::size_t cyclomatic(const StmtTree& tree);

HalsteadCounts halstead_counts(std::span<const Token> tokens);

inline double halstead_volume(std::span<const Token> tokens) {
  return halstead_counts(tokens).volume();
}

/// 171 - 5.2 ln V - 0.23 G - 16.2 ln L with V and L clamped below at 1.
template <typename Scalar>
  requires std::is_arithmetic_v<Scalar>
Scalar maintainability_index(Scalar lines, Scalar cyclomatic, Scalar volume) {
  using std::log;
  using std::max;
  return Scalar(171) - Scalar(5.2) * log(max(volume, Scalar(1))) - Scalar(0.23) * cyclomatic -
         Scalar(16.2) * log(max(lines, Scalar(1)));
}

/// Coefficient-wise form over Eigen arrays.
template <typename DerivedL, typename DerivedG, typename DerivedV>
auto maintainability_index(const Eigen::ArrayBase<DerivedL>& lines,
                           const Eigen::ArrayBase<DerivedG>& cyclomatic,
                           const Eigen::ArrayBase<DerivedV>& volume) {
  using Scalar = typename DerivedL::Scalar;
  return (Scalar(171) - Scalar(5.2) * volume.max(Scalar(1)).log() - Scalar(0.23) * cyclomatic -
          Scalar(16.2) * lines.max(Scalar(1)).log())
      .eval();
}

/// Lexes and parses `code`; ParseError propagates.
ComplexityReport analyze(std::string_view code);

/// difficulty = -MI of the sample's code, strategy Code.
DifficultyScore code_difficulty(const FunctionSample& sample);

}  // namespace vcl
