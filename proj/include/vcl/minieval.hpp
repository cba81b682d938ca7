#pragma once

// Interpreter for the integer subset of the statement language: no Opaque
// nodes, no calls, no pointers. Used to check that rewrites keep behavior.
//
// Cost model: every executed ExprStmt, Decl, Return, Break and Continue
// costs one step, as does every evaluation of an if/loop condition and every
// for-step. Blocks are free.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vcl/cparse.hpp"

namespace vcl {

using Env = std::map<std::string, std::int64_t>;

enum class Outcome {
  Completed,       // fell off the end
  Returned,
  BudgetExhausted,
  UnboundVariable,
  DivisionByZero,
};

std::string to_string(Outcome outcome);

struct Trace {
  std::vector<std::pair<std::string, std::int64_t>> events;  // assignments in order
  Env final_env;  // the outermost scope (inputs and assignments to them)
  std::size_t steps = 0;
  Outcome outcome = Outcome::Completed;
  std::optional<std::int64_t> return_value;
  std::string detail;  // e.g. the unbound variable

  bool operator==(const Trace&) const = default;
};

/// Reason the tree falls outside the interpretable subset, if it does.
std::optional<std::string> uninterpretable_reason(const StmtTree& tree);

/// Throws UnsupportedError for trees outside the subset.
Trace interpret(const StmtTree& tree, const Env& inputs, std::size_t step_budget = 10000);

/// Variables used but never declared in the tree.
std::set<std::string> free_variables(const StmtTree& tree);

/// Same behavior ignoring step counts. Two exhausted runs match when one
/// event sequence is a prefix of the other.
bool same_behavior(const Trace& a, const Trace& b);

struct EquivalenceVerdict {
  bool equivalent = true;
  std::size_t trials_run = 0;
  std::optional<Env> witness;  // first diverging input
  std::optional<Trace> left, right;
};

/// Boundary-heavy pool the random inputs are drawn from.
const std::vector<std::int64_t>& input_pool();

/// Input environment for trial `trial`: each free variable gets a uniform
/// draw from input_pool().
Env random_env(const std::set<std::string>& variables, std::uint64_t seed, std::size_t trial);

EquivalenceVerdict equivalent(const StmtTree& a, const StmtTree& b, std::size_t trials,
                              std::uint64_t seed, std::size_t step_budget = 10000);

}  // namespace vcl
