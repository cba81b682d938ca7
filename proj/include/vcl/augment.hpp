#pragma once

// Semantics-preserving rewrites of C functions.
//
//   R1  if (C) B              -> if (C) B else { }      (or if (!(C)) { } else B)
//   R2  if (C1 && C2) B       -> if (C1) { if (C2) B }
//   R3  for (I; C; S) B       -> { I; if (C) { do { B; S; } while (C); } }
//   R4  while (C) B           -> if (C) { do B while (C); }
//   R5  while (C) B           -> while (1) { if (!(C)) { break; } B }

#include <optional>
#include <string>
#include <vector>

#include "vcl/corpus.hpp"
#include "vcl/cparse.hpp"

namespace vcl {

enum class Rule { R1 = 1, R2, R3, R4, R5 };

std::string to_string(Rule rule);
Rule parse_rule(std::string_view text);

/// Child indices from the tree root to a statement.
using NodePath = std::vector<std::size_t>;

const Stmt& node_at(const Stmt& root, const NodePath& path);

struct TransformSite {
  NodePath path;
  std::vector<Rule> rules;  // ascending
  int first_line = 0;
  int last_line = 0;

  bool operator==(const TransformSite&) const = default;
};

/// Sites in source (pre-order) order.
std::vector<TransformSite> find_sites(const StmtTree& tree);

/// Rules applicable at a single node, ignoring its position.
std::vector<Rule> applicable_rules(const Stmt& node);

struct RuleOptions {
  bool r1_reverse = false;  // R1 produces if (!(C)) { } else B
};

/// Rewrites the node at `path`. Throws ConfigError when the rule does not
/// apply there.
StmtTree apply_rule(const StmtTree& tree, const NodePath& path, Rule rule,
                    const RuleOptions& options = {});
inline StmtTree apply_rule(const StmtTree& tree, const TransformSite& site, Rule rule,
                           const RuleOptions& options = {}) {
  return apply_rule(tree, site.path, rule, options);
}

enum class VariantKind { Simple, Hard };

std::string to_string(VariantKind kind);

/// (site index into find_sites output, rule)
using Assignment = std::vector<std::pair<std::size_t, Rule>>;

struct Variant {
  std::string id;
  std::string source_id;
  VariantKind kind = VariantKind::Simple;
  Assignment assignment;
  std::string code;
  int label = 0;
};

struct PlannedVariant {
  VariantKind kind;
  Assignment assignment;

  bool operator==(const PlannedVariant&) const = default;
};

/// Every assignment before deduplication: one simple variant per
/// (site, rule), then one hard variant per combination of rule choices over
/// the sites carrying more than one rule.
std::vector<PlannedVariant> enumerate_assignments(const std::vector<TransformSite>& sites);

/// Applies every pair of an assignment (deepest/last sites first, so the
/// original paths stay valid).
StmtTree apply_assignment(const StmtTree& tree, const std::vector<TransformSite>& sites,
                          const Assignment& assignment, const RuleOptions& options = {});

/// Variants of a parsed sample, deduplicated by rendered code (first kept).
/// Throws ParseError when the sample does not parse.
std::vector<Variant> generate_variants(const FunctionSample& sample,
                                       const RuleOptions& options = {});

/// Variants of all samples as a dataset of new samples labeled like their
/// sources. Unparseable samples are skipped and counted in `skipped`.
Dataset variant_dataset(const Dataset& sources, std::string name, std::size_t jobs,
                        std::size_t* skipped = nullptr, const RuleOptions& options = {});

}  // namespace vcl
