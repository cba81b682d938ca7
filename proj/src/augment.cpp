#include "vcl/augment.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_set>

#include "vcl/util.hpp"

namespace vcl {

std::string to_string(Rule rule) { return "R" + std::to_string(static_cast<int>(rule)); }

Rule parse_rule(std::string_view text) {
  if (text.size() == 2 && (text[0] == 'R' || text[0] == 'r') && text[1] >= '1' && text[1] <= '5')
    return static_cast<Rule>(text[1] - '0');
  throw ConfigError("unknown rule '" + std::string(text) + "'");
}

std::string to_string(VariantKind kind) { return kind == VariantKind::Simple ? "simple" : "hard"; }

const Stmt& node_at(const Stmt& root, const NodePath& path) {
  const Stmt* s = &root;
  for (auto i : path) s = &s->children.at(i);
  return *s;
}

namespace {

Stmt& mutable_node_at(Stmt& root, const NodePath& path) {
  Stmt* s = &root;
  for (auto i : path) s = &s->children.at(i);
  return *s;
}

bool contains_kind(const Stmt& s, StmtKind kind) {
  bool found = false;
  for_each_stmt(s, [&](const Stmt& n) { found = found || n.kind == kind; });
  return found;
}

bool has_top_level_decl(const Stmt& s) {
  return s.kind == StmtKind::Block &&
         std::any_of(s.children.begin(), s.children.end(),
                     [](const Stmt& c) { return c.kind == StmtKind::Decl; });
}

// True when a following `else` would bind inside `s` (it ends in an
// else-less if).
bool is_open(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::If: return !s.has_else() || is_open(s.else_branch());
    case StmtKind::While:
    case StmtKind::For: return is_open(s.body());
    default: return false;
  }
}

Stmt as_block(Stmt s) {
  if (s.kind == StmtKind::Block) return s;
  std::vector<Stmt> one;
  one.push_back(std::move(s));
  return Stmt::block(std::move(one));
}

std::vector<Stmt> flatten(Stmt s) {
  if (s.kind == StmtKind::Block) return std::move(s.children);
  std::vector<Stmt> one;
  one.push_back(std::move(s));
  return one;
}

Expr negate(Expr c) { return Expr::unary("!", std::move(c)); }

Stmt rewrite(const Stmt& node, Rule rule, const RuleOptions& options) {
  switch (rule) {
    case Rule::R1: {
      Stmt then_branch = node.then_branch();
      if (is_open(then_branch)) then_branch = as_block(std::move(then_branch));
      if (options.r1_reverse)
        return Stmt::if_else(negate(*node.expr), Stmt::block({}), node.then_branch());
      return Stmt::if_else(*node.expr, std::move(then_branch), Stmt::block({}));
    }
    case Rule::R2: {
      const auto& c = *node.expr;
      std::vector<Stmt> inner;
      inner.push_back(Stmt::if_(c.operands[1], node.then_branch()));
      return Stmt::if_(c.operands[0], Stmt::block(std::move(inner)));
    }
    case Rule::R3: {
      const Expr& cond = *node.expr;
      std::vector<Stmt> loop;
      if (has_top_level_decl(node.body()))
        loop.push_back(node.body());
      else
        loop = flatten(node.body());
      if (node.step) loop.push_back(Stmt::expr_stmt(*node.step));
      std::vector<Stmt> guarded;
      guarded.push_back(Stmt::do_while(Stmt::block(std::move(loop)), cond));
      std::vector<Stmt> outer = node.init;
      outer.push_back(Stmt::if_(cond, Stmt::block(std::move(guarded))));
      return Stmt::block(std::move(outer));
    }
    case Rule::R4: {
      std::vector<Stmt> guarded;
      guarded.push_back(Stmt::do_while(as_block(node.body()), *node.expr));
      return Stmt::if_(*node.expr, Stmt::block(std::move(guarded)));
    }
    case Rule::R5: {
      std::vector<Stmt> exit;
      exit.push_back(Stmt::break_());
      std::vector<Stmt> body;
      body.push_back(Stmt::if_(negate(*node.expr), Stmt::block(std::move(exit))));
      for (auto& s : flatten(node.body())) body.push_back(std::move(s));
      return Stmt::while_(Expr::int_lit("1"), Stmt::block(std::move(body)));
    }
  }
  throw ConfigError("unknown rule");
}

void collect_sites(const Stmt& s, NodePath& path, std::vector<TransformSite>& out) {
  auto rules = applicable_rules(s);
  if (!rules.empty())
    out.push_back({path, std::move(rules), s.span.first_line, s.span.last_line});
  for (std::size_t i = 0; i < s.children.size(); ++i) {
    path.push_back(i);
    collect_sites(s.children[i], path, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<Rule> applicable_rules(const Stmt& node) {
  std::vector<Rule> rules;
  switch (node.kind) {
    case StmtKind::If:
      if (node.has_else() || !node.expr) break;
      if (node.expr->kind != ExprKind::Opaque) rules.push_back(Rule::R1);
      if (node.expr->kind == ExprKind::Binary && node.expr->text == "&&") rules.push_back(Rule::R2);
      break;
    case StmtKind::For:
      if (node.expr && !contains_kind(node.body(), StmtKind::Continue) &&
          !contains_kind(node.body(), StmtKind::Opaque))
        rules.push_back(Rule::R3);
      break;
    case StmtKind::While:
      if (node.expr && node.expr->kind != ExprKind::Opaque) {
        rules.push_back(Rule::R4);
        rules.push_back(Rule::R5);
      }
      break;
    default: break;
  }
  return rules;
}

std::vector<TransformSite> find_sites(const StmtTree& tree) {
  std::vector<TransformSite> out;
  NodePath path;
  collect_sites(tree.root, path, out);
  return out;
}

StmtTree apply_rule(const StmtTree& tree, const NodePath& path, Rule rule,
                    const RuleOptions& options) {
  const auto& node = node_at(tree.root, path);
  const auto rules = applicable_rules(node);
  if (std::find(rules.begin(), rules.end(), rule) == rules.end())
    throw ConfigError(to_string(rule) + " does not apply to the " +
                      std::string(to_string(node.kind)) + " statement at the given site");
  StmtTree out = tree;
  Stmt replacement = rewrite(node, rule, options);
  if (!path.empty()) {
    const NodePath parent_path(path.begin(), path.end() - 1);
    const Stmt& parent = node_at(out.root, parent_path);
    if (parent.has_else() && path.back() == 0 && is_open(replacement))
      replacement = as_block(std::move(replacement));
  }
  mutable_node_at(out.root, path) = std::move(replacement);
  return out;
}

std::vector<PlannedVariant> enumerate_assignments(const std::vector<TransformSite>& sites) {
  std::vector<PlannedVariant> out;
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (auto r : sites[i].rules) out.push_back({VariantKind::Simple, {{i, r}}});
  if (sites.empty()) return out;

  // Odometer over the rule choices of every site; single-rule sites never move.
  std::vector<std::size_t> choice(sites.size(), 0);
  while (true) {
    Assignment a;
    for (std::size_t i = 0; i < sites.size(); ++i) a.emplace_back(i, sites[i].rules[choice[i]]);
    out.push_back({VariantKind::Hard, std::move(a)});
    std::size_t i = sites.size();
    while (i > 0) {
      --i;
      if (++choice[i] < sites[i].rules.size()) break;
      choice[i] = 0;
      if (i == 0) return out;
    }
  }
}

StmtTree apply_assignment(const StmtTree& tree, const std::vector<TransformSite>& sites,
                          const Assignment& assignment, const RuleOptions& options) {
  // Pre-order indices: a later site is never an ancestor of an earlier one,
  // so rewriting from the back keeps every pending path valid.
  auto order = assignment;
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  StmtTree out = tree;
  for (const auto& [site, rule] : order) out = apply_rule(out, sites.at(site).path, rule, options);
  return out;
}

std::vector<Variant> generate_variants(const FunctionSample& sample, const RuleOptions& options) {
  const auto tree = parse_function(sample.code);
  const auto sites = find_sites(tree);
  std::vector<Variant> out;
  std::unordered_set<std::string> seen{render(tree)};
  std::size_t simple = 0, hard = 0;
  for (const auto& plan : enumerate_assignments(sites)) {
    const bool is_simple = plan.kind == VariantKind::Simple;
    const auto index = is_simple ? simple++ : hard++;
    auto code = render(apply_assignment(tree, sites, plan.assignment, options));
    if (!seen.insert(code).second) continue;
    out.push_back({sample.id + (is_simple ? "~s" : "~h") + std::to_string(index), sample.id,
                   plan.kind, plan.assignment, std::move(code), sample.label});
  }
  return out;
}

Dataset variant_dataset(const Dataset& sources, std::string name, std::size_t jobs,
                        std::size_t* skipped, const RuleOptions& options) {
  std::vector<std::vector<Variant>> per_source(sources.size());
  std::atomic<std::size_t> failures{0};
  parallel_for(sources.size(), jobs, [&](std::size_t i) {
    try {
      per_source[i] = generate_variants(sources[i], options);
    } catch (const ParseError&) {
      ++failures;
    }
  });
  if (skipped) *skipped = failures.load();
  std::vector<FunctionSample> samples;
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (auto& v : per_source[i])
      samples.push_back({std::move(v.id), std::move(v.code), v.label, sources[i].project});
  return Dataset(std::move(name), std::move(samples));
}

}  // namespace vcl
