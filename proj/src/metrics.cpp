#include "vcl/metrics.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "vcl/util.hpp"

namespace vcl {

std::string_view to_string(Strategy s) { return s == Strategy::Code ? "code" : "model"; }

Strategy parse_strategy(std::string_view text) {
  if (text == "code") return Strategy::Code;
  if (text == "model") return Strategy::Model;
  throw ConfigError("unknown strategy '" + std::string(text) + "' (expected code or model)");
}

std::size_t sloc(std::span<const Token> tokens) {
  std::set<int> lines;
  for (const auto& t : tokens) {
    if (!t.significant()) continue;
    const int extra = static_cast<int>(std::count(t.text.begin(), t.text.end(), '\n'));
    for (int l = t.line; l <= t.line + extra; ++l) lines.insert(l);
  }
  return lines.size();
}

namespace {

std::size_t decisions_in_raw(const std::string& raw, bool count_case) {
  std::size_t n = 0;
  for (const auto& t : lex(raw)) {
    if (t.kind == TokenKind::Operator && (t.text == "&&" || t.text == "||")) ++n;
    if (count_case && t.kind == TokenKind::Keyword && t.text == "case") ++n;
  }
  return n;
}

}  // namespace

std::size_t cyclomatic(const StmtTree& tree) {
  std::size_t decisions = 0;
  for_each_stmt(tree.root, [&](const Stmt& s) {
    switch (s.kind) {
      case StmtKind::If:
      case StmtKind::While:
      case StmtKind::DoWhile:
        ++decisions;
        break;
      case StmtKind::For:
        if (s.expr) ++decisions;
        break;
      case StmtKind::Opaque:
        decisions += decisions_in_raw(s.text, true);
        break;
      default:
        break;
    }
  });
  for_each_expr(tree.root, [&](const Expr& e) {
    if (e.kind == ExprKind::Ternary) ++decisions;
    if (e.kind == ExprKind::Binary && (e.text == "&&" || e.text == "||")) ++decisions;
    if (e.kind == ExprKind::Opaque) decisions += decisions_in_raw(e.text, false);
  });
  return decisions + 1;
}

HalsteadCounts halstead_counts(std::span<const Token> tokens) {
  std::set<std::string> operators, operands;
  HalsteadCounts h;
  for (const auto& t : tokens) {
    switch (t.kind) {
      case TokenKind::Identifier:
      case TokenKind::IntegerLiteral:
      case TokenKind::StringLiteral:
      case TokenKind::CharLiteral:
        operands.insert(t.text);
        ++h.total_operands;
        break;
      case TokenKind::Keyword:
      case TokenKind::Operator:
      case TokenKind::Punctuation:
        if (t.text == ";" || t.text == "{" || t.text == "}") break;
        operators.insert(t.text);
        ++h.total_operators;
        break;
      case TokenKind::Comment:
      case TokenKind::Whitespace:
        break;
    }
  }
  h.distinct_operators = operators.size();
  h.distinct_operands = operands.size();
  return h;
}

ComplexityReport analyze(std::string_view code) {
  const auto tokens = lex(code);
  const auto tree = parse_function(code);
  ComplexityReport r;
  r.sloc = sloc(tokens);
  r.cyclomatic = cyclomatic(tree);
  r.halstead_volume = halstead_volume(tokens);
  r.maintainability_index =
      maintainability_index(static_cast<double>(r.sloc), static_cast<double>(r.cyclomatic),
                            r.halstead_volume);
  r.difficulty = -r.maintainability_index;
  return r;
}

DifficultyScore code_difficulty(const FunctionSample& sample) {
  return {sample.id, analyze(sample.code).difficulty, Strategy::Code, std::nullopt};
}

}  // namespace vcl
