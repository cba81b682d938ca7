#pragma once

// Lossless lexer and statement-level parser for C-like function bodies.
//
// The grammar is deliberately partial: control flow (blocks, if, while, do,
// for, break, continue, return), simple declarations and expressions built
// from the usual arithmetic/relational/logical/assignment operators are
// structured. Everything else (switch, goto, labels, preprocessor lines,
// member access, casts, ...) is kept as an Opaque node holding the exact
// source text of a balanced token run, so parsing succeeds on any input with
// balanced brackets.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vcl {

enum class TokenKind {
  Identifier,
  Keyword,
  IntegerLiteral,  // any C preprocessing number, including floating ones
  StringLiteral,
  CharLiteral,
  Operator,
  Punctuation,
  Comment,
  Whitespace,
};

struct Token {
  TokenKind kind;
  std::string text;
  int line = 1;             // 1-based line of the first byte
  std::size_t offset = 0;   // byte offset into the source

  bool significant() const noexcept {
    return kind != TokenKind::Comment && kind != TokenKind::Whitespace;
  }
};

/// Concatenating the texts of the result reproduces `code` byte for byte.
/// Throws ParseError on unterminated string/char literals or block comments.
std::vector<Token> lex(std::string_view code);

bool is_c_keyword(std::string_view word);

// ---------------------------------------------------------------------------

enum class ExprKind { IntLit, Var, Unary, Binary, Call, Ternary, Opaque };

/// Expression node. `text` holds the literal, variable name, operator,
/// callee name or raw source (Opaque) depending on kind.
struct Expr {
  ExprKind kind = ExprKind::Opaque;
  std::string text;
  std::vector<Expr> operands;  // Unary: 1, Binary: 2, Ternary: 3, Call: args
  bool postfix = false;        // Unary ++/-- written after the operand

  static Expr int_lit(std::string text) { return {ExprKind::IntLit, std::move(text), {}, false}; }
  static Expr var(std::string name) { return {ExprKind::Var, std::move(name), {}, false}; }
  static Expr opaque(std::string raw) { return {ExprKind::Opaque, std::move(raw), {}, false}; }
  static Expr unary(std::string op, Expr e, bool postfix = false);
  static Expr binary(std::string op, Expr lhs, Expr rhs);
  static Expr ternary(Expr c, Expr t, Expr f);
  static Expr call(std::string name, std::vector<Expr> args);

  bool operator==(const Expr&) const = default;
};

enum class StmtKind {
  Block,
  If,
  While,
  DoWhile,
  For,
  Break,
  Continue,
  Return,
  ExprStmt,
  Decl,
  Opaque,
};

std::string_view to_string(StmtKind kind);

/// Significant-token span covered by a node (indices into the significant
/// token sequence of the parsed source) plus the source lines it touches.
/// Nodes synthesized by transformations carry an empty span.
struct SourceSpan {
  std::size_t first_token = 0;
  std::size_t last_token = 0;
  int first_line = 0;
  int last_line = 0;

  bool empty() const noexcept { return first_line == 0; }
};

struct Declarator {
  std::string name;
  std::optional<Expr> init;

  bool operator==(const Declarator&) const = default;
};

/// Statement node.
///   Block:    children = statements
///   If:       expr = condition, children = {then} or {then, else}
///   While:    expr = condition, children = {body}
///   DoWhile:  expr = condition, children = {body}
///   For:      init = {} or {Decl/ExprStmt}, expr = optional condition,
///             step = optional step expression, children = {body}
///   Return:   expr = optional value
///   ExprStmt: expr = expression
///   Decl:     text = type specifiers, decls = declarators
///   Opaque:   text = exact source text of the run
/// Equality is structural and ignores spans.
struct Stmt {
  StmtKind kind = StmtKind::Block;
  std::vector<Stmt> children;
  std::optional<Expr> expr;
  std::optional<Expr> step;
  std::vector<Stmt> init;
  std::string text;
  std::vector<Declarator> decls;
  SourceSpan span;

  static Stmt block(std::vector<Stmt> stmts);
  static Stmt if_(Expr cond, Stmt then_branch);
  static Stmt if_else(Expr cond, Stmt then_branch, Stmt else_branch);
  static Stmt while_(Expr cond, Stmt body);
  static Stmt do_while(Stmt body, Expr cond);
  static Stmt break_();
  static Stmt continue_();
  static Stmt expr_stmt(Expr e);
  static Stmt opaque(std::string raw);

  bool has_else() const noexcept { return kind == StmtKind::If && children.size() == 2; }
  const Stmt& then_branch() const { return children.at(0); }
  const Stmt& else_branch() const { return children.at(1); }
  const Stmt& body() const { return children.at(0); }

  bool operator==(const Stmt& other) const;
};

/// Parsed function: the raw header text (empty for a bare statement list)
/// and the body. A bare statement list is held in an unbraced root Block.
struct StmtTree {
  std::string header;
  Stmt root;
  bool is_function = false;

  bool operator==(const StmtTree& other) const {
    return header == other.header && is_function == other.is_function && root == other.root;
  }
};

/// Throws ParseError on lexing errors and unbalanced (), [] or {}.
StmtTree parse_function(std::string_view code);

/// Parses a single expression; unparseable text becomes an Opaque node.
Expr parse_expression(std::string_view code);

/// Deterministic pretty printer. parse_function(render(t)) == t.
std::string render(const StmtTree& tree);
std::string render(const Stmt& stmt, int indent = 0);
std::string render(const Expr& expr);

/// Visits every statement in pre-order.
template <typename F>
void for_each_stmt(const Stmt& s, F&& f) {
  f(s);
  for (const auto& i : s.init) for_each_stmt(i, f);
  for (const auto& c : s.children) for_each_stmt(c, f);
}

/// Visits every expression node reachable from a statement (pre-order).
template <typename F>
void for_each_expr(const Expr& e, F&& f) {
  f(e);
  for (const auto& o : e.operands) for_each_expr(o, f);
}

template <typename F>
void for_each_expr(const Stmt& s, F&& f) {
  for_each_stmt(s, [&](const Stmt& n) {
    if (n.expr) for_each_expr(*n.expr, f);
    if (n.step) for_each_expr(*n.step, f);
    for (const auto& d : n.decls)
      if (d.init) for_each_expr(*d.init, f);
  });
}

}  // namespace vcl
