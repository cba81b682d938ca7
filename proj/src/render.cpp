#include <string>

#include "precedence.hpp"
#include "vcl/cparse.hpp"

namespace vcl {

namespace {

using namespace detail;

int binary_prec(const std::string& op, bool* right_assoc = nullptr) {
  const auto info = binary_op(op);
  if (!info) return kAtomPrec;
  if (right_assoc) *right_assoc = info->right_assoc;
  return info->prec;
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Unary: return e.postfix ? kPostfixPrec : kPrefixPrec;
    case ExprKind::Binary: return binary_prec(e.text);
    case ExprKind::Ternary: return kTernaryPrec;
    default: return kAtomPrec;
  }
}

std::string expr_text(const Expr& e, int min_prec);

std::string expr_raw(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::Var:
    case ExprKind::Opaque:
      return e.text;
    case ExprKind::Unary: {
      const auto& o = e.operands[0];
      if (e.postfix) return expr_text(o, kPostfixPrec) + e.text;
      // Parenthesize nested prefix operators so "- -x" never lexes as "--x".
      const bool nested = o.kind == ExprKind::Unary && !o.postfix;
      return e.text + (nested ? "(" + expr_raw(o) + ")" : expr_text(o, kPrefixPrec));
    }
    case ExprKind::Binary: {
      bool right = false;
      const int p = binary_prec(e.text, &right);
      const auto lhs = expr_text(e.operands[0], right ? p + 1 : p);
      const auto rhs = expr_text(e.operands[1], right ? p : p + 1);
      if (e.text == ",") return lhs + ", " + rhs;
      return lhs + " " + e.text + " " + rhs;
    }
    case ExprKind::Ternary:
      return expr_text(e.operands[0], 4) + " ? " + expr_text(e.operands[1], 1) + " : " +
             expr_text(e.operands[2], 3);
    case ExprKind::Call: {
      std::string out = e.text + "(";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        out += expr_text(e.operands[i], 2);
      }
      return out + ")";
    }
  }
  return e.text;
}

std::string expr_text(const Expr& e, int min_prec) {
  auto s = expr_raw(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 4, ' '); }

std::string stmt_text(const Stmt& s, int indent);

std::string body_text(const Stmt& body, int indent) {
  if (body.kind == StmtKind::Block) return " " + stmt_text(body, indent);
  return "\n" + pad(indent + 1) + stmt_text(body, indent + 1);
}

std::string decl_text(const Stmt& s) {
  std::string out = s.text + " ";
  for (std::size_t i = 0; i < s.decls.size(); ++i) {
    if (i) out += ", ";
    out += s.decls[i].name;
    if (s.decls[i].init) out += " = " + expr_text(*s.decls[i].init, 2);
  }
  return out;
}

std::string stmt_text(const Stmt& s, int indent) {
  switch (s.kind) {
    case StmtKind::Block: {
      if (s.children.empty()) return "{ }";
      std::string out = "{\n";
      for (const auto& c : s.children) out += pad(indent + 1) + stmt_text(c, indent + 1) + "\n";
      return out + pad(indent) + "}";
    }
    case StmtKind::If: {
      std::string out = "if (" + render(*s.expr) + ")" + body_text(s.then_branch(), indent);
      if (s.has_else()) {
        out += s.then_branch().kind == StmtKind::Block ? " else" : "\n" + pad(indent) + "else";
        const auto& e = s.else_branch();
        out += e.kind == StmtKind::If ? " " + stmt_text(e, indent) : body_text(e, indent);
      }
      return out;
    }
    case StmtKind::While:
      return "while (" + render(*s.expr) + ")" + body_text(s.body(), indent);
    case StmtKind::DoWhile: {
      const bool block = s.body().kind == StmtKind::Block;
      return "do" + body_text(s.body(), indent) + (block ? " " : "\n" + pad(indent)) + "while (" +
             render(*s.expr) + ");";
    }
    case StmtKind::For: {
      std::string out = "for (";
      if (!s.init.empty()) {
        const auto& i = s.init.front();
        out += i.kind == StmtKind::Decl ? decl_text(i) : render(*i.expr);
      }
      out += ";";
      if (s.expr) out += " " + render(*s.expr);
      out += ";";
      if (s.step) out += " " + render(*s.step);
      return out + ")" + body_text(s.body(), indent);
    }
    case StmtKind::Break: return "break;";
    case StmtKind::Continue: return "continue;";
    case StmtKind::Return: return s.expr ? "return " + render(*s.expr) + ";" : "return;";
    case StmtKind::ExprStmt: return render(*s.expr) + ";";
    case StmtKind::Decl: return decl_text(s) + ";";
    case StmtKind::Opaque: return s.text;
  }
  return s.text;
}

}  // namespace

std::string render(const Expr& expr) { return expr_raw(expr); }

std::string render(const Stmt& stmt, int indent) { return stmt_text(stmt, indent); }

std::string render(const StmtTree& tree) {
  if (tree.is_function) return tree.header + "\n" + stmt_text(tree.root, 0) + "\n";
  std::string out;
  for (const auto& c : tree.root.children) out += stmt_text(c, 0) + "\n";
  return out;
}

}  // namespace vcl
