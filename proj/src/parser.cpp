#include <algorithm>
#include <regex>

#include "precedence.hpp"
#include "vcl/cparse.hpp"
#include "vcl/util.hpp"

namespace vcl {

Expr Expr::unary(std::string op, Expr e, bool postfix) {
  Expr out{ExprKind::Unary, std::move(op), {}, postfix};
  out.operands.push_back(std::move(e));
  return out;
}

Expr Expr::binary(std::string op, Expr lhs, Expr rhs) {
  Expr out{ExprKind::Binary, std::move(op), {}, false};
  out.operands.push_back(std::move(lhs));
  out.operands.push_back(std::move(rhs));
  return out;
}

Expr Expr::ternary(Expr c, Expr t, Expr f) {
  Expr out{ExprKind::Ternary, "?:", {}, false};
  out.operands.push_back(std::move(c));
  out.operands.push_back(std::move(t));
  out.operands.push_back(std::move(f));
  return out;
}

Expr Expr::call(std::string name, std::vector<Expr> args) {
  return {ExprKind::Call, std::move(name), std::move(args), false};
}

std::string_view to_string(StmtKind kind) {
  switch (kind) {
    case StmtKind::Block: return "Block";
    case StmtKind::If: return "If";
    case StmtKind::While: return "While";
    case StmtKind::DoWhile: return "DoWhile";
    case StmtKind::For: return "For";
    case StmtKind::Break: return "Break";
    case StmtKind::Continue: return "Continue";
    case StmtKind::Return: return "Return";
    case StmtKind::ExprStmt: return "ExprStmt";
    case StmtKind::Decl: return "Decl";
    case StmtKind::Opaque: return "Opaque";
  }
  return "?";
}

Stmt Stmt::block(std::vector<Stmt> stmts) {
  Stmt s;
  s.kind = StmtKind::Block;
  s.children = std::move(stmts);
  return s;
}

Stmt Stmt::if_(Expr cond, Stmt then_branch) {
  Stmt s;
  s.kind = StmtKind::If;
  s.expr = std::move(cond);
  s.children.push_back(std::move(then_branch));
  return s;
}

Stmt Stmt::if_else(Expr cond, Stmt then_branch, Stmt else_branch) {
  Stmt s = if_(std::move(cond), std::move(then_branch));
  s.children.push_back(std::move(else_branch));
  return s;
}

Stmt Stmt::while_(Expr cond, Stmt body) {
  Stmt s;
  s.kind = StmtKind::While;
  s.expr = std::move(cond);
  s.children.push_back(std::move(body));
  return s;
}

Stmt Stmt::do_while(Stmt body, Expr cond) {
  Stmt s;
  s.kind = StmtKind::DoWhile;
  s.expr = std::move(cond);
  s.children.push_back(std::move(body));
  return s;
}

Stmt Stmt::break_() {
  Stmt s;
  s.kind = StmtKind::Break;
  return s;
}

Stmt Stmt::continue_() {
  Stmt s;
  s.kind = StmtKind::Continue;
  return s;
}

Stmt Stmt::expr_stmt(Expr e) {
  Stmt s;
  s.kind = StmtKind::ExprStmt;
  s.expr = std::move(e);
  return s;
}

Stmt Stmt::opaque(std::string raw) {
  Stmt s;
  s.kind = StmtKind::Opaque;
  s.text = std::move(raw);
  return s;
}

bool Stmt::operator==(const Stmt& o) const {
  return kind == o.kind && children == o.children && expr == o.expr && step == o.step &&
         init == o.init && text == o.text && decls == o.decls;
}

namespace {

using detail::binary_op;
using detail::kTernaryPrec;

bool is_prefix_op(std::string_view t) {
  return t == "!" || t == "~" || t == "-" || t == "+" || t == "++" || t == "--" || t == "&" ||
         t == "*";
}

bool is_integer_literal(const std::string& text) {
  static const std::regex re("^(0[xX][0-9a-fA-F]+|[0-9]+)[uUlL]*$");
  return std::regex_match(text, re);
}

bool is_type_word(std::string_view w) {
  static constexpr std::string_view words[] = {
      "void",  "char",     "short",  "int",      "long",     "float",  "double",
      "signed", "unsigned", "_Bool", "const",    "volatile", "struct", "union",
      "enum",  "static",   "extern", "register", "auto",     "inline", "restrict",
  };
  return std::find(std::begin(words), std::end(words), w) != std::end(words);
}

struct Fail {};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {
    const auto all = lex(src);
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto& t = all[i];
      if (t.significant()) {
        sig_.push_back(t);
        newline_after_.push_back(false);
      } else if (t.kind == TokenKind::Whitespace && !sig_.empty()) {
        for (std::size_t k = 0; k < t.text.size(); ++k) {
          if (t.text[k] != '\n') continue;
          std::size_t b = k;
          if (b > 0 && t.text[b - 1] == '\r') --b;
          if (b == 0 || t.text[b - 1] != '\\') newline_after_.back() = true;
        }
      }
    }
    match_brackets();
  }

  StmtTree parse_tree() {
    StmtTree tree;
    const std::size_t n = sig_.size();
    std::size_t k = 0;
    bool header_ok = n > 0;
    while (k < n && !is_punct(k, "{")) {
      if (is_punct(k, "(") || is_punct(k, "[")) {
        k = match_[k] + 1;
        continue;
      }
      if (is_punct(k, ";") || is_op(k, "=")) header_ok = false;
      ++k;
    }
    if (header_ok && k > 0 && k < n && match_[k] == n - 1 && looks_like_header(k)) {
      tree.is_function = true;
      tree.header = raw(0, k - 1);
      pos_ = k;
      tree.root = block(n);
      return tree;
    }
    pos_ = 0;
    std::vector<Stmt> stmts;
    while (pos_ < n) stmts.push_back(statement(n));
    tree.root = Stmt::block(std::move(stmts));
    if (n > 0) set_span(tree.root, 0, n - 1);
    return tree;
  }

  Expr parse_whole_expression() {
    if (sig_.empty()) return Expr::opaque("");
    return expr_or_opaque(0, sig_.size());
  }

 private:
  // ---- token helpers ------------------------------------------------------

  bool is_punct(std::size_t i, std::string_view t) const {
    return i < sig_.size() && sig_[i].kind == TokenKind::Punctuation && sig_[i].text == t;
  }
  bool is_op(std::size_t i, std::string_view t) const {
    return i < sig_.size() && sig_[i].kind == TokenKind::Operator && sig_[i].text == t;
  }
  bool is_keyword(std::size_t i, std::string_view t) const {
    return i < sig_.size() && sig_[i].kind == TokenKind::Keyword && sig_[i].text == t;
  }
  bool is_ident(std::size_t i) const {
    return i < sig_.size() && sig_[i].kind == TokenKind::Identifier;
  }

  std::string raw(std::size_t first, std::size_t last) const {
    const auto begin = sig_[first].offset;
    const auto end = sig_[last].offset + sig_[last].text.size();
    return std::string(src_.substr(begin, end - begin));
  }

  void set_span(Stmt& s, std::size_t first, std::size_t last) const {
    s.span = {first, last, sig_[first].line, sig_[last].line};
  }

  void match_brackets() {
    match_.assign(sig_.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < sig_.size(); ++i) {
      const auto& t = sig_[i];
      if (t.kind != TokenKind::Punctuation) continue;
      if (t.text == "(" || t.text == "[" || t.text == "{") {
        stack.push_back(i);
      } else if (t.text == ")" || t.text == "]" || t.text == "}") {
        const char want = t.text == ")" ? '(' : t.text == "]" ? '[' : '{';
        if (stack.empty()) throw ParseError("unbalanced '" + t.text + "'", t.line);
        const auto open = stack.back();
        if (sig_[open].text[0] != want)
          throw ParseError("'" + t.text + "' does not match '" + sig_[open].text + "' on line " +
                               std::to_string(sig_[open].line),
                           t.line);
        stack.pop_back();
        match_[open] = i;
        match_[i] = open;
      }
    }
    if (!stack.empty())
      throw ParseError("unclosed '" + sig_[stack.back()].text + "'", sig_[stack.back()].line);
  }

  bool looks_like_header(std::size_t brace) const {
    static constexpr std::string_view control[] = {"if",   "while", "for",    "do",   "switch",
                                                   "else", "return", "case", "goto", "typedef"};
    if (sig_[0].kind == TokenKind::Keyword &&
        std::find(std::begin(control), std::end(control), sig_[0].text) != std::end(control))
      return false;
    const auto& last = sig_[brace - 1];
    const bool ends_ok = is_punct(brace - 1, ")") || last.kind == TokenKind::Identifier ||
                         last.kind == TokenKind::Keyword;
    bool has_paren = false;
    for (std::size_t i = 0; i < brace; ++i) has_paren = has_paren || is_punct(i, "(");
    return ends_ok && has_paren;
  }

  // Index of the ';' ending the statement starting at b, or of the closing
  // brace of a `macro(...) { ... }` run, or limit - 1 if neither occurs.
  std::size_t statement_end(std::size_t b, std::size_t limit) const {
    std::size_t j = b;
    while (j < limit) {
      if (is_punct(j, "(") || is_punct(j, "[")) {
        j = match_[j] + 1;
      } else if (is_punct(j, "{")) {
        if (j > b && is_punct(j - 1, ")")) return match_[j];
        j = match_[j] + 1;
      } else if (is_punct(j, ";")) {
        return j;
      } else {
        ++j;
      }
    }
    return limit - 1;
  }

  // ---- statements ---------------------------------------------------------

  Stmt block(std::size_t limit) {
    const std::size_t open = pos_;
    const std::size_t close = match_[open];
    (void)limit;
    pos_ = open + 1;
    std::vector<Stmt> stmts;
    while (pos_ < close) stmts.push_back(statement(close));
    pos_ = close + 1;
    Stmt s = Stmt::block(std::move(stmts));
    set_span(s, open, close);
    return s;
  }

  Stmt opaque_run(std::size_t first, std::size_t last) {
    Stmt s = Stmt::opaque(raw(first, last));
    set_span(s, first, last);
    pos_ = last + 1;
    return s;
  }

  Stmt statement(std::size_t limit) {
    const std::size_t start = pos_;
    if (is_punct(start, "{")) return block(limit);
    if (is_punct(start, "#") && (start == 0 || newline_after_[start - 1])) {
      std::size_t j = start;
      while (j + 1 < limit && !newline_after_[j]) ++j;
      return opaque_run(start, j);
    }
    if (is_punct(start, ";")) return opaque_run(start, start);
    if (is_ident(start) && is_op(start + 1, ":") && start + 1 < limit)
      return opaque_run(start, start + 1);

    if (sig_[start].kind == TokenKind::Keyword) {
      const auto& kw = sig_[start].text;
      try {
        if (kw == "if") return if_statement(limit);
        if (kw == "while") return while_statement(limit);
        if (kw == "do") return do_statement(limit);
        if (kw == "for") return for_statement(limit);
        if (kw == "break" || kw == "continue") {
          if (!is_punct(start + 1, ";") || start + 1 >= limit) throw Fail{};
          Stmt s = kw == "break" ? Stmt::break_() : Stmt::continue_();
          set_span(s, start, start + 1);
          pos_ = start + 2;
          return s;
        }
        if (kw == "return") return return_statement(limit);
        if (kw == "switch") {
          if (!is_punct(start + 1, "(")) throw Fail{};
          const std::size_t close = match_[start + 1];
          if (is_punct(close + 1, "{") && close + 1 < limit)
            return opaque_run(start, match_[close + 1]);
          return opaque_run(start, statement_end(close + 1, limit));
        }
      } catch (const Fail&) {
        pos_ = start;
      }
    }

    const std::size_t end = statement_end(start, limit);
    if (!is_punct(end, ";")) return opaque_run(start, end);
    if (looks_like_decl(start)) {
      try {
        Stmt s = declaration(start, end);
        set_span(s, start, end);
        pos_ = end + 1;
        return s;
      } catch (const Fail&) {
        return opaque_run(start, end);
      }
    }
    if (sig_[start].kind == TokenKind::Keyword && sig_[start].text != "sizeof")
      return opaque_run(start, end);
    Stmt s = Stmt::expr_stmt(expr_or_opaque(start, end));
    set_span(s, start, end);
    pos_ = end + 1;
    return s;
  }

  // Parses `( ... )` at pos_ and returns the condition; leaves pos_ after ')'.
  Expr paren_condition(std::size_t limit) {
    if (!is_punct(pos_, "(") || pos_ >= limit) throw Fail{};
    const std::size_t close = match_[pos_];
    if (close == pos_ + 1 || close >= limit) throw Fail{};
    Expr cond = expr_or_opaque(pos_ + 1, close);
    pos_ = close + 1;
    if (pos_ >= limit) throw Fail{};
    return cond;
  }

  Stmt if_statement(std::size_t limit) {
    const std::size_t start = pos_++;
    Expr cond = paren_condition(limit);
    Stmt then_branch = statement(limit);
    Stmt s = Stmt::if_(std::move(cond), std::move(then_branch));
    if (pos_ < limit && is_keyword(pos_, "else")) {
      ++pos_;
      if (pos_ >= limit) throw Fail{};
      s.children.push_back(statement(limit));
    }
    set_span(s, start, pos_ - 1);
    return s;
  }

  Stmt while_statement(std::size_t limit) {
    const std::size_t start = pos_++;
    Expr cond = paren_condition(limit);
    Stmt s = Stmt::while_(std::move(cond), statement(limit));
    set_span(s, start, pos_ - 1);
    return s;
  }

  Stmt do_statement(std::size_t limit) {
    const std::size_t start = pos_++;
    if (pos_ >= limit) throw Fail{};
    Stmt body = statement(limit);
    if (!is_keyword(pos_, "while")) throw Fail{};
    ++pos_;
    if (!is_punct(pos_, "(")) throw Fail{};
    const std::size_t close = match_[pos_];
    if (close == pos_ + 1 || !is_punct(close + 1, ";") || close + 1 >= limit) throw Fail{};
    Expr cond = expr_or_opaque(pos_ + 1, close);
    pos_ = close + 2;
    Stmt s = Stmt::do_while(std::move(body), std::move(cond));
    set_span(s, start, pos_ - 1);
    return s;
  }

  Stmt for_statement(std::size_t limit) {
    const std::size_t start = pos_++;
    if (!is_punct(pos_, "(")) throw Fail{};
    const std::size_t open = pos_;
    const std::size_t close = match_[open];
    std::vector<std::size_t> semis;
    for (std::size_t j = open + 1; j < close;) {
      if (is_punct(j, "(") || is_punct(j, "[") || is_punct(j, "{")) {
        j = match_[j] + 1;
        continue;
      }
      if (is_punct(j, ";")) semis.push_back(j);
      ++j;
    }
    if (semis.size() != 2 || close + 1 >= limit) throw Fail{};

    Stmt s;
    s.kind = StmtKind::For;
    if (semis[0] > open + 1) {
      const std::size_t b = open + 1, e = semis[0];
      Stmt init = looks_like_decl(b) ? declaration(b, e) : Stmt::expr_stmt(expr_or_opaque(b, e));
      set_span(init, b, e - 1);
      s.init.push_back(std::move(init));
    }
    if (semis[1] > semis[0] + 1) s.expr = expr_or_opaque(semis[0] + 1, semis[1]);
    if (close > semis[1] + 1) s.step = expr_or_opaque(semis[1] + 1, close);
    pos_ = close + 1;
    s.children.push_back(statement(limit));
    set_span(s, start, pos_ - 1);
    return s;
  }

  Stmt return_statement(std::size_t limit) {
    const std::size_t start = pos_;
    const std::size_t end = statement_end(start + 1, limit);
    if (!is_punct(end, ";")) throw Fail{};
    Stmt s;
    s.kind = StmtKind::Return;
    if (end > start + 1) s.expr = expr_or_opaque(start + 1, end);
    set_span(s, start, end);
    pos_ = end + 1;
    return s;
  }

  bool looks_like_decl(std::size_t b) const {
    if (b >= sig_.size()) return false;
    if (sig_[b].kind == TokenKind::Keyword) return is_type_word(sig_[b].text);
    return is_ident(b) && is_ident(b + 1);
  }

  // Declaration over tokens [b, e) (e excluded, normally the ';').
  Stmt declaration(std::size_t b, std::size_t e) {
    std::size_t j = b;
    bool base = false;
    while (j < e && sig_[j].kind == TokenKind::Keyword && is_type_word(sig_[j].text)) {
      const auto& w = sig_[j].text;
      if (w == "struct" || w == "union" || w == "enum") {
        if (!is_ident(j + 1)) throw Fail{};
        ++j;
      }
      if (w != "const" && w != "volatile" && w != "static" && w != "extern" &&
          w != "register" && w != "auto" && w != "inline" && w != "restrict")
        base = true;
      ++j;
    }
    if (!base && is_ident(j) && is_ident(j + 1) && j + 1 < e) ++j;  // typedef name
    if (j == b || j >= e) throw Fail{};

    Stmt s;
    s.kind = StmtKind::Decl;
    s.text = raw(b, j - 1);
    while (true) {
      if (!is_ident(j) || j >= e) throw Fail{};
      Declarator d{sig_[j].text, std::nullopt};
      ++j;
      if (j < e && is_op(j, "=")) {
        std::size_t k = j + 1;
        while (k < e && !is_punct(k, ",")) {
          if (is_punct(k, "{")) throw Fail{};
          k = (is_punct(k, "(") || is_punct(k, "[")) ? match_[k] + 1 : k + 1;
        }
        if (k == j + 1) throw Fail{};
        d.init = expr_or_opaque(j + 1, k);
        j = k;
      }
      s.decls.push_back(std::move(d));
      if (j == e) break;
      if (!is_punct(j, ",")) throw Fail{};
      ++j;
    }
    return s;
  }

  // ---- expressions --------------------------------------------------------

  Expr expr_or_opaque(std::size_t b, std::size_t e) {
    try {
      std::size_t pos = b;
      Expr x = expression(pos, e, 1);
      if (pos != e) throw Fail{};
      return x;
    } catch (const Fail&) {
      return Expr::opaque(raw(b, e - 1));
    }
  }

  Expr expression(std::size_t& pos, std::size_t e, int min_prec) {
    Expr lhs = unary(pos, e);
    while (pos < e) {
      const auto& t = sig_[pos];
      if (t.kind != TokenKind::Operator && !(t.kind == TokenKind::Punctuation && t.text == ","))
        break;
      if (t.text == "?") {
        if (kTernaryPrec < min_prec) break;
        ++pos;
        Expr mid = expression(pos, e, 1);
        if (!is_op(pos, ":") || pos >= e) throw Fail{};
        ++pos;
        Expr rhs = expression(pos, e, kTernaryPrec);
        lhs = Expr::ternary(std::move(lhs), std::move(mid), std::move(rhs));
        continue;
      }
      const auto op = binary_op(t.text);
      if (!op || op->prec < min_prec) break;
      ++pos;
      const int next = op->right_assoc ? op->prec : op->prec + 1;
      Expr rhs = expression(pos, e, next);
      lhs = Expr::binary(t.text, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  bool looks_like_type_name(std::size_t b, std::size_t e) const {
    if (b >= e) return false;
    bool type_word = false;
    for (std::size_t i = b; i < e; ++i) {
      const auto& t = sig_[i];
      if (t.kind == TokenKind::Keyword && is_type_word(t.text)) {
        type_word = true;
      } else if (t.kind == TokenKind::Identifier) {
        if (t.text.size() > 2 && t.text.ends_with("_t")) type_word = true;
      } else if (!(t.kind == TokenKind::Operator && t.text == "*")) {
        return false;
      }
    }
    return type_word || is_op(e - 1, "*");
  }

  bool starts_operand(std::size_t i, std::size_t e) const {
    if (i >= e) return false;
    const auto& t = sig_[i];
    switch (t.kind) {
      case TokenKind::Identifier:
      case TokenKind::IntegerLiteral:
      case TokenKind::StringLiteral:
      case TokenKind::CharLiteral:
        return true;
      case TokenKind::Keyword:
        return t.text == "sizeof";
      case TokenKind::Punctuation:
        return t.text == "(";
      case TokenKind::Operator:
        return is_prefix_op(t.text);
      default:
        return false;
    }
  }

  Expr unary(std::size_t& pos, std::size_t e) {
    if (pos >= e) throw Fail{};
    const auto& t = sig_[pos];
    const std::size_t start = pos;
    if (t.kind == TokenKind::Operator && is_prefix_op(t.text)) {
      ++pos;
      Expr operand = unary(pos, e);
      return Expr::unary(t.text, std::move(operand));
    }
    if (t.kind == TokenKind::Keyword && (t.text == "sizeof" || t.text == "_Alignof")) {
      ++pos;
      if (is_punct(pos, "(") && pos < e) {
        pos = match_[pos] + 1;
        if (pos > e) throw Fail{};
      } else {
        unary(pos, e);
      }
      return Expr::opaque(raw(start, pos - 1));
    }
    if (is_punct(pos, "(")) {
      const std::size_t close = match_[pos];
      if (close >= e || close == pos + 1) throw Fail{};
      if (looks_like_type_name(pos + 1, close) && starts_operand(close + 1, e)) {
        pos = close + 1;
        unary(pos, e);
        return Expr::opaque(raw(start, pos - 1));
      }
      Expr inner = expr_or_opaque(pos + 1, close);
      const bool structured = inner.kind != ExprKind::Opaque;
      pos = close + 1;
      return postfix(structured ? std::move(inner) : Expr::opaque(raw(start, close)), structured,
                     start, pos, e);
    }
    switch (t.kind) {
      case TokenKind::IntegerLiteral: {
        ++pos;
        const bool plain = is_integer_literal(t.text);
        return postfix(plain ? Expr::int_lit(t.text) : Expr::opaque(t.text), plain, start, pos, e);
      }
      case TokenKind::StringLiteral:
      case TokenKind::CharLiteral: {
        ++pos;
        while (pos < e && sig_[pos].kind == TokenKind::StringLiteral) ++pos;
        return postfix(Expr::opaque(raw(start, pos - 1)), false, start, pos, e);
      }
      case TokenKind::Identifier: {
        ++pos;
        if (is_punct(pos, "(") && pos < e) {
          const std::size_t close = match_[pos];
          if (close >= e) throw Fail{};
          std::vector<Expr> args;
          std::size_t a = pos + 1;
          for (std::size_t j = pos + 1; j <= close;) {
            if (j == close || is_punct(j, ",")) {
              if (j == a) {
                if (j == close && args.empty() && a == pos + 1) break;  // f()
                throw Fail{};
              }
              args.push_back(expr_or_opaque(a, j));
              a = j + 1;
              if (j == close) break;
              ++j;
              continue;
            }
            j = (is_punct(j, "(") || is_punct(j, "[") || is_punct(j, "{")) ? match_[j] + 1 : j + 1;
          }
          pos = close + 1;
          return postfix(Expr::call(t.text, std::move(args)), true, start, pos, e);
        }
        return postfix(Expr::var(t.text), true, start, pos, e);
      }
      default:
        throw Fail{};
    }
  }

  // Applies postfix operators. Member access, indexing and calls through
  // non-identifiers turn the whole chain into an Opaque atom.
  Expr postfix(Expr atom, bool structured, std::size_t start, std::size_t& pos, std::size_t e) {
    while (pos < e) {
      if (is_punct(pos, "[") || is_punct(pos, "(") || is_op(pos, ".") || is_op(pos, "->")) {
        while (pos < e) {
          if (is_punct(pos, "[") || is_punct(pos, "(")) {
            pos = match_[pos] + 1;
          } else if (is_op(pos, ".") || is_op(pos, "->")) {
            if (!is_ident(pos + 1) || pos + 1 >= e) throw Fail{};
            pos += 2;
          } else if (is_op(pos, "++") || is_op(pos, "--")) {
            ++pos;
          } else {
            break;
          }
        }
        if (pos > e) throw Fail{};
        atom = Expr::opaque(raw(start, pos - 1));
        structured = false;
      } else if (is_op(pos, "++") || is_op(pos, "--")) {
        if (structured) {
          atom = Expr::unary(sig_[pos].text, std::move(atom), true);
        } else {
          atom = Expr::opaque(raw(start, pos));
        }
        ++pos;
      } else {
        break;
      }
    }
    return atom;
  }

  std::string_view src_;
  std::vector<Token> sig_;
  std::vector<bool> newline_after_;
  std::vector<std::size_t> match_;
  std::size_t pos_ = 0;
};

}  // namespace

StmtTree parse_function(std::string_view code) { return Parser(code).parse_tree(); }

Expr parse_expression(std::string_view code) { return Parser(code).parse_whole_expression(); }

}  // namespace vcl
