#include <algorithm>
#include <iterator>
#include <cctype>

#include "vcl/cparse.hpp"
#include "vcl/util.hpp"

namespace vcl {

namespace {

constexpr std::string_view kKeywords[] = {
    "auto",     "break",    "case",     "char",      "const",    "continue", "default",
    "do",       "double",   "else",     "enum",      "extern",   "float",    "for",
    "goto",     "if",       "inline",   "int",       "long",     "register", "restrict",
    "return",   "short",    "signed",   "sizeof",    "static",   "struct",   "switch",
    "typedef",  "union",    "unsigned", "void",      "volatile", "while",    "_Bool",
    "_Complex", "_Alignas", "_Alignof", "_Atomic",   "_Generic", "_Noreturn",
    "_Static_assert",       "_Thread_local",         "__inline",
};

// Longest first so the scan below is a maximal munch.
constexpr std::string_view kOperators[] = {
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##", "+",
    "-",   "*",   "/",   "%",  "<",  ">",  "=",  "!",  "~",  "&",  "|",  "^",
    "?",   ":",   ".",   "@",  "`",  "$",  "\\",
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) out.push_back(next());
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  bool at_line_splice() const {
    return peek() == '\\' && (peek(1) == '\n' || (peek(1) == '\r' && peek(2) == '\n'));
  }

  Token make(TokenKind kind, std::size_t start, int line) {
    return Token{kind, std::string(src_.substr(start, pos_ - start)), line, start};
  }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i)
      if (src_[pos_++] == '\n') ++line_;
  }

  Token next() {
    const std::size_t start = pos_;
    const int line = line_;
    const unsigned char c = static_cast<unsigned char>(peek());

    if (std::isspace(c) || at_line_splice()) {
      while (pos_ < src_.size() &&
             (std::isspace(static_cast<unsigned char>(peek())) || at_line_splice()))
        advance(peek() == '\\' ? (peek(1) == '\r' ? 3 : 2) : 1);
      return make(TokenKind::Whitespace, start, line);
    }
    if (c == '/' && peek(1) == '/') {
      while (pos_ < src_.size() && peek() != '\n') advance();
      return make(TokenKind::Comment, start, line);
    }
    if (c == '/' && peek(1) == '*') {
      advance(2);
      while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
      if (pos_ >= src_.size()) throw ParseError("unterminated block comment", line);
      advance(2);
      return make(TokenKind::Comment, start, line);
    }
    if (c == '"' || c == '\'') return quoted(static_cast<char>(c), start, line);
    if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      advance();
      while (pos_ < src_.size()) {
        const char d = peek();
        if ((d == '+' || d == '-') && std::string_view("eEpP").find(src_[pos_ - 1]) !=
                                          std::string_view::npos) {
          advance();
        } else if (ident_char(static_cast<unsigned char>(d)) || d == '.') {
          advance();
        } else {
          break;
        }
      }
      return make(TokenKind::IntegerLiteral, start, line);
    }
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(peek()))) advance();
      auto tok = make(TokenKind::Identifier, start, line);
      if (is_c_keyword(tok.text)) tok.kind = TokenKind::Keyword;
      return tok;
    }
    if (std::string_view("()[]{};,#").find(static_cast<char>(c)) != std::string_view::npos) {
      advance();
      return make(TokenKind::Punctuation, start, line);
    }
    for (auto op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        advance(op.size());
        return make(TokenKind::Operator, start, line);
      }
    }
    // Control characters and other stray bytes.
    advance();
    return make(TokenKind::Punctuation, start, line);
  }

  Token quoted(char quote, std::size_t start, int line) {
    advance();
    while (true) {
      if (pos_ >= src_.size() || peek() == '\n')
        throw ParseError(quote == '"' ? "unterminated string literal"
                                      : "unterminated character literal",
                         line);
      const char d = peek();
      if (d == '\\') {
        advance(peek(1) == '\r' && peek(2) == '\n' ? 3 : 2);
        continue;
      }
      advance();
      if (d == quote) break;
    }
    return make(quote == '"' ? TokenKind::StringLiteral : TokenKind::CharLiteral, start, line);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

bool is_c_keyword(std::string_view word) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), word) != std::end(kKeywords);
}

std::vector<Token> lex(std::string_view code) { return Lexer(code).run(); }

}  // namespace vcl
