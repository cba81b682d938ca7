#pragma once

#include <optional>
#include <string_view>

namespace vcl::detail {

struct BinaryOp {
  int prec;
  bool right_assoc;
};

// C binary operator precedence, loosest (comma) to tightest (multiplicative).
// The conditional operator sits at 3, prefix unary at 14, postfix at 15.
inline std::optional<BinaryOp> binary_op(std::string_view op) {
  struct Entry {
    std::string_view op;
    BinaryOp info;
  };
  static constexpr Entry table[] = {
      {",", {1, false}},   {"=", {2, true}},    {"+=", {2, true}},   {"-=", {2, true}},
      {"*=", {2, true}},   {"/=", {2, true}},   {"%=", {2, true}},   {"&=", {2, true}},
      {"|=", {2, true}},   {"^=", {2, true}},   {"<<=", {2, true}},  {">>=", {2, true}},
      {"||", {4, false}},  {"&&", {5, false}},  {"|", {6, false}},   {"^", {7, false}},
      {"&", {8, false}},   {"==", {9, false}},  {"!=", {9, false}},  {"<", {10, false}},
      {"<=", {10, false}}, {">", {10, false}},  {">=", {10, false}}, {"<<", {11, false}},
      {">>", {11, false}}, {"+", {12, false}},  {"-", {12, false}},  {"*", {13, false}},
      {"/", {13, false}},  {"%", {13, false}},
  };
  for (const auto& e : table)
    if (e.op == op) return e.info;
  return std::nullopt;
}

inline constexpr int kTernaryPrec = 3;
inline constexpr int kPrefixPrec = 14;
inline constexpr int kPostfixPrec = 15;
inline constexpr int kAtomPrec = 16;

}  // namespace vcl::detail
