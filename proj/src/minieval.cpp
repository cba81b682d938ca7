#include "vcl/minieval.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "vcl/util.hpp"

namespace vcl {

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Completed: return "completed";
    case Outcome::Returned: return "returned";
    case Outcome::BudgetExhausted: return "budget-exhausted";
    case Outcome::UnboundVariable: return "unbound-variable";
    case Outcome::DivisionByZero: return "division-by-zero";
  }
  return "?";
}

namespace {

using i64 = std::int64_t;
using u64 = std::uint64_t;

std::optional<i64> integer_value(std::string_view text) {
  while (!text.empty() && (text.back() == 'u' || text.back() == 'U' || text.back() == 'l' ||
                           text.back() == 'L'))
    text.remove_suffix(1);
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    text.remove_prefix(2);
  } else if (text.size() > 1 && text[0] == '0') {
    base = 8;
    text.remove_prefix(1);
  }
  u64 v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return static_cast<i64>(v);
}

bool is_assignment(const std::string& op) {
  return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" ||
         op == "<<=" || op == ">>=" || op == "&=" || op == "^=" || op == "|=";
}

std::optional<std::string> expr_reason(const Expr& root) {
  std::optional<std::string> reason;
  for_each_expr(root, [&](const Expr& e) {
    if (reason) return;
    switch (e.kind) {
      case ExprKind::Opaque: reason = "opaque expression '" + e.text + "'"; break;
      case ExprKind::Call: reason = "call to '" + e.text + "'"; break;
      case ExprKind::IntLit:
        if (!integer_value(e.text)) reason = "unsupported literal '" + e.text + "'";
        break;
      case ExprKind::Unary:
        if (e.text == "&" || e.text == "*") reason = "pointer operator '" + e.text + "'";
        else if ((e.text == "++" || e.text == "--") && e.operands[0].kind != ExprKind::Var)
          reason = "increment of a non-variable";
        break;
      case ExprKind::Binary:
        if (is_assignment(e.text) && e.operands[0].kind != ExprKind::Var)
          reason = "assignment to a non-variable";
        break;
      default: break;
    }
  });
  return reason;
}

struct Stop {
  Outcome outcome;
  std::string detail;
};

enum class Flow { Normal, Break, Continue, Return };

class Interpreter {
 public:
  Interpreter(const Env& inputs, std::size_t budget) : budget_(budget) {
    frames_.emplace_back();
    for (const auto& [k, v] : inputs) frames_[0][k] = v;
  }

  Trace run(const Stmt& root) {
    try {
      if (exec(root) == Flow::Return) trace_.outcome = Outcome::Returned;
    } catch (const Stop& stop) {
      trace_.outcome = stop.outcome;
      trace_.detail = stop.detail;
    }
    for (const auto& [k, v] : frames_[0])
      if (v) trace_.final_env[k] = *v;
    return std::move(trace_);
  }

 private:
  using Frame = std::map<std::string, std::optional<i64>>;

  struct Scope {
    explicit Scope(std::vector<Frame>& f) : frames(f) { frames.emplace_back(); }
    ~Scope() { frames.pop_back(); }
    std::vector<Frame>& frames;
  };

  void tick() {
    if (trace_.steps == budget_) throw Stop{Outcome::BudgetExhausted, {}};
    ++trace_.steps;
  }

  std::optional<i64>* slot(const std::string& name) {
    for (auto f = frames_.rbegin(); f != frames_.rend(); ++f) {
      auto it = f->find(name);
      if (it != f->end()) return &it->second;
    }
    return nullptr;
  }

  i64 read(const std::string& name) {
    auto* s = slot(name);
    if (!s || !*s) throw Stop{Outcome::UnboundVariable, name};
    return **s;
  }

  void write(const std::string& name, i64 value) {
    auto* s = slot(name);
    if (!s) throw Stop{Outcome::UnboundVariable, name};
    *s = value;
    trace_.events.emplace_back(name, value);
  }

  static i64 wrap(u64 v) { return static_cast<i64>(v); }

  i64 arith(const std::string& op, i64 a, i64 b) {
    const u64 ua = static_cast<u64>(a), ub = static_cast<u64>(b);
    if (op == "+") return wrap(ua + ub);
    if (op == "-") return wrap(ua - ub);
    if (op == "*") return wrap(ua * ub);
    if (op == "/" || op == "%") {
      if (b == 0) throw Stop{Outcome::DivisionByZero, {}};
      if (a == std::numeric_limits<i64>::min() && b == -1) return op == "/" ? a : 0;
      return op == "/" ? a / b : a % b;
    }
    if (op == "<<") return wrap(ua << (ub & 63));
    if (op == ">>") return a >> (ub & 63);
    if (op == "&") return a & b;
    if (op == "|") return a | b;
    if (op == "^") return a ^ b;
    if (op == "<") return a < b;
    if (op == ">") return a > b;
    if (op == "<=") return a <= b;
    if (op == ">=") return a >= b;
    if (op == "==") return a == b;
    if (op == "!=") return a != b;
    throw UnsupportedError("operator '" + op + "'");
  }

  i64 eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return *integer_value(e.text);
      case ExprKind::Var: return read(e.text);
      case ExprKind::Unary: {
        const auto& op = e.text;
        if (op == "++" || op == "--") {
          const auto& name = e.operands[0].text;
          const i64 old = read(name);
          const i64 now = wrap(static_cast<u64>(old) + (op == "++" ? 1u : ~u64{0}));
          write(name, now);
          return e.postfix ? old : now;
        }
        const i64 v = eval(e.operands[0]);
        if (op == "-") return wrap(u64{0} - static_cast<u64>(v));
        if (op == "+") return v;
        if (op == "!") return v == 0;
        if (op == "~") return ~v;
        throw UnsupportedError("unary operator '" + op + "'");
      }
      case ExprKind::Binary: {
        const auto& op = e.text;
        if (op == "&&") return eval(e.operands[0]) != 0 && eval(e.operands[1]) != 0;
        if (op == "||") return eval(e.operands[0]) != 0 || eval(e.operands[1]) != 0;
        if (op == ",") {
          eval(e.operands[0]);
          return eval(e.operands[1]);
        }
        if (is_assignment(op)) {
          const auto& name = e.operands[0].text;
          const i64 rhs = eval(e.operands[1]);
          const i64 value =
              op == "=" ? rhs : arith(op.substr(0, op.size() - 1), read(name), rhs);
          write(name, value);
          return value;
        }
        const i64 a = eval(e.operands[0]);
        return arith(op, a, eval(e.operands[1]));
      }
      case ExprKind::Ternary:
        return eval(e.operands[0]) != 0 ? eval(e.operands[1]) : eval(e.operands[2]);
      default: throw UnsupportedError("expression outside the interpretable subset");
    }
  }

  bool condition(const std::optional<Expr>& c) {
    tick();
    return !c || eval(*c) != 0;
  }

  Flow exec(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Block: {
        Scope scope(frames_);
        for (const auto& c : s.children)
          if (auto f = exec(c); f != Flow::Normal) return f;
        return Flow::Normal;
      }
      case StmtKind::If:
        if (condition(s.expr)) return exec(s.then_branch());
        return s.has_else() ? exec(s.else_branch()) : Flow::Normal;
      case StmtKind::While:
        while (condition(s.expr)) {
          const auto f = exec(s.body());
          if (f == Flow::Break) break;
          if (f == Flow::Return) return f;
        }
        return Flow::Normal;
      case StmtKind::DoWhile:
        do {
          const auto f = exec(s.body());
          if (f == Flow::Break) break;
          if (f == Flow::Return) return f;
        } while (condition(s.expr));
        return Flow::Normal;
      case StmtKind::For: {
        Scope scope(frames_);
        for (const auto& i : s.init) exec(i);
        // A missing condition still costs a step per iteration, so `for (;;) { }`
        // exhausts the budget instead of spinning.
        while (condition(s.expr)) {
          const auto f = exec(s.body());
          if (f == Flow::Break) break;
          if (f == Flow::Return) return f;
          if (s.step) {
            tick();
            eval(*s.step);
          }
        }
        return Flow::Normal;
      }
      case StmtKind::Break: tick(); return Flow::Break;
      case StmtKind::Continue: tick(); return Flow::Continue;
      case StmtKind::Return:
        tick();
        if (s.expr) trace_.return_value = eval(*s.expr);
        return Flow::Return;
      case StmtKind::ExprStmt: tick(); eval(*s.expr); return Flow::Normal;
      case StmtKind::Decl:
        tick();
        for (const auto& d : s.decls) {
          std::optional<i64> v;
          if (d.init) v = eval(*d.init);
          frames_.back()[d.name] = v;
          if (v) trace_.events.emplace_back(d.name, *v);
        }
        return Flow::Normal;
      case StmtKind::Opaque: break;
    }
    throw UnsupportedError("statement outside the interpretable subset");
  }

  std::size_t budget_;
  std::vector<Frame> frames_;
  Trace trace_;
};

}  // namespace

std::optional<std::string> uninterpretable_reason(const StmtTree& tree) {
  std::optional<std::string> reason;
  for_each_stmt(tree.root, [&](const Stmt& s) {
    if (reason) return;
    if (s.kind == StmtKind::Opaque) {
      reason = "opaque statement '" + s.text + "'";
      return;
    }
    for (const auto* e : {s.expr ? &*s.expr : nullptr, s.step ? &*s.step : nullptr})
      if (e && !reason) reason = expr_reason(*e);
    for (const auto& d : s.decls)
      if (d.init && !reason) reason = expr_reason(*d.init);
  });
  return reason;
}

Trace interpret(const StmtTree& tree, const Env& inputs, std::size_t step_budget) {
  if (step_budget == 0) throw ConfigError("step budget must be positive");
  if (auto reason = uninterpretable_reason(tree))
    throw UnsupportedError("cannot interpret: " + *reason);
  return Interpreter(inputs, step_budget).run(tree.root);
}

std::set<std::string> free_variables(const StmtTree& tree) {
  std::set<std::string> used, declared;
  for_each_expr(tree.root, [&](const Expr& e) {
    if (e.kind == ExprKind::Var) used.insert(e.text);
  });
  for_each_stmt(tree.root, [&](const Stmt& s) {
    for (const auto& d : s.decls) declared.insert(d.name);
  });
  std::set<std::string> out;
  std::set_difference(used.begin(), used.end(), declared.begin(), declared.end(),
                      std::inserter(out, out.end()));
  return out;
}

bool same_behavior(const Trace& a, const Trace& b) {
  if (a.outcome == Outcome::BudgetExhausted && b.outcome == Outcome::BudgetExhausted) {
    const auto n = std::min(a.events.size(), b.events.size());
    return std::equal(a.events.begin(), a.events.begin() + static_cast<std::ptrdiff_t>(n),
                      b.events.begin());
  }
  return a.outcome == b.outcome && a.events == b.events && a.final_env == b.final_env &&
         a.return_value == b.return_value && a.detail == b.detail;
}

const std::vector<std::int64_t>& input_pool() {
  static const std::vector<std::int64_t> pool{
      -3, -2, -1, 0, 1, 2, 3, std::numeric_limits<i64>::min(), std::numeric_limits<i64>::max()};
  return pool;
}

Env random_env(const std::set<std::string>& variables, std::uint64_t seed, std::size_t trial) {
  Rng rng(derive_seed(seed, trial));
  const auto& pool = input_pool();
  Env env;
  for (const auto& v : variables) env[v] = pool[uniform_below(rng, pool.size())];
  return env;
}

EquivalenceVerdict equivalent(const StmtTree& a, const StmtTree& b, std::size_t trials,
                              std::uint64_t seed, std::size_t step_budget) {
  for (const auto* t : {&a, &b})
    if (auto reason = uninterpretable_reason(*t))
      throw UnsupportedError("cannot interpret: " + *reason);
  auto vars = free_variables(a);
  vars.merge(free_variables(b));
  EquivalenceVerdict verdict;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto env = random_env(vars, seed, trial);
    auto ta = interpret(a, env, step_budget);
    auto tb = interpret(b, env, step_budget);
    ++verdict.trials_run;
    if (!same_behavior(ta, tb)) {
      verdict.equivalent = false;
      verdict.witness = env;
      verdict.left = std::move(ta);
      verdict.right = std::move(tb);
      break;
    }
  }
  return verdict;
}

}  // namespace vcl
