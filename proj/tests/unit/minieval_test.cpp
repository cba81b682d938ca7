#include <gtest/gtest.h>

#include <climits>

#include "fixtures.hpp"
#include "vcl/util.hpp"
#include "vcl/augment.hpp"
#include "vcl/minieval.hpp"

namespace {

using namespace vcl;

Trace run(const std::string& code, const Env& in = {}, std::size_t budget = 10000) {
  return interpret(parse_function(code), in, budget);
}

TEST(Interpret, CountdownSteps) {
  // 1 assignment + 4 condition checks + 3 body statements
  const auto t = run("x = 3; while (x > 0) { x = x - 1; }", {{"x", 9}});
  EXPECT_EQ(t.outcome, Outcome::Completed);
  EXPECT_EQ(t.final_env.at("x"), 0);
  EXPECT_EQ(t.steps, 8u);
  EXPECT_EQ(t.events.size(), 4u);
}

TEST(Interpret, BudgetExhausted) {
  const auto t = run("while (1) { }", {}, 500);
  EXPECT_EQ(t.outcome, Outcome::BudgetExhausted);
  EXPECT_EQ(t.steps, 500u);
  EXPECT_EQ(run("for (;;) { }", {}, 37).steps, 37u);
}

TEST(Interpret, DivisionByZero) {
  const auto t = run("y = a / b;", {{"a", 4}, {"b", 0}});
  EXPECT_EQ(t.outcome, Outcome::DivisionByZero);
  EXPECT_EQ(run("y = a % b;", {{"a", 4}, {"b", 0}}).outcome, Outcome::DivisionByZero);
}

TEST(Interpret, UnboundVariable) {
  const auto t = run("y = q + 1;");
  EXPECT_EQ(t.outcome, Outcome::UnboundVariable);
  EXPECT_EQ(t.detail, "q");
  EXPECT_EQ(run("int z; y = z;", {{"y", 0}}).outcome, Outcome::UnboundVariable);
}

TEST(Interpret, CSemantics) {
  const Env in{{"a", -7}, {"b", 2}, {"r", 0}};
  EXPECT_EQ(run("r = a / b;", in).final_env.at("r"), -3);
  EXPECT_EQ(run("r = a % b;", in).final_env.at("r"), -1);
  EXPECT_EQ(run("r = (a < b) + (a == a) * 2;", in).final_env.at("r"), 3);
  // short circuit: the right operand would divide by zero
  EXPECT_EQ(run("r = 0 && a / 0;", in).outcome, Outcome::Completed);
  EXPECT_EQ(run("r = 1 || a / 0;", in).final_env.at("r"), 1);
  EXPECT_EQ(run("r = b++ + ++b;", in).final_env.at("r"), 6);
  EXPECT_EQ(run("r = a > 0 ? 1 : -1;", in).final_env.at("r"), -1);
  EXPECT_EQ(run("r += 5; r <<= 2; r ^= 1;", in).final_env.at("r"), 21);
}

TEST(Interpret, WrappingArithmetic) {
  const Env in{{"a", LLONG_MAX}, {"m", LLONG_MIN}, {"r", 0}};
  EXPECT_EQ(run("r = a + 1;", in).final_env.at("r"), LLONG_MIN);
  EXPECT_EQ(run("r = m / -1;", in).final_env.at("r"), LLONG_MIN);
  EXPECT_EQ(run("r = m % -1;", in).final_env.at("r"), 0);
  EXPECT_EQ(run("r = -m;", in).final_env.at("r"), LLONG_MIN);
  EXPECT_EQ(run("r = 1 << 65;", in).final_env.at("r"), 2);
}

TEST(Interpret, ReturnAndScopes) {
  const auto t = run("int f(int a) { int k = a * 2; { int a = 1; k += a; } return k; }",
                     {{"a", 5}});
  EXPECT_EQ(t.outcome, Outcome::Returned);
  EXPECT_EQ(t.return_value, std::optional<std::int64_t>(11));
  // locals do not leak into the final environment
  EXPECT_EQ(t.final_env, (Env{{"a", 5}}));
}

TEST(Interpret, BreakContinueDoFor) {
  const auto t = run("s = 0; for (i = 0; i < 10; i++) { if (i == 6) break; if (i % 2) continue; s += i; }",
                     {{"s", 0}, {"i", 0}});
  EXPECT_EQ(t.final_env.at("s"), 6);
  EXPECT_EQ(t.final_env.at("i"), 6);
  EXPECT_EQ(run("do { n--; } while (n > 0);", {{"n", -4}}).final_env.at("n"), -5);
}

TEST(Interpret, RejectsOutsideSubset) {
  EXPECT_THROW(run("f(x);", {{"x", 1}}), UnsupportedError);
  EXPECT_THROW(run("goto out;"), UnsupportedError);
  EXPECT_THROW(run("*p = 1;", {{"p", 1}}), UnsupportedError);
  EXPECT_TRUE(uninterpretable_reason(parse_function("x = p->q;")).has_value());
  EXPECT_FALSE(uninterpretable_reason(parse_function("x = y + 1;")).has_value());
}

TEST(Interpret, DeterministicAndBudgetMonotone) {
  for (const auto& p : test::interpretable_functions()) {
    const auto tree = parse_function(p.code);
    const auto vars = free_variables(tree);
    for (std::size_t trial = 0; trial < 10; ++trial) {
      const auto env = random_env(vars, 4, trial);
      const auto a = interpret(tree, env);
      EXPECT_EQ(a, interpret(tree, env)) << p.name;
      if (a.outcome != Outcome::BudgetExhausted) {
        EXPECT_EQ(interpret(tree, env, a.steps), a) << p.name;
        EXPECT_EQ(interpret(tree, env, 5 * a.steps + 7), a) << p.name;
        if (a.steps > 1) EXPECT_EQ(interpret(tree, env, a.steps - 1).outcome, Outcome::BudgetExhausted);
      }
    }
  }
}

TEST(FreeVariables, ParamsAndUndeclared) {
  const auto t = parse_function("int f(int a) { int k = a; k = k + b; return k; }");
  EXPECT_EQ(free_variables(t), (std::set<std::string>{"a", "b"}));
}

TEST(RandomEnv, DrawsFromPool) {
  const auto& pool = input_pool();
  EXPECT_NE(std::find(pool.begin(), pool.end(), LLONG_MIN), pool.end());
  EXPECT_NE(std::find(pool.begin(), pool.end(), LLONG_MAX), pool.end());
  for (std::int64_t v = -3; v <= 3; ++v) EXPECT_NE(std::find(pool.begin(), pool.end(), v), pool.end());
  const auto e = random_env({"a", "b"}, 1, 0);
  EXPECT_EQ(e.size(), 2u);
  EXPECT_EQ(e, random_env({"a", "b"}, 1, 0));
}

TEST(Equivalent, RuleOutputsEquivalent) {
  for (const auto& p : test::interpretable_functions()) {
    const auto t = parse_function(p.code);
    for (const auto& site : find_sites(t))
      for (const auto rule : site.rules) {
        const auto v = equivalent(t, apply_rule(t, site, rule), 100, 21);
        EXPECT_TRUE(v.equivalent) << p.name << " " << to_string(rule);
        EXPECT_EQ(v.trials_run, 100u);
      }
  }
}

TEST(Equivalent, FlippedComparisonDiverges) {
  const auto a = parse_function("int f(int n) { int i = 0; int c = 0; while (i < n) { c++; i++; } return c; }");
  const auto b = parse_function("int f(int n) { int i = 0; int c = 0; while (i <= n) { c++; i++; } return c; }");
  const auto v = equivalent(a, b, 100, 0, 2000);
  ASSERT_FALSE(v.equivalent);
  ASSERT_TRUE(v.witness.has_value());
  // the witness really separates the two
  EXPECT_FALSE(same_behavior(interpret(a, *v.witness, 2000), interpret(b, *v.witness, 2000)));
  EXPECT_TRUE(v.left && v.right);
}

TEST(Equivalent, ReflexiveAndSymmetric) {
  const auto fx = test::interpretable_functions();
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const auto a = parse_function(fx[i].code);
    EXPECT_TRUE(equivalent(a, a, 50, 1).equivalent) << fx[i].name;
    const auto b = parse_function(fx[(i + 1) % fx.size()].code);
    EXPECT_EQ(equivalent(a, b, 50, 1).equivalent, equivalent(b, a, 50, 1).equivalent);
  }
  EXPECT_THROW(equivalent(parse_function("f(x);"), parse_function("x = 1;"), 3, 0),
               UnsupportedError);
}

TEST(SameBehavior, ExhaustedPrefix) {
  Trace a, b;
  a.outcome = b.outcome = Outcome::BudgetExhausted;
  a.events = {{"x", 1}, {"x", 2}};
  b.events = {{"x", 1}};
  EXPECT_TRUE(same_behavior(a, b));
  b.events = {{"x", 3}};
  EXPECT_FALSE(same_behavior(a, b));
  Trace c = a, d = a;
  c.outcome = d.outcome = Outcome::Completed;
  d.steps = 99;
  EXPECT_TRUE(same_behavior(c, d));
  d.final_env["x"] = 7;
  EXPECT_FALSE(same_behavior(c, d));
}

}  // namespace
