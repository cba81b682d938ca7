#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "vcl/augment.hpp"
#include "vcl/minieval.hpp"
#include "vcl/util.hpp"

namespace {

using namespace vcl;

std::string svg_probe() { return test::read_file(test::fixture_path("svg_probe.c")); }

TEST(Sites, SvgProbeFixture) {
  const auto sites = find_sites(parse_function(svg_probe()));
  ASSERT_EQ(sites.size(), 4u);
  const std::vector<std::tuple<int, int, std::vector<Rule>>> want{
      {5, 6, {Rule::R1}}, {7, 13, {Rule::R4, Rule::R5}}, {9, 10, {Rule::R1}}, {11, 12, {Rule::R1}}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(sites[i].first_line, std::get<0>(want[i])) << i;
    EXPECT_EQ(sites[i].last_line, std::get<1>(want[i])) << i;
    EXPECT_EQ(sites[i].rules, std::get<2>(want[i])) << i;
  }
}

TEST(Sites, NoneInStraightLineCode) {
  EXPECT_TRUE(find_sites(parse_function("int f(int a) { a = a + 1; return a; }")).empty());
}

TEST(Sites, ConjunctionGetsR1AndR2) {
  const auto sites = find_sites(parse_function("if (a && b) { f(); }"));
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].rules, (std::vector<Rule>{Rule::R1, Rule::R2}));
}

TEST(Sites, Predicates) {
  // R1/R2 need an else-less if
  EXPECT_TRUE(find_sites(parse_function("if (a && b) x = 1; else x = 2;")).empty());
  // R3 needs a condition and a body free of continue and opaque statements
  EXPECT_EQ(find_sites(parse_function("for (;;) { x = 1; }")).size(), 0u);
  EXPECT_EQ(find_sites(parse_function("for (i = 0; i < n; i++) { continue; }")).size(), 0u);
  EXPECT_EQ(find_sites(parse_function("for (i = 0; i < n; i++) { goto out; }")).size(), 0u);
  const auto for_sites = find_sites(parse_function("for (i = 0; i < n; i++) { x += i; }"));
  ASSERT_EQ(for_sites.size(), 1u);
  EXPECT_EQ(for_sites[0].rules, std::vector<Rule>{Rule::R3});
  // an opaque condition blocks the if and while rules
  EXPECT_TRUE(find_sites(parse_function("if (a->b) x = 1;\nwhile (p->q) x--;")).empty());
}

TEST(ApplyRule, R5Schema) {
  const auto t = parse_function("while (x>0){x=x-1;}");
  const auto out = apply_rule(t, find_sites(t)[0], Rule::R5);
  EXPECT_EQ(out, parse_function("while (1) { if (!(x>0)) { break; } x = x - 1; }"));
}

TEST(ApplyRule, R4Schema) {
  const auto t = parse_function("while (x>0){x=x-1;}");
  const auto out = apply_rule(t, find_sites(t)[0], Rule::R4);
  EXPECT_EQ(out, parse_function("if (x>0) { do { x = x - 1; } while (x>0); }"));
}

TEST(ApplyRule, R2Schema) {
  const auto t = parse_function("if (a && b) { f(); }");
  const auto out = apply_rule(t, find_sites(t)[0], Rule::R2);
  const auto& outer = out.root.children.at(0);
  ASSERT_EQ(outer.kind, StmtKind::If);
  EXPECT_EQ(*outer.expr, Expr::var("a"));
  const auto& inner = outer.then_branch().children.at(0);
  ASSERT_EQ(inner.kind, StmtKind::If);
  EXPECT_EQ(*inner.expr, Expr::var("b"));
  // left-nested conjunctions split at the top operator only
  const auto t3 = parse_function("if (a && b && c) x = 1;");
  const auto o3 = apply_rule(t3, find_sites(t3)[0], Rule::R2);
  EXPECT_EQ(*o3.root.children.at(0).expr, Expr::binary("&&", Expr::var("a"), Expr::var("b")));
}

TEST(ApplyRule, R1Forms) {
  const auto t = parse_function("if (c) x = 1;");
  const auto plain = apply_rule(t, find_sites(t)[0], Rule::R1);
  EXPECT_EQ(plain, parse_function("if (c) x = 1; else { }"));
  const auto reversed = apply_rule(t, find_sites(t)[0], Rule::R1, {true});
  EXPECT_EQ(reversed, parse_function("if (!(c)) { } else x = 1;"));
}

TEST(ApplyRule, R3Schema) {
  const auto t = parse_function("for (i = 0; i < n; i++) s += i;");
  const auto out = apply_rule(t, find_sites(t)[0], Rule::R3);
  EXPECT_EQ(out, parse_function("{ i = 0; if (i < n) { do { s += i; i++; } while (i < n); } }"));
}

TEST(ApplyRule, InapplicableRuleRejected) {
  const auto t = parse_function("while (x) x--;");
  EXPECT_THROW(apply_rule(t, find_sites(t)[0], Rule::R1), ConfigError);
  EXPECT_THROW(apply_rule(t, NodePath{5}, Rule::R4), std::exception);
}

TEST(ApplyRule, DanglingElseKeepsMeaning) {
  // R1 on the inner if must not capture the outer else
  const char* code = "int f(int a, int b) { int r = 0; if (a) if (b) r = 1; else r = 2; "
                     "if (a > 1) { if (b) r = 3; } else r = 4; return r; }";
  const auto t = parse_function(code);
  for (const auto& v : generate_variants({"d", code, 0, {}})) {
    const auto vt = parse_function(v.code);
    EXPECT_TRUE(equivalent(t, vt, 100, 3).equivalent) << v.code;
  }
}

TEST(ApplyRule, OutputsReparseOnFixtureCorpus) {
  for (const auto& p : test::all_fixture_programs()) {
    const auto t = parse_function(p.code);
    for (const auto& site : find_sites(t))
      for (const auto rule : site.rules)
        for (const bool reverse : {false, true}) {
          const auto out = apply_rule(t, site, rule, {reverse});
          EXPECT_EQ(parse_function(render(out)), out) << p.name << " " << to_string(rule);
          EXPECT_FALSE(out == t) << p.name;
        }
  }
}

TEST(Variants, SvgProbeSeven) {
  const auto v = generate_variants({"CVE-2018-7751", svg_probe(), 1, {}});
  ASSERT_EQ(v.size(), 7u);
  std::size_t simple = 0, hard = 0;
  for (const auto& x : v) {
    (x.kind == VariantKind::Simple ? simple : hard)++;
    EXPECT_EQ(x.label, 1);
    EXPECT_EQ(x.source_id, "CVE-2018-7751");
    if (x.kind == VariantKind::Simple) EXPECT_EQ(x.assignment.size(), 1u);
    if (x.kind == VariantKind::Hard) EXPECT_EQ(x.assignment.size(), 4u);
  }
  EXPECT_EQ(simple, 5u);
  EXPECT_EQ(hard, 2u);
  EXPECT_EQ(v[0].id, "CVE-2018-7751~s0");
  EXPECT_EQ(v[5].id, "CVE-2018-7751~h0");
}

TEST(Variants, SingleIfDeduplicated) {
  const auto v = generate_variants({"x", "int f(int a) { if (a) a = 0; return a; }", 0, {}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, VariantKind::Simple);
}

TEST(Variants, NoSitesNoVariants) {
  EXPECT_TRUE(generate_variants({"x", "int f(void) { return 0; }", 0, {}}).empty());
  EXPECT_THROW(generate_variants({"x", "int f(void) { return (0; }", 0, {}}), ParseError);
}

TEST(Variants, DeterministicDistinctAndStructurallyNew) {
  for (const auto& p : test::all_fixture_programs()) {
    const FunctionSample s{p.name, p.code, 1, {}};
    const auto a = generate_variants(s);
    const auto b = generate_variants(s);
    ASSERT_EQ(a.size(), b.size());
    std::set<std::string> codes;
    const auto original = parse_function(p.code);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].code, b[i].code);
      EXPECT_TRUE(codes.insert(a[i].code).second) << p.name;
      EXPECT_FALSE(parse_function(a[i].code) == original) << p.name;
    }
  }
}

// Random nests of ifs, whiles and fors.
std::string random_program(Rng& rng, int depth) {
  std::string out;
  const auto count = 1 + uniform_below(rng, 3);
  for (std::size_t i = 0; i < count; ++i) {
    switch (depth > 2 ? 0 : uniform_below(rng, 6)) {
      case 0: out += "x = x + 1;\n"; break;
      case 1: out += "if (a < b) {\n" + random_program(rng, depth + 1) + "}\n"; break;
      case 2: out += "if (a && b) {\n" + random_program(rng, depth + 1) + "}\n"; break;
      case 3: out += "while (x < 3) {\n" + random_program(rng, depth + 1) + "}\n"; break;
      case 4: out += "for (i = 0; i < 3; i++) {\n" + random_program(rng, depth + 1) + "}\n"; break;
      default:
        out += "if (a) {\n" + random_program(rng, depth + 1) + "} else {\n" +
               random_program(rng, depth + 1) + "}\n";
    }
  }
  return out;
}

TEST(Variants, CountFormulaMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Rng rng(seed);
    const auto code = random_program(rng, 0);
    const auto sites = find_sites(parse_function(code));
    if (sites.size() > 8) continue;
    // choice per site: 0 = untouched, k = k-th rule
    std::size_t simple = 0, hard = 0, total = 1;
    for (const auto& s : sites) total *= s.rules.size() + 1;
    for (std::size_t code_point = 0; code_point < total; ++code_point) {
      std::size_t rest = code_point, touched = 0;
      bool all = true, singles_fixed = true;
      for (const auto& s : sites) {
        const auto choice = rest % (s.rules.size() + 1);
        rest /= s.rules.size() + 1;
        touched += choice != 0;
        all = all && choice != 0;
        singles_fixed = singles_fixed && (s.rules.size() > 1 || choice == 1);
      }
      simple += touched == 1;
      hard += all && singles_fixed;
    }
    if (sites.empty()) hard = 0;
    std::size_t want_simple = 0, want_hard = 1;
    for (const auto& s : sites) {
      want_simple += s.rules.size();
      if (s.rules.size() > 1) want_hard *= s.rules.size();
    }
    if (sites.empty()) want_hard = 0;
    EXPECT_EQ(simple, want_simple) << code;
    EXPECT_EQ(hard, want_hard) << code;

    std::size_t planned_simple = 0, planned_hard = 0;
    for (const auto& p : enumerate_assignments(sites))
      (p.kind == VariantKind::Simple ? planned_simple : planned_hard)++;
    EXPECT_EQ(planned_simple, simple) << code;
    EXPECT_EQ(planned_hard, hard) << code;
  }
}

TEST(Variants, EquivalentOnInterpretableFixtures) {
  std::size_t checked = 0;
  for (const auto& p : test::interpretable_functions()) {
    const auto t = parse_function(p.code);
    ASSERT_FALSE(uninterpretable_reason(t)) << p.name;
    for (const bool reverse : {false, true})
      for (const auto& v : generate_variants({p.name, p.code, 0, {}}, {reverse})) {
        const auto verdict = equivalent(t, parse_function(v.code), 100, 11);
        EXPECT_TRUE(verdict.equivalent) << v.id << "\n" << v.code;
        ++checked;
      }
  }
  EXPECT_GT(checked, 100u);
}

TEST(VariantDataset, SkipsUnparseableAndKeepsLabels) {
  const Dataset src("src", {{"ok", "int f(int a) { while (a) a--; return a; }", 1, {}},
                            {"broken", "int g() { if (x { }", 0, {}},
                            {"plain", "int h() { return 1; }", 0, {}}});
  std::size_t skipped = 0;
  const auto d = variant_dataset(src, "book", 2, &skipped);
  EXPECT_EQ(skipped, 1u);
  ASSERT_EQ(d.size(), 2u);
  for (const auto& v : d) {
    EXPECT_EQ(v.label, 1);
    EXPECT_EQ(v.id.rfind("ok~", 0), 0u);
  }
}

TEST(Rule, Names) {
  EXPECT_EQ(to_string(Rule::R3), "R3");
  EXPECT_EQ(parse_rule("R5"), Rule::R5);
  EXPECT_THROW(parse_rule("R9"), ConfigError);
}

}  // namespace
