#include "doctest.h"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "rulebench/rule_engine.hpp"

using namespace rulebench;

namespace {

// Independent digit-walk used to cross-check unit_steps.
std::vector<UnitStep> naive_unit_steps(unsigned long long a, unsigned long long b, int base) {
  std::vector<UnitStep> out;
  int carry = 0;
  while (a > 0 || b > 0) {
    int d1 = static_cast<int>(a % static_cast<unsigned long long>(base));
    int d2 = static_cast<int>(b % static_cast<unsigned long long>(base));
    out.push_back({d1, d2, carry});
    carry = (d1 + d2 + carry) / base;
    a /= static_cast<unsigned long long>(base);
    b /= static_cast<unsigned long long>(base);
  }
  if (a == 0 && b == 0 && out.empty()) out.push_back({0, 0, 0});
  if (carry) out.push_back({0, 0, 1});
  return out;
}

}  // namespace

TEST_CASE("addition rule computes correct sums") {
  for (unsigned long long a : {0ULL, 7ULL, 99ULL, 123ULL, 999999ULL, 687042ULL}) {
    for (unsigned long long b : {0ULL, 6ULL, 1ULL, 86208ULL, 999999ULL}) {
      RuleTrace t = run_addition_rule(a, b, 10);
      CHECK(from_digits(t.final_result) == a + b);
    }
  }
  RuleTrace nine = run_addition_rule(8, 8, 9);
  CHECK(render_digits(nine.final_result) == "17");  // 16 in base 9
}

TEST_CASE("addition rule step structure") {
  RuleTrace t = run_addition_rule(73, 48, 10);
  // 2 iterations, each LoopCheck Pop Pop Total Insert Carry, then exit
  // check, FinalCarry, Return.
  int checks = 0, pops = 0, finals = 0, returns = 0;
  for (const auto& s : t.steps) {
    if (s.kind == RuleStep::Kind::LoopCheck) ++checks;
    if (s.kind == RuleStep::Kind::PopDigit1 || s.kind == RuleStep::Kind::PopDigit2) ++pops;
    if (s.kind == RuleStep::Kind::FinalCarry) ++finals;
    if (s.kind == RuleStep::Kind::Return) ++returns;
  }
  CHECK(checks == 3);  // max(len)+1: two entries plus the failing exit check
  CHECK(pops == 4);
  CHECK(finals == 1);
  CHECK(returns == 1);
  CHECK(t.steps.back().result_after == std::vector<int>{1, 2, 1});

  // the exit check must not be entered, all prior ones must be
  int seen = 0;
  for (const auto& s : t.steps) {
    if (s.kind != RuleStep::Kind::LoopCheck) continue;
    ++seen;
    CHECK(s.entered == (seen < 3));
  }
}

TEST_CASE("pop semantics on uneven lengths") {
  RuleTrace t = run_addition_rule(7, 1234, 10);
  int checks = 0;
  for (const auto& s : t.steps)
    if (s.kind == RuleStep::Kind::LoopCheck) ++checks;
  CHECK(checks == 5);  // 4 iterations + exit

  // second iteration: num1 already empty, popped digit defaults to 0
  std::vector<const RuleStep*> pops1;
  for (const auto& s : t.steps)
    if (s.kind == RuleStep::Kind::PopDigit1) pops1.push_back(&s);
  REQUIRE(pops1.size() == 4);
  CHECK(pops1[0]->popped == 7);
  CHECK_FALSE(pops1[0]->from_empty);
  CHECK(pops1[0]->remainder.empty());
  CHECK(pops1[1]->popped == 0);
  CHECK(pops1[1]->from_empty);
}

TEST_CASE("final carry applied only on overflow") {
  RuleTrace over = run_addition_rule(99, 1, 10);
  const RuleStep* fc = nullptr;
  for (const auto& s : over.steps)
    if (s.kind == RuleStep::Kind::FinalCarry) fc = &s;
  REQUIRE(fc != nullptr);
  CHECK(fc->applied);
  CHECK(fc->result_after == std::vector<int>{1, 0, 0});

  RuleTrace flat = run_addition_rule(12, 34, 10);
  fc = nullptr;
  for (const auto& s : flat.steps)
    if (s.kind == RuleStep::Kind::FinalCarry) fc = &s;
  REQUIRE(fc != nullptr);
  CHECK_FALSE(fc->applied);
  CHECK(fc->result_after == std::vector<int>{4, 6});
}

TEST_CASE("scratch variables persist between iterations") {
  RuleTrace t = run_addition_rule(5, 105, 10);
  CHECK(t.steps.back().result_after == std::vector<int>{1, 1, 0});

  // at the second loop check, iteration-1 scratch values are still visible
  int seen = 0;
  for (const auto& s : t.steps) {
    if (s.kind != RuleStep::Kind::LoopCheck) continue;
    if (++seen != 2) continue;
    CHECK(s.state_after.digit1 == 5);
    CHECK(s.state_after.digit2 == 5);
    CHECK(s.state_after.total == 10);
    CHECK(s.state_after.carry == 1);
  }
  CHECK(seen == 4);  // 3 iterations + exit
}

TEST_CASE("unit steps match the naive digit walk") {
  for (unsigned long long a : {0ULL, 7ULL, 11ULL, 99ULL, 50ULL, 496943ULL}) {
    for (unsigned long long b : {0ULL, 6ULL, 11ULL, 1ULL, 50ULL, 2382ULL}) {
      CHECK(unit_steps(a, b, 10) == naive_unit_steps(a, b, 10));
    }
  }
  CHECK(unit_steps(8, 8, 9) == naive_unit_steps(8, 8, 9));
}

TEST_CASE("unit step details") {
  // 11+11: the fact (1,1,0) occurs twice; the multiset keeps both
  auto steps = unit_steps(11, 11, 10);
  CHECK(steps == std::vector<UnitStep>{{1, 1, 0}, {1, 1, 0}});

  // final carry appears as the (0,0,1) fact
  auto over = unit_steps(99, 1, 10);
  REQUIRE(over.size() == 3);
  CHECK(over[0] == UnitStep{9, 1, 0});
  CHECK(over[1] == UnitStep{9, 0, 1});
  CHECK(over[2] == UnitStep{0, 0, 1});

  CHECK(unit_steps(0, 0, 10) == std::vector<UnitStep>{{0, 0, 0}});
  CHECK(unit_step_label({7, 6, 0}) == "7+6+0");
}

TEST_CASE("unit step union and coverage") {
  UnitStepUnion u;
  add_to_union(u, unit_steps(11, 11, 10));  // (1,1,0) x2
  add_to_union(u, unit_steps(12, 1, 10));   // (2,1,0), (1,0,0)
  CHECK(u.at({1, 1, 0}) == 2);

  CHECK(covered_by(unit_steps(11, 11, 10), u));
  CHECK(covered_by(unit_steps(12, 1, 10), u));
  // needs (1,1,0) three times
  CHECK_FALSE(covered_by({{1, 1, 0}, {1, 1, 0}, {1, 1, 0}}, u));
  auto miss = first_uncovered({{1, 1, 0}, {3, 3, 0}}, u);
  REQUIRE(miss.has_value());
  CHECK(*miss == UnitStep{3, 3, 0});
  CHECK_FALSE(first_uncovered(unit_steps(11, 11, 10), u).has_value());

  // union multiplicity is a max, not a sum
  add_to_union(u, unit_steps(11, 11, 10));
  CHECK(u.at({1, 1, 0}) == 2);
}

TEST_CASE("last letter rule") {
  RuleTrace t = run_last_letter_rule({"King", "Kaur"});
  CHECK(t.final_text == "gr");
  REQUIRE(t.letter_steps.size() == 2);
  CHECK(t.letter_steps[0].word == "King");
  CHECK(t.letter_steps[0].letter == 'g');
  CHECK(t.letter_steps[0].result_after == "g");
  CHECK(t.letter_steps[1].result_after == "gr");
  CHECK(run_last_letter_rule({}).final_text == "");
  CHECK_THROWS_AS(run_last_letter_rule({"a", ""}), std::domain_error);
}
