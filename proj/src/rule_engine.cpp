#include "rulebench/rule_engine.hpp"

#include <stdexcept>

namespace rulebench {

namespace {

int pop_back(std::vector<int>& v) {
  int d = v.back();
  v.pop_back();
  return d;
}

}  // namespace

RuleTrace run_addition_rule(const DigitString& num1, const DigitString& num2) {
  if (num1.base != num2.base) throw std::domain_error("operands must share a base");
  const int base = num1.base;
  if (base < 2 || base > 16) throw std::domain_error("base must be in [2,16]");
  // Validate digit ranges and the no-leading-zero invariant up front.
  (void)from_digits(num1);
  (void)from_digits(num2);

  RuleTrace trace;
  trace.problem = make_problem(base == 10 ? TaskKind::addition() : TaskKind::base_addition(base),
                               from_digits(num1), from_digits(num2));

  MachineState st;
  st.num1 = num1.digits;
  st.num2 = num2.digits;

  auto record = [&](RuleStep step) {
    step.state_after = st;
    trace.steps.push_back(std::move(step));
  };

  for (;;) {
    RuleStep check{RuleStep::Kind::LoopCheck};
    check.entered = !st.num1.empty() || !st.num2.empty();
    bool entered = check.entered;
    record(std::move(check));
    if (!entered) break;

    RuleStep pop1{RuleStep::Kind::PopDigit1};
    pop1.from_empty = st.num1.empty();
    pop1.popped = pop1.from_empty ? 0 : pop_back(st.num1);
    pop1.remainder = st.num1;
    st.digit1 = pop1.popped;
    record(std::move(pop1));

    RuleStep pop2{RuleStep::Kind::PopDigit2};
    pop2.from_empty = st.num2.empty();
    pop2.popped = pop2.from_empty ? 0 : pop_back(st.num2);
    pop2.remainder = st.num2;
    st.digit2 = pop2.popped;
    record(std::move(pop2));

    RuleStep tot{RuleStep::Kind::ComputeTotal};
    tot.total = *st.digit1 + *st.digit2 + st.carry;
    st.total = tot.total;
    record(std::move(tot));

    RuleStep ins{RuleStep::Kind::InsertResult};
    ins.inserted_digit = *st.total % base;
    st.result.insert(st.result.begin(), ins.inserted_digit);
    ins.result_after = st.result;
    record(std::move(ins));

    RuleStep upd{RuleStep::Kind::UpdateCarry};
    upd.carry_after = *st.total / base;
    st.carry = upd.carry_after;
    record(std::move(upd));
  }

  RuleStep fin{RuleStep::Kind::FinalCarry};
  fin.applied = st.carry != 0;
  if (fin.applied) st.result.insert(st.result.begin(), st.carry);
  fin.result_after = st.result;
  record(std::move(fin));

  RuleStep ret{RuleStep::Kind::Return};
  ret.result_after = st.result;
  record(std::move(ret));

  trace.final_result = DigitString{st.result, base};
  return trace;
}

RuleTrace run_addition_rule(unsigned long long a, unsigned long long b, int base) {
  return run_addition_rule(to_digits(a, base), to_digits(b, base));
}

RuleTrace run_last_letter_rule(const std::vector<std::string>& names) {
  RuleTrace trace;
  trace.problem = make_word_problem(names);
  std::string acc;
  for (const auto& w : names) {
    if (w.empty()) throw std::domain_error("empty word has no last letter");
    acc += w.back();
    trace.letter_steps.push_back(LetterStep{w, w.back(), acc});
  }
  trace.final_text = acc;
  return trace;
}

std::vector<UnitStep> unit_steps(unsigned long long a, unsigned long long b, int base) {
  RuleTrace trace = run_addition_rule(a, b, base);
  std::vector<UnitStep> steps;
  int carry_before = 0;
  std::optional<int> d1, d2;
  for (const auto& step : trace.steps) {
    switch (step.kind) {
      case RuleStep::Kind::PopDigit1: d1 = step.popped; break;
      case RuleStep::Kind::PopDigit2: d2 = step.popped; break;
      case RuleStep::Kind::ComputeTotal:
        steps.push_back(UnitStep{*d1, *d2, carry_before});
        break;
      case RuleStep::Kind::UpdateCarry: carry_before = step.carry_after; break;
      case RuleStep::Kind::FinalCarry:
        if (step.applied) steps.push_back(UnitStep{0, 0, carry_before});
        break;
      default: break;
    }
  }
  return steps;
}

void add_to_union(UnitStepUnion& u, const std::vector<UnitStep>& steps) {
  std::map<UnitStep, int> counts;
  for (const auto& s : steps) ++counts[s];
  for (const auto& [s, n] : counts) {
    auto it = u.find(s);
    if (it == u.end())
      u.emplace(s, n);
    else if (it->second < n)
      it->second = n;
  }
}

bool covered_by(const std::vector<UnitStep>& steps, const UnitStepUnion& u) {
  return !first_uncovered(steps, u).has_value();
}

std::optional<UnitStep> first_uncovered(const std::vector<UnitStep>& steps, const UnitStepUnion& u) {
  std::map<UnitStep, int> counts;
  for (const auto& s : steps) ++counts[s];
  for (const auto& [s, n] : counts) {
    auto it = u.find(s);
    if (it == u.end() || it->second < n) return s;
  }
  return std::nullopt;
}

std::string unit_step_label(const UnitStep& s) {
  return std::to_string(s.d1) + "+" + std::to_string(s.d2) + "+" + std::to_string(s.carry_in);
}

}  // namespace rulebench
