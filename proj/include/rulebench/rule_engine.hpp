#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rulebench/task.hpp"

// Reference interpreter for the digit-by-digit addition rule and the
// last-letter concatenation rule. Every trace-producing and trace-checking
// component replays these steps instead of trusting text arithmetic.

namespace rulebench {

// Interpreter state between steps. num1/num2/result are most significant
// digit first; digit1/digit2/total keep their previous value until the next
// assignment (scratch variables are never cleared between iterations).
struct MachineState {
  std::vector<int> num1, num2, result;
  int carry = 0;
  std::optional<int> digit1, digit2, total;

  bool operator==(const MachineState&) const = default;
};

struct RuleStep {
  enum class Kind {
    LoopCheck,     // entered
    PopDigit1,     // popped, remainder, from_empty
    PopDigit2,
    ComputeTotal,  // total
    InsertResult,  // inserted_digit, result_after
    UpdateCarry,   // carry_after
    FinalCarry,    // applied, result_after
    Return,        // result_after
  };

  Kind kind;
  bool entered = false;            // LoopCheck
  int popped = 0;                  // PopDigit1/2: digit used (0 when operand empty)
  bool from_empty = false;         // PopDigit1/2: operand was already empty
  std::vector<int> remainder;      // PopDigit1/2: operand after the pop
  int total = 0;                   // ComputeTotal
  int inserted_digit = 0;          // InsertResult
  int carry_after = 0;             // UpdateCarry
  bool applied = false;            // FinalCarry
  std::vector<int> result_after;   // InsertResult / FinalCarry / Return
  MachineState state_after;
};

// One word of the last-letter rule: append word's final character.
struct LetterStep {
  std::string word;
  char letter = '\0';
  std::string result_after;
};

struct RuleTrace {
  Problem problem;
  std::vector<RuleStep> steps;        // addition rule
  DigitString final_result;           // addition rule
  std::vector<LetterStep> letter_steps;  // last-letter rule
  std::string final_text;             // last-letter rule
};

// Runs the addition rule on positional operands. Operands must be valid
// DigitStrings of the same base; the loop runs max(len) iterations plus a
// final-carry step, and every LoopCheck (including the failing exit check)
// is recorded.
RuleTrace run_addition_rule(const DigitString& num1, const DigitString& num2);
RuleTrace run_addition_rule(unsigned long long a, unsigned long long b, int base);

// Runs the last-letter rule. An empty word raises std::domain_error; an
// empty list yields "".
RuleTrace run_last_letter_rule(const std::vector<std::string>& names);

// A single-digit addition fact: digits plus incoming carry. Position is
// deliberately not recorded; coverage is judged on the digit triple alone.
struct UnitStep {
  int d1 = 0, d2 = 0, carry_in = 0;
  auto operator<=>(const UnitStep&) const = default;
};

// Multiset of unit steps exercised by a+b: one per loop iteration in
// low-to-high digit order, plus (0,0,1) when a final carry is applied.
std::vector<UnitStep> unit_steps(unsigned long long a, unsigned long long b, int base);

// Union of unit-step multisets, keyed by step with the max multiplicity seen.
using UnitStepUnion = std::map<UnitStep, int>;

void add_to_union(UnitStepUnion& u, const std::vector<UnitStep>& steps);
// True when every step of `steps` appears in `u` with at least its multiplicity.
bool covered_by(const std::vector<UnitStep>& steps, const UnitStepUnion& u);
// First step (in multiset order) of `steps` missing from `u`; nullopt if covered.
std::optional<UnitStep> first_uncovered(const std::vector<UnitStep>& steps, const UnitStepUnion& u);

std::string unit_step_label(const UnitStep& s);  // "d1+d2+c"

}  // namespace rulebench
