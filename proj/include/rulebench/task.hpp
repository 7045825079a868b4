#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Task definitions: the five grid tasks plus last-letter concatenation,
// positional digit strings, and the exotic digit alphabet.

namespace rulebench {

enum class TaskId {
  Addition,          // a+b over non-negative integers, base 10
  ModularAddition,   // (a+b) mod modulus
  BaseAddition,      // a+b with operands and result rendered in `base`
  LinearRegression,  // m*a + n*b + p
  ChickenRabbit,     // legs/heads word problem
  LastLetterConcat,  // concatenate last letters of words
};

struct TaskKind {
  TaskId id = TaskId::Addition;
  long long modulus = 113;  // ModularAddition
  int base = 10;            // BaseAddition; 10 for every other task
  long long m = 1, n = 2, p = 3;  // LinearRegression coefficients

  static TaskKind addition();
  static TaskKind modular_addition(long long modulus = 113);
  static TaskKind base_addition(int base = 9);
  static TaskKind linear_regression(long long m = 1, long long n = 2, long long p = 3);
  static TaskKind chicken_rabbit();
  static TaskKind last_letter();
  // Small-modulus preset used for the dense grid experiments.
  static TaskKind grokking_modular();

  // Digit base used when rendering operands/answers of this task.
  int render_base() const { return id == TaskId::BaseAddition ? base : 10; }
};

const char* task_name(TaskId id);                 // stable identifier, e.g. "addition"
std::optional<TaskId> task_from_name(std::string_view name);

struct Problem {
  TaskKind task;
  unsigned long long a = 0, b = 0;          // numeric tasks
  std::vector<std::string> names;           // LastLetterConcat
};

Problem make_problem(const TaskKind& task, unsigned long long a, unsigned long long b);
Problem make_word_problem(const std::vector<std::string>& names);

struct Answer {
  enum class Kind { Scalar, Pair, Text };
  Kind kind = Kind::Scalar;
  unsigned long long value = 0;             // Scalar
  unsigned long long rabbits = 0, chickens = 0;  // Pair
  std::string text;                         // Text

  bool operator==(const Answer&) const = default;
};

// Evaluates the task. Throws std::domain_error when a ChickenRabbit instance
// violates `a` even and 2b <= a <= 4b, or when a word is empty.
Answer eval(const Problem& problem);

// Positional digits, most significant first. Invariant: no leading zero
// unless the value is exactly zero (single digit 0); every digit < base.
struct DigitString {
  std::vector<int> digits;
  int base = 10;

  bool operator==(const DigitString&) const = default;
};

// Round-trip converters for 2 <= base <= 16 and values below 10^18.
DigitString to_digits(unsigned long long value, int base);
unsigned long long from_digits(const DigitString& ds);

std::string render_digits(const DigitString& ds);             // e.g. 117 -> "117"
std::string render_number(unsigned long long value, int base);

// Exotic alphabet: digits 0..8 <-> letters A..I. Characters outside the
// mapped set pass through unchanged; digit 9 (encode) or any other letter
// (decode) raises std::domain_error.
std::string exotic_encode(std::string_view text);
std::string exotic_decode(std::string_view text);

}  // namespace rulebench
