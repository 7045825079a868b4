#include "rulebench/task.hpp"

#include <algorithm>
#include <stdexcept>

namespace rulebench {

TaskKind TaskKind::addition() { return TaskKind{TaskId::Addition}; }

TaskKind TaskKind::modular_addition(long long modulus) {
  if (modulus < 1) throw std::domain_error("modulus must be positive");
  TaskKind t{TaskId::ModularAddition};
  t.modulus = modulus;
  return t;
}

TaskKind TaskKind::base_addition(int base) {
  if (base < 2 || base > 16) throw std::domain_error("base must be in [2,16]");
  TaskKind t{TaskId::BaseAddition};
  t.base = base;
  return t;
}

TaskKind TaskKind::linear_regression(long long m, long long n, long long p) {
  TaskKind t{TaskId::LinearRegression};
  t.m = m;
  t.n = n;
  t.p = p;
  return t;
}

TaskKind TaskKind::chicken_rabbit() { return TaskKind{TaskId::ChickenRabbit}; }

TaskKind TaskKind::last_letter() { return TaskKind{TaskId::LastLetterConcat}; }

TaskKind TaskKind::grokking_modular() { return modular_addition(59); }

const char* task_name(TaskId id) {
  switch (id) {
    case TaskId::Addition: return "addition";
    case TaskId::ModularAddition: return "modular-addition";
    case TaskId::BaseAddition: return "base-addition";
    case TaskId::LinearRegression: return "linear-regression";
    case TaskId::ChickenRabbit: return "chicken-rabbit";
    case TaskId::LastLetterConcat: return "last-letter";
  }
  return "unknown";
}

std::optional<TaskId> task_from_name(std::string_view name) {
  for (TaskId id : {TaskId::Addition, TaskId::ModularAddition, TaskId::BaseAddition,
                    TaskId::LinearRegression, TaskId::ChickenRabbit, TaskId::LastLetterConcat}) {
    if (name == task_name(id)) return id;
  }
  return std::nullopt;
}

Problem make_problem(const TaskKind& task, unsigned long long a, unsigned long long b) {
  Problem p;
  p.task = task;
  p.a = a;
  p.b = b;
  return p;
}

Problem make_word_problem(const std::vector<std::string>& names) {
  Problem p;
  p.task = TaskKind::last_letter();
  p.names = names;
  return p;
}

Answer eval(const Problem& problem) {
  Answer ans;
  switch (problem.task.id) {
    case TaskId::Addition:
    case TaskId::BaseAddition:
      ans.kind = Answer::Kind::Scalar;
      ans.value = problem.a + problem.b;
      return ans;
    case TaskId::ModularAddition:
      ans.kind = Answer::Kind::Scalar;
      ans.value = (problem.a + problem.b) % static_cast<unsigned long long>(problem.task.modulus);
      return ans;
    case TaskId::LinearRegression: {
      ans.kind = Answer::Kind::Scalar;
      long long v = problem.task.m * static_cast<long long>(problem.a) +
                    problem.task.n * static_cast<long long>(problem.b) + problem.task.p;
      if (v < 0) throw std::domain_error("linear regression value is negative");
      ans.value = static_cast<unsigned long long>(v);
      return ans;
    }
    case TaskId::ChickenRabbit: {
      unsigned long long legs = problem.a, heads = problem.b;
      if (legs % 2 != 0 || legs < 2 * heads || legs > 4 * heads)
        throw std::domain_error("chicken-rabbit instance needs even legs with 2*heads <= legs <= 4*heads");
      ans.kind = Answer::Kind::Pair;
      ans.rabbits = (legs - 2 * heads) / 2;
      ans.chickens = (4 * heads - legs) / 2;
      return ans;
    }
    case TaskId::LastLetterConcat: {
      ans.kind = Answer::Kind::Text;
      for (const auto& w : problem.names) {
        if (w.empty()) throw std::domain_error("empty word has no last letter");
        ans.text += w.back();
      }
      return ans;
    }
  }
  throw std::logic_error("unhandled task");
}

DigitString to_digits(unsigned long long value, int base) {
  if (base < 2 || base > 16) throw std::domain_error("base must be in [2,16]");
  DigitString ds;
  ds.base = base;
  if (value == 0) {
    ds.digits = {0};
    return ds;
  }
  while (value > 0) {
    ds.digits.push_back(static_cast<int>(value % static_cast<unsigned long long>(base)));
    value /= static_cast<unsigned long long>(base);
  }
  std::reverse(ds.digits.begin(), ds.digits.end());
  return ds;
}

unsigned long long from_digits(const DigitString& ds) {
  if (ds.base < 2 || ds.base > 16) throw std::domain_error("base must be in [2,16]");
  if (ds.digits.empty()) throw std::domain_error("empty digit string");
  if (ds.digits.size() > 1 && ds.digits.front() == 0)
    throw std::domain_error("leading zero in digit string");
  unsigned long long v = 0;
  for (int d : ds.digits) {
    if (d < 0 || d >= ds.base) throw std::domain_error("digit out of range for base");
    v = v * static_cast<unsigned long long>(ds.base) + static_cast<unsigned long long>(d);
  }
  return v;
}

std::string render_digits(const DigitString& ds) {
  static const char* alphabet = "0123456789abcdef";
  std::string out;
  out.reserve(ds.digits.size());
  for (int d : ds.digits) {
    if (d < 0 || d >= ds.base) throw std::domain_error("digit out of range for base");
    out += alphabet[d];
  }
  return out;
}

std::string render_number(unsigned long long value, int base) {
  return render_digits(to_digits(value, base));
}

std::string exotic_encode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    if (ch >= '0' && ch <= '8') {
      out += static_cast<char>('A' + (ch - '0'));
    } else if (ch == '9') {
      throw std::domain_error("digit 9 has no exotic letter");
    } else {
      out += ch;
    }
  }
  return out;
}

std::string exotic_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    if (ch >= 'A' && ch <= 'I') {
      out += static_cast<char>('0' + (ch - 'A'));
    } else if ((ch >= 'J' && ch <= 'Z') || (ch >= 'a' && ch <= 'z')) {
      throw std::domain_error("letter outside A-I is not an exotic digit");
    } else {
      out += ch;
    }
  }
  return out;
}

}  // namespace rulebench
