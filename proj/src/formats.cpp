#include "rulebench/formats.hpp"

#include <stdexcept>

namespace rulebench {

namespace {

// "[7,8,5,3]"
std::string list_tight(const std::vector<int>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

// "[7, 8, 5, 3]"
std::string list_spaced(const std::vector<int>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

// "7853"; empty -> ""
std::string digit_run(const std::vector<int>& v) {
  std::string s;
  for (int d : v) s += render_digits(DigitString{{d}, 16});
  return s;
}

// "7,8,5,3"
std::string comma_run(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i) out += "\n";
    out += lines[i];
  }
  return out;
}

std::string bt(const std::string& s) { return "`" + s + "`"; }

void meta_numeric(IOPair& io, const TaskKind& task, unsigned long long a, unsigned long long b) {
  io.task = task;
  io.a = a;
  io.b = b;
  io.len_a = static_cast<int>(to_digits(a, task.render_base()).digits.size());
  io.len_b = static_cast<int>(to_digits(b, task.render_base()).digits.size());
}

// Per-iteration slice of an addition trace, plus the loop-exit snapshot.
struct IterationView {
  std::vector<int> rem1_before, rem2_before;  // operands at the loop check
  int d1 = 0, d2 = 0, carry_in = 0;
  bool d1_empty = false, d2_empty = false;
  std::vector<int> rem1_after, rem2_after;
  int total = 0, inserted = 0, carry_after = 0;
  std::vector<int> result_before, result_after;
};

struct TraceView {
  std::vector<int> num1, num2;   // original operands
  std::vector<IterationView> iters;
  std::vector<int> exit_result;  // result when the loop check fails
  int exit_carry = 0;
  bool final_applied = false;
  std::vector<int> final_result;
};

TraceView view_of(const RuleTrace& trace) {
  TraceView v;
  v.num1 = to_digits(trace.problem.a, trace.problem.task.render_base()).digits;
  v.num2 = to_digits(trace.problem.b, trace.problem.task.render_base()).digits;
  MachineState prev;
  prev.num1 = v.num1;
  prev.num2 = v.num2;
  IterationView cur;
  for (const auto& step : trace.steps) {
    switch (step.kind) {
      case RuleStep::Kind::LoopCheck:
        if (step.entered) {
          cur = IterationView{};
          cur.rem1_before = prev.num1;
          cur.rem2_before = prev.num2;
          cur.carry_in = prev.carry;
          cur.result_before = prev.result;
        } else {
          v.exit_result = prev.result;
          v.exit_carry = prev.carry;
        }
        break;
      case RuleStep::Kind::PopDigit1:
        cur.d1 = step.popped;
        cur.d1_empty = step.from_empty;
        cur.rem1_after = step.remainder;
        break;
      case RuleStep::Kind::PopDigit2:
        cur.d2 = step.popped;
        cur.d2_empty = step.from_empty;
        cur.rem2_after = step.remainder;
        break;
      case RuleStep::Kind::ComputeTotal:
        cur.total = step.total;
        break;
      case RuleStep::Kind::InsertResult:
        cur.inserted = step.inserted_digit;
        cur.result_after = step.result_after;
        break;
      case RuleStep::Kind::UpdateCarry:
        cur.carry_after = step.carry_after;
        v.iters.push_back(cur);
        break;
      case RuleStep::Kind::FinalCarry:
        v.final_applied = step.applied;
        v.final_result = step.result_after;
        break;
      case RuleStep::Kind::Return:
        break;
    }
    prev = step.state_after;
  }
  return v;
}

}  // namespace

const char* format_name(TraceFormat f) {
  switch (f) {
    case TraceFormat::Direct: return "direct";
    case TraceFormat::Scratchpad: return "scratchpad";
    case TraceFormat::ScratchpadTracing: return "scratchpad-tracing";
    case TraceFormat::RfftCode: return "rfft-code";
    case TraceFormat::RfftNL: return "rfft-nl";
  }
  return "unknown";
}

std::optional<TraceFormat> format_from_name(std::string_view name) {
  for (TraceFormat f : {TraceFormat::Direct, TraceFormat::Scratchpad, TraceFormat::ScratchpadTracing,
                        TraceFormat::RfftCode, TraceFormat::RfftNL}) {
    if (name == format_name(f)) return f;
  }
  return std::nullopt;
}

bool format_supports(TaskId task, TraceFormat format) {
  switch (format) {
    case TraceFormat::Direct:
      return true;
    case TraceFormat::Scratchpad:
    case TraceFormat::RfftCode:
      return task == TaskId::Addition || task == TaskId::BaseAddition ||
             task == TaskId::LastLetterConcat;
    case TraceFormat::ScratchpadTracing:
    case TraceFormat::RfftNL:
      return task == TaskId::Addition || task == TaskId::BaseAddition;
  }
  return false;
}

IOPair emit_direct(const Problem& problem) {
  IOPair io;
  io.format = TraceFormat::Direct;
  const TaskKind& t = problem.task;
  switch (t.id) {
    case TaskId::Addition:
    case TaskId::ModularAddition:
    case TaskId::BaseAddition: {
      int base = t.render_base();
      io.input = render_number(problem.a, base) + "+" + render_number(problem.b, base) + "=";
      io.output = render_number(eval(problem).value, base);
      meta_numeric(io, t, problem.a, problem.b);
      return io;
    }
    case TaskId::LinearRegression: {
      io.input = "(" + std::to_string(problem.a) + "," + std::to_string(problem.b) + ")=";
      io.output = std::to_string(eval(problem).value);
      meta_numeric(io, t, problem.a, problem.b);
      return io;
    }
    case TaskId::ChickenRabbit: {
      Answer ans = eval(problem);
      io.input = "Q: Rabbits have 4 legs and 1 head. Chickens have 2 legs and 1 head. There are " +
                 std::to_string(problem.a) + " legs and " + std::to_string(problem.b) +
                 " heads on the farm. How many rabbits and chickens are there?";
      io.output = "A: There are " + std::to_string(ans.rabbits) + " rabbits and " +
                  std::to_string(ans.chickens) + " chickens.";
      meta_numeric(io, t, problem.a, problem.b);
      return io;
    }
    case TaskId::LastLetterConcat:
      return emit_last_letter(TraceFormat::Direct, problem.names);
  }
  throw std::logic_error("unhandled task");
}

IOPair emit_scratchpad(unsigned long long a, unsigned long long b, int base, ScratchpadLayout layout) {
  RuleTrace trace = run_addition_rule(a, b, base);
  TraceView v = view_of(trace);

  auto state_line = [](const std::vector<int>& r1, const std::vector<int>& r2,
                       const std::vector<int>& res, int carry) {
    return digit_run(r1) + "+" + digit_run(r2) + "," + digit_run(res) + ",C:" + std::to_string(carry);
  };
  auto comment = [](int d1, int d2, int c, int u) {
    return "# added " + std::to_string(d1) + "+" + std::to_string(d2) + "+" + std::to_string(c) +
           "=" + std::to_string(u);
  };

  std::vector<std::string> lines;
  lines.push_back(state_line(v.num1, v.num2, {}, 0));
  auto push_pair = [&](const std::string& cmt, const std::string& state) {
    if (layout == ScratchpadLayout::Canonical) {
      lines.push_back(cmt);
      lines.push_back(state);
    } else {
      lines.push_back(state + " " + cmt);
    }
  };
  for (const auto& it : v.iters)
    push_pair(comment(it.d1, it.d2, it.carry_in, it.inserted),
              state_line(it.rem1_after, it.rem2_after, it.result_after, it.carry_after));
  if (v.final_applied)
    push_pair(comment(0, 0, v.exit_carry, v.exit_carry), state_line({}, {}, v.final_result, 0));
  lines.push_back(digit_run(v.final_result));

  IOPair io;
  io.format = TraceFormat::Scratchpad;
  io.input = render_number(a, base) + "+" + render_number(b, base) + "=";
  io.output = join_lines(lines);
  meta_numeric(io, base == 10 ? TaskKind::addition() : TaskKind::base_addition(base), a, b);
  return io;
}

std::string tracing_listing(int base) {
  std::string b = std::to_string(base);
  return join_lines({
      "def sum_digit_by_digit(num1, num2):",
      "    result=[]",
      "    carry=0",
      "    while num1 or num2:",
      "        digit1=num1.pop() if num1 else 0",
      "        digit2=num2.pop() if num2 else 0",
      "        total=digit1+digit2+carry",
      "        result.insert(0,total%" + b + ")",
      "        carry=total//" + b,
      "    if carry:",
      "        result.insert(0, carry)",
      "    return result",
  });
}

IOPair emit_scratchpad_tracing(const DigitString& num1, const DigitString& num2) {
  if (num1.base != num2.base) throw std::domain_error("operands must share a base");
  const int base = num1.base;
  RuleTrace trace = run_addition_rule(num1, num2);
  TraceView v = view_of(trace);

  const std::string listing = tracing_listing(base);
  std::vector<std::string> src;
  {
    size_t pos = 0;
    while (pos <= listing.size()) {
      size_t nl = listing.find('\n', pos);
      if (nl == std::string::npos) {
        src.push_back(listing.substr(pos));
        break;
      }
      src.push_back(listing.substr(pos, nl - pos));
      pos = nl + 1;
    }
  }

  // Ordered scope rendering; keys keep first-insertion order across updates.
  std::vector<std::pair<std::string, std::string>> scope;
  auto set_var = [&](const std::string& k, const std::string& val) {
    for (auto& kv : scope)
      if (kv.first == k) {
        kv.second = val;
        return;
      }
    scope.emplace_back(k, val);
  };
  auto render_scope = [&]() {
    std::string s = "{";
    for (size_t i = 0; i < scope.size(); ++i) {
      if (i) s += ", ";
      s += "'" + scope[i].first + "': " + scope[i].second;
    }
    return s + "}";
  };

  std::vector<std::string> lines;
  auto push_state = [&]() { lines.push_back("state: " + render_scope()); };
  auto push_line = [&](int idx) { lines.push_back("line: " + src[idx]); };

  const std::string callable = "'<callable_object sum_digit_by_digit>'";
  lines.push_back("state: {}");
  push_line(0);
  set_var("sum_digit_by_digit", callable);
  push_state();

  // Function scope: parameters appear when the body starts executing.
  scope.clear();
  set_var("num1", list_spaced(v.num1));
  set_var("num2", list_spaced(v.num2));
  push_line(1);
  set_var("result", "[]");
  push_state();
  push_line(2);
  set_var("carry", "0");
  push_state();

  for (const auto& it : v.iters) {
    push_line(3);  // while: traced only when the loop body runs
    push_state();
    push_line(4);
    set_var("num1", list_spaced(it.rem1_after));
    set_var("digit1", std::to_string(it.d1));
    push_state();
    push_line(5);
    set_var("num2", list_spaced(it.rem2_after));
    set_var("digit2", std::to_string(it.d2));
    push_state();
    push_line(6);
    set_var("total", std::to_string(it.total));
    push_state();
    push_line(7);
    set_var("result", list_spaced(it.result_after));
    push_state();
    push_line(8);
    set_var("carry", std::to_string(it.carry_after));
    push_state();
  }

  push_line(9);  // if carry:
  push_state();
  if (v.final_applied) {
    push_line(10);
    set_var("result", list_spaced(v.final_result));
    push_state();
  }
  push_line(11);
  scope.clear();
  set_var("sum_digit_by_digit", callable);
  set_var("output", list_spaced(v.final_result));
  push_state();

  IOPair io;
  io.format = TraceFormat::ScratchpadTracing;
  io.input = listing + "\n\noutput = sum_digit_by_digit(" + list_spaced(v.num1) + ", " +
             list_spaced(v.num2) + ")";
  io.output = join_lines(lines);
  meta_numeric(io, base == 10 ? TaskKind::addition() : TaskKind::base_addition(base),
               trace.problem.a, trace.problem.b);
  return io;
}

std::string rfft_code_listing(int base) {
  std::string b = std::to_string(base);
  return join_lines({
      "def sum_digit_by_digit(num1, num2):",
      "    # Initialize the result list and carry",
      "    result=[]",
      "    carry=0",
      "    # Loop through each digit",
      "    while num1 or num2:",
      "        # Get the current digits, defaulting to 0 if one number is shorter",
      "        digit1=num1.pop() if num1 else 0",
      "        digit2=num2.pop() if num2 else 0",
      "        # Calculate the sum of the current digits and the carry",
      "        total=digit1+digit2+carry",
      "        # Insert the last digit of total to the beginning of the result and update carry",
      "        result.insert(0,total%" + b + ")",
      "        carry=total//" + b,
      "    # If there's a remaining carry, insert it to the beginning of the result",
      "    if carry:",
      "        result.insert(0, carry)",
      "    # Return the result",
      "    return result",
  });
}

IOPair emit_rfft_code(const DigitString& num1, const DigitString& num2) {
  if (num1.base != num2.base) throw std::domain_error("operands must share a base");
  const int base = num1.base;
  const std::string b = std::to_string(base);
  const CodeRuleLines rule = code_rule_lines(base);
  RuleTrace trace = run_addition_rule(num1, num2);
  TraceView v = view_of(trace);

  std::vector<std::string> lines;
  auto quote = [&](const std::vector<std::string>& quoted) {
    lines.push_back("```");
    for (const auto& r : quoted) lines.push_back(r);
    lines.push_back("```");
  };
  auto check_block = [&](const std::vector<int>& r1, const std::vector<int>& r2, bool entered) {
    lines.push_back("num1=" + list_tight(r1));
    lines.push_back("num2=" + list_tight(r2));
    lines.push_back(std::string("bool(num1)=") + (r1.empty() ? "False" : "True"));
    lines.push_back(std::string("bool(num2)=") + (r2.empty() ? "False" : "True"));
    lines.push_back(std::string("num1 or num2=") + (entered ? "True" : "False"));
    lines.push_back(entered ? "enter the loop" : "end the loop");
  };
  auto pop_block = [&](int which, const std::vector<int>& before, const std::vector<int>& after,
                       int digit, bool from_empty) {
    std::string n = "num" + std::to_string(which);
    std::string d = "digit" + std::to_string(which);
    if (from_empty) {
      lines.push_back(n + "=[]");
      lines.push_back("bool(" + n + ")=False");
      lines.push_back(d + "=0");
    } else {
      lines.push_back(n + "=" + list_tight(before));
      lines.push_back("bool(" + n + ")=True");
      lines.push_back(n + ".pop()");
      lines.push_back(n + "=" + list_tight(after));
      lines.push_back(d + "=" + std::to_string(digit));
    }
  };

  lines.push_back("num1=" + list_tight(v.num1));
  lines.push_back("num2=" + list_tight(v.num2));
  lines.push_back("1. Initialize Result and Carry");
  lines.push_back("result=[]");
  lines.push_back("carry=0");
  lines.push_back("2. Loop Through Each Digit");
  quote({rule.while_loop});
  lines.push_back("2.1 check the stop criterion");
  check_block(v.num1, v.num2, !v.iters.empty());

  for (size_t i = 0; i < v.iters.size(); ++i) {
    const auto& it = v.iters[i];
    lines.push_back("2.2 one iteration");
    quote({rule.pop1});
    pop_block(1, it.rem1_before, it.rem1_after, it.d1, it.d1_empty);
    quote({rule.pop2});
    pop_block(2, it.rem2_before, it.rem2_after, it.d2, it.d2_empty);
    quote({rule.total});
    lines.push_back("total=digit1+digit2+carry=" + std::to_string(it.d1) + "+" +
                    std::to_string(it.d2) + "+" + std::to_string(it.carry_in) + "=" +
                    std::to_string(it.total));
    quote({rule.insert});
    lines.push_back("result=" + list_tight(it.result_before));
    lines.push_back("total%" + b + "=" + std::to_string(it.total) + "%" + b + "=" +
                    std::to_string(it.inserted));
    lines.push_back("result=" + list_tight(it.result_after));
    quote({rule.carry});
    lines.push_back("carry=" + std::to_string(it.total) + "//" + b + "=" +
                    std::to_string(it.carry_after));
    lines.push_back("2.3 back to the start of the loop");
    quote({rule.while_loop});
    lines.push_back("2.1 check the stop criterion");
    bool last = i + 1 == v.iters.size();
    check_block(it.rem1_after, it.rem2_after, !last);
  }

  lines.push_back("3. Check Remaining Carry");
  quote(rule.final_carry);
  lines.push_back("result=" + list_tight(v.exit_result));
  lines.push_back("carry=" + std::to_string(v.exit_carry));
  lines.push_back(std::string("bool(carry)=") + (v.final_applied ? "True" : "False"));
  if (v.final_applied)
    lines.push_back("result=" + list_tight(v.final_result));
  else
    lines.push_back("pass");
  lines.push_back("4. Return Result");
  quote({rule.ret});
  lines.push_back("result=" + list_tight(v.final_result));

  IOPair io;
  io.format = TraceFormat::RfftCode;
  io.input = "Follow the code step by step to answer the question:\n" + list_spaced(v.num1) + "+" +
             list_spaced(v.num2) + "=\n" + rfft_code_listing(base);
  io.output = join_lines(lines);
  meta_numeric(io, base == 10 ? TaskKind::addition() : TaskKind::base_addition(base),
               trace.problem.a, trace.problem.b);
  return io;
}

CodeRuleLines code_rule_lines(int base) {
  std::string b = std::to_string(base);
  CodeRuleLines r;
  r.while_loop = "while num1 or num2:";
  r.pop1 = "digit1=num1.pop() if num1 else 0";
  r.pop2 = "digit2=num2.pop() if num2 else 0";
  r.total = "total=digit1+digit2+carry";
  r.insert = "result.insert(0,total%" + b + ")";
  r.carry = "carry=total//" + b;
  r.final_carry = {"if carry:", "    result.insert(0, carry)"};
  r.ret = "return result";
  return r;
}

NlRuleText nl_rule_text(int base) {
  NlRuleText r;
  r.r1 = "1. In the initial state, the carry from the previous digit is 0 and the result is <empty>.";
  r.begin_head = "2. Begin the loop through each digit:";
  r.r21 =
      "2.1. Determine whether the two numbers are <empty>. If both are <empty>, the loop is over. "
      "If one of them is not <empty>, go to the iteration.";
  r.r22_head = "2.2. One iteration:";
  r.r221 =
      "2.2.1. Find the rightmost digit of each number and remove the digit from the number. "
      "If one of them is <empty>, the digit is 0.";
  r.r222 = "2.2.2. Calculate the sum of the current digits and the carry.";
  r.r223_quote =
      "2.2.3. Insert the last digit of the summation to the beginning of the result and update carry.";
  r.r223_full = r.r223_quote + " If the sum is larger than " + std::to_string(base - 1) +
                ", carry is 1. Otherwise, carry is 0.";
  r.r23 = "2.3. Back to the start of the loop.";
  r.r3 =
      "3. When the loop through each digit is over, if there's a remaining carry, insert it to the "
      "beginning of the result.";
  r.r4 = "4. Return the result.";
  return r;
}

std::string rfft_nl_rule_listing(int base) {
  NlRuleText r = nl_rule_text(base);
  return join_lines({
      "Add two numbers in order from the lowest digit to the highest digit. The operation rules are "
      "as follows:",
      r.r1,
      r.begin_head,
      "    " + r.r21,
      "    " + r.r22_head,
      "        " + r.r221,
      "        " + r.r222,
      "        " + r.r223_full,
      "    " + r.r23,
      r.r3,
      r.r4,
  });
}

IOPair emit_rfft_nl(unsigned long long a, unsigned long long b, int base) {
  RuleTrace trace = run_addition_rule(a, b, base);
  TraceView v = view_of(trace);
  NlRuleText r = nl_rule_text(base);
  const std::string bs = std::to_string(base);

  std::vector<std::string> lines;
  auto quote = [&](std::initializer_list<std::string> rule) {
    lines.push_back("```");
    for (const auto& q : rule) lines.push_back(q);
    lines.push_back("```");
  };
  auto value = [&](const std::vector<int>& digits) {
    return digits.empty() ? bt("<empty>") : bt(digit_run(digits));
  };
  auto result_value = [&](const std::vector<int>& digits) {
    return digits.empty() ? bt("<empty>") : bt(comma_run(digits));
  };
  auto check_narration = [&](const std::vector<int>& r1, const std::vector<int>& r2) {
    auto part = [&](const char* name, const std::vector<int>& rem) {
      return rem.empty() ? std::string(name) + " is " + bt("<empty>") + "."
                         : std::string(name) + " " + bt(digit_run(rem)) + " is not <empty>.";
    };
    lines.push_back(part("num1", r1) + " " + part("num2", r2));
    if (!r1.empty() && !r2.empty())
      lines.push_back("Because both are not <empty>, go to the iteration.");
    else if (r1.empty() && r2.empty())
      lines.push_back("Because both are <empty>, the loop is over.");
    else
      lines.push_back("Because one of them is not <empty>, go to the iteration.");
  };

  lines.push_back("num1=" + bt(digit_run(v.num1)) + "; num2=" + bt(digit_run(v.num2)));
  quote({r.r1});
  lines.push_back("Initialize the carry as 0 and the result is " + bt("<empty>") + ".");
  quote({r.begin_head, r.r21});
  check_narration(v.num1, v.num2);

  for (const auto& it : v.iters) {
    quote({r.r22_head, r.r221});
    {
      auto found = [&](const char* name, const std::vector<int>& before, int d, bool from_empty) {
        return from_empty ? std::string(name) + " is " + bt("<empty>") + ", so the digit is 0."
                          : "The rightmost digit of " + std::string(name) + " " +
                                bt(digit_run(before)) + " is " + bt(std::to_string(d)) + ".";
      };
      auto remaining = [&](const char* name, const std::vector<int>& before,
                           const std::vector<int>& after, bool from_empty) {
        return from_empty ? "the remaining " + std::string(name) + " is " + bt("<empty>")
                          : "the remaining " + std::string(name) + " " + bt(digit_run(before)) +
                                " is " + value(after);
      };
      lines.push_back(found("num1", it.rem1_before, it.d1, it.d1_empty) + " " +
                      found("num2", it.rem2_before, it.d2, it.d2_empty) + " Then " +
                      remaining("num1", it.rem1_before, it.rem1_after, it.d1_empty) + " and " +
                      remaining("num2", it.rem2_before, it.rem2_after, it.d2_empty) + ".");
    }
    quote({r.r222});
    lines.push_back("The sum of " + bt(std::to_string(it.d1)) + ", " + bt(std::to_string(it.d2)) +
                    " and carry " + bt(std::to_string(it.carry_in)) + " is " +
                    std::to_string(it.d1) + " + " + std::to_string(it.d2) + " + " +
                    std::to_string(it.carry_in) + " = " + std::to_string(it.total) + ".");
    quote({r.r223_quote});
    lines.push_back("The last digit of the summation is " + std::to_string(it.total) + " % " + bs +
                    " = " + std::to_string(it.inserted) + ". The previous result is " +
                    result_value(it.result_before) + ", now the result is: " +
                    bt(comma_run(it.result_after)) + ".");
    lines.push_back("The carry is " + std::to_string(it.total) + " // " + bs + " = " +
                    std::to_string(it.carry_after) + ".");
    quote({r.r23});
    quote({r.r21});
    check_narration(it.rem1_after, it.rem2_after);
  }

  quote({r.r3});
  if (v.final_applied)
    lines.push_back("The carry is 1, so add an 1 to the beginning of the result " +
                    result_value(v.exit_result) + ". So the final result is " +
                    bt(comma_run(v.final_result)) + ".");
  else
    lines.push_back("The carry is 0, so the result remains " + result_value(v.exit_result) +
                    ". So the final result is " + bt(comma_run(v.final_result)) + ".");
  quote({r.r4});
  lines.push_back("The final result is " + bt(comma_run(v.final_result)) + ".");

  IOPair io;
  io.format = TraceFormat::RfftNL;
  io.input = "Follow the rules step by step to answer the question: " + bt(digit_run(v.num1)) + "+" +
             bt(digit_run(v.num2)) + "=\n" + rfft_nl_rule_listing(base);
  io.output = join_lines(lines);
  meta_numeric(io, base == 10 ? TaskKind::addition() : TaskKind::base_addition(base), a, b);
  return io;
}

std::string last_letter_code_listing() {
  return join_lines({
      "def last_letter_concat(names):",
      "    # Initialize Result",
      "    result = \"\"",
      "    # Main Loop",
      "    for name in names:",
      "        result += name[-1]",
      "    return result",
  });
}

IOPair emit_last_letter(TraceFormat format, const std::vector<std::string>& names) {
  RuleTrace trace = run_last_letter_rule(names);
  std::string joined;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) joined += ", ";
    joined += names[i];
  }

  IOPair io;
  io.format = format;
  io.task = TaskKind::last_letter();
  io.names = names;

  switch (format) {
    case TraceFormat::Direct:
      io.input = "Concatenate the last letter of the following names:\n" + joined;
      io.output = trace.final_text;
      return io;
    case TraceFormat::Scratchpad: {
      io.input = "Concatenate the last letter of the following names:\n" + joined;
      std::vector<std::string> lines;
      for (const auto& st : trace.letter_steps) {
        lines.push_back("# Concatenating the last letter of " + st.word);
        lines.push_back(st.result_after);
      }
      io.output = join_lines(lines);
      return io;
    }
    case TraceFormat::RfftCode: {
      io.input = "Follow the code step by step to concatenate the last letter of the following names:\n" +
                 joined + "\n" + last_letter_code_listing();
      std::vector<std::string> lines;
      auto quote = [&](const std::string& rule) {
        lines.push_back("```");
        lines.push_back(rule);
        lines.push_back("```");
      };
      std::string names_list = "[";
      for (size_t i = 0; i < names.size(); ++i) {
        if (i) names_list += ",";
        names_list += "'" + names[i] + "'";
      }
      names_list += "]";
      lines.push_back("names = " + names_list);
      lines.push_back("1. Initialze result");  // header text recited as-is
      lines.push_back("result = \"\"");
      lines.push_back("2. Main Loop");
      std::string prev;
      for (const auto& st : trace.letter_steps) {
        lines.push_back("2.1 one iteration");
        quote("for name in names:");
        lines.push_back("name = \"" + st.word + "\"");
        quote("result += name[-1]");
        lines.push_back("result = \"" + prev + "\"");
        lines.push_back(std::string("name[-1] = \"") + st.letter + "\"");
        lines.push_back(std::string("result += \"") + st.letter + "\"");
        lines.push_back("result = \"" + st.result_after + "\"");
        prev = st.result_after;
      }
      lines.push_back("3. Return Result");
      quote("resturn result");  // recited rule text, including its misprint
      lines.push_back("result = \"" + trace.final_text + "\"");
      io.output = join_lines(lines);
      return io;
    }
    default:
      throw std::invalid_argument("last-letter supports direct, scratchpad and rfft-code only");
  }
}

IOPair emit(const Problem& problem, TraceFormat format, ScratchpadLayout layout) {
  if (!format_supports(problem.task.id, format))
    throw std::invalid_argument(std::string("format ") + format_name(format) +
                                " does not support task " + task_name(problem.task.id));
  if (problem.task.id == TaskId::LastLetterConcat) return emit_last_letter(format, problem.names);

  int base = problem.task.render_base();
  switch (format) {
    case TraceFormat::Direct:
      return emit_direct(problem);
    case TraceFormat::Scratchpad:
      return emit_scratchpad(problem.a, problem.b, base, layout);
    case TraceFormat::ScratchpadTracing:
      return emit_scratchpad_tracing(to_digits(problem.a, base), to_digits(problem.b, base));
    case TraceFormat::RfftCode:
      return emit_rfft_code(to_digits(problem.a, base), to_digits(problem.b, base));
    case TraceFormat::RfftNL:
      return emit_rfft_nl(problem.a, problem.b, base);
  }
  throw std::logic_error("unhandled format");
}

}  // namespace rulebench
