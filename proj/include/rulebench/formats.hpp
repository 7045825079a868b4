#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rulebench/rule_engine.hpp"
#include "rulebench/task.hpp"

// Supervision-format emitters. Each one replays the rule interpreter and
// renders the trace; output text is byte-deterministic, LF separated, with
// no trailing newline.

namespace rulebench {

enum class TraceFormat {
  Direct,             // question -> bare answer
  Scratchpad,         // compact per-digit state lines with "# added" comments
  ScratchpadTracing,  // interpreter-style state/line alternation
  RfftCode,           // code rule recited line by line with variable values
  RfftNL,             // numbered natural-language rule recited the same way
};

const char* format_name(TraceFormat f);  // stable identifier, e.g. "rfft-code"
std::optional<TraceFormat> format_from_name(std::string_view name);

// Which formats each task supports.
bool format_supports(TaskId task, TraceFormat format);

// Scratchpad layout. Canonical puts each "# added" comment on its own line
// before the state it produces; Inline appends it to the state line.
enum class ScratchpadLayout { Canonical, Inline };

struct IOPair {
  std::string input, output;
  TaskKind task;
  TraceFormat format = TraceFormat::Direct;
  std::optional<unsigned long long> a, b;
  std::vector<std::string> names;
  int len_a = 0, len_b = 0;       // digit counts (numeric tasks)
  long long seed_index = -1;      // position in a sampled corpus, -1 otherwise
  bool exotic = false;
};

IOPair emit_direct(const Problem& problem);
IOPair emit_scratchpad(unsigned long long a, unsigned long long b, int base = 10,
                       ScratchpadLayout layout = ScratchpadLayout::Canonical);
IOPair emit_scratchpad_tracing(const DigitString& num1, const DigitString& num2);
IOPair emit_rfft_code(const DigitString& num1, const DigitString& num2);
IOPair emit_rfft_nl(unsigned long long a, unsigned long long b, int base = 10);
// Word task emitter; format must be Direct, Scratchpad or RfftCode.
IOPair emit_last_letter(TraceFormat format, const std::vector<std::string>& names);

// Emits `problem` in `format` (dispatch helper used by corpus building and
// the verifier's expected-side rendering).
IOPair emit(const Problem& problem, TraceFormat format,
            ScratchpadLayout layout = ScratchpadLayout::Canonical);

// Source listings recited by the rule-following formats.
std::string rfft_code_listing(int base);
std::string rfft_nl_rule_listing(int base);
std::string tracing_listing(int base);
std::string last_letter_code_listing();

// Individual rule lines quoted inside rule-following outputs; the verifier
// matches quoted blocks against these.
struct CodeRuleLines {
  std::string while_loop, pop1, pop2, total, insert, carry;
  std::vector<std::string> final_carry;  // "if carry:" plus the indented insert
  std::string ret;
};
CodeRuleLines code_rule_lines(int base);

struct NlRuleText {
  std::string r1, begin_head, r21, r22_head, r221, r222, r223_quote, r223_full, r23, r3, r4;
};
NlRuleText nl_rule_text(int base);

}  // namespace rulebench
