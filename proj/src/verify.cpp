#include "rulebench/verify.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <thread>

namespace rulebench {

namespace {

using Kind = TraceEvent::Kind;

struct Line {
  std::string text;
  size_t offset = 0;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string s(text.substr(pos, end - pos));
    if (!s.empty() && s.back() == '\r') s.pop_back();
    lines.push_back({std::move(s), pos});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  // A trailing newline yields one empty tail line; drop it.
  if (lines.size() > 1 && lines.back().text.empty()) lines.pop_back();
  return lines;
}

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\t') out += c;
  return out;
}

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string tight(const std::vector<int>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

std::string join_digits(const std::vector<int>& v) {
  std::string s;
  for (int d : v) s += std::to_string(d);
  return s;
}

// Token cursor over one line; every matcher skips leading blanks, so single
// spaces around '=' and inside lists are tolerated.
struct Cur {
  std::string_view s;
  size_t i = 0;

  void sp() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool lit(std::string_view t) {
    sp();
    if (s.substr(i).substr(0, t.size()) == t) {
      i += t.size();
      return true;
    }
    return false;
  }
  std::optional<long long> num() {
    sp();
    size_t j = i;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
    if (j == i || j - i > 18) return std::nullopt;
    long long v = 0;
    for (size_t k = i; k < j; ++k) v = v * 10 + (s[k] - '0');
    i = j;
    return v;
  }
  // Contiguous digit run as single digits ("59" -> {5,9}); may be empty.
  std::vector<int> digit_run() {
    sp();
    std::vector<int> v;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') v.push_back(s[i++] - '0');
    return v;
  }
  std::optional<std::vector<int>> list() {
    sp();
    if (!lit("[")) return std::nullopt;
    std::vector<int> v;
    sp();
    if (lit("]")) return v;
    for (;;) {
      auto n = num();
      if (!n) return std::nullopt;
      v.push_back(static_cast<int>(*n));
      sp();
      if (lit("]")) return v;
      if (!lit(",")) return std::nullopt;
    }
  }
  std::optional<bool> boolean() {
    if (lit("True")) return true;
    if (lit("False")) return false;
    return std::nullopt;
  }
  // `...` including empty content.
  std::optional<std::string> tick() {
    sp();
    if (i >= s.size() || s[i] != '`') return std::nullopt;
    size_t j = s.find('`', i + 1);
    if (j == std::string_view::npos) return std::nullopt;
    std::string out(s.substr(i + 1, j - i - 1));
    i = j + 1;
    return out;
  }
  std::optional<std::string> quoted() {
    sp();
    if (i >= s.size() || s[i] != '"') return std::nullopt;
    size_t j = s.find('"', i + 1);
    if (j == std::string_view::npos) return std::nullopt;
    std::string out(s.substr(i + 1, j - i - 1));
    i = j + 1;
    return out;
  }
  bool done() {
    sp();
    return i == s.size();
  }
};

const char* bool_name(bool b) { return b ? "True" : "False"; }

TraceEvent make_event(Kind k, size_t offset) {
  TraceEvent e;
  e.kind = k;
  e.byte_offset = offset;
  return e;
}

void put(TraceEvent& e, std::string name, std::string value) {
  e.fields.emplace_back(std::move(name), std::move(value));
}

// Shared parser state: events plus the first grammar violation.
struct Builder {
  ParsedTrace out;
  const std::vector<Line>& lines;
  size_t idx = 0;

  explicit Builder(TraceFormat f, const std::vector<Line>& l) : lines(l) { out.format = f; }

  bool failed() const { return out.has_error; }
  bool fail(size_t offset, std::string msg) {
    if (!out.has_error) {
      out.has_error = true;
      out.error_offset = offset;
      out.error_message = std::move(msg);
    }
    return false;
  }
  bool fail_here(std::string msg) {
    size_t off = idx < lines.size() ? lines[idx].offset
                                    : (lines.empty() ? 0 : lines.back().offset + lines.back().text.size());
    return fail(off, std::move(msg));
  }
  bool at_end() const { return idx >= lines.size(); }
  const Line& cur() const { return lines[idx]; }

  bool expect_header(std::string_view text) {
    if (at_end()) return fail_here(std::string("expected '") + std::string(text) + "'");
    if (trim(cur().text) != text)
      return fail_here(std::string("expected '") + std::string(text) + "'");
    ++idx;
    return true;
  }

  // ``` quoted lines ``` ; quoted lines compared space-insensitively.
  bool expect_quote(const std::vector<std::string>& rule) {
    if (at_end() || trim(cur().text) != "```") return fail_here("expected quoted rule");
    size_t start = idx++;
    std::vector<std::string> got;
    while (!at_end() && trim(cur().text) != "```") got.push_back(lines[idx++].text);
    if (at_end()) return fail(lines[start].offset, "unterminated rule quote");
    ++idx;  // closing fence
    if (got.size() != rule.size()) return fail(lines[start].offset, "quoted rule mismatch");
    for (size_t k = 0; k < got.size(); ++k)
      if (strip_spaces(got[k]) != strip_spaces(rule[k]))
        return fail(lines[start].offset, "quoted rule mismatch");
    return true;
  }

  // Quote matching one of several bodies; returns the matching index or -1.
  int expect_quote_any(const std::vector<std::vector<std::string>>& candidates) {
    if (at_end() || trim(cur().text) != "```") {
      fail_here("expected quoted rule");
      return -1;
    }
    size_t start = idx++;
    std::vector<std::string> got;
    while (!at_end() && trim(cur().text) != "```") got.push_back(lines[idx++].text);
    if (at_end()) {
      fail(lines[start].offset, "unterminated rule quote");
      return -1;
    }
    ++idx;
    for (size_t c = 0; c < candidates.size(); ++c) {
      const auto& cand = candidates[c];
      if (cand.size() != got.size()) continue;
      bool ok = true;
      for (size_t k = 0; k < got.size(); ++k)
        if (strip_spaces(got[k]) != strip_spaces(cand[k])) {
          ok = false;
          break;
        }
      if (ok) return static_cast<int>(c);
    }
    fail(lines[start].offset, "quoted rule mismatch");
    return -1;
  }

  // key = [list]
  std::optional<std::vector<int>> kv_list(std::string_view key) {
    if (at_end()) {
      fail_here(std::string("expected ") + std::string(key) + "=[...]");
      return std::nullopt;
    }
    Cur c{cur().text};
    if (!(c.lit(key) && c.lit("="))) {
      fail_here(std::string("expected ") + std::string(key) + "=[...]");
      return std::nullopt;
    }
    auto v = c.list();
    if (!v || !c.done()) {
      fail_here(std::string("malformed list after ") + std::string(key) + "=");
      return std::nullopt;
    }
    ++idx;
    return v;
  }

  std::optional<long long> kv_int(std::string_view key) {
    if (at_end()) {
      fail_here(std::string("expected ") + std::string(key) + "=<int>");
      return std::nullopt;
    }
    Cur c{cur().text};
    if (!(c.lit(key) && c.lit("="))) {
      fail_here(std::string("expected ") + std::string(key) + "=<int>");
      return std::nullopt;
    }
    auto v = c.num();
    if (!v || !c.done()) {
      fail_here(std::string("malformed value after ") + std::string(key) + "=");
      return std::nullopt;
    }
    ++idx;
    return v;
  }

  std::optional<bool> kv_bool(std::string_view key) {
    if (at_end()) {
      fail_here(std::string("expected ") + std::string(key) + "=<bool>");
      return std::nullopt;
    }
    Cur c{cur().text};
    if (!(c.lit(key) && c.lit("="))) {
      fail_here(std::string("expected ") + std::string(key) + "=<bool>");
      return std::nullopt;
    }
    auto v = c.boolean();
    if (!v || !c.done()) {
      fail_here(std::string("malformed boolean after ") + std::string(key) + "=");
      return std::nullopt;
    }
    ++idx;
    return v;
  }
};

// ---------------------------------------------------------------- scratchpad

struct ScratchState {
  std::vector<int> rem1, rem2, result;
  long long carry = 0;
};

std::optional<ScratchState> parse_scratch_state(std::string_view text) {
  Cur c{text};
  ScratchState st;
  st.rem1 = c.digit_run();
  if (!c.lit("+")) return std::nullopt;
  st.rem2 = c.digit_run();
  if (!c.lit(",")) return std::nullopt;
  st.result = c.digit_run();
  if (!c.lit(",")) return std::nullopt;
  if (!c.lit("C")) return std::nullopt;
  if (!c.lit(":")) return std::nullopt;
  auto carry = c.num();
  if (!carry || !c.done()) return std::nullopt;
  st.carry = *carry;
  return st;
}

struct ScratchComment {
  long long d1 = 0, d2 = 0, c = 0, u = 0;
};

std::optional<ScratchComment> parse_scratch_comment(std::string_view text) {
  Cur c{text};
  if (!c.lit("#")) return std::nullopt;
  if (!c.lit("added")) return std::nullopt;
  ScratchComment out;
  auto d1 = c.num();
  if (!d1 || !c.lit("+")) return std::nullopt;
  auto d2 = c.num();
  if (!d2 || !c.lit("+")) return std::nullopt;
  auto cc = c.num();
  if (!cc || !c.lit("=")) return std::nullopt;
  auto u = c.num();
  if (!u || !c.done()) return std::nullopt;
  out.d1 = *d1;
  out.d2 = *d2;
  out.c = *cc;
  out.u = *u;
  return out;
}

void push_scratch_pair(ParsedTrace& out, const ScratchComment& cmt, const ScratchState& st,
                       size_t offset) {
  TraceEvent e = make_event(Kind::ScratchPair, offset);
  put(e, "d1", std::to_string(cmt.d1));
  put(e, "d2", std::to_string(cmt.d2));
  put(e, "c", std::to_string(cmt.c));
  put(e, "u", std::to_string(cmt.u));
  put(e, "rem1", tight(st.rem1));
  put(e, "rem2", tight(st.rem2));
  put(e, "result", tight(st.result));
  put(e, "carry", std::to_string(st.carry));
  out.events.push_back(std::move(e));
}

ParsedTrace parse_scratchpad_addition(std::string_view text) {
  auto lines = split_lines(text);
  Builder b(TraceFormat::Scratchpad, lines);
  ParsedTrace& out = b.out;

  if (lines.empty() || lines[0].text.empty()) {
    b.fail(0, "empty trace");
    return out;
  }
  auto init = parse_scratch_state(lines[0].text);
  if (!init) {
    b.fail(lines[0].offset, "malformed initial state line");
    return out;
  }
  {
    TraceEvent e = make_event(Kind::ScratchInit, lines[0].offset);
    put(e, "rem1", tight(init->rem1));
    put(e, "rem2", tight(init->rem2));
    put(e, "result", tight(init->result));
    put(e, "carry", std::to_string(init->carry));
    out.events.push_back(std::move(e));
  }

  size_t pairs = 0;
  bool have_answer = false;
  size_t i = 1;
  while (i < lines.size()) {
    const Line& line = lines[i];
    std::string trimmed = trim(line.text);
    bool is_last = i + 1 == lines.size();
    if (is_last && !trimmed.empty() &&
        trimmed.find_first_not_of("0123456789") == std::string::npos) {
      TraceEvent e = make_event(Kind::Answer, line.offset);
      put(e, "answer", trimmed);
      out.events.push_back(std::move(e));
      have_answer = true;
      ++i;
      break;
    }
    if (!trimmed.empty() && trimmed[0] == '#') {
      auto cmt = parse_scratch_comment(trimmed);
      if (!cmt) {
        b.fail(line.offset, "malformed comment line");
        break;
      }
      if (i + 1 >= lines.size()) {
        b.fail(line.offset, "comment without following state line");
        break;
      }
      auto st = parse_scratch_state(lines[i + 1].text);
      if (!st) {
        b.fail(lines[i + 1].offset, "malformed state line");
        break;
      }
      push_scratch_pair(out, *cmt, *st, line.offset);
      ++pairs;
      i += 2;
      continue;
    }
    size_t hash = line.text.find('#');
    if (hash != std::string::npos) {
      auto st = parse_scratch_state(line.text.substr(0, hash));
      auto cmt = parse_scratch_comment(line.text.substr(hash));
      if (!st || !cmt) {
        b.fail(line.offset, "malformed inline comment line");
        break;
      }
      push_scratch_pair(out, *cmt, *st, line.offset);
      ++pairs;
      ++i;
      continue;
    }
    b.fail(line.offset, "expected comment line, inline state or final answer");
    break;
  }
  if (!out.has_error && !have_answer)
    b.fail(text.size(), "missing final answer line");
  if (!out.has_error && pairs == 0)
    b.fail(out.events.back().byte_offset, "no iteration lines before the final answer");
  return out;
}

// ----------------------------------------------------------------- rfft-code

void push_check(ParsedTrace& out, size_t offset, const std::vector<int>& r1,
                const std::vector<int>& r2, bool b1, bool b2, bool orv, bool entered) {
  TraceEvent e = make_event(Kind::Check, offset);
  put(e, "rem1", tight(r1));
  put(e, "rem2", tight(r2));
  put(e, "b1", bool_name(b1));
  put(e, "b2", bool_name(b2));
  put(e, "or", bool_name(orv));
  put(e, "decision", entered ? "enter" : "exit");
  out.events.push_back(std::move(e));
}

ParsedTrace parse_rfft_code(std::string_view text, const ParseContext& ctx) {
  auto lines = split_lines(text);
  Builder b(TraceFormat::RfftCode, lines);
  ParsedTrace& out = b.out;
  const CodeRuleLines rule = code_rule_lines(ctx.base);
  const std::string bs = std::to_string(ctx.base);

  auto echo1 = b.kv_list("num1");
  auto echo2 = echo1 ? b.kv_list("num2") : std::nullopt;
  if (!echo2) return out;
  {
    TraceEvent e = make_event(Kind::Echo, lines[0].offset);
    put(e, "rem1", tight(*echo1));
    put(e, "rem2", tight(*echo2));
    out.events.push_back(std::move(e));
  }
  if (!b.expect_header("1. Initialize Result and Carry")) return out;
  size_t init_off = b.at_end() ? text.size() : b.cur().offset;
  auto init_result = b.kv_list("result");
  auto init_carry = init_result ? b.kv_int("carry") : std::nullopt;
  if (!init_carry) return out;
  {
    TraceEvent e = make_event(Kind::Init, init_off);
    put(e, "result", tight(*init_result));
    put(e, "carry", std::to_string(*init_carry));
    out.events.push_back(std::move(e));
  }
  if (!b.expect_header("2. Loop Through Each Digit")) return out;

  for (;;) {
    if (!b.expect_quote({rule.while_loop})) return out;
    if (!b.expect_header("2.1 check the stop criterion")) return out;
    size_t check_off = b.at_end() ? text.size() : b.cur().offset;
    auto r1 = b.kv_list("num1");
    auto r2 = r1 ? b.kv_list("num2") : std::nullopt;
    auto b1 = r2 ? b.kv_bool("bool(num1)") : std::nullopt;
    auto b2 = b1 ? b.kv_bool("bool(num2)") : std::nullopt;
    auto orv = b2 ? b.kv_bool("num1 or num2") : std::nullopt;
    if (!orv) return out;
    if (b.at_end()) {
      b.fail_here("expected loop decision");
      return out;
    }
    std::string decision = trim(b.cur().text);
    bool entered;
    if (decision == "enter the loop")
      entered = true;
    else if (decision == "end the loop")
      entered = false;
    else {
      b.fail_here("expected loop decision");
      return out;
    }
    ++b.idx;
    push_check(out, check_off, *r1, *r2, *b1, *b2, *orv, entered);
    if (!entered) break;

    if (!b.expect_header("2.2 one iteration")) return out;
    for (int which = 1; which <= 2; ++which) {
      if (!b.expect_quote({which == 1 ? rule.pop1 : rule.pop2})) return out;
      std::string n = "num" + std::to_string(which);
      std::string d = "digit" + std::to_string(which);
      size_t pop_off = b.at_end() ? text.size() : b.cur().offset;
      auto before = b.kv_list(n);
      auto avail = before ? b.kv_bool("bool(" + n + ")") : std::nullopt;
      if (!avail) return out;
      TraceEvent e = make_event(Kind::Pop, pop_off);
      put(e, "which", std::to_string(which));
      put(e, "before", tight(*before));
      put(e, "avail", bool_name(*avail));
      if (*avail) {
        if (b.at_end() || strip_spaces(b.cur().text) != n + ".pop()") {
          b.fail_here("expected " + n + ".pop()");
          return out;
        }
        ++b.idx;
        auto after = b.kv_list(n);
        if (!after) return out;
        put(e, "after", tight(*after));
      }
      auto digit = b.kv_int(d);
      if (!digit) return out;
      put(e, "digit", std::to_string(*digit));
      out.events.push_back(std::move(e));
    }

    if (!b.expect_quote({rule.total})) return out;
    if (b.at_end()) {
      b.fail_here("expected total recitation");
      return out;
    }
    {
      Cur c{b.cur().text};
      auto bad = [&]() {
        b.fail_here("malformed total recitation");
        return &out;
      };
      if (!(c.lit("total") && c.lit("=") && c.lit("digit1") && c.lit("+") && c.lit("digit2") &&
            c.lit("+") && c.lit("carry") && c.lit("=")))
        return *bad();
      auto d1 = c.num();
      if (!d1 || !c.lit("+")) return *bad();
      auto d2 = c.num();
      if (!d2 || !c.lit("+")) return *bad();
      auto cc = c.num();
      if (!cc || !c.lit("=")) return *bad();
      auto t = c.num();
      if (!t || !c.done()) return *bad();
      TraceEvent e = make_event(Kind::Total, b.cur().offset);
      put(e, "d1", std::to_string(*d1));
      put(e, "d2", std::to_string(*d2));
      put(e, "c", std::to_string(*cc));
      put(e, "total", std::to_string(*t));
      out.events.push_back(std::move(e));
      ++b.idx;
    }

    if (!b.expect_quote({rule.insert})) return out;
    size_t ins_off = b.at_end() ? text.size() : b.cur().offset;
    auto before = b.kv_list("result");
    if (!before) return out;
    if (b.at_end()) {
      b.fail_here("expected modulo recitation");
      return out;
    }
    {
      Cur c{b.cur().text};
      auto bad = [&]() {
        b.fail_here("malformed modulo recitation");
        return &out;
      };
      if (!(c.lit("total") && c.lit("%") && c.lit(bs) && c.lit("="))) return *bad();
      auto t2 = c.num();
      if (!t2 || !c.lit("%") || !c.lit(bs) || !c.lit("=")) return *bad();
      auto u = c.num();
      if (!u || !c.done()) return *bad();
      ++b.idx;
      auto after = b.kv_list("result");
      if (!after) return out;
      TraceEvent e = make_event(Kind::Insert, ins_off);
      put(e, "before", tight(*before));
      put(e, "total_echo", std::to_string(*t2));
      put(e, "digit", std::to_string(*u));
      put(e, "after", tight(*after));
      out.events.push_back(std::move(e));
    }

    if (!b.expect_quote({rule.carry})) return out;
    if (b.at_end()) {
      b.fail_here("expected carry recitation");
      return out;
    }
    {
      Cur c{b.cur().text};
      auto bad = [&]() {
        b.fail_here("malformed carry recitation");
        return &out;
      };
      if (!(c.lit("carry") && c.lit("="))) return *bad();
      auto t3 = c.num();
      if (!t3 || !c.lit("//") || !c.lit(bs) || !c.lit("=")) return *bad();
      auto cv = c.num();
      if (!cv || !c.done()) return *bad();
      TraceEvent e = make_event(Kind::Carry, b.cur().offset);
      put(e, "total_echo", std::to_string(*t3));
      put(e, "value", std::to_string(*cv));
      out.events.push_back(std::move(e));
      ++b.idx;
    }
    if (!b.expect_header("2.3 back to the start of the loop")) return out;
  }

  if (!b.expect_header("3. Check Remaining Carry")) return out;
  if (!b.expect_quote(rule.final_carry)) return out;
  size_t fc_off = b.at_end() ? text.size() : b.cur().offset;
  auto fc_before = b.kv_list("result");
  auto fc_carry = fc_before ? b.kv_int("carry") : std::nullopt;
  auto fc_bool = fc_carry ? b.kv_bool("bool(carry)") : std::nullopt;
  if (!fc_bool) return out;
  {
    TraceEvent e = make_event(Kind::FinalCarry, fc_off);
    put(e, "before", tight(*fc_before));
    put(e, "carry", std::to_string(*fc_carry));
    put(e, "bool", bool_name(*fc_bool));
    if (!b.at_end() && trim(b.cur().text) == "pass") {
      put(e, "applied", "False");
      ++b.idx;
    } else {
      auto after = b.kv_list("result");
      if (!after) return out;
      put(e, "applied", "True");
      put(e, "after", tight(*after));
    }
    out.events.push_back(std::move(e));
  }
  if (!b.expect_header("4. Return Result")) return out;
  if (!b.expect_quote({rule.ret})) return out;
  size_t ans_off = b.at_end() ? text.size() : b.cur().offset;
  auto final_list = b.kv_list("result");
  if (!final_list) return out;
  {
    TraceEvent e = make_event(Kind::Answer, ans_off);
    put(e, "answer", tight(*final_list));
    put(e, "joined", join_digits(*final_list));
    out.events.push_back(std::move(e));
  }
  if (!b.at_end()) b.fail_here("unexpected text after the final result");
  return out;
}

// ------------------------------------------------------------------- rfft-nl

std::optional<std::vector<int>> run_digits(const std::string& s) {
  std::vector<int> v;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v.push_back(c - '0');
  }
  return v;
}

// "1,3" -> {1,3}; "<empty>" -> {}.
std::optional<std::vector<int>> comma_digits(const std::string& s) {
  if (s == "<empty>") return std::vector<int>{};
  std::vector<int> v;
  Cur c{s};
  for (;;) {
    auto n = c.num();
    if (!n) return std::nullopt;
    v.push_back(static_cast<int>(*n));
    if (c.done()) return v;
    if (!c.lit(",")) return std::nullopt;
  }
}

ParsedTrace parse_rfft_nl(std::string_view text, const ParseContext& ctx) {
  auto lines = split_lines(text);
  Builder b(TraceFormat::RfftNL, lines);
  ParsedTrace& out = b.out;
  const NlRuleText rule = nl_rule_text(ctx.base);
  const std::string bs = std::to_string(ctx.base);

  if (lines.empty()) {
    b.fail(0, "empty trace");
    return out;
  }
  {
    Cur c{lines[0].text};
    auto bad = [&]() {
      b.fail(lines[0].offset, "malformed operand echo");
      return &out;
    };
    if (!(c.lit("num1") && c.lit("="))) return *bad();
    auto a = c.tick();
    if (!a || !c.lit(";") || !c.lit("num2") || !c.lit("=")) return *bad();
    auto bb = c.tick();
    if (!bb || !c.done()) return *bad();
    auto ra = run_digits(*a);
    auto rb = run_digits(*bb);
    if (!ra || !rb) return *bad();
    TraceEvent e = make_event(Kind::Echo, lines[0].offset);
    put(e, "rem1", tight(*ra));
    put(e, "rem2", tight(*rb));
    out.events.push_back(std::move(e));
    b.idx = 1;
  }

  if (!b.expect_quote({rule.r1})) return out;
  if (b.at_end()) {
    b.fail_here("expected initialization narration");
    return out;
  }
  {
    Cur c{b.cur().text};
    auto bad = [&]() {
      b.fail_here("malformed initialization narration");
      return &out;
    };
    if (!c.lit("Initialize the carry as")) return *bad();
    auto cv = c.num();
    if (!cv || !c.lit("and the result is")) return *bad();
    auto res = c.tick();
    if (!res || !c.lit(".") || !c.done()) return *bad();
    auto rd = comma_digits(*res);
    if (!rd) return *bad();
    TraceEvent e = make_event(Kind::Init, b.cur().offset);
    put(e, "result", tight(*rd));
    put(e, "carry", std::to_string(*cv));
    out.events.push_back(std::move(e));
    ++b.idx;
  }

  bool first_check = true;
  for (;;) {
    int which_quote = b.expect_quote_any({{rule.begin_head, rule.r21}, {rule.r21}});
    if (which_quote < 0) return out;
    (void)first_check;
    first_check = false;
    if (b.at_end()) {
      b.fail_here("expected emptiness narration");
      return out;
    }
    size_t check_off = b.cur().offset;
    std::vector<int> r1, r2;
    {
      Cur c{b.cur().text};
      auto bad = [&]() {
        b.fail_here("malformed emptiness narration");
        return &out;
      };
      auto operand = [&](const char* name, std::vector<int>& out_digits) -> bool {
        if (!c.lit(name)) return false;
        c.sp();
        if (c.i < c.s.size() && c.s[c.i] == '`') {
          auto v = c.tick();
          if (!v) return false;
          auto d = run_digits(*v);
          if (!d) return false;
          out_digits = *d;
          return c.lit("is not <empty>.");
        }
        if (!c.lit("is")) return false;
        auto v = c.tick();
        if (!v || *v != "<empty>") return false;
        out_digits.clear();
        return c.lit(".");
      };
      if (!operand("num1", r1)) return *bad();
      if (!operand("num2", r2)) return *bad();
      if (!c.done()) return *bad();
      ++b.idx;
    }
    if (b.at_end()) {
      b.fail_here("expected loop decision");
      return out;
    }
    std::string decision = trim(b.cur().text);
    bool entered;
    if (decision == "Because both are not <empty>, go to the iteration." ||
        decision == "Because one of them is not <empty>, go to the iteration.")
      entered = true;
    else if (decision == "Because both are <empty>, the loop is over.")
      entered = false;
    else {
      b.fail_here("expected loop decision");
      return out;
    }
    ++b.idx;
    {
      TraceEvent e = make_event(Kind::Check, check_off);
      put(e, "rem1", tight(r1));
      put(e, "rem2", tight(r2));
      put(e, "decision", entered ? "enter" : "exit");
      out.events.push_back(std::move(e));
    }
    if (!entered) break;

    if (!b.expect_quote({rule.r22_head, rule.r221})) return out;
    if (b.at_end()) {
      b.fail_here("expected pop narration");
      return out;
    }
    {
      Cur c{b.cur().text};
      size_t pop_off = b.cur().offset;
      auto bad = [&]() {
        b.fail_here("malformed pop narration");
        return &out;
      };
      struct PopInfo {
        std::vector<int> before, after;
        int digit = 0;
        bool from_empty = false;
      };
      PopInfo p1, p2;
      auto found = [&](const char* name, PopInfo& p) -> bool {
        c.sp();
        if (c.lit("The rightmost digit of")) {
          if (!c.lit(name)) return false;
          auto before = c.tick();
          if (!before || !c.lit("is")) return false;
          auto d = c.tick();
          if (!d || !c.lit(".")) return false;
          auto bd = run_digits(*before);
          auto dd = run_digits(*d);
          if (!bd || !dd || dd->size() != 1) return false;
          p.before = *bd;
          p.digit = (*dd)[0];
          return true;
        }
        if (!c.lit(name) || !c.lit("is")) return false;
        auto v = c.tick();
        if (!v || *v != "<empty>" || !c.lit(", so the digit is 0.")) return false;
        p.from_empty = true;
        p.digit = 0;
        return true;
      };
      auto remaining = [&](const char* name, PopInfo& p) -> bool {
        if (!c.lit("the remaining")) return false;
        if (!c.lit(name)) return false;
        c.sp();
        if (c.i < c.s.size() && c.s[c.i] == '`') {
          auto before = c.tick();
          if (!before || !c.lit("is")) return false;
          auto after = c.tick();
          if (!after) return false;
          auto ad = *after == "<empty>" ? std::optional<std::vector<int>>(std::vector<int>{})
                                        : run_digits(*after);
          if (!ad) return false;
          p.after = *ad;
          return true;
        }
        if (!c.lit("is")) return false;
        auto v = c.tick();
        if (!v || *v != "<empty>") return false;
        p.after.clear();
        return true;
      };
      if (!found("num1", p1) || !found("num2", p2)) return *bad();
      if (!c.lit("Then")) return *bad();
      if (!remaining("num1", p1)) return *bad();
      if (!c.lit("and")) return *bad();
      if (!remaining("num2", p2)) return *bad();
      if (!c.lit(".") || !c.done()) return *bad();
      for (int which = 1; which <= 2; ++which) {
        PopInfo& p = which == 1 ? p1 : p2;
        TraceEvent e = make_event(Kind::Pop, pop_off);
        put(e, "which", std::to_string(which));
        put(e, "before", tight(p.before));
        put(e, "digit", std::to_string(p.digit));
        put(e, "after", tight(p.after));
        out.events.push_back(std::move(e));
      }
      ++b.idx;
    }

    if (!b.expect_quote({rule.r222})) return out;
    if (b.at_end()) {
      b.fail_here("expected sum narration");
      return out;
    }
    {
      Cur c{b.cur().text};
      auto bad = [&]() {
        b.fail_here("malformed sum narration");
        return &out;
      };
      if (!c.lit("The sum of")) return *bad();
      auto d1 = c.tick();
      if (!d1 || !c.lit(",")) return *bad();
      auto d2 = c.tick();
      if (!d2 || !c.lit("and carry")) return *bad();
      auto cc = c.tick();
      if (!cc || !c.lit("is")) return *bad();
      auto d1f = c.num();
      if (!d1f || !c.lit("+")) return *bad();
      auto d2f = c.num();
      if (!d2f || !c.lit("+")) return *bad();
      auto cf = c.num();
      if (!cf || !c.lit("=")) return *bad();
      auto t = c.num();
      if (!t || !c.lit(".") || !c.done()) return *bad();
      auto v1 = run_digits(*d1), v2 = run_digits(*d2), vc = run_digits(*cc);
      if (!v1 || !v2 || !vc || v1->size() != 1 || v2->size() != 1 || vc->size() != 1) return *bad();
      TraceEvent e = make_event(Kind::Total, b.cur().offset);
      put(e, "d1", std::to_string((*v1)[0]));
      put(e, "d2", std::to_string((*v2)[0]));
      put(e, "c", std::to_string((*vc)[0]));
      put(e, "d1f", std::to_string(*d1f));
      put(e, "d2f", std::to_string(*d2f));
      put(e, "cf", std::to_string(*cf));
      put(e, "total", std::to_string(*t));
      out.events.push_back(std::move(e));
      ++b.idx;
    }

    if (!b.expect_quote({rule.r223_quote})) return out;
    if (b.at_end()) {
      b.fail_here("expected insertion narration");
      return out;
    }
    {
      Cur c{b.cur().text};
      auto bad = [&]() {
        b.fail_here("malformed insertion narration");
        return &out;
      };
      if (!c.lit("The last digit of the summation is")) return *bad();
      auto t2 = c.num();
      if (!t2 || !c.lit("%") || !c.lit(bs) || !c.lit("=")) return *bad();
      auto u = c.num();
      if (!u || !c.lit(". The previous result is")) return *bad();
      auto prev = c.tick();
      if (!prev || !c.lit(", now the result is:")) return *bad();
      auto next = c.tick();
      if (!next || !c.lit(".") || !c.done()) return *bad();
      auto pd = comma_digits(*prev);
      auto nd = comma_digits(*next);
      if (!pd || !nd) return *bad();
      TraceEvent e = make_event(Kind::Insert, b.cur().offset);
      put(e, "before", tight(*pd));
      put(e, "total_echo", std::to_string(*t2));
      put(e, "digit", std::to_string(*u));
      put(e, "after", tight(*nd));
      out.events.push_back(std::move(e));
      ++b.idx;
    }
    if (b.at_end()) {
      b.fail_here("expected carry narration");
      return out;
    }
    {
      Cur c{b.cur().text};
      auto bad = [&]() {
        b.fail_here("malformed carry narration");
        return &out;
      };
      if (!c.lit("The carry is")) return *bad();
      auto t3 = c.num();
      if (!t3 || !c.lit("//") || !c.lit(bs) || !c.lit("=")) return *bad();
      auto cv = c.num();
      if (!cv || !c.lit(".") || !c.done()) return *bad();
      TraceEvent e = make_event(Kind::Carry, b.cur().offset);
      put(e, "total_echo", std::to_string(*t3));
      put(e, "value", std::to_string(*cv));
      out.events.push_back(std::move(e));
      ++b.idx;
    }
    if (!b.expect_quote({rule.r23})) return out;
  }

  if (!b.expect_quote({rule.r3})) return out;
  if (b.at_end()) {
    b.fail_here("expected final-carry narration");
    return out;
  }
  {
    Cur c{b.cur().text};
    auto bad = [&]() {
      b.fail_here("malformed final-carry narration");
      return &out;
    };
    if (!c.lit("The carry is")) return *bad();
    auto cv = c.num();
    if (!cv) return *bad();
    TraceEvent e = make_event(Kind::FinalCarry, b.cur().offset);
    put(e, "carry", std::to_string(*cv));
    std::optional<std::string> before, after;
    if (c.lit(", so add an 1 to the beginning of the result")) {
      before = c.tick();
      if (!before || !c.lit(". So the final result is")) return *bad();
      after = c.tick();
      if (!after || !c.lit(".") || !c.done()) return *bad();
      put(e, "applied", "True");
    } else if (c.lit(", so the result remains")) {
      before = c.tick();
      if (!before || !c.lit(". So the final result is")) return *bad();
      after = c.tick();
      if (!after || !c.lit(".") || !c.done()) return *bad();
      put(e, "applied", "False");
    } else {
      return *bad();
    }
    auto bd = comma_digits(*before);
    auto ad = comma_digits(*after);
    if (!bd || !ad) return *bad();
    put(e, "before", tight(*bd));
    put(e, "after", tight(*ad));
    out.events.push_back(std::move(e));
    ++b.idx;
  }
  if (!b.expect_quote({rule.r4})) return out;
  if (b.at_end()) {
    b.fail_here("expected final result narration");
    return out;
  }
  {
    Cur c{b.cur().text};
    auto bad = [&]() {
      b.fail_here("malformed final result narration");
      return &out;
    };
    if (!c.lit("The final result is")) return *bad();
    auto res = c.tick();
    if (!res || !c.lit(".") || !c.done()) return *bad();
    auto rd = comma_digits(*res);
    if (!rd) return *bad();
    TraceEvent e = make_event(Kind::Answer, b.cur().offset);
    put(e, "answer", tight(*rd));
    put(e, "joined", join_digits(*rd));
    out.events.push_back(std::move(e));
    ++b.idx;
  }
  if (!b.at_end()) b.fail_here("unexpected text after the final result");
  return out;
}

// ------------------------------------------------------------------- tracing

ParsedTrace parse_tracing(std::string_view text) {
  auto lines = split_lines(text);
  Builder b(TraceFormat::ScratchpadTracing, lines);
  ParsedTrace& out = b.out;

  auto parse_state_dict = [&](const Line& line, TraceEvent& e) -> bool {
    Cur c{line.text};
    if (!c.lit("state:")) return false;
    if (!c.lit("{")) return false;
    c.sp();
    if (c.lit("}")) return c.done();
    for (;;) {
      c.sp();
      if (c.i >= c.s.size() || c.s[c.i] != '\'') return false;
      size_t close = c.s.find('\'', c.i + 1);
      if (close == std::string_view::npos) return false;
      std::string key(c.s.substr(c.i + 1, close - c.i - 1));
      c.i = close + 1;
      if (!c.lit(":")) return false;
      c.sp();
      std::string value;
      if (c.i < c.s.size() && c.s[c.i] == '[') {
        auto v = c.list();
        if (!v) return false;
        value = tight(*v);
      } else if (c.i < c.s.size() && c.s[c.i] == '\'') {
        size_t end = c.s.find('\'', c.i + 1);
        if (end == std::string_view::npos) return false;
        value = std::string(c.s.substr(c.i, end - c.i + 1));
        c.i = end + 1;
      } else {
        auto v = c.num();
        if (!v) return false;
        value = std::to_string(*v);
      }
      put(e, key, value);
      c.sp();
      if (c.lit("}")) return c.done();
      if (!c.lit(",")) return false;
    }
  };

  bool want_state = true;
  while (!b.at_end()) {
    const Line& line = b.cur();
    if (want_state) {
      TraceEvent e = make_event(Kind::TraceState, line.offset);
      if (!parse_state_dict(line, e)) {
        b.fail(line.offset, "malformed state line");
        return out;
      }
      out.events.push_back(std::move(e));
    } else {
      Cur c{line.text};
      if (!c.lit("line:")) {
        b.fail(line.offset, "expected line: entry");
        return out;
      }
      TraceEvent e = make_event(Kind::TraceLine, line.offset);
      put(e, "line", strip_spaces(line.text.substr(c.i)));
      out.events.push_back(std::move(e));
    }
    want_state = !want_state;
    ++b.idx;
  }
  if (out.events.empty()) {
    b.fail(0, "empty trace");
    return out;
  }
  if (want_state)  // ended on a line: entry
    b.fail(lines.back().offset, "trace must end on a state entry");
  return out;
}

// -------------------------------------------------------------------- direct

ParsedTrace parse_direct(std::string_view text, const ParseContext& ctx) {
  ParsedTrace out;
  out.format = TraceFormat::Direct;
  std::string trimmed = trim(text);

  if (ctx.task == TaskId::ChickenRabbit) {
    // First two integers are taken as rabbits and chickens.
    std::vector<std::pair<long long, size_t>> ints;
    size_t i = 0;
    while (i < trimmed.size() && ints.size() < 2) {
      if (trimmed[i] >= '0' && trimmed[i] <= '9') {
        size_t j = i;
        long long v = 0;
        while (j < trimmed.size() && trimmed[j] >= '0' && trimmed[j] <= '9')
          v = v * 10 + (trimmed[j++] - '0');
        ints.push_back({v, i});
        i = j;
      } else {
        ++i;
      }
    }
    if (ints.size() < 2) {
      out.has_error = true;
      out.error_offset = 0;
      out.error_message = "no rabbit/chicken counts found";
      return out;
    }
    std::string canonical = std::to_string(ints[0].first) + " rabbits, " +
                            std::to_string(ints[1].first) + " chickens";
    std::string expected_sentence = "A: There are " + std::to_string(ints[0].first) +
                                    " rabbits and " + std::to_string(ints[1].first) + " chickens.";
    out.answer_flagged = trimmed != expected_sentence;
    TraceEvent e = make_event(Kind::Answer, ints[0].second);
    put(e, "answer", canonical);
    out.events.push_back(std::move(e));
    return out;
  }
  if (ctx.task == TaskId::LastLetterConcat) {
    if (trimmed.empty()) {
      out.has_error = true;
      out.error_message = "empty answer";
      return out;
    }
    TraceEvent e = make_event(Kind::Answer, 0);
    put(e, "answer", trimmed);
    out.events.push_back(std::move(e));
    return out;
  }

  auto is_answer_char = [&](char c) {
    if (ctx.exotic) return c >= 'A' && c <= 'I';
    return c >= '0' && c <= '9';
  };
  size_t start = std::string::npos, len = 0;
  for (size_t i = 0; i < trimmed.size();) {
    if (is_answer_char(trimmed[i])) {
      size_t j = i;
      while (j < trimmed.size() && is_answer_char(trimmed[j])) ++j;
      start = i;
      len = j - i;
      break;
    }
    ++i;
  }
  if (start == std::string::npos) {
    out.has_error = true;
    out.error_offset = 0;
    out.error_message = "no numeral found";
    return out;
  }
  std::string run = trimmed.substr(start, len);
  out.answer_flagged = run.size() != trimmed.size();
  TraceEvent e = make_event(Kind::Answer, start);
  put(e, "answer", run);
  out.events.push_back(std::move(e));
  return out;
}

// -------------------------------------------------------- last-letter traces

ParsedTrace parse_last_letter_scratchpad(std::string_view text) {
  auto lines = split_lines(text);
  Builder b(TraceFormat::Scratchpad, lines);
  ParsedTrace& out = b.out;
  std::string last_acc;
  bool any = false;
  while (!b.at_end()) {
    const Line& line = b.cur();
    Cur c{line.text};
    if (!c.lit("# Concatenating the last letter of")) {
      b.fail(line.offset, "expected concatenation comment");
      return out;
    }
    c.sp();
    std::string word = trim(c.s.substr(c.i));
    ++b.idx;
    if (b.at_end()) {
      b.fail_here("comment without following result line");
      return out;
    }
    std::string acc = b.cur().text;
    TraceEvent e = make_event(Kind::Word, line.offset);
    put(e, "word", word);
    put(e, "acc", acc);
    out.events.push_back(std::move(e));
    last_acc = acc;
    any = true;
    ++b.idx;
  }
  if (!any) {
    b.fail(0, "empty trace");
    return out;
  }
  TraceEvent e = make_event(Kind::Answer, lines.back().offset);
  put(e, "answer", last_acc);
  out.events.push_back(std::move(e));
  return out;
}

ParsedTrace parse_last_letter_rfft(std::string_view text) {
  auto lines = split_lines(text);
  Builder b(TraceFormat::RfftCode, lines);
  ParsedTrace& out = b.out;

  if (b.at_end()) {
    b.fail(0, "empty trace");
    return out;
  }
  {
    Cur c{b.cur().text};
    if (!(c.lit("names") && c.lit("="))) {
      b.fail_here("expected names echo");
      return out;
    }
    TraceEvent e = make_event(Kind::Echo, b.cur().offset);
    c.sp();
    put(e, "names", strip_spaces(c.s.substr(c.i)));
    out.events.push_back(std::move(e));
    ++b.idx;
  }
  // The recited header historically reads "Initialze"; accept both spellings.
  if (b.at_end() ||
      (trim(b.cur().text) != "1. Initialze result" && trim(b.cur().text) != "1. Initialize result")) {
    b.fail_here("expected result-initialization header");
    return out;
  }
  ++b.idx;
  if (b.at_end()) {
    b.fail_here("expected result initialization");
    return out;
  }
  {
    Cur c{b.cur().text};
    auto bad = [&]() {
      b.fail_here("malformed result initialization");
      return &out;
    };
    if (!(c.lit("result") && c.lit("="))) return *bad();
    auto v = c.quoted();
    if (!v || !c.done()) return *bad();
    TraceEvent e = make_event(Kind::Init, b.cur().offset);
    put(e, "result", *v);
    out.events.push_back(std::move(e));
    ++b.idx;
  }
  if (!b.expect_header("2. Main Loop")) return out;

  while (!b.at_end() && trim(b.cur().text) == "2.1 one iteration") {
    size_t off = b.cur().offset;
    ++b.idx;
    if (!b.expect_quote({"for name in names:"})) return out;
    TraceEvent e = make_event(Kind::Word, off);
    {
      Cur c{b.at_end() ? std::string_view{} : std::string_view(b.cur().text)};
      auto bad = [&]() {
        b.fail_here("malformed name line");
        return &out;
      };
      if (b.at_end() || !(c.lit("name") && c.lit("="))) return *bad();
      auto v = c.quoted();
      if (!v || !c.done()) return *bad();
      put(e, "word", *v);
      ++b.idx;
    }
    if (!b.expect_quote({"result += name[-1]"})) return out;
    auto quoted_kv = [&](std::string_view key) -> std::optional<std::string> {
      if (b.at_end()) {
        b.fail_here(std::string("expected ") + std::string(key));
        return std::nullopt;
      }
      Cur c{b.cur().text};
      if (!(c.lit(key) && (key.back() == ']' ? c.lit("=") : c.lit("=")))) {
        b.fail_here(std::string("expected ") + std::string(key));
        return std::nullopt;
      }
      auto v = c.quoted();
      if (!v || !c.done()) {
        b.fail_here(std::string("malformed ") + std::string(key));
        return std::nullopt;
      }
      ++b.idx;
      return v;
    };
    auto before = quoted_kv("result");
    if (!before) return out;
    put(e, "before", *before);
    auto letter = quoted_kv("name[-1]");
    if (!letter) return out;
    put(e, "letter", *letter);
    if (b.at_end()) {
      b.fail_here("expected append recitation");
      return out;
    }
    {
      Cur c{b.cur().text};
      if (!(c.lit("result") && c.lit("+="))) {
        b.fail_here("expected append recitation");
        return out;
      }
      auto v = c.quoted();
      if (!v || !c.done()) {
        b.fail_here("malformed append recitation");
        return out;
      }
      put(e, "letter2", *v);
      ++b.idx;
    }
    auto after = quoted_kv("result");
    if (!after) return out;
    put(e, "after", *after);
    out.events.push_back(std::move(e));
  }

  if (!b.expect_header("3. Return Result")) return out;
  {
    std::vector<std::vector<std::string>> cands = {{"resturn result"}, {"return result"}};
    if (b.expect_quote_any(cands) < 0) return out;
  }
  if (b.at_end()) {
    b.fail_here("expected final result");
    return out;
  }
  {
    Cur c{b.cur().text};
    auto bad = [&]() {
      b.fail_here("malformed final result");
      return &out;
    };
    if (!(c.lit("result") && c.lit("="))) return *bad();
    auto v = c.quoted();
    if (!v || !c.done()) return *bad();
    TraceEvent e = make_event(Kind::Answer, b.cur().offset);
    put(e, "answer", *v);
    out.events.push_back(std::move(e));
    ++b.idx;
  }
  if (!b.at_end()) b.fail_here("unexpected text after the final result");
  return out;
}

// --------------------------------------------------------------- comparison

int list_length(const std::string& canonical) {
  if (canonical.size() < 2 || canonical.front() != '[' || canonical.back() != ']') return -1;
  if (canonical == "[]") return 0;
  return 1 + static_cast<int>(std::count(canonical.begin(), canonical.end(), ','));
}

ErrorClass pop_class(const std::string& expected, const std::string& observed) {
  int le = list_length(expected), lo = list_length(observed);
  if (le < 0 || lo < 0 || le != lo) return ErrorClass::PopLengthError;
  return ErrorClass::PopValueError;
}

ErrorClass classify(Kind kind, const std::string& field, const std::string& expected,
                    const std::string& observed) {
  if (field == "structure") return ErrorClass::LoopControlError;
  switch (kind) {
    case Kind::Echo:
      if (field == "names") return pop_class(expected, observed);
      return pop_class(expected, observed);
    case Kind::Init:
      return field == "carry" ? ErrorClass::CarryError : ErrorClass::ResultInsertError;
    case Kind::ScratchInit:
    case Kind::ScratchPair:
      if (field == "d1" || field == "d2") return ErrorClass::DigitSelectError;
      if (field == "c" || field == "carry") return ErrorClass::CarryError;
      if (field == "u") return ErrorClass::TotalError;
      if (field == "result") return ErrorClass::ResultInsertError;
      return pop_class(expected, observed);  // rem1/rem2
    case Kind::Check:
      if (field == "rem1" || field == "rem2") return pop_class(expected, observed);
      return ErrorClass::LoopControlError;  // b1/b2/or/decision
    case Kind::Pop:
      if (field == "digit") return ErrorClass::DigitSelectError;
      if (field == "avail") return ErrorClass::PopLengthError;
      return pop_class(expected, observed);  // before/after
    case Kind::Total:
      if (field == "c" || field == "cf") return ErrorClass::CarryError;
      if (field == "total") return ErrorClass::TotalError;
      return ErrorClass::DigitSelectError;  // d1/d2/d1f/d2f
    case Kind::Insert:
      if (field == "total_echo") return ErrorClass::TotalError;
      return ErrorClass::ResultInsertError;  // before/digit/after
    case Kind::Carry:
      if (field == "total_echo") return ErrorClass::TotalError;
      return ErrorClass::CarryError;
    case Kind::FinalCarry:
      if (field == "before" || field == "after") return ErrorClass::ResultInsertError;
      return ErrorClass::CarryError;  // carry/bool/applied
    case Kind::Word:
      if (field == "before" || field == "after" || field == "acc")
        return ErrorClass::ResultInsertError;
      return ErrorClass::DigitSelectError;  // word/letter/letter2
    case Kind::TraceState:
      if (field == "num1" || field == "num2") return pop_class(expected, observed);
      if (field == "digit1" || field == "digit2") return ErrorClass::DigitSelectError;
      if (field == "total") return ErrorClass::TotalError;
      if (field == "result") return ErrorClass::ResultInsertError;
      if (field == "carry") return ErrorClass::CarryError;
      if (field == "output") return ErrorClass::FinalAnswerError;
      return ErrorClass::LoopControlError;
    case Kind::TraceLine:
      return ErrorClass::LoopControlError;
    case Kind::Answer:
      return ErrorClass::FinalAnswerError;
  }
  return ErrorClass::LoopControlError;
}

struct Divergence {
  size_t index = 0;
  Kind kind = Kind::Answer;
  std::string field, expected, observed;
  size_t offset = 0;
};

std::optional<Divergence> first_divergence(const std::vector<TraceEvent>& exp,
                                           const std::vector<TraceEvent>& obs, size_t text_size) {
  size_t n = std::min(exp.size(), obs.size());
  for (size_t i = 0; i < n; ++i) {
    if (exp[i].kind != obs[i].kind)
      return Divergence{i, exp[i].kind, "structure", event_kind_name(exp[i].kind),
                        event_kind_name(obs[i].kind), obs[i].byte_offset};
    for (const auto& [name, value] : exp[i].fields) {
      const std::string* got = obs[i].field(name);
      if (!got || *got != value)
        return Divergence{i, exp[i].kind, name, value, got ? *got : "<absent>",
                          obs[i].byte_offset};
    }
    for (const auto& [name, value] : obs[i].fields)
      if (!exp[i].field(name))
        return Divergence{i, exp[i].kind, name, "<absent>", value, obs[i].byte_offset};
  }
  if (exp.size() > obs.size())
    return Divergence{n, exp[n].kind, "structure", event_kind_name(exp[n].kind), "<end of trace>",
                      text_size};
  if (obs.size() > exp.size())
    return Divergence{n, obs[n].kind, "structure", "<end of trace>", event_kind_name(obs[n].kind),
                      obs[n].byte_offset};
  return std::nullopt;
}

}  // namespace

const std::string* TraceEvent::field(std::string_view name) const {
  for (const auto& [k, v] : fields)
    if (k == name) return &v;
  return nullptr;
}

const char* event_kind_name(TraceEvent::Kind k) {
  switch (k) {
    case Kind::Echo: return "echo";
    case Kind::Init: return "init";
    case Kind::ScratchInit: return "scratch-init";
    case Kind::ScratchPair: return "scratch-pair";
    case Kind::Check: return "check";
    case Kind::Pop: return "pop";
    case Kind::Total: return "total";
    case Kind::Insert: return "insert";
    case Kind::Carry: return "carry";
    case Kind::FinalCarry: return "final-carry";
    case Kind::Word: return "word";
    case Kind::TraceState: return "state";
    case Kind::TraceLine: return "line";
    case Kind::Answer: return "answer";
  }
  return "unknown";
}

const char* error_class_name(ErrorClass e) {
  switch (e) {
    case ErrorClass::None: return "NONE";
    case ErrorClass::FormatError: return "FORMAT_ERROR";
    case ErrorClass::PopLengthError: return "POP_LENGTH_ERROR";
    case ErrorClass::PopValueError: return "POP_VALUE_ERROR";
    case ErrorClass::DigitSelectError: return "DIGIT_SELECT_ERROR";
    case ErrorClass::TotalError: return "TOTAL_ERROR";
    case ErrorClass::ResultInsertError: return "RESULT_INSERT_ERROR";
    case ErrorClass::CarryError: return "CARRY_ERROR";
    case ErrorClass::LoopControlError: return "LOOP_CONTROL_ERROR";
    case ErrorClass::FinalAnswerError: return "FINAL_ANSWER_ERROR";
  }
  return "UNKNOWN";
}

ParsedTrace parse(TraceFormat format, std::string_view text, const ParseContext& ctx) {
  switch (format) {
    case TraceFormat::Direct:
      return parse_direct(text, ctx);
    case TraceFormat::Scratchpad:
      return ctx.task == TaskId::LastLetterConcat ? parse_last_letter_scratchpad(text)
                                                  : parse_scratchpad_addition(text);
    case TraceFormat::ScratchpadTracing:
      return parse_tracing(text);
    case TraceFormat::RfftCode:
      return ctx.task == TaskId::LastLetterConcat ? parse_last_letter_rfft(text)
                                                  : parse_rfft_code(text, ctx);
    case TraceFormat::RfftNL:
      return parse_rfft_nl(text, ctx);
  }
  throw std::logic_error("unhandled format");
}

std::optional<std::string> extract_answer(const ParsedTrace& trace) {
  if (trace.events.empty()) return std::nullopt;
  const TraceEvent& last = trace.events.back();
  if (last.kind == Kind::Answer) {
    if (const std::string* joined = last.field("joined")) return *joined;
    if (const std::string* ans = last.field("answer")) return *ans;
    return std::nullopt;
  }
  if (trace.format == TraceFormat::ScratchpadTracing && last.kind == Kind::TraceState) {
    if (const std::string* output = last.field("output")) {
      // "[1,3]" -> "13"
      std::string joined;
      for (char c : *output)
        if (c >= '0' && c <= '9') joined += c;
      return joined;
    }
  }
  return std::nullopt;
}

VerificationReport verify(TraceFormat format, const Problem& problem, std::string_view text,
                          bool exotic) {
  ParseContext ctx{problem.task.render_base(), problem.task.id, exotic};
  IOPair golden = emit(problem, format);
  std::string expected_text = exotic ? exotic_encode(golden.output) : golden.output;
  ParsedTrace exp = parse(format, expected_text, ctx);
  if (exp.has_error)
    throw std::logic_error(std::string("reference trace failed to parse: ") + exp.error_message);
  auto expected_answer = extract_answer(exp);
  if (!expected_answer) throw std::logic_error("reference trace has no answer");

  ParsedTrace obs = parse(format, text, ctx);
  VerificationReport r;
  r.answer_flagged = obs.answer_flagged;
  auto got_answer = extract_answer(obs);
  if (got_answer) r.extracted_answer = *got_answer;
  r.answer_correct = got_answer && *got_answer == *expected_answer;

  auto div = first_divergence(exp.events, obs.events, text.size());
  bool semantic_wins = div && (!obs.has_error || div->offset < obs.error_offset);
  if (semantic_wins) {
    r.valid = false;
    r.error = classify(div->kind, div->field, div->expected, div->observed);
    r.event_index = static_cast<long long>(div->index);
    r.field = div->field;
    r.expected = div->expected;
    r.observed = div->observed;
    r.byte_offset = div->offset;
    return r;
  }
  if (obs.has_error) {
    r.valid = false;
    r.error = ErrorClass::FormatError;
    r.field = "grammar";
    r.observed = obs.error_message;
    r.byte_offset = obs.error_offset;
    return r;
  }
  r.valid = true;
  r.error = ErrorClass::None;
  return r;
}

std::vector<ScoredProblem> score_generations(const std::vector<IOPair>& corpus,
                                             const std::vector<nlohmann::json>& generations,
                                             int jobs) {
  struct Sample {
    long long id;
    std::string generation;
  };
  std::vector<Sample> samples;
  samples.reserve(generations.size());
  for (const auto& g : generations) {
    long long id = g.at("id").get<long long>();
    if (id < 0 || id >= static_cast<long long>(corpus.size()))
      throw std::invalid_argument("generation references unknown problem id " + std::to_string(id));
    samples.push_back({id, g.at("generation").get<std::string>()});
  }

  std::vector<VerificationReport> reports(samples.size());
  auto work = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      const IOPair& rec = corpus[static_cast<size_t>(samples[i].id)];
      Problem p = rec.task.id == TaskId::LastLetterConcat
                      ? make_word_problem(rec.names)
                      : make_problem(rec.task, rec.a.value_or(0), rec.b.value_or(0));
      reports[i] = verify(rec.format, p, samples[i].generation, rec.exotic);
    }
  };
  if (jobs <= 1 || samples.size() < 2) {
    work(0, samples.size());
  } else {
    size_t n = samples.size();
    size_t workers = std::min<size_t>(static_cast<size_t>(jobs), n);
    std::vector<std::thread> threads;
    for (size_t w = 0; w < workers; ++w)
      threads.emplace_back(work, n * w / workers, n * (w + 1) / workers);
    for (auto& t : threads) t.join();
  }

  std::map<long long, ScoredProblem> by_id;
  for (size_t i = 0; i < samples.size(); ++i) {
    auto& sp = by_id[samples[i].id];
    if (sp.n_samples == 0) {
      sp.id = samples[i].id;
      sp.record = corpus[static_cast<size_t>(samples[i].id)];
    }
    ++sp.n_samples;
    if (reports[i].answer_correct) ++sp.n_correct;
    sp.reports.push_back(reports[i]);
  }
  std::vector<ScoredProblem> out;
  out.reserve(by_id.size());
  for (auto& [id, sp] : by_id) {
    sp.accuracy = sp.n_samples ? static_cast<double>(sp.n_correct) / static_cast<double>(sp.n_samples)
                               : 0.0;
    out.push_back(std::move(sp));
  }
  return out;
}

nlohmann::json report_to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["valid"] = r.valid;
  j["error"] = error_class_name(r.error);
  j["answer_correct"] = r.answer_correct;
  j["extracted_answer"] = r.extracted_answer;
  if (!r.valid) {
    j["event_index"] = r.event_index;
    j["field"] = r.field;
    j["expected"] = r.expected;
    j["observed"] = r.observed;
    j["byte_offset"] = r.byte_offset;
  }
  if (r.answer_flagged) j["answer_flagged"] = true;
  return j;
}

nlohmann::json scored_to_json(const ScoredProblem& s) {
  nlohmann::json j;
  j["id"] = s.id;
  if (s.record.a) j["a"] = *s.record.a;
  if (s.record.b) j["b"] = *s.record.b;
  if (!s.record.names.empty()) j["names"] = s.record.names;
  j["task"] = task_name(s.record.task.id);
  j["format"] = format_name(s.record.format);
  if (s.record.len_a > 0) j["len_a"] = s.record.len_a;
  if (s.record.len_b > 0) j["len_b"] = s.record.len_b;
  j["n_samples"] = s.n_samples;
  j["n_correct"] = s.n_correct;
  j["accuracy"] = s.accuracy;
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : s.reports) reports.push_back(report_to_json(r));
  j["reports"] = reports;
  return j;
}

ScoredProblem scored_from_json(const nlohmann::json& j) {
  ScoredProblem s;
  s.id = j.at("id").get<long long>();
  if (j.contains("a")) s.record.a = j.at("a").get<unsigned long long>();
  if (j.contains("b")) s.record.b = j.at("b").get<unsigned long long>();
  if (j.contains("names")) s.record.names = j.at("names").get<std::vector<std::string>>();
  if (j.contains("task"))
    if (auto t = task_from_name(j.at("task").get<std::string>())) s.record.task.id = *t;
  if (j.contains("format"))
    if (auto f = format_from_name(j.at("format").get<std::string>())) s.record.format = *f;
  if (j.contains("len_a")) s.record.len_a = j.at("len_a").get<int>();
  if (j.contains("len_b")) s.record.len_b = j.at("len_b").get<int>();
  s.n_samples = j.at("n_samples").get<long long>();
  s.n_correct = j.at("n_correct").get<long long>();
  s.accuracy = j.at("accuracy").get<double>();
  return s;
}

}  // namespace rulebench
