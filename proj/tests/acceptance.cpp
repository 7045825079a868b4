// Acceptance checks for the corpus/verification toolkit. Each criterion
// prints one PASS/FAIL line; the process exits non-zero if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rulebench/analysis.hpp"
#include "rulebench/cli.hpp"
#include "rulebench/corpus.hpp"
#include "rulebench/formats.hpp"
#include "rulebench/jsonl.hpp"
#include "rulebench/rng.hpp"
#include "rulebench/split.hpp"
#include "rulebench/verify.hpp"
#include "golden.hpp"
#include "mutants.hpp"

using namespace rulebench;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ------------------------------------------------- 1: frozen format anchors

Outcome criterion_golden() {
  Outcome out;
  auto expect = [&](const std::string& name, const std::string& got, const std::string& want) {
    if (got != want) out.fail(name + " diverges from the frozen text");
  };
  IOPair direct = emit_direct(make_problem(TaskKind::addition(), 7, 6));
  expect("direct input", direct.input, golden::kDirectAdditionInput);
  expect("direct output", direct.output, golden::kDirectAdditionOutput);
  IOPair scratch = emit_scratchpad(7, 6);
  expect("scratchpad input", scratch.input, golden::kScratchpadInput);
  expect("scratchpad output", scratch.output, golden::kScratchpadOutput);
  IOPair tracing = emit_scratchpad_tracing(to_digits(73, 10), to_digits(48, 10));
  expect("tracing input", tracing.input, golden::kTracingInput);
  expect("tracing output", tracing.output, golden::kTracingOutput);
  IOPair code = emit_rfft_code(to_digits(7, 10), to_digits(6, 10));
  expect("rfft-code input", code.input, golden::kRfftCodeInput);
  expect("rfft-code output", code.output, golden::kRfftCodeOutput);
  IOPair nl = emit_rfft_nl(6, 7);
  expect("rfft-nl input", nl.input, golden::kRfftNlInput);
  expect("rfft-nl output", nl.output, golden::kRfftNlOutput);
  IOPair ld = emit_last_letter(TraceFormat::Direct, {"King", "Kaur"});
  expect("last-letter input", ld.input, golden::kLastLetterInput);
  expect("last-letter direct output", ld.output, golden::kLastLetterDirectOutput);
  IOPair ls = emit_last_letter(TraceFormat::Scratchpad, {"King", "Kaur"});
  expect("last-letter scratchpad output", ls.output, golden::kLastLetterScratchpadOutput);
  IOPair lr = emit_last_letter(TraceFormat::RfftCode, {"King", "Kaur"});
  expect("last-letter rfft input", lr.input, golden::kLastLetterRfftInput);
  expect("last-letter rfft output", lr.output, golden::kLastLetterRfftOutput);
  if (out.pass) out.detail = "9 anchored input/output pairs byte-identical";
  return out;
}

// --------------------------------- 2: emit/verify round trip at random scale

Outcome criterion_roundtrip() {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  auto draw = [&](int max_len, int base) {
    int len = 1 + static_cast<int>(bounded(rng, static_cast<unsigned long long>(max_len)));
    unsigned long long v = len == 1 ? bounded(rng, static_cast<unsigned long long>(base))
                                    : 1 + bounded(rng, static_cast<unsigned long long>(base - 1));
    for (int i = 1; i < len; ++i)
      v = v * static_cast<unsigned long long>(base) + bounded(rng, static_cast<unsigned long long>(base));
    return v;
  };
  const TraceFormat formats[] = {TraceFormat::Direct, TraceFormat::Scratchpad,
                                 TraceFormat::ScratchpadTracing, TraceFormat::RfftCode,
                                 TraceFormat::RfftNL};
  long long checked = 0;
  for (int i = 0; i < 10000 && out.pass; ++i) {
    bool nine = i >= 5000;
    int base = nine ? 9 : 10;
    TaskKind task = nine ? TaskKind::base_addition(9) : TaskKind::addition();
    unsigned long long a = draw(nine ? 10 : 15, base);
    unsigned long long b = draw(nine ? 10 : 15, base);
    Problem p = make_problem(task, a, b);
    std::string want = render_number(a + b, base);
    for (TraceFormat f : formats) {
      VerificationReport r = verify(f, p, emit(p, f).output);
      ++checked;
      if (!r.valid || !r.answer_correct || r.extracted_answer != want) {
        out.fail(std::string(format_name(f)) + " round trip broke at " +
                 render_number(a, base) + "+" + render_number(b, base) + ": " +
                 error_class_name(r.error));
        break;
      }
    }
    // the inline scratchpad layout must verify against the same oracle
    if (out.pass && i % 100 == 0) {
      std::string inl = emit(p, TraceFormat::Scratchpad, ScratchpadLayout::Inline).output;
      VerificationReport r = verify(TraceFormat::Scratchpad, p, inl);
      if (!r.valid) out.fail("inline scratchpad round trip broke");
    }
  }
  double elapsed = seconds_since(start);
  if (elapsed >= 30.0) out.fail("round trips took " + std::to_string(elapsed) + "s (budget 30s)");
  if (out.pass)
    out.detail = std::to_string(checked) + " verifications in " + std::to_string(elapsed) + "s";
  return out;
}

// --------------------------- 3: held-out square counts and character closure

Outcome criterion_splits() {
  Outcome out;
  SplitResult add = leave_square_out(GridDomain::square(0, 99), {{50, 50, 20}});
  if (add.test.size() != 441) out.fail("centered side-20 square held out " +
                                       std::to_string(add.test.size()) + " points, wanted 441");
  SplitResult grok = leave_square_out(GridDomain::square(0, 58), {{29, 29, 16}});
  if (grok.test.size() != 289) out.fail("side-16 square on [0,58] held out " +
                                        std::to_string(grok.test.size()) + " points, wanted 289");

  struct Preset {
    const char* name;
    TaskKind task;
    GridDomain domain;
    SquareSpec square;
  };
  const std::vector<Preset> presets = {
      {"addition", TaskKind::addition(), GridDomain::square(0, 99), {50, 50, 20}},
      {"modular-addition", TaskKind::modular_addition(113), GridDomain::square(0, 112),
       {56, 56, 20}},
      {"linear-regression", TaskKind::linear_regression(1, 2, 3), GridDomain::square(0, 99),
       {50, 50, 20}},
      {"chicken-rabbit", TaskKind::chicken_rabbit(), GridDomain::chicken_rabbit_domain(99),
       {70, 50, 20}},
  };
  for (const auto& preset : presets) {
    SplitResult split = leave_square_out(preset.domain, {preset.square});
    std::vector<std::pair<unsigned long long, unsigned long long>> pts;
    pts.reserve(preset.domain.size());
    for (const auto& [a, b] : preset.domain.points())
      pts.push_back({static_cast<unsigned long long>(a), static_cast<unsigned long long>(b)});
    Corpus corpus = build_corpus_exhaustive(preset.task, TraceFormat::Direct, pts);
    CoverageReport rep = check_token_coverage(split, corpus.records);
    if (!rep.covered) {
      std::string missing;
      for (const auto& m : rep.missing) missing += m;
      out.fail(std::string(preset.name) + " train set does not cover test characters: " + missing);
    }
  }
  if (out.pass) out.detail = "441/289 held-out points; characters closed on all four presets";
  return out;
}

// -------------------------------------- 4: unit-step coverage prediction

std::vector<UnitStep> walk_steps(long long a, long long b) {
  std::vector<UnitStep> steps;
  int carry = 0;
  while (a > 0 || b > 0) {
    int d1 = static_cast<int>(a % 10);
    int d2 = static_cast<int>(b % 10);
    steps.push_back({d1, d2, carry});
    carry = (d1 + d2 + carry) / 10;
    a /= 10;
    b /= 10;
  }
  if (steps.empty()) steps.push_back({0, 0, 0});
  if (carry) steps.push_back({0, 0, 1});
  return steps;
}

Outcome criterion_coverage_prediction() {
  Outcome out;
  SplitResult split = leave_square_out(GridDomain::square(0, 99), {{50, 50, 20}});
  PredictionGrid grid = coverage_predict(split, 10);
  if (grid.rows.size() != 441) out.fail("expected one prediction per held-out point");

  std::map<std::pair<long long, long long>, Prediction> at;
  for (const auto& r : grid.rows) at[{r.a, r.b}] = r;
  auto expect = [&](long long a, long long b, bool success, const std::string& witness) {
    auto it = at.find({a, b});
    if (it == at.end()) {
      out.fail("no prediction at " + std::to_string(a) + "," + std::to_string(b));
      return;
    }
    if (it->second.success != success || (!success && it->second.witness != witness))
      out.fail("prediction at " + std::to_string(a) + "," + std::to_string(b) + " is " +
               (it->second.success ? "SUCCESS" : "FAIL ") + it->second.witness);
  };
  expect(47, 48, false, "4+4+1");
  expect(57, 58, false, "5+5+1");
  expect(42, 43, true, "");

  // independent recomputation of the whole failure set
  std::map<UnitStep, int> mult;
  for (const auto& [a, b] : split.train) {
    std::map<UnitStep, int> need;
    for (const auto& s : walk_steps(a, b)) ++need[s];
    for (const auto& [s, n] : need) {
      auto it = mult.find(s);
      if (it == mult.end())
        mult[s] = n;
      else if (it->second < n)
        it->second = n;
    }
  }
  long long fails = 0, mismatches = 0;
  for (const auto& r : grid.rows) {
    bool covered = true;
    std::map<UnitStep, int> need;
    for (const auto& s : walk_steps(r.a, r.b)) ++need[s];
    for (const auto& [s, n] : need) {
      auto it = mult.find(s);
      if (it == mult.end() || it->second < n) covered = false;
    }
    if (r.success != covered) ++mismatches;
    if (!r.success) ++fails;
  }
  if (mismatches) out.fail(std::to_string(mismatches) + " points disagree with the digit walk");
  if (out.pass)
    out.detail = "witnesses match; " + std::to_string(fails) +
                 " predicted failures agree with an independent digit walk";
  return out;
}

// --------------------------------------------- 5: exact contribution scores

Outcome criterion_contributions() {
  Outcome out;
  // toy table: two examples, each mask at half accuracy, both together at zero
  {
    IclAccuracyTable t;
    t.accu_orig = Rational(0);
    t.accu_icl = Rational(1);
    t.similar_indices = {1, 2};
    t.random_indices = {};
    t.masks = {{{1}, Rational(1, 2)}, {{2}, Rational(1, 2)}, {{1, 2}, Rational(0)}};
    auto cs = icl_contribution(t);
    if (cs.size() != 2 || cs[0].c != Rational(1, 4) || cs[1].c != Rational(1, 4))
      out.fail("two-example table: expected c = 1/4 for both examples");
  }

  // group sizes 1..6: full mask enumeration, boundary identities, and an
  // exact cross-check against a direct evaluation of the defining sum
  std::mt19937_64 rng(7);
  for (int g = 1; g <= 6 && out.pass; ++g) {
    IclAccuracyTable t;
    t.accu_orig = Rational(1, 7);
    t.accu_icl = Rational(6, 7);
    t.similar_indices.clear();
    t.random_indices.clear();
    for (int i = 0; i < g; ++i) t.similar_indices.push_back(i);
    for (int m = 1; m < (1 << g); ++m) {
      IclMask mask;
      for (int i = 0; i < g; ++i)
        if (m & (1 << i)) mask.masked.push_back(i);
      mask.accuracy = Rational(static_cast<long long>(bounded(rng, 100)), 99);
      t.masks.push_back(mask);
    }

    auto cs = icl_contribution(t);
    if (static_cast<int>(cs.size()) != g) {
      out.fail("group of " + std::to_string(g) + ": wrong contribution count");
      break;
    }
    // direct evaluation using subset bitmasks
    std::map<std::vector<int>, Rational> accu;
    for (const auto& m : t.masks) accu[m.masked] = m.accuracy;
    Rational denom = t.accu_icl - t.accu_orig;
    for (int i = 0; i < g; ++i) {
      Rational sum(0);
      for (int m = 1; m < (1 << g); ++m) {
        if (!(m & (1 << i))) continue;
        std::vector<int> key;
        for (int j = 0; j < g; ++j)
          if (m & (1 << j)) key.push_back(j);
        sum += (accu.at(key) - t.accu_orig) / denom;
      }
      Rational want = sum / Rational(1LL << (g - 1));
      if (cs[static_cast<size_t>(i)].c != want) {
        out.fail("group of " + std::to_string(g) + ": c_" + std::to_string(i) +
                 " = " + cs[static_cast<size_t>(i)].c.str() + ", direct sum gives " + want.str());
        break;
      }
    }

    // boundary identities
    IclAccuracyTable hi = t;
    for (auto& m : hi.masks) m.accuracy = hi.accu_icl;
    for (const auto& c : icl_contribution(hi))
      if (c.c != Rational(1)) out.fail("masks at accu_icl must give c = 1");
    IclAccuracyTable lo = t;
    for (auto& m : lo.masks) m.accuracy = lo.accu_orig;
    for (const auto& c : icl_contribution(lo))
      if (c.c != Rational(0)) out.fail("masks at accu_orig must give c = 0");

    // a missing mask must be rejected
    IclAccuracyTable partial = t;
    partial.masks.pop_back();
    try {
      icl_contribution(partial);
      out.fail("incomplete mask enumeration was accepted");
    } catch (const std::invalid_argument&) {
    }
  }

  // two groups side by side keep their sums separate
  if (out.pass) {
    IclAccuracyTable t;
    t.accu_orig = Rational(0);
    t.accu_icl = Rational(1);
    t.similar_indices = {0, 1, 2, 3, 4};
    t.random_indices = {5, 6, 7, 8, 9};
    std::mt19937_64 rng2(11);
    for (int offset : {0, 5}) {
      for (int m = 1; m < 32; ++m) {
        IclMask mask;
        for (int i = 0; i < 5; ++i)
          if (m & (1 << i)) mask.masked.push_back(offset + i);
        mask.accuracy = Rational(static_cast<long long>(bounded(rng2, 100)), 99);
        t.masks.push_back(mask);
      }
    }
    auto cs = icl_contribution(t);
    if (cs.size() != 10) out.fail("ten-example table: wrong contribution count");
    for (size_t i = 0; i < cs.size() && out.pass; ++i) {
      const std::string want_group = i < 5 ? "similar" : "random";
      if (cs[i].group != want_group) out.fail("wrong group label on example " + std::to_string(i));
    }
  }
  if (out.pass) out.detail = "exact scores match the defining sum for group sizes 1-6";
  return out;
}

// ------------------------------------------------ 6: planted-fault taxonomy

Outcome criterion_mutants() {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  long long total = 0, matched = 0;
  std::map<std::string, long long> confusion;
  for (ErrorClass cls : mutants::mutation_classes()) {
    for (std::uint64_t seed = 0; seed < 125; ++seed) {
      mutants::Mutant m = mutants::make_mutant(cls, seed * 8 + static_cast<std::uint64_t>(cls));
      VerificationReport r = verify(m.format, m.problem, m.text);
      ++total;
      if (!r.valid && r.error == cls) {
        ++matched;
      } else {
        ++confusion[std::string(error_class_name(cls)) + "->" +
                    (r.valid ? "VALID" : error_class_name(r.error))];
      }
    }
  }
  double elapsed = seconds_since(start);
  if (matched != total) {
    std::string detail = std::to_string(matched) + "/" + std::to_string(total) + " classified;";
    for (const auto& [k, v] : confusion) detail += " " + k + " x" + std::to_string(v);
    out.fail(detail);
  }
  if (elapsed >= 60.0) out.fail("mutant sweep took " + std::to_string(elapsed) + "s (budget 60s)");
  if (out.pass)
    out.detail = std::to_string(total) + " planted faults classified exactly in " +
                 std::to_string(elapsed) + "s";
  return out;
}

// ------------------------------------------------- 7: proximity prediction

Outcome criterion_proximity() {
  Outcome out;
  SplitResult wide = leave_square_out(GridDomain::square(0, 99), {{50, 50, 20}});
  PredictionGrid grid = proximity_predict(wide, 5.0, Metric::Chebyshev);
  std::set<std::pair<long long, long long>> fails;
  for (const auto& r : grid.rows)
    if (!r.success) fails.insert({r.a, r.b});
  std::set<std::pair<long long, long long>> inner;
  for (long long a = 45; a <= 55; ++a)
    for (long long b = 45; b <= 55; ++b) inner.insert({a, b});
  if (fails != inner)
    out.fail("side-20 square: predicted-FAIL set is not the inner [45,55]^2 block (" +
             std::to_string(fails.size()) + " points)");

  // A side-10 held-out square is required to leave no point beyond radius 5,
  // yet its center (50,50) sits at Chebyshev distance 6 from the closest
  // training point (the square spans [45,55]^2, so the nearest train row is
  // a=44 or a=56). The check records that contradiction instead of hiding it.
  SplitResult narrow = leave_square_out(GridDomain::square(0, 99), {{50, 50, 10}});
  PredictionGrid ngrid = proximity_predict(narrow, 5.0, Metric::Chebyshev);
  std::vector<std::string> leftover;
  for (const auto& r : ngrid.rows)
    if (!r.success)
      leftover.push_back("(" + std::to_string(r.a) + "," + std::to_string(r.b) +
                         ") at distance " + r.witness);
  if (!leftover.empty()) {
    std::string detail = "side-10 square was required to have an empty predicted-FAIL set, but ";
    detail += std::to_string(leftover.size()) + " point(s) remain:";
    for (const auto& l : leftover) detail += " " + l;
    out.fail(detail);
  }
  if (out.pass) out.detail = "FAIL sets match the radius geometry for both square sizes";
  return out;
}

// --------------------------------------------- 8: command line determinism

Outcome criterion_cli_determinism() {
  Outcome out;
  namespace fs = std::filesystem;
  auto root = fs::temp_directory_path() / "rulebench-acceptance";
  fs::remove_all(root);

  auto run = [&](const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("rulebench");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  };

  auto pipeline = [&](const std::string& dir) -> bool {
    fs::create_directories(dir);
    std::string sampled = dir + "/sampled.jsonl";
    if (run({"gen", "--task", "addition", "--format", "rfft-code", "--count", "100",
             "--digits", "1-5", "--seed", "0", "-o", sampled}) != 0)
      return false;
    std::string corpus = dir + "/direct.jsonl";
    if (run({"gen", "--task", "addition", "--format", "direct", "--exhaustive", "0-99",
             "-o", corpus}) != 0)
      return false;
    std::string split = dir + "/split.jsonl";
    if (run({"split", "--task", "addition", "--square", "50,50,20", "--corpus", corpus,
             "-o", split}) != 0)
      return false;
    // oracle generations echo the reference outputs
    std::vector<nlohmann::json> gens;
    auto records = read_corpus(corpus);
    for (size_t i = 0; i < records.size(); ++i)
      gens.push_back({{"id", static_cast<long long>(i)}, {"generation", records[i].output}});
    std::string gen_path = dir + "/generations.jsonl";
    write_jsonl(gen_path, gens);
    std::string scored = dir + "/scored.jsonl";
    if (run({"verify", "--corpus", corpus, "--generations", gen_path, "-o", scored}) != 0)
      return false;
    if (run({"analyze", "--grid", "--scored", scored, "--split", split,
             "-o", dir + "/grid.csv"}) != 0)
      return false;
    if (run({"analyze", "--predict", "coverage", "--split", split, "--base", "10",
             "-o", dir + "/coverage.csv"}) != 0)
      return false;
    if (run({"analyze", "--heatmap", "--scored", scored, "--split", split,
             "-o", dir + "/grid.svg"}) != 0)
      return false;
    return true;
  };

  std::string dir1 = (root / "run1").string(), dir2 = (root / "run2").string();
  if (!pipeline(dir1) || !pipeline(dir2)) {
    out.fail("pipeline command failed");
    return out;
  }
  const char* files[] = {"sampled.jsonl", "direct.jsonl", "split.jsonl", "scored.jsonl",
                         "grid.csv",      "coverage.csv", "grid.svg"};
  for (const char* f : files) {
    std::string x = read_text_file(dir1 + "/" + f);
    std::string y = read_text_file(dir2 + "/" + f);
    if (x != y) out.fail(std::string(f) + " differs between identical runs");
    if (x.find('\r') != std::string::npos) out.fail(std::string(f) + " contains CR bytes");
  }
  if (out.pass) out.detail = "7 pipeline artifacts byte-identical across two runs";
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"frozen format anchors", criterion_golden},
      {"emit/verify round trip on 10k random pairs", criterion_roundtrip},
      {"held-out squares and character closure", criterion_splits},
      {"unit-step coverage prediction", criterion_coverage_prediction},
      {"exact in-context contribution scores", criterion_contributions},
      {"planted-fault classification", criterion_mutants},
      {"proximity prediction radius check", criterion_proximity},
      {"deterministic command line pipeline", criterion_cli_determinism},
  };
  int failures = 0;
  int idx = 0;
  for (const auto& e : entries) {
    ++idx;
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail = std::string("unhandled exception: ") + ex.what();
    }
    if (!out.pass) ++failures;
    std::printf("criterion %d %s - %s%s%s\n", idx, out.pass ? "PASS" : "FAIL", e.name,
                out.detail.empty() ? "" : ": ", out.detail.c_str());
  }
  if (failures) std::printf("%d of 8 criteria failing\n", failures);
  return failures == 0 ? 0 : 1;
}
