#include "rulebench/cli.hpp"

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rulebench/analysis.hpp"
#include "rulebench/corpus.hpp"
#include "rulebench/jsonl.hpp"
#include "rulebench/split.hpp"
#include "rulebench/verify.hpp"

namespace rulebench {

namespace {

std::pair<long long, long long> parse_range(const std::string& s, const char* what) {
  size_t dash = s.find('-', 1);  // skip a leading minus sign
  if (dash == std::string::npos)
    throw std::invalid_argument(std::string("malformed ") + what + " range '" + s +
                                "', expected LO-HI");
  try {
    long long lo = std::stoll(s.substr(0, dash));
    long long hi = std::stoll(s.substr(dash + 1));
    if (lo > hi) throw std::invalid_argument("empty range");
    return {lo, hi};
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("malformed ") + what + " range '" + s + "'");
  }
}

SquareSpec parse_square(const std::string& s) {
  SquareSpec sq;
  int fields = std::sscanf(s.c_str(), "%lld,%lld,%lld", &sq.a_center, &sq.b_center, &sq.side);
  if (fields != 3)
    throw std::invalid_argument("malformed square '" + s + "', expected A,B,SIDE");
  return sq;
}

std::pair<long long, long long> parse_pair(const std::string& s, const char* what) {
  long long a = 0, b = 0;
  if (std::sscanf(s.c_str(), "%lld,%lld", &a, &b) != 2)
    throw std::invalid_argument(std::string("malformed ") + what + " '" + s + "', expected A,B");
  return {a, b};
}

TaskKind task_kind_from_flags(const std::string& name, long long modulus, int base) {
  auto id = task_from_name(name);
  if (!id) throw std::invalid_argument("unknown task '" + name + "'");
  switch (*id) {
    case TaskId::Addition: return TaskKind::addition();
    case TaskId::ModularAddition: return TaskKind::modular_addition(modulus);
    case TaskId::BaseAddition: return TaskKind::base_addition(base);
    case TaskId::LinearRegression: return TaskKind::linear_regression();
    case TaskId::ChickenRabbit: return TaskKind::chicken_rabbit();
    case TaskId::LastLetterConcat: return TaskKind::last_letter();
  }
  throw std::logic_error("unhandled task");
}

void write_provenance(const std::string& path, const nlohmann::json& config) {
  nlohmann::json j = config;
  write_text_file(path + ".provenance.json", j.dump(2) + "\n");
}

// ------------------------------------------------------------------ gen

struct GenArgs {
  std::string task = "addition";
  std::string format = "direct";
  std::string layout = "canonical";
  std::string digits = "1-5";
  std::string words = "2-4";
  std::string exhaustive;
  std::string icl_probe;
  long long count = 0;
  unsigned long long seed = 0;
  long long modulus = 113;
  int base = 9;
  bool exotic = false;
  bool single_operand = false;
  int probe_similar = 5, probe_random = 5;
  int jobs = 1;
  std::string output;
};

int cmd_gen(const GenArgs& a) {
  nlohmann::json config{{"command", "gen"},       {"task", a.task},
                        {"format", a.format},     {"layout", a.layout},
                        {"seed", a.seed},         {"exotic", a.exotic},
                        {"output", a.output}};

  if (!a.icl_probe.empty()) {
    auto [pa, pb] = parse_pair(a.icl_probe, "--icl-probe");
    auto examples = build_icl_probe(pa, pb, a.probe_similar, a.probe_random, a.seed,
                                    a.single_operand);
    std::vector<nlohmann::json> rows;
    for (const auto& j : icl_examples_to_json(examples)) rows.push_back(j);
    write_jsonl(a.output, rows);
    config["icl_probe"] = a.icl_probe;
    config["probe_similar"] = a.probe_similar;
    config["probe_random"] = a.probe_random;
    config["single_operand"] = a.single_operand;
    write_provenance(a.output, config);
    std::cout << "wrote " << rows.size() << " probe examples to " << a.output << "\n";
    return 0;
  }

  TaskKind kind = task_kind_from_flags(a.task, a.modulus, a.base);
  auto format = format_from_name(a.format);
  if (!format) throw std::invalid_argument("unknown format '" + a.format + "'");
  if (!format_supports(kind.id, *format))
    throw std::invalid_argument("format '" + a.format + "' does not support task '" + a.task +
                                "'");
  ScratchpadLayout layout;
  if (a.layout == "canonical")
    layout = ScratchpadLayout::Canonical;
  else if (a.layout == "inline")
    layout = ScratchpadLayout::Inline;
  else
    throw std::invalid_argument("unknown layout '" + a.layout + "'");

  Corpus corpus;
  if (!a.exhaustive.empty()) {
    auto [lo, hi] = parse_range(a.exhaustive, "--exhaustive");
    if (lo < 0) throw std::invalid_argument("exhaustive range must be non-negative");
    auto points = exhaustive_points(kind, static_cast<unsigned long long>(lo),
                                    static_cast<unsigned long long>(hi));
    corpus = build_corpus_exhaustive(kind, *format, points, a.exotic, layout, a.jobs);
    config["exhaustive"] = a.exhaustive;
  } else {
    if (a.count <= 0) throw std::invalid_argument("--count or --exhaustive is required");
    auto [dlo, dhi] = parse_range(a.digits, "--digits");
    auto [wlo, whi] = parse_range(a.words, "--words");
    SamplerSpec spec;
    spec.min_digits = static_cast<int>(dlo);
    spec.max_digits = static_cast<int>(dhi);
    spec.count = a.count;
    spec.seed = a.seed;
    spec.min_words = static_cast<int>(wlo);
    spec.max_words = static_cast<int>(whi);
    corpus = build_corpus(kind, *format, spec, a.exotic, layout, a.jobs);
    config["digits"] = a.digits;
    config["count"] = a.count;
    if (kind.id == TaskId::LastLetterConcat) config["words"] = a.words;
  }
  if (kind.id == TaskId::ModularAddition) config["modulus"] = a.modulus;
  if (kind.id == TaskId::BaseAddition) config["base"] = a.base;
  corpus.provenance["cli"] = config;
  write_corpus(corpus, a.output);
  std::cout << "wrote " << corpus.records.size() << " records to " << a.output << "\n";
  return 0;
}

// ---------------------------------------------------------------- split

struct SplitArgs {
  std::string task;
  std::string domain;
  std::vector<std::string> squares;
  double random_ratio = -1.0;
  unsigned long long seed = 0;
  long long modulus = 113;
  int base = 9;
  bool balance = false;
  std::string corpus;
  std::string output;
};

int cmd_split(const SplitArgs& a) {
  GridDomain domain;
  if (!a.domain.empty()) {
    auto [lo, hi] = parse_range(a.domain, "--domain");
    domain = GridDomain::square(lo, hi);
  } else if (!a.task.empty()) {
    domain = GridDomain::canonical(task_kind_from_flags(a.task, a.modulus, a.base));
  } else {
    domain = GridDomain::square(0, 99);
  }

  SplitResult split;
  nlohmann::json config{{"command", "split"}, {"output", a.output}};
  if (!a.domain.empty()) config["domain"] = a.domain;
  if (!a.task.empty()) config["task"] = a.task;
  if (!a.squares.empty()) {
    std::vector<SquareSpec> squares;
    for (const auto& s : a.squares) squares.push_back(parse_square(s));
    split = leave_square_out(domain, squares);
    config["squares"] = a.squares;
  } else if (a.random_ratio >= 0.0) {
    split = random_split(domain, a.random_ratio, a.seed);
    config["random"] = a.random_ratio;
    config["seed"] = a.seed;
  } else {
    throw std::invalid_argument("one of --square or --random is required");
  }

  if (a.balance) {
    split.train = upsample_balance(split.train);
    config["balance"] = true;
  }

  std::cout << "train=" << split.train.size() << " test=" << split.test.size() << "\n";
  if (!a.corpus.empty()) {
    auto records = read_corpus(a.corpus);
    CoverageReport report = check_token_coverage(split, records);
    split.token_coverage = report.covered;
    config["corpus"] = a.corpus;
    if (report.covered) {
      std::cout << "token-coverage: OK\n";
    } else {
      std::cout << "token-coverage: MISSING";
      for (const auto& m : report.missing) std::cout << " " << m;
      std::cout << "\n";
    }
  } else {
    std::cout << "token-coverage: skipped (no --corpus)\n";
  }
  for (const auto& w : split.warnings) std::cout << "warning: " << w << "\n";

  split.provenance["cli"] = config;
  write_split(split, a.output);
  return 0;
}

// --------------------------------------------------------------- verify

struct VerifyArgs {
  std::string corpus, generations, output;
  int jobs = 1;
};

int cmd_verify(const VerifyArgs& a) {
  auto records = read_corpus(a.corpus);
  auto gens = read_jsonl(a.generations);
  if (gens.empty()) throw std::invalid_argument("empty generations file: " + a.generations);

  auto scored = score_generations(records, gens, a.jobs);

  std::vector<nlohmann::json> rows;
  rows.reserve(scored.size());
  long long samples = 0, correct = 0;
  std::map<std::string, long long> histogram;
  for (const auto& s : scored) {
    samples += s.n_samples;
    correct += s.n_correct;
    for (const auto& r : s.reports) ++histogram[error_class_name(r.error)];
    rows.push_back(scored_to_json(s));
  }
  write_jsonl(a.output, rows);
  nlohmann::json config{{"command", "verify"},
                        {"corpus", a.corpus},
                        {"generations", a.generations},
                        {"output", a.output}};
  write_provenance(a.output, config);

  std::cout << "scored " << scored.size() << " problems, " << samples << " samples\n";
  std::cout << "aggregate accuracy: " << correct << "/" << samples << "\n";
  for (const auto& [name, count] : histogram) std::cout << name << " " << count << "\n";
  return 0;
}

// -------------------------------------------------------------- analyze

struct AnalyzeArgs {
  bool grid = false, lengths = false, heatmap = false;
  std::string icl, predict;
  std::vector<std::string> scored;
  std::string split;
  int base = 10;
  double radius = 5.0;
  std::string metric = "chebyshev";
  std::string output;
};

std::vector<ScoredProblem> read_scored(const std::string& path) {
  std::vector<ScoredProblem> out;
  for (const auto& j : read_jsonl(path)) out.push_back(scored_from_json(j));
  return out;
}

int cmd_analyze(const AnalyzeArgs& a) {
  int modes = (a.grid ? 1 : 0) + (a.lengths ? 1 : 0) + (a.heatmap ? 1 : 0) +
              (a.icl.empty() ? 0 : 1) + (a.predict.empty() ? 0 : 1);
  if (modes != 1)
    throw std::invalid_argument(
        "exactly one of --grid, --lengths, --icl, --predict, --heatmap is required");

  nlohmann::json config{{"command", "analyze"}, {"output", a.output}};

  if (a.grid || a.heatmap) {
    if (a.scored.size() != 1 || a.split.empty())
      throw std::invalid_argument("needs exactly one --scored and a --split");
    auto split = read_split(a.split);
    auto grid = accuracy_grid(read_scored(a.scored[0]), split);
    config["scored"] = a.scored[0];
    config["split"] = a.split;
    if (a.grid) {
      config["mode"] = "grid";
      write_text_file(a.output, grid_to_csv(grid));
      if (!grid.missing.empty())
        std::cout << "missing scores for " << grid.missing.size() << " points\n";
    } else {
      config["mode"] = "heatmap";
      write_text_file(a.output, emit_heatmap(grid, split.squares));
    }
    write_provenance(a.output, config);
    std::cout << "wrote " << a.output << "\n";
    return 0;
  }

  if (a.lengths) {
    if (a.scored.empty()) throw std::invalid_argument("--lengths needs at least one --scored");
    std::vector<LengthObservation> obs;
    for (size_t run = 0; run < a.scored.size(); ++run) {
      auto bucketed = bucket_scored_by_length(read_scored(a.scored[run]), static_cast<int>(run));
      obs.insert(obs.end(), bucketed.begin(), bucketed.end());
    }
    LengthTable table = length_table(obs);
    config["mode"] = "lengths";
    config["scored"] = a.scored;
    write_text_file(a.output, length_table_to_csv(table));
    write_provenance(a.output, config);
    for (int d : table.single_run_lengths)
      std::cout << "note: single run for " << d << "-digit bucket\n";
    std::cout << "wrote " << a.output << "\n";
    return 0;
  }

  if (!a.icl.empty()) {
    auto table = icl_table_from_json(nlohmann::json::parse(read_text_file(a.icl)));
    auto cs = icl_contribution(table);
    config["mode"] = "icl";
    config["table"] = a.icl;
    write_text_file(a.output, contributions_to_json(cs).dump(2) + "\n");
    write_provenance(a.output, config);
    std::cout << "wrote " << a.output << "\n";
    return 0;
  }

  // --predict coverage|proximity
  if (a.split.empty()) throw std::invalid_argument("--predict needs a --split");
  auto split = read_split(a.split);
  PredictionGrid grid;
  config["mode"] = "predict";
  config["predict"] = a.predict;
  config["split"] = a.split;
  if (a.predict == "coverage") {
    grid = coverage_predict(split, a.base);
    config["base"] = a.base;
  } else if (a.predict == "proximity") {
    Metric metric;
    if (a.metric == "chebyshev")
      metric = Metric::Chebyshev;
    else if (a.metric == "euclidean")
      metric = Metric::Euclidean;
    else
      throw std::invalid_argument("unknown metric '" + a.metric + "'");
    grid = proximity_predict(split, a.radius, metric);
    config["radius"] = a.radius;
    config["metric"] = a.metric;
  } else {
    throw std::invalid_argument("unknown predictor '" + a.predict +
                                "', expected coverage or proximity");
  }
  write_text_file(a.output, predictions_to_csv(grid));
  write_provenance(a.output, config);
  long long fails = 0;
  for (const auto& r : grid.rows)
    if (!r.success) ++fails;
  std::cout << "predicted FAIL for " << fails << "/" << grid.rows.size() << " test points\n";
  std::cout << "wrote " << a.output << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Deterministic corpus, split, verification and analysis toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a supervision corpus");
  gen_cmd->add_option("--task", gen.task, "Task name (addition, modular-addition, ...)");
  gen_cmd->add_option("--format", gen.format, "Supervision format");
  gen_cmd->add_option("--layout", gen.layout, "Scratchpad layout: canonical or inline");
  gen_cmd->add_option("--digits", gen.digits, "Operand digit range LO-HI");
  gen_cmd->add_option("--words", gen.words, "Word count range LO-HI (last-letter)");
  gen_cmd->add_option("--count", gen.count, "Number of sampled records");
  gen_cmd->add_option("--seed", gen.seed, "Sampling seed");
  gen_cmd->add_option("--exhaustive", gen.exhaustive, "Enumerate operands LO-HI instead");
  gen_cmd->add_option("--modulus", gen.modulus, "Modulus for modular-addition");
  gen_cmd->add_option("--base", gen.base, "Base for base-addition");
  gen_cmd->add_flag("--exotic", gen.exotic, "Encode digits as letters A-I");
  gen_cmd->add_option("--icl-probe", gen.icl_probe, "Write a few-shot probe set around pair A,B");
  gen_cmd->add_option("--probe-similar", gen.probe_similar, "Similar examples in the probe");
  gen_cmd->add_option("--probe-random", gen.probe_random, "Random examples in the probe");
  gen_cmd->add_flag("--single-operand", gen.single_operand,
                    "Similar probes vary the first operand only");
  gen_cmd->add_option("--jobs", gen.jobs, "Worker threads");
  gen_cmd->add_option("-o,--output", gen.output, "Output JSONL path")->required();

  SplitArgs split;
  CLI::App* split_cmd = app.add_subcommand("split", "Partition an operand grid");
  split_cmd->add_option("--task", split.task, "Task whose canonical domain to use");
  split_cmd->add_option("--domain", split.domain, "Grid domain LO-HI (both axes)");
  split_cmd->add_option("--square", split.squares, "Held-out square A,B,SIDE (repeatable)");
  split_cmd->add_option("--random", split.random_ratio, "Random train ratio in [0,1]");
  split_cmd->add_option("--seed", split.seed, "Random split seed");
  split_cmd->add_option("--modulus", split.modulus, "Modulus for modular-addition");
  split_cmd->add_option("--base", split.base, "Base for base-addition");
  split_cmd->add_flag("--balance", split.balance, "Upsample train to equal marginals");
  split_cmd->add_option("--corpus", split.corpus, "Corpus for the token-coverage check");
  split_cmd->add_option("-o,--output", split.output, "Output JSONL path")->required();

  VerifyArgs verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Score model generations");
  verify_cmd->add_option("--corpus", verify.corpus, "Corpus JSONL")->required();
  verify_cmd->add_option("--generations", verify.generations, "Generations JSONL")->required();
  verify_cmd->add_option("--jobs", verify.jobs, "Worker threads");
  verify_cmd->add_option("-o,--output", verify.output, "Scored JSONL path")->required();

  AnalyzeArgs analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Produce grids, tables and predictions");
  analyze_cmd->add_flag("--grid", analyze.grid, "Accuracy grid CSV from scored records");
  analyze_cmd->add_flag("--lengths", analyze.lengths, "Length table CSV; one --scored per run");
  analyze_cmd->add_flag("--heatmap", analyze.heatmap, "SVG heatmap from scored records");
  analyze_cmd->add_option("--icl", analyze.icl, "Contribution report from a mask-accuracy table");
  analyze_cmd->add_option("--predict", analyze.predict, "Hole predictor: coverage or proximity");
  analyze_cmd->add_option("--scored", analyze.scored, "Scored JSONL (repeatable)");
  analyze_cmd->add_option("--split", analyze.split, "Split JSONL");
  analyze_cmd->add_option("--base", analyze.base, "Digit base for coverage prediction");
  analyze_cmd->add_option("--radius", analyze.radius, "Proximity radius");
  analyze_cmd->add_option("--metric", analyze.metric, "chebyshev or euclidean");
  analyze_cmd->add_option("-o,--output", analyze.output, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen);
    if (split_cmd->parsed()) return cmd_split(split);
    if (verify_cmd->parsed()) return cmd_verify(verify);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace rulebench
