#include "rulebench/corpus.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <thread>

#include "rulebench/jsonl.hpp"
#include "rulebench/rng.hpp"

namespace rulebench {

namespace {

using Point = std::pair<unsigned long long, unsigned long long>;

// Count of numbers with exactly `len` digits in `base`, saturating at 2^63.
unsigned long long numbers_of_length(int len, int base) {
  if (len == 1) return static_cast<unsigned long long>(base);
  unsigned long long n = static_cast<unsigned long long>(base - 1);
  const unsigned long long cap = 1ull << 63;
  for (int i = 1; i < len; ++i) {
    if (n >= cap / static_cast<unsigned long long>(base)) return cap;
    n *= static_cast<unsigned long long>(base);
  }
  return n;
}

unsigned long long draw_value(std::mt19937_64& rng, int len, int base) {
  unsigned long long v;
  if (len == 1) {
    v = bounded(rng, static_cast<unsigned long long>(base));
  } else {
    v = 1 + bounded(rng, static_cast<unsigned long long>(base - 1));
    for (int i = 1; i < len; ++i)
      v = v * static_cast<unsigned long long>(base) + bounded(rng, static_cast<unsigned long long>(base));
  }
  return v;
}

void apply_exotic(IOPair& io) {
  io.input = exotic_encode(io.input);
  io.output = exotic_encode(io.output);
  io.exotic = true;
}

// Emits records for the given problems, preserving order; `jobs` threads.
std::vector<IOPair> emit_all(const std::vector<Problem>& problems, TraceFormat format,
                             ScratchpadLayout layout, bool exotic, int jobs) {
  std::vector<IOPair> out(problems.size());
  auto work = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      out[i] = emit(problems[i], format, layout);
      out[i].seed_index = static_cast<long long>(i);
      if (exotic) apply_exotic(out[i]);
    }
  };
  if (jobs <= 1 || problems.size() < 2) {
    work(0, problems.size());
  } else {
    size_t n = problems.size();
    size_t workers = std::min<size_t>(static_cast<size_t>(jobs), n);
    std::vector<std::thread> threads;
    for (size_t w = 0; w < workers; ++w) {
      size_t lo = n * w / workers, hi = n * (w + 1) / workers;
      threads.emplace_back(work, lo, hi);
    }
    for (auto& t : threads) t.join();
  }
  return out;
}

void check_exotic_usable(const TaskKind& task, TraceFormat format, bool exotic) {
  if (!exotic) return;
  if (format != TraceFormat::Direct)
    throw std::invalid_argument("exotic digits apply to the direct format only");
  if (task.render_base() > 9)
    throw std::invalid_argument("exotic digits need base <= 9 (digits 0-8)");
  if (task.id == TaskId::ChickenRabbit || task.id == TaskId::LastLetterConcat)
    throw std::invalid_argument("exotic digits apply to numeric tasks only");
}

nlohmann::json sampler_json(const SamplerSpec& s, bool words) {
  nlohmann::json j;
  if (words) {
    j["min_words"] = s.min_words;
    j["max_words"] = s.max_words;
  } else {
    j["min_digits"] = s.min_digits;
    j["max_digits"] = s.max_digits;
  }
  j["count"] = s.count;
  j["seed"] = s.seed;
  return j;
}

nlohmann::json task_json(const TaskKind& t) {
  nlohmann::json j;
  j["task"] = task_name(t.id);
  if (t.id == TaskId::ModularAddition) j["modulus"] = t.modulus;
  if (t.id == TaskId::BaseAddition) j["base"] = t.base;
  if (t.id == TaskId::LinearRegression) {
    j["m"] = t.m;
    j["n"] = t.n;
    j["p"] = t.p;
  }
  return j;
}

}  // namespace

const std::vector<std::string>& surname_pool() {
  static const std::vector<std::string> pool = {
      "Smith",    "Johnson",  "Williams", "Brown",   "Jones",    "Garcia",  "Miller",   "Davis",
      "Rodriguez", "Martinez", "Hernandez", "Lopez",  "Gonzalez", "Wilson",  "Anderson", "Thomas",
      "Taylor",   "Moore",    "Jackson",  "Martin",  "Lee",      "Perez",   "Thompson", "White",
      "Harris",   "Sanchez",  "Clark",    "Ramirez", "Lewis",    "Robinson", "Walker",  "Young",
      "Allen",    "King",     "Wright",   "Scott",   "Torres",   "Nguyen",  "Hill",     "Flores",
      "Green",    "Adams",    "Nelson",   "Baker",   "Hall",     "Rivera",  "Campbell", "Mitchell",
      "Carter",   "Roberts",  "Gomez",    "Phillips", "Evans",   "Turner",  "Diaz",     "Parker",
      "Cruz",     "Edwards",  "Collins",  "Reyes",   "Stewart",  "Morris",  "Morales",  "Murphy",
      "Cook",     "Rogers",   "Gutierrez", "Ortiz",  "Morgan",   "Cooper",  "Peterson", "Bailey",
      "Reed",     "Kelly",    "Howard",   "Ramos",   "Kim",      "Cox",     "Ward",     "Richardson",
      "Watson",   "Brooks",   "Chavez",   "Wood",    "James",    "Bennett", "Gray",     "Mendoza",
      "Ruiz",     "Hughes",   "Price",    "Alvarez", "Castillo", "Sanders", "Patel",    "Myers",
      "Long",     "Ross",     "Foster",   "Kaur",
  };
  return pool;
}

Corpus build_corpus(const TaskKind& task, TraceFormat format, const SamplerSpec& spec, bool exotic,
                    ScratchpadLayout layout, int jobs) {
  if (!format_supports(task.id, format))
    throw std::invalid_argument(std::string("format ") + format_name(format) +
                                " does not support task " + task_name(task.id));
  check_exotic_usable(task, format, exotic);
  if (spec.count < 0) throw std::invalid_argument("count must be non-negative");

  Corpus corpus;
  corpus.task = task;
  corpus.format = format;
  corpus.layout = layout;
  corpus.exotic = exotic;

  std::mt19937_64 rng(spec.seed);
  std::vector<Problem> problems;
  problems.reserve(static_cast<size_t>(spec.count));

  if (task.id == TaskId::LastLetterConcat) {
    if (spec.min_words < 1 || spec.max_words < spec.min_words)
      throw std::invalid_argument("bad word count range");
    const auto& pool = surname_pool();
    std::set<std::vector<std::string>> seen;
    while (problems.size() < static_cast<size_t>(spec.count)) {
      int n = static_cast<int>(bounded_incl(rng, static_cast<unsigned long long>(spec.min_words),
                                            static_cast<unsigned long long>(spec.max_words)));
      std::vector<std::string> names;
      for (int i = 0; i < n; ++i) names.push_back(pool[bounded(rng, pool.size())]);
      if (!seen.insert(names).second) continue;
      problems.push_back(make_word_problem(names));
    }
    corpus.provenance = {{"command", "gen"},
                         {"exotic", exotic},
                         {"format", format_name(format)},
                         {"sampler", sampler_json(spec, true)},
                         {"task", task_json(task)}};
  } else {
    if (task.id == TaskId::ChickenRabbit)
      throw std::invalid_argument("chicken-rabbit corpora are built from explicit points");
    if (spec.min_digits < 1 || spec.max_digits < spec.min_digits)
      throw std::invalid_argument("bad digit range");
    const int base = task.render_base();
    unsigned long long per_operand = 0;
    const unsigned long long cap = 1ull << 32;
    for (int len = spec.min_digits; len <= spec.max_digits; ++len) {
      per_operand += numbers_of_length(len, base);
      if (per_operand >= cap) break;
    }
    unsigned long long domain_pairs =
        per_operand >= cap ? ~0ull : per_operand * per_operand;  // cap^2 > 2^63, never reached
    if (per_operand < cap && static_cast<unsigned long long>(spec.count) > domain_pairs)
      throw std::invalid_argument("count exceeds the number of distinct operand pairs");

    std::set<Point> seen;
    auto draw_len = [&]() {
      return static_cast<int>(bounded_incl(rng, static_cast<unsigned long long>(spec.min_digits),
                                           static_cast<unsigned long long>(spec.max_digits)));
    };
    while (problems.size() < static_cast<size_t>(spec.count)) {
      unsigned long long a = draw_value(rng, draw_len(), base);
      unsigned long long b = draw_value(rng, draw_len(), base);
      if (!seen.insert({a, b}).second) continue;
      problems.push_back(make_problem(task, a, b));
    }
    corpus.provenance = {{"command", "gen"},
                         {"exotic", exotic},
                         {"format", format_name(format)},
                         {"layout", layout == ScratchpadLayout::Inline ? "inline" : "canonical"},
                         {"sampler", sampler_json(spec, false)},
                         {"task", task_json(task)}};
  }

  corpus.records = emit_all(problems, format, layout, exotic, jobs);
  return corpus;
}

std::vector<Point> exhaustive_points(const TaskKind& task, unsigned long long lo,
                                     unsigned long long hi) {
  if (lo > hi) throw std::invalid_argument("bad range");
  std::vector<Point> pts;
  if (task.id == TaskId::ChickenRabbit) {
    for (unsigned long long a = 0; a <= 4 * hi; ++a)
      for (unsigned long long b = lo; b <= hi; ++b)
        if (a % 2 == 0 && 2 * b <= a && a <= 4 * b) pts.push_back({a, b});
  } else {
    for (unsigned long long a = lo; a <= hi; ++a)
      for (unsigned long long b = lo; b <= hi; ++b) pts.push_back({a, b});
  }
  return pts;
}

Corpus build_corpus_exhaustive(const TaskKind& task, TraceFormat format,
                               const std::vector<Point>& points, bool exotic,
                               ScratchpadLayout layout, int jobs) {
  if (!format_supports(task.id, format))
    throw std::invalid_argument(std::string("format ") + format_name(format) +
                                " does not support task " + task_name(task.id));
  check_exotic_usable(task, format, exotic);

  std::vector<Problem> problems;
  problems.reserve(points.size());
  for (const auto& [a, b] : points) problems.push_back(make_problem(task, a, b));

  Corpus corpus;
  corpus.task = task;
  corpus.format = format;
  corpus.layout = layout;
  corpus.exotic = exotic;
  corpus.records = emit_all(problems, format, layout, exotic, jobs);
  corpus.provenance = {{"command", "gen"},
                       {"count", points.size()},
                       {"exhaustive", true},
                       {"exotic", exotic},
                       {"format", format_name(format)},
                       {"task", task_json(task)}};
  return corpus;
}

nlohmann::json record_to_json(const IOPair& io) {
  nlohmann::json j;
  j["task"] = task_name(io.task.id);
  j["format"] = format_name(io.format);
  if (io.a) j["a"] = *io.a;
  if (io.b) j["b"] = *io.b;
  if (!io.names.empty()) j["names"] = io.names;
  j["input"] = io.input;
  j["output"] = io.output;
  nlohmann::json meta = nlohmann::json::object();
  if (io.a) {
    meta["len_a"] = io.len_a;
    meta["len_b"] = io.len_b;
    meta["base"] = io.task.render_base();
  }
  if (io.task.id == TaskId::ModularAddition) meta["modulus"] = io.task.modulus;
  if (io.task.id == TaskId::LinearRegression) {
    meta["m"] = io.task.m;
    meta["n"] = io.task.n;
    meta["p"] = io.task.p;
  }
  if (io.seed_index >= 0) meta["seed_index"] = io.seed_index;
  if (io.exotic) meta["exotic"] = true;
  j["meta"] = meta;
  return j;
}

IOPair record_from_json(const nlohmann::json& j) {
  IOPair io;
  auto tid = task_from_name(j.at("task").get<std::string>());
  if (!tid) throw std::invalid_argument("unknown task in record");
  auto fmt = format_from_name(j.at("format").get<std::string>());
  if (!fmt) throw std::invalid_argument("unknown format in record");
  io.format = *fmt;
  TaskKind task;
  task.id = *tid;
  const auto& meta = j.contains("meta") && j.at("meta").is_object() ? j.at("meta")
                                                                    : nlohmann::json::object();
  if (*tid == TaskId::BaseAddition) task.base = meta.value("base", 9);
  if (*tid == TaskId::ModularAddition) task.modulus = meta.value("modulus", 113ll);
  if (*tid == TaskId::LinearRegression) {
    task.m = meta.value("m", 1ll);
    task.n = meta.value("n", 2ll);
    task.p = meta.value("p", 3ll);
  }
  io.task = task;
  if (j.contains("a")) io.a = j.at("a").get<unsigned long long>();
  if (j.contains("b")) io.b = j.at("b").get<unsigned long long>();
  if (j.contains("names")) io.names = j.at("names").get<std::vector<std::string>>();
  io.input = j.value("input", "");
  io.output = j.value("output", "");
  io.len_a = meta.value("len_a", 0);
  io.len_b = meta.value("len_b", 0);
  io.seed_index = meta.value("seed_index", -1ll);
  io.exotic = meta.value("exotic", false);
  return io;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::vector<nlohmann::json> records;
  records.reserve(corpus.records.size());
  for (const auto& r : corpus.records) records.push_back(record_to_json(r));
  write_jsonl(path, records);
  write_text_file(path + ".provenance.json", corpus.provenance.dump(2) + "\n");
}

std::vector<IOPair> read_corpus(const std::string& path) {
  std::vector<IOPair> out;
  for (const auto& j : read_jsonl(path)) out.push_back(record_from_json(j));
  return out;
}

}  // namespace rulebench
