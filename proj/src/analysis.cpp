#include "rulebench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "rulebench/rng.hpp"

namespace rulebench {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::string> csv_fields(std::string_view line) {
  std::vector<std::string> out;
  size_t pos = 0;
  for (;;) {
    size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(pos));
      return out;
    }
    out.emplace_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

long long parse_ll(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("malformed ") + what + ": '" + s + "'");
  }
}

double parse_double(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("malformed ") + what + ": '" + s + "'");
  }
}

Rational rational_from_json(const nlohmann::json& v, const char* what) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_number_float()) return Rational::parse(nlohmann::json(v.get<double>()).dump());
  throw std::invalid_argument(std::string(what) + " must be a number or numeric string");
}

}  // namespace

// -------------------------------------------------------------- accuracy grid

AccuracyGrid accuracy_grid(const std::vector<ScoredProblem>& scored, const SplitResult& split) {
  std::map<GridPoint, std::string> partition;
  for (const auto& p : split.train) partition[p] = "train";
  for (const auto& p : split.test) partition[p] = "test";

  std::map<GridPoint, double> acc;
  for (const auto& s : scored) {
    if (!s.record.a || !s.record.b)
      throw std::invalid_argument("scored record without grid coordinates");
    GridPoint p{static_cast<long long>(*s.record.a), static_cast<long long>(*s.record.b)};
    auto part = partition.find(p);
    if (part == partition.end())
      throw std::invalid_argument("scored point (" + std::to_string(p.first) + "," +
                                  std::to_string(p.second) + ") is outside the split");
    if (!acc.emplace(p, s.accuracy).second)
      throw std::invalid_argument("duplicate scored point (" + std::to_string(p.first) + "," +
                                  std::to_string(p.second) + ")");
  }

  AccuracyGrid grid;
  for (const auto& [p, part] : partition) {
    auto it = acc.find(p);
    if (it == acc.end())
      grid.missing.push_back(p);
    else
      grid.cells.push_back({p.first, p.second, part, it->second});
  }
  return grid;
}

std::string grid_to_csv(const AccuracyGrid& grid) {
  std::string out = "a,b,partition,accuracy\n";
  for (const auto& c : grid.cells) {
    out += std::to_string(c.a);
    out += ',';
    out += std::to_string(c.b);
    out += ',';
    out += c.partition;
    out += ',';
    out += fixed6(c.accuracy);
    out += '\n';
  }
  return out;
}

AccuracyGrid grid_from_csv(std::string_view csv) {
  AccuracyGrid grid;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < csv.size()) {
    size_t nl = csv.find('\n', pos);
    size_t end = nl == std::string_view::npos ? csv.size() : nl;
    std::string_view line = csv.substr(pos, end - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "a,b,partition,accuracy")
        throw std::invalid_argument("unexpected grid CSV header");
      continue;
    }
    auto f = csv_fields(line);
    if (f.size() != 4) throw std::invalid_argument("grid CSV row needs 4 fields");
    if (f[2] != "train" && f[2] != "test")
      throw std::invalid_argument("unknown partition '" + f[2] + "'");
    grid.cells.push_back(
        {parse_ll(f[0], "a"), parse_ll(f[1], "b"), f[2], parse_double(f[3], "accuracy")});
  }
  return grid;
}

// --------------------------------------------------------------- length table

LengthTable length_table(const std::vector<LengthObservation>& observations) {
  if (observations.empty()) throw std::invalid_argument("no length observations");
  std::map<int, std::map<int, double>> by_digits;  // digits -> run -> accuracy
  for (const auto& o : observations) {
    auto& runs = by_digits[o.digits];
    if (!runs.emplace(o.run, o.accuracy).second)
      throw std::invalid_argument("duplicate observation for digits " + std::to_string(o.digits) +
                                  " run " + std::to_string(o.run));
  }

  LengthTable table;
  for (const auto& [digits, runs] : by_digits) {
    double mean = 0.0;
    for (const auto& [run, a] : runs) mean += a;
    mean /= static_cast<double>(runs.size());
    double var = 0.0;
    for (const auto& [run, a] : runs) var += (a - mean) * (a - mean);
    var /= static_cast<double>(runs.size());
    table.rows.push_back({digits, mean, std::sqrt(var), static_cast<int>(runs.size())});
    if (runs.size() == 1) table.single_run_lengths.push_back(digits);
  }
  return table;
}

std::string length_table_to_csv(const LengthTable& table) {
  std::string out = "digits,mean,std,runs\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.digits);
    out += ',';
    out += fixed6(r.mean);
    out += ',';
    out += fixed6(r.stddev);
    out += ',';
    out += std::to_string(r.runs);
    out += '\n';
  }
  return out;
}

std::vector<LengthObservation> bucket_scored_by_length(const std::vector<ScoredProblem>& scored,
                                                       int run) {
  std::map<int, std::pair<double, long long>> buckets;  // digits -> (sum, count)
  for (const auto& s : scored) {
    int digits = std::max(s.record.len_a, s.record.len_b);
    if (digits <= 0) throw std::invalid_argument("scored record without digit lengths");
    auto& b = buckets[digits];
    b.first += s.accuracy;
    b.second += 1;
  }
  std::vector<LengthObservation> out;
  out.reserve(buckets.size());
  for (const auto& [digits, b] : buckets)
    out.push_back({digits, run, b.first / static_cast<double>(b.second)});
  return out;
}

// --------------------------------------------------- in-context contributions

std::vector<IclContribution> icl_contribution(const IclAccuracyTable& table) {
  if (table.accu_icl == table.accu_orig)
    throw std::domain_error("contribution undefined: accu_icl equals accu_orig");
  const Rational denom = table.accu_icl - table.accu_orig;

  struct Group {
    std::string name;
    std::set<int> indices;
  };
  std::vector<Group> groups;
  if (!table.similar_indices.empty())
    groups.push_back({"similar", {table.similar_indices.begin(), table.similar_indices.end()}});
  if (!table.random_indices.empty())
    groups.push_back({"random", {table.random_indices.begin(), table.random_indices.end()}});
  if (groups.size() == 2)
    for (int i : groups[0].indices)
      if (groups[1].indices.count(i))
        throw std::invalid_argument("example groups overlap at index " + std::to_string(i));

  // Assign each mask to the group containing all its indices.
  std::vector<std::vector<std::pair<std::set<int>, Rational>>> masks_by_group(groups.size());
  for (const auto& m : table.masks) {
    std::set<int> masked(m.masked.begin(), m.masked.end());
    if (masked.empty()) throw std::invalid_argument("empty mask");
    if (masked.size() != m.masked.size()) throw std::invalid_argument("mask repeats an index");
    bool placed = false;
    for (size_t g = 0; g < groups.size(); ++g) {
      if (std::includes(groups[g].indices.begin(), groups[g].indices.end(), masked.begin(),
                        masked.end())) {
        masks_by_group[g].push_back({std::move(masked), m.accuracy});
        placed = true;
        break;
      }
    }
    if (!placed) throw std::invalid_argument("mask is not a subset of a single group");
  }

  std::vector<IclContribution> out;
  for (size_t g = 0; g < groups.size(); ++g) {
    const auto& group = groups[g];
    const auto& masks = masks_by_group[g];
    size_t gsize = group.indices.size();
    size_t expected = (size_t{1} << gsize) - 1;
    if (masks.size() != expected)
      throw std::invalid_argument("group '" + group.name + "' needs all " +
                                  std::to_string(expected) + " non-empty masks, got " +
                                  std::to_string(masks.size()));
    std::set<std::set<int>> seen;
    for (const auto& [masked, accuracy] : masks)
      if (!seen.insert(masked).second) throw std::invalid_argument("duplicate mask");

    const long long n_i = 1LL << (gsize - 1);
    for (int i : group.indices) {
      Rational sum;
      for (const auto& [masked, accuracy] : masks)
        if (masked.count(i)) sum += (accuracy - table.accu_orig) / denom;
      out.push_back({i, group.name, sum / Rational(n_i)});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const IclContribution& x, const IclContribution& y) {
              return x.example_index < y.example_index;
            });
  return out;
}

IclAccuracyTable icl_table_from_json(const nlohmann::json& j) {
  IclAccuracyTable t;
  t.accu_orig = rational_from_json(j.at("accu_orig"), "accu_orig");
  t.accu_icl = rational_from_json(j.at("accu_icl"), "accu_icl");
  for (const auto& m : j.at("masks")) {
    IclMask mask;
    for (const auto& idx : m.at("masked")) mask.masked.push_back(idx.get<int>());
    mask.accuracy = rational_from_json(m.at("accuracy"), "mask accuracy");
    t.masks.push_back(std::move(mask));
  }
  if (j.contains("similar_indices"))
    t.similar_indices = j.at("similar_indices").get<std::vector<int>>();
  if (j.contains("random_indices"))
    t.random_indices = j.at("random_indices").get<std::vector<int>>();
  return t;
}

nlohmann::json contributions_to_json(const std::vector<IclContribution>& cs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cs) {
    nlohmann::json j;
    j["example_index"] = c.example_index;
    j["group"] = c.group;
    j["c_i"] = c.c.str();
    arr.push_back(std::move(j));
  }
  return arr;
}

namespace {

constexpr long long kProbeLo = 81, kProbeHi = 728;  // three base-9 digits

long long replace_digit(long long value, int pos, std::mt19937_64& rng) {
  DigitString ds = to_digits(static_cast<unsigned long long>(value), 9);
  int old = ds.digits[static_cast<size_t>(pos)];
  int fresh;
  do {
    fresh = pos == 0 ? 1 + static_cast<int>(bounded(rng, 8)) : static_cast<int>(bounded(rng, 9));
  } while (fresh == old);
  ds.digits[static_cast<size_t>(pos)] = fresh;
  return static_cast<long long>(from_digits(ds));
}

}  // namespace

std::vector<IclExample> build_icl_probe(long long a, long long b, int k_similar, int k_random,
                                        std::uint64_t seed, bool single_operand) {
  if (a < kProbeLo || a > kProbeHi || b < kProbeLo || b > kProbeHi)
    throw std::invalid_argument("probe pair must be three base-9 digits per operand");
  if (k_similar < 0 || k_random < 0) throw std::invalid_argument("negative example count");

  std::mt19937_64 rng(seed);
  std::set<GridPoint> used{{a, b}};
  std::vector<IclExample> out;

  auto render = [&](long long ea, long long eb, const char* group) {
    Problem p = make_problem(TaskKind::base_addition(9), static_cast<unsigned long long>(ea),
                             static_cast<unsigned long long>(eb));
    IOPair pair = emit(p, TraceFormat::Scratchpad);
    out.push_back({ea, eb, group, pair.input, pair.output});
  };

  for (int k = 0; k < k_similar; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      int pos = static_cast<int>(bounded(rng, 3));
      long long ea = replace_digit(a, pos, rng);
      long long eb = single_operand ? b : replace_digit(b, pos, rng);
      if (used.insert({ea, eb}).second) {
        render(ea, eb, "similar");
        placed = true;
      }
    }
    if (!placed) throw std::invalid_argument("insufficient distinct similar pairs");
  }

  const long long span = kProbeHi - kProbeLo + 1;
  if (static_cast<long long>(used.size()) + k_random > span * span)
    throw std::invalid_argument("insufficient distinct random pairs");
  for (int k = 0; k < k_random; ++k) {
    for (;;) {
      long long ea = kProbeLo + static_cast<long long>(bounded(rng, static_cast<uint64_t>(span)));
      long long eb = kProbeLo + static_cast<long long>(bounded(rng, static_cast<uint64_t>(span)));
      if (used.insert({ea, eb}).second) {
        render(ea, eb, "random");
        break;
      }
    }
  }
  return out;
}

nlohmann::json icl_examples_to_json(const std::vector<IclExample>& examples) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : examples) {
    nlohmann::json j;
    j["a"] = e.a;
    j["b"] = e.b;
    j["group"] = e.group;
    j["input"] = e.input;
    j["output"] = e.output;
    arr.push_back(std::move(j));
  }
  return arr;
}

// ------------------------------------------------------------ hole predictors

PredictionGrid coverage_predict(const SplitResult& split, int base) {
  UnitStepUnion covered;
  for (const auto& [a, b] : split.train)
    add_to_union(covered, unit_steps(static_cast<unsigned long long>(a),
                                     static_cast<unsigned long long>(b), base));

  std::vector<GridPoint> test = split.test;
  std::sort(test.begin(), test.end());
  PredictionGrid grid;
  grid.rows.reserve(test.size());
  for (const auto& [a, b] : test) {
    auto steps = unit_steps(static_cast<unsigned long long>(a),
                            static_cast<unsigned long long>(b), base);
    auto missing = first_uncovered(steps, covered);
    if (missing)
      grid.rows.push_back({a, b, false, unit_step_label(*missing)});
    else
      grid.rows.push_back({a, b, true, ""});
  }
  return grid;
}

PredictionGrid proximity_predict(const SplitResult& split, double radius, Metric metric) {
  if (split.train.empty()) throw std::invalid_argument("proximity needs a non-empty training set");
  std::vector<GridPoint> test = split.test;
  std::sort(test.begin(), test.end());

  PredictionGrid grid;
  grid.rows.reserve(test.size());
  for (const auto& [a, b] : test) {
    long long best_cheb = 0;
    long long best_sq = 0;
    bool first = true;
    for (const auto& [ta, tb] : split.train) {
      long long dx = a - ta, dy = b - tb;
      long long ax = dx < 0 ? -dx : dx, ay = dy < 0 ? -dy : dy;
      if (metric == Metric::Chebyshev) {
        long long d = std::max(ax, ay);
        if (first || d < best_cheb) best_cheb = d;
      } else {
        long long d = dx * dx + dy * dy;
        if (first || d < best_sq) best_sq = d;
      }
      first = false;
    }
    if (metric == Metric::Chebyshev) {
      grid.rows.push_back({a, b, static_cast<double>(best_cheb) <= radius,
                           std::to_string(best_cheb)});
    } else {
      double d = std::sqrt(static_cast<double>(best_sq));
      grid.rows.push_back({a, b, d <= radius, fixed6(d)});
    }
  }
  return grid;
}

std::string predictions_to_csv(const PredictionGrid& grid) {
  std::string out = "a,b,predicted,witness\n";
  for (const auto& r : grid.rows) {
    out += std::to_string(r.a);
    out += ',';
    out += std::to_string(r.b);
    out += ',';
    out += r.success ? "SUCCESS" : "FAIL";
    out += ',';
    out += r.witness;
    out += '\n';
  }
  return out;
}

Agreement agreement(const PredictionGrid& predicted, const AccuracyGrid& observed,
                    double threshold) {
  std::map<GridPoint, double> acc;
  for (const auto& c : observed.cells) acc[{c.a, c.b}] = c.accuracy;

  Agreement out;
  for (const auto& r : predicted.rows) {
    auto it = acc.find({r.a, r.b});
    if (it == acc.end())
      throw std::invalid_argument("predicted point (" + std::to_string(r.a) + "," +
                                  std::to_string(r.b) + ") has no observed accuracy");
    bool obs_success = it->second >= threshold;
    if (!r.success && !obs_success)
      ++out.fail_fail;
    else if (!r.success && obs_success)
      ++out.fail_success;
    else if (r.success && !obs_success)
      ++out.success_fail;
    else
      ++out.success_success;
  }
  long long predicted_fail = out.fail_fail + out.fail_success;
  long long observed_fail = out.fail_fail + out.success_fail;
  if (predicted_fail > 0)
    out.precision = static_cast<double>(out.fail_fail) / static_cast<double>(predicted_fail);
  if (observed_fail > 0)
    out.recall = static_cast<double>(out.fail_fail) / static_cast<double>(observed_fail);
  return out;
}

nlohmann::json agreement_to_json(const Agreement& a) {
  nlohmann::json j;
  j["fail_fail"] = a.fail_fail;
  j["fail_success"] = a.fail_success;
  j["success_fail"] = a.success_fail;
  j["success_success"] = a.success_success;
  if (a.precision)
    j["precision"] = *a.precision;
  else
    j["precision"] = nullptr;
  if (a.recall)
    j["recall"] = *a.recall;
  else
    j["recall"] = nullptr;
  return j;
}

// ---------------------------------------------------------------------- SVG

namespace {

// Three-stop red/yellow/green ramp; accuracy outside [0,1] is clamped.
std::string ramp_color(double t) {
  t = std::min(1.0, std::max(0.0, t));
  const int lo[3] = {165, 0, 38};
  const int mid[3] = {255, 255, 191};
  const int hi[3] = {0, 104, 55};
  int rgb[3];
  for (int k = 0; k < 3; ++k) {
    double v = t < 0.5 ? lo[k] + (mid[k] - lo[k]) * (t * 2.0)
                       : mid[k] + (hi[k] - mid[k]) * (t * 2.0 - 1.0);
    rgb[k] = static_cast<int>(std::lround(v));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::string emit_heatmap(const AccuracyGrid& grid, const std::vector<SquareSpec>& squares) {
  long long a_min = 0, a_max = 0, b_min = 0, b_max = 0;
  bool first = true;
  auto extend = [&](long long a, long long b) {
    if (first) {
      a_min = a_max = a;
      b_min = b_max = b;
      first = false;
    } else {
      a_min = std::min(a_min, a);
      a_max = std::max(a_max, a);
      b_min = std::min(b_min, b);
      b_max = std::max(b_max, b);
    }
  };
  for (const auto& c : grid.cells) extend(c.a, c.b);
  for (const auto& p : grid.missing) extend(p.first, p.second);
  if (first) {
    a_max = b_max = -1;  // empty grid: 0x0 canvas
  }

  const long long cell = 8;
  long long width = (a_max - a_min + 1) * cell;
  long long height = (b_max - b_min + 1) * cell;
  auto x_of = [&](long long a) { return (a - a_min) * cell; };
  auto y_of = [&](long long b) { return (b_max - b) * cell; };  // b grows upward

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  for (const auto& c : grid.cells) {
    svg += "<rect x=\"" + std::to_string(x_of(c.a)) + "\" y=\"" + std::to_string(y_of(c.b)) +
           "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
           "\" fill=\"" + ramp_color(c.accuracy) + "\"";
    if (c.partition == "train") svg += " opacity=\"0.45\"";
    svg += "/>\n";
  }
  for (const auto& s : squares) {
    long long x = x_of(s.a_lo());
    long long y = y_of(s.b_hi());
    long long w = (s.a_hi() - s.a_lo() + 1) * cell;
    long long h = (s.b_hi() - s.b_lo() + 1) * cell;
    svg += "<rect class=\"held-out\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
           "\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
           "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace rulebench
