#include "rulebench/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include "rulebench/jsonl.hpp"
#include "rulebench/rng.hpp"

namespace rulebench {

namespace {

// Dinic max-flow on a small integer network; deterministic for a fixed
// edge insertion order.
struct MaxFlow {
  struct Edge {
    int to;
    long long cap;
    int rev;
  };
  std::vector<std::vector<Edge>> g;
  std::vector<int> level, iter;

  explicit MaxFlow(int n) : g(n), level(n), iter(n) {}

  void add_edge(int from, int to, long long cap) {
    g[from].push_back({to, cap, static_cast<int>(g[to].size())});
    g[to].push_back({from, 0, static_cast<int>(g[from].size()) - 1});
  }

  bool bfs(int s, int t) {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const auto& e : g[v])
        if (e.cap > 0 && level[e.to] < 0) {
          level[e.to] = level[v] + 1;
          q.push(e.to);
        }
    }
    return level[t] >= 0;
  }

  long long dfs(int v, int t, long long f) {
    if (v == t) return f;
    for (int& i = iter[v]; i < static_cast<int>(g[v].size()); ++i) {
      Edge& e = g[v][i];
      if (e.cap > 0 && level[v] < level[e.to]) {
        long long d = dfs(e.to, t, std::min(f, e.cap));
        if (d > 0) {
          e.cap -= d;
          g[e.to][e.rev].cap += d;
          return d;
        }
      }
    }
    return 0;
  }

  long long run(int s, int t) {
    long long flow = 0;
    while (bfs(s, t)) {
      std::fill(iter.begin(), iter.end(), 0);
      long long f;
      while ((f = dfs(s, t, std::numeric_limits<long long>::max())) > 0) flow += f;
    }
    return flow;
  }
};

std::string printable_token(unsigned char c) {
  if (c >= 0x20 && c < 0x7f) return std::string(1, static_cast<char>(c));
  static const char* hex = "0123456789abcdef";
  return std::string("\\x") + hex[c >> 4] + hex[c & 0xf];
}

nlohmann::json domain_json(const GridDomain& d) {
  return {{"a_max", d.a_max},
          {"a_min", d.a_min},
          {"b_max", d.b_max},
          {"b_min", d.b_min},
          {"chicken_rabbit", d.chicken_rabbit}};
}

GridDomain domain_from_json(const nlohmann::json& j) {
  GridDomain d;
  d.a_min = j.value("a_min", 0ll);
  d.a_max = j.value("a_max", 99ll);
  d.b_min = j.value("b_min", 0ll);
  d.b_max = j.value("b_max", 99ll);
  d.chicken_rabbit = j.value("chicken_rabbit", false);
  return d;
}

}  // namespace

bool GridDomain::contains(long long a, long long b) const {
  if (a < a_min || a > a_max || b < b_min || b > b_max) return false;
  if (chicken_rabbit) return a % 2 == 0 && 2 * b <= a && a <= 4 * b;
  return true;
}

std::vector<GridPoint> GridDomain::points() const {
  std::vector<GridPoint> pts;
  for (long long a = a_min; a <= a_max; ++a)
    for (long long b = b_min; b <= b_max; ++b)
      if (contains(a, b)) pts.push_back({a, b});
  return pts;
}

size_t GridDomain::size() const { return points().size(); }

GridDomain GridDomain::square(long long lo, long long hi) {
  if (lo > hi) throw std::invalid_argument("bad domain range");
  GridDomain d;
  d.a_min = d.b_min = lo;
  d.a_max = d.b_max = hi;
  return d;
}

GridDomain GridDomain::chicken_rabbit_domain(long long b_max) {
  if (b_max < 0) throw std::invalid_argument("b_max must be non-negative");
  GridDomain d;
  d.a_min = 0;
  d.a_max = 4 * b_max;
  d.b_min = 0;
  d.b_max = b_max;
  d.chicken_rabbit = true;
  return d;
}

GridDomain GridDomain::canonical(const TaskKind& task) {
  switch (task.id) {
    case TaskId::Addition:
    case TaskId::BaseAddition:
    case TaskId::LinearRegression:
      return square(0, 99);
    case TaskId::ModularAddition:
      return square(0, task.modulus - 1);
    case TaskId::ChickenRabbit:
      return chicken_rabbit_domain(99);
    case TaskId::LastLetterConcat:
      throw std::invalid_argument("last-letter has no operand grid");
  }
  throw std::logic_error("unhandled task");
}

bool SquareSpec::contains(long long a, long long b) const {
  return a >= a_lo() && a <= a_hi() && b >= b_lo() && b <= b_hi();
}

SplitResult leave_square_out(const GridDomain& domain, const std::vector<SquareSpec>& squares) {
  for (const auto& sq : squares) {
    if (sq.side < 0) throw std::invalid_argument("square side must be non-negative");
    if (sq.side % 2 != 0) throw std::invalid_argument("square side must be even");
  }

  SplitResult out;
  out.squares = squares;
  std::vector<size_t> contribution(squares.size(), 0);
  for (const auto& [a, b] : domain.points()) {
    bool held_out = false;
    for (size_t i = 0; i < squares.size(); ++i)
      if (squares[i].contains(a, b)) {
        held_out = true;
        ++contribution[i];
      }
    (held_out ? out.test : out.train).push_back({a, b});
  }
  for (size_t i = 0; i < squares.size(); ++i)
    if (contribution[i] == 0)
      out.warnings.push_back("square centered at (" + std::to_string(squares[i].a_center) + "," +
                             std::to_string(squares[i].b_center) + ") side " +
                             std::to_string(squares[i].side) + " holds no domain points");

  nlohmann::json sq_json = nlohmann::json::array();
  for (const auto& sq : squares)
    sq_json.push_back({{"a_center", sq.a_center}, {"b_center", sq.b_center}, {"side", sq.side}});
  out.provenance = {{"command", "split"},
                    {"domain", domain_json(domain)},
                    {"method", "leave-square-out"},
                    {"squares", sq_json},
                    {"test_count", out.test.size()},
                    {"train_count", out.train.size()}};
  return out;
}

SplitResult random_split(const GridDomain& domain, double ratio, unsigned long long seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("ratio must be in [0,1]");
  std::vector<GridPoint> pts = domain.points();
  size_t n_train = static_cast<size_t>(std::llround(ratio * static_cast<double>(pts.size())));

  // Partial Fisher-Yates with platform-stable draws.
  std::mt19937_64 rng(seed);
  std::vector<size_t> idx(pts.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (size_t i = 0; i < n_train; ++i) {
    size_t j = i + static_cast<size_t>(bounded(rng, idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<bool> in_train(pts.size(), false);
  for (size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;

  SplitResult out;
  for (size_t i = 0; i < pts.size(); ++i) (in_train[i] ? out.train : out.test).push_back(pts[i]);
  out.provenance = {{"command", "split"},
                    {"domain", domain_json(domain)},
                    {"method", "random"},
                    {"ratio", ratio},
                    {"seed", seed},
                    {"test_count", out.test.size()},
                    {"train_count", out.train.size()}};
  return out;
}

CoverageReport check_token_coverage(const SplitResult& split, const std::vector<IOPair>& corpus) {
  std::map<GridPoint, bool> is_test;
  for (const auto& p : split.train) is_test[p] = false;
  for (const auto& p : split.test) is_test[p] = true;

  std::array<bool, 256> in_train{};
  std::vector<const IOPair*> test_records;
  for (const auto& rec : corpus) {
    if (!rec.a || !rec.b) throw std::invalid_argument("corpus record lacks grid coordinates");
    auto it = is_test.find({static_cast<long long>(*rec.a), static_cast<long long>(*rec.b)});
    if (it == is_test.end())
      throw std::invalid_argument("corpus record (" + std::to_string(*rec.a) + "," +
                                  std::to_string(*rec.b) + ") is not a split point");
    if (it->second) {
      test_records.push_back(&rec);
    } else {
      for (unsigned char c : rec.input) in_train[c] = true;
      for (unsigned char c : rec.output) in_train[c] = true;
    }
  }

  std::set<unsigned char> missing;
  for (const IOPair* rec : test_records) {
    for (unsigned char c : rec->input)
      if (!in_train[c]) missing.insert(c);
    for (unsigned char c : rec->output)
      if (!in_train[c]) missing.insert(c);
  }

  CoverageReport report;
  report.covered = missing.empty();
  for (unsigned char c : missing) report.missing.push_back(printable_token(c));
  return report;
}

std::vector<GridPoint> upsample_balance(const std::vector<GridPoint>& train) {
  if (train.empty()) return {};

  long long a_min = train[0].first, a_max = train[0].first;
  long long b_min = train[0].second, b_max = train[0].second;
  std::map<GridPoint, long long> counts;
  for (const auto& p : train) {
    ++counts[p];
    a_min = std::min(a_min, p.first);
    a_max = std::max(a_max, p.first);
    b_min = std::min(b_min, p.second);
    b_max = std::max(b_max, p.second);
  }
  const long long n_rows = a_max - a_min + 1, n_cols = b_max - b_min + 1;
  if (n_rows != n_cols)
    throw std::invalid_argument(
        "cannot balance: the train bounding box has " + std::to_string(n_rows) + " a-values but " +
        std::to_string(n_cols) + " b-values, so equal marginals do not exist");

  std::vector<long long> row_count(n_rows, 0), col_count(n_cols, 0);
  for (const auto& [p, c] : counts) {
    row_count[p.first - a_min] += c;
    col_count[p.second - b_min] += c;
  }
  for (long long r = 0; r < n_rows; ++r)
    if (row_count[r] == 0)
      throw std::invalid_argument("cannot balance: a=" + std::to_string(a_min + r) +
                                  " has no occurrences");
  for (long long c = 0; c < n_cols; ++c)
    if (col_count[c] == 0)
      throw std::invalid_argument("cannot balance: b=" + std::to_string(b_min + c) +
                                  " has no occurrences");

  long long level = std::max(*std::max_element(row_count.begin(), row_count.end()),
                             *std::max_element(col_count.begin(), col_count.end()));
  const long long total = static_cast<long long>(train.size());
  const long long level_cap = level + total + 1;

  // Find the smallest per-marginal level with an integral duplication plan:
  // route (level - row_count) extra units per row into present cells so each
  // column also reaches `level`.
  for (; level <= level_cap; ++level) {
    const int source = 0, sink = 1;
    const int row0 = 2, col0 = 2 + static_cast<int>(n_rows);
    MaxFlow flow(2 + static_cast<int>(n_rows + n_cols));
    long long need = 0;
    for (long long r = 0; r < n_rows; ++r) {
      flow.add_edge(source, row0 + static_cast<int>(r), level - row_count[r]);
      need += level - row_count[r];
    }
    for (long long c = 0; c < n_cols; ++c)
      flow.add_edge(col0 + static_cast<int>(c), sink, level - col_count[c]);
    // Remember cell edges to read the plan back.
    std::vector<std::pair<GridPoint, std::pair<int, int>>> cell_edges;
    for (const auto& [p, c] : counts) {
      int from = row0 + static_cast<int>(p.first - a_min);
      cell_edges.push_back({p, {from, static_cast<int>(flow.g[from].size())}});
      flow.add_edge(from, col0 + static_cast<int>(p.second - b_min),
                    std::numeric_limits<long long>::max() / 4);
    }
    if (flow.run(source, sink) != need) continue;

    std::map<GridPoint, long long> final_counts = counts;
    for (const auto& [p, loc] : cell_edges) {
      const MaxFlow::Edge& e = flow.g[loc.first][loc.second];
      long long pushed = std::numeric_limits<long long>::max() / 4 - e.cap;
      final_counts[p] += pushed;
    }
    std::vector<GridPoint> out;
    for (const auto& [p, c] : final_counts)
      for (long long i = 0; i < c; ++i) out.push_back(p);
    return out;
  }
  throw std::invalid_argument("cannot balance: no feasible marginal level");
}

void write_split(const SplitResult& split, const std::string& path) {
  // Balanced splits repeat train points; the multiplicity is kept as "count".
  std::map<GridPoint, std::pair<const char*, long long>> partition;
  for (const auto& p : split.train) {
    auto& e = partition[p];
    e.first = "train";
    ++e.second;
  }
  for (const auto& p : split.test) {
    auto& e = partition[p];
    e.first = "test";
    ++e.second;
  }
  std::vector<nlohmann::json> rows;
  rows.reserve(partition.size());
  for (const auto& [p, e] : partition) {
    nlohmann::json row = {{"a", p.first}, {"b", p.second}, {"partition", e.first}};
    if (e.second > 1) row["count"] = e.second;
    rows.push_back(std::move(row));
  }
  write_jsonl(path, rows);
  nlohmann::json sidecar = split.provenance;
  if (split.token_coverage) sidecar["token_coverage"] = *split.token_coverage;
  if (!split.warnings.empty()) sidecar["warnings"] = split.warnings;
  write_text_file(path + ".provenance.json", sidecar.dump(2) + "\n");
}

SplitResult read_split(const std::string& path) {
  SplitResult out;
  for (const auto& j : read_jsonl(path)) {
    GridPoint p{j.at("a").get<long long>(), j.at("b").get<long long>()};
    std::string label = j.at("partition").get<std::string>();
    long long count = j.contains("count") ? j.at("count").get<long long>() : 1;
    if (count < 1) throw std::invalid_argument("non-positive point count");
    if (label == "train")
      out.train.insert(out.train.end(), static_cast<size_t>(count), p);
    else if (label == "test")
      out.test.insert(out.test.end(), static_cast<size_t>(count), p);
    else
      throw std::invalid_argument("unknown partition label: " + label);
  }
  try {
    out.provenance = nlohmann::json::parse(read_text_file(path + ".provenance.json"));
    if (out.provenance.contains("squares"))
      for (const auto& sq : out.provenance.at("squares"))
        out.squares.push_back(SquareSpec{sq.at("a_center").get<long long>(),
                                         sq.at("b_center").get<long long>(),
                                         sq.at("side").get<long long>()});
    if (out.provenance.contains("token_coverage"))
      out.token_coverage = out.provenance.at("token_coverage").get<bool>();
  } catch (const std::runtime_error&) {
    // Sidecar is optional when reading.
  }
  return out;
}

}  // namespace rulebench
