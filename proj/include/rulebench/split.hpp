#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rulebench/corpus.hpp"
#include "rulebench/task.hpp"

// Train/test partitions of operand grids: contiguous held-out squares,
// seeded random splits, character coverage checks, and marginal balancing.

namespace rulebench {

using GridPoint = std::pair<long long, long long>;

struct GridDomain {
  long long a_min = 0, a_max = 99;
  long long b_min = 0, b_max = 99;
  // ChickenRabbit validity: a even and 2b <= a <= 4b.
  bool chicken_rabbit = false;

  bool contains(long long a, long long b) const;
  std::vector<GridPoint> points() const;  // row-major, a outer
  size_t size() const;

  static GridDomain square(long long lo, long long hi);
  static GridDomain chicken_rabbit_domain(long long b_max);
  // [0,99] for addition-like tasks, [0,modulus-1] for modular addition, legs/heads
  // grid for chicken-rabbit.
  static GridDomain canonical(const TaskKind& task);
};

// Held-out square: inclusive bounds [center - side/2, center + side/2] on both
// axes; side must be even and non-negative.
struct SquareSpec {
  long long a_center = 0, b_center = 0;
  long long side = 0;

  long long a_lo() const { return a_center - side / 2; }
  long long a_hi() const { return a_center + side / 2; }
  long long b_lo() const { return b_center - side / 2; }
  long long b_hi() const { return b_center + side / 2; }
  bool contains(long long a, long long b) const;
};

struct SplitResult {
  std::vector<GridPoint> train, test;  // row-major within each partition
  std::vector<SquareSpec> squares;     // empty for random splits
  nlohmann::json provenance;
  std::optional<bool> token_coverage;
  std::vector<std::string> warnings;   // e.g. squares that miss the domain
};

// Test set = domain points inside any square (inclusive bounds). A square
// with side l therefore holds (l+1)^2 points of a full grid. Squares fully
// outside the domain contribute nothing and add a warning. Odd side -> error.
SplitResult leave_square_out(const GridDomain& domain, const std::vector<SquareSpec>& squares);

// |train| = round(ratio * |domain|), drawn uniformly without replacement.
SplitResult random_split(const GridDomain& domain, double ratio, unsigned long long seed);

struct CoverageReport {
  bool covered = true;
  std::vector<std::string> missing;  // test-only symbols, as printable tokens
};

// Character-level closure check: every byte of every test record's input and
// output must occur in some train record. Corpus records are matched to
// partitions by (a, b).
CoverageReport check_token_coverage(const SplitResult& split, const std::vector<IOPair>& corpus);

// Duplicates training points until every a-marginal and b-marginal over the
// train bounding box is equal. The common level is the smallest feasible one
// (it can exceed the pre-balance maximum when deficient rows and columns only
// meet inside the held-out region). A bounding-box value with no occurrences
// at all cannot be balanced and raises std::invalid_argument naming it.
std::vector<GridPoint> upsample_balance(const std::vector<GridPoint>& train);

// JSONL rows {"a","b","partition"} in domain row-major order + sidecar.
void write_split(const SplitResult& split, const std::string& path);
SplitResult read_split(const std::string& path);

}  // namespace rulebench
