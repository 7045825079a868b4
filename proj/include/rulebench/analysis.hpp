#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rulebench/rational.hpp"
#include "rulebench/split.hpp"
#include "rulebench/verify.hpp"

// Quantitative artifacts over scored generations: per-point accuracy grids,
// length-generalization tables, in-context-example contribution scores, and
// the two analytic hole predictors (unit-step coverage and train proximity).

namespace rulebench {

// ------------------------------------------------------------ accuracy grid

struct AccuracyCell {
  long long a = 0, b = 0;
  std::string partition;  // "train" | "test"
  double accuracy = 0.0;
};

struct AccuracyGrid {
  std::vector<AccuracyCell> cells;  // row-major by (a, b)
  std::vector<GridPoint> missing;   // split points with no scored record
};

// Every scored point must lie in the split; duplicate points raise.
AccuracyGrid accuracy_grid(const std::vector<ScoredProblem>& scored, const SplitResult& split);

std::string grid_to_csv(const AccuracyGrid& grid);
AccuracyGrid grid_from_csv(std::string_view csv);

// ------------------------------------------------------------- length table

struct LengthObservation {
  int digits = 0;
  int run = 0;
  double accuracy = 0.0;
};

struct LengthRow {
  int digits = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation across runs
  int runs = 0;
};

struct LengthTable {
  std::vector<LengthRow> rows;            // ascending by digits
  std::vector<int> single_run_lengths;    // lengths backed by one run only
};

LengthTable length_table(const std::vector<LengthObservation>& observations);
std::string length_table_to_csv(const LengthTable& table);

// Buckets one run of scored records by max operand digit count; accuracy per
// bucket is the mean per-problem accuracy.
std::vector<LengthObservation> bucket_scored_by_length(const std::vector<ScoredProblem>& scored,
                                                       int run);

// ------------------------------------------------- in-context contributions

struct IclMask {
  std::vector<int> masked;  // example indices removed from the prompt
  Rational accuracy;
};

struct IclAccuracyTable {
  Rational accu_orig;  // no in-context examples
  Rational accu_icl;   // all examples present
  std::vector<IclMask> masks;
  std::vector<int> similar_indices = {0, 1, 2, 3, 4};
  std::vector<int> random_indices = {5, 6, 7, 8, 9};
};

struct IclContribution {
  int example_index = 0;
  std::string group;  // "similar" | "random"
  Rational c;
};

// c_i = (1/N_i) * sum over masks m containing i of
//       (accu_m - accu_orig) / (accu_icl - accu_orig),
// with masks ranging over the non-empty subsets of i's group and
// N_i = 2^(g-1) for group size g. Requires the full mask enumeration per
// group; accu_icl == accu_orig raises.
std::vector<IclContribution> icl_contribution(const IclAccuracyTable& table);

IclAccuracyTable icl_table_from_json(const nlohmann::json& j);
nlohmann::json contributions_to_json(const std::vector<IclContribution>& cs);

struct IclExample {
  long long a = 0, b = 0;
  std::string group;  // "similar" | "random"
  std::string input, output;
};

// Few-shot probe set around one base-9 three-digit pair: k_similar examples
// differ from the pair in exactly one digit position (replaced in both
// operands by default, in the first only when single_operand), k_random are
// uniform distinct pairs. All are rendered in scratchpad format.
std::vector<IclExample> build_icl_probe(long long a, long long b, int k_similar, int k_random,
                                        std::uint64_t seed, bool single_operand = false);
nlohmann::json icl_examples_to_json(const std::vector<IclExample>& examples);

// ----------------------------------------------------------- hole predictors

struct Prediction {
  long long a = 0, b = 0;
  bool success = false;
  std::string witness;  // missing unit step, or distance to nearest train point
};

struct PredictionGrid {
  std::vector<Prediction> rows;  // row-major over the split's test points
};

// SUCCESS iff every unit step of a+b appears in the union of unit steps over
// the training points; otherwise FAIL with one missing step as witness.
PredictionGrid coverage_predict(const SplitResult& split, int base);

enum class Metric { Chebyshev, Euclidean };

// SUCCESS iff the nearest training point is within `radius` under the metric;
// the witness is always the nearest-train distance.
PredictionGrid proximity_predict(const SplitResult& split, double radius, Metric metric);

std::string predictions_to_csv(const PredictionGrid& grid);

struct Agreement {
  long long fail_fail = 0;        // predicted FAIL, observed FAIL
  long long fail_success = 0;     // predicted FAIL, observed SUCCESS
  long long success_fail = 0;
  long long success_success = 0;
  std::optional<double> precision;  // of FAIL prediction
  std::optional<double> recall;
};

// Observed SUCCESS iff accuracy >= threshold; every predicted point must have
// an observed cell.
Agreement agreement(const PredictionGrid& predicted, const AccuracyGrid& observed,
                    double threshold);
nlohmann::json agreement_to_json(const Agreement& a);

// ------------------------------------------------------------------ heatmap

// Deterministic SVG: one colored cell per grid point, train cells dimmed,
// one outline per held-out square.
std::string emit_heatmap(const AccuracyGrid& grid, const std::vector<SquareSpec>& squares);

}  // namespace rulebench
