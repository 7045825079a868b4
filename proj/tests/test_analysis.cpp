#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rulebench/analysis.hpp"

using namespace rulebench;

namespace {

ScoredProblem scored_point(long long a, long long b, double accuracy) {
  ScoredProblem sp;
  sp.record.a = static_cast<unsigned long long>(a);
  sp.record.b = static_cast<unsigned long long>(b);
  sp.n_samples = 10;
  sp.n_correct = static_cast<long long>(accuracy * 10 + 0.5);
  sp.accuracy = accuracy;
  return sp;
}

// Independent digit walk for the coverage cross-check.
std::vector<UnitStep> walk_steps(long long a, long long b) {
  std::vector<UnitStep> out;
  int carry = 0;
  while (a > 0 || b > 0) {
    int d1 = static_cast<int>(a % 10);
    int d2 = static_cast<int>(b % 10);
    out.push_back({d1, d2, carry});
    carry = (d1 + d2 + carry) / 10;
    a /= 10;
    b /= 10;
  }
  if (out.empty()) out.push_back({0, 0, 0});
  if (carry) out.push_back({0, 0, 1});
  return out;
}

bool covered_naive(long long a, long long b, const std::map<UnitStep, int>& mult) {
  std::map<UnitStep, int> need;
  for (const auto& s : walk_steps(a, b)) ++need[s];
  for (const auto& [s, n] : need) {
    auto it = mult.find(s);
    if (it == mult.end() || it->second < n) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("rational arithmetic") {
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(1, 2) - Rational(1, 2) == Rational(0));
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(3, -6) == Rational(-1, 2));
  CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
  CHECK(Rational(1, 2) / Rational(1, 4) == Rational(2));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 2) < Rational(1, 3));
  CHECK(Rational(7).str() == "7");
  CHECK(Rational(1, 4).str() == "1/4");
  CHECK((-Rational(1, 4)).str() == "-1/4");
  CHECK(Rational(1, 2).to_double() == doctest::Approx(0.5));
  CHECK_THROWS_AS(Rational(1, 2) / Rational(0), std::domain_error);
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("rational parsing") {
  CHECK(Rational::parse("7") == Rational(7));
  CHECK(Rational::parse("-7") == Rational(-7));
  CHECK(Rational::parse("1/2") == Rational(1, 2));
  CHECK(Rational::parse("-3/9") == Rational(-1, 3));
  CHECK(Rational::parse("0.5") == Rational(1, 2));
  CHECK(Rational::parse("-3.25") == Rational(-13, 4));
  CHECK(Rational::parse("0.84") == Rational(21, 25));
  CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(Rational::parse("x"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::parse("1/0"), std::domain_error);
}

TEST_CASE("rational overflow is detected") {
  Rational big(INT64_MAX, 1);
  CHECK_THROWS_AS(big + big, std::overflow_error);
  CHECK_THROWS_AS(big * Rational(2), std::overflow_error);
  // intermediate products above 64 bits are fine when the result reduces
  CHECK(Rational(1LL << 32, 3) * Rational(3, 1LL << 32) == Rational(1));
}

TEST_CASE("accuracy grid partitions and order") {
  GridDomain dom = GridDomain::square(0, 3);
  SplitResult split = leave_square_out(dom, {{2, 2, 0}});
  REQUIRE(split.test.size() == 1);

  std::vector<ScoredProblem> scored;
  for (long long a = 0; a <= 3; ++a)
    for (long long b = 0; b <= 3; ++b)
      if (!(a == 3 && b == 3)) scored.push_back(scored_point(a, b, a == 2 && b == 2 ? 0.2 : 1.0));

  AccuracyGrid grid = accuracy_grid(scored, split);
  CHECK(grid.cells.size() == 15);
  REQUIRE(grid.missing.size() == 1);
  CHECK(grid.missing[0] == GridPoint{3, 3});
  bool sorted = std::is_sorted(grid.cells.begin(), grid.cells.end(),
                               [](const AccuracyCell& x, const AccuracyCell& y) {
                                 return std::pair{x.a, x.b} < std::pair{y.a, y.b};
                               });
  CHECK(sorted);
  for (const auto& c : grid.cells) {
    if (c.a == 2 && c.b == 2) {
      CHECK(c.partition == "test");
      CHECK(c.accuracy == doctest::Approx(0.2));
    } else {
      CHECK(c.partition == "train");
    }
  }

  // a scored point outside the split is rejected
  std::vector<ScoredProblem> stray = scored;
  stray.push_back(scored_point(9, 9, 1.0));
  CHECK_THROWS_AS(accuracy_grid(stray, split), std::invalid_argument);
  // so is a duplicate
  std::vector<ScoredProblem> dup = scored;
  dup.push_back(scored_point(0, 0, 1.0));
  CHECK_THROWS_AS(accuracy_grid(dup, split), std::invalid_argument);
}

TEST_CASE("accuracy grid csv round trip") {
  GridDomain dom = GridDomain::square(0, 1);
  SplitResult split = leave_square_out(dom, {{1, 1, 0}});
  std::vector<ScoredProblem> scored = {scored_point(0, 0, 1.0), scored_point(0, 1, 0.5),
                                       scored_point(1, 0, 1.0), scored_point(1, 1, 0.0)};
  AccuracyGrid grid = accuracy_grid(scored, split);
  std::string csv = grid_to_csv(grid);
  CHECK(csv.substr(0, 23) == "a,b,partition,accuracy\n");
  CHECK(csv.find("0,1,train,0.500000\n") != std::string::npos);

  AccuracyGrid back = grid_from_csv(csv);
  REQUIRE(back.cells.size() == grid.cells.size());
  for (size_t i = 0; i < back.cells.size(); ++i) {
    CHECK(back.cells[i].a == grid.cells[i].a);
    CHECK(back.cells[i].partition == grid.cells[i].partition);
    CHECK(back.cells[i].accuracy == doctest::Approx(grid.cells[i].accuracy));
  }
  // serialization is a fixed point
  CHECK(grid_to_csv(back) == csv);

  CHECK_THROWS_AS(grid_from_csv("nope\n1,2,train,0.5\n"), std::invalid_argument);
}

TEST_CASE("length table") {
  std::vector<LengthObservation> obs = {
      {1, 0, 1.0}, {1, 1, 0.5}, {2, 0, 1.0}, {3, 1, 0.0}, {3, 0, 1.0}};
  LengthTable t = length_table(obs);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].digits == 1);
  CHECK(t.rows[0].mean == doctest::Approx(0.75));
  CHECK(t.rows[0].stddev == doctest::Approx(0.25));
  CHECK(t.rows[0].runs == 2);
  CHECK(t.rows[1].digits == 2);
  CHECK(t.rows[1].runs == 1);
  CHECK(t.rows[2].mean == doctest::Approx(0.5));
  CHECK(t.rows[2].stddev == doctest::Approx(0.5));
  CHECK(t.single_run_lengths == std::vector<int>{2});

  std::string csv = length_table_to_csv(t);
  CHECK(csv.substr(0, 21) == "digits,mean,std,runs\n");
  CHECK(csv.find("1,0.750000,0.250000,2\n") != std::string::npos);

  CHECK_THROWS_AS(length_table({}), std::invalid_argument);
  CHECK_THROWS_AS(length_table({{1, 0, 1.0}, {1, 0, 0.5}}), std::invalid_argument);
}

TEST_CASE("bucketing scored records by operand length") {
  std::vector<ScoredProblem> scored;
  auto with_len = [](long long a, long long b, int la, int lb, double acc) {
    ScoredProblem sp = scored_point(a, b, acc);
    sp.record.len_a = la;
    sp.record.len_b = lb;
    return sp;
  };
  scored.push_back(with_len(5, 3, 1, 1, 1.0));
  scored.push_back(with_len(7, 2, 1, 1, 0.0));
  scored.push_back(with_len(55, 3, 2, 1, 1.0));
  auto obs = bucket_scored_by_length(scored, 4);
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].digits == 1);
  CHECK(obs[0].run == 4);
  CHECK(obs[0].accuracy == doctest::Approx(0.5));
  CHECK(obs[1].digits == 2);
  CHECK(obs[1].accuracy == doctest::Approx(1.0));
}

TEST_CASE("icl contribution on the two-example table") {
  IclAccuracyTable t;
  t.accu_orig = Rational(0);
  t.accu_icl = Rational(1);
  t.similar_indices = {1, 2};
  t.random_indices = {};
  t.masks = {{{1}, Rational(1, 2)}, {{2}, Rational(1, 2)}, {{1, 2}, Rational(0)}};
  auto cs = icl_contribution(t);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].example_index == 1);
  CHECK(cs[0].group == "similar");
  CHECK(cs[0].c == Rational(1, 4));
  CHECK(cs[1].c == Rational(1, 4));
}

TEST_CASE("icl contribution boundary identities") {
  // every mask as good as the full prompt -> contribution 1
  IclAccuracyTable t;
  t.accu_orig = Rational(1, 10);
  t.accu_icl = Rational(9, 10);
  t.similar_indices = {0, 1, 2};
  t.random_indices = {};
  for (int m = 1; m < 8; ++m) {
    IclMask mask;
    for (int i = 0; i < 3; ++i)
      if (m & (1 << i)) mask.masked.push_back(i);
    mask.accuracy = t.accu_icl;
    t.masks.push_back(mask);
  }
  for (const auto& c : icl_contribution(t)) CHECK(c.c == Rational(1));

  for (auto& m : t.masks) m.accuracy = t.accu_orig;
  for (const auto& c : icl_contribution(t)) CHECK(c.c == Rational(0));
}

TEST_CASE("icl contribution is affine invariant") {
  IclAccuracyTable t;
  t.accu_orig = Rational(0);
  t.accu_icl = Rational(1);
  t.similar_indices = {0, 1};
  t.random_indices = {2, 3};
  t.masks = {{{0}, Rational(1, 3)},    {{1}, Rational(2, 3)}, {{0, 1}, Rational(1, 6)},
             {{2}, Rational(3, 4)},    {{3}, Rational(1, 4)}, {{2, 3}, Rational(1, 2)}};
  auto base = icl_contribution(t);
  REQUIRE(base.size() == 4);
  CHECK(base[0].group == "similar");
  CHECK(base[2].group == "random");

  IclAccuracyTable scaled = t;
  auto remap = [](const Rational& r) { return r * Rational(3, 5) + Rational(1, 7); };
  scaled.accu_orig = remap(t.accu_orig);
  scaled.accu_icl = remap(t.accu_icl);
  for (auto& m : scaled.masks) m.accuracy = remap(m.accuracy);
  auto mapped = icl_contribution(scaled);
  REQUIRE(mapped.size() == base.size());
  for (size_t i = 0; i < base.size(); ++i) CHECK(mapped[i].c == base[i].c);
}

TEST_CASE("icl contribution validates its input") {
  IclAccuracyTable t;
  t.accu_orig = Rational(0);
  t.accu_icl = Rational(1);
  t.similar_indices = {0, 1};
  t.random_indices = {};
  t.masks = {{{0}, Rational(1, 2)}, {{1}, Rational(1, 2)}};  // {0,1} missing
  CHECK_THROWS_AS(icl_contribution(t), std::invalid_argument);

  t.masks.push_back({{0, 1}, Rational(0)});
  CHECK_NOTHROW(icl_contribution(t));

  IclAccuracyTable cross = t;
  cross.masks.push_back({{0, 7}, Rational(0)});  // straddles groups
  CHECK_THROWS_AS(icl_contribution(cross), std::invalid_argument);

  IclAccuracyTable flat = t;
  flat.accu_icl = flat.accu_orig;
  CHECK_THROWS_AS(icl_contribution(flat), std::domain_error);
}

TEST_CASE("icl table json round trip") {
  nlohmann::json j;
  j["accu_orig"] = "0";
  j["accu_icl"] = 1;
  j["similar_indices"] = {1, 2};
  j["random_indices"] = nlohmann::json::array();
  j["masks"] = nlohmann::json::array();
  j["masks"].push_back({{"masked", {1}}, {"accuracy", "1/2"}});
  j["masks"].push_back({{"masked", {2}}, {"accuracy", 0.5}});
  j["masks"].push_back({{"masked", {1, 2}}, {"accuracy", 0}});
  IclAccuracyTable t = icl_table_from_json(j);
  CHECK(t.similar_indices == std::vector<int>{1, 2});
  CHECK(t.masks[1].accuracy == Rational(1, 2));  // float parsed exactly

  auto cs = icl_contribution(t);
  nlohmann::json out = contributions_to_json(cs);
  REQUIRE(out.is_array());
  CHECK(out[0]["c_i"] == "1/4");
  CHECK(out[0]["example_index"] == 1);
}

TEST_CASE("icl probe construction") {
  auto probe = build_icl_probe(200, 300, 5, 5, 1);
  REQUIRE(probe.size() == 10);

  auto digits9 = [](long long v) { return to_digits(static_cast<unsigned long long>(v), 9).digits; };
  std::set<std::pair<long long, long long>> seen;
  for (int i = 0; i < 5; ++i) {
    const IclExample& e = probe[static_cast<size_t>(i)];
    CHECK(e.group == "similar");
    auto da = digits9(e.a), ra = digits9(200);
    auto db = digits9(e.b), rb = digits9(300);
    REQUIRE(da.size() == 3);
    REQUIRE(db.size() == 3);
    int diff_a = -1, diff_b = -1, na = 0, nb = 0;
    for (int k = 0; k < 3; ++k) {
      if (da[static_cast<size_t>(k)] != ra[static_cast<size_t>(k)]) { diff_a = k; ++na; }
      if (db[static_cast<size_t>(k)] != rb[static_cast<size_t>(k)]) { diff_b = k; ++nb; }
    }
    CHECK(na == 1);
    CHECK(nb == 1);
    CHECK(diff_a == diff_b);  // same position in both operands
    seen.insert({e.a, e.b});
  }
  for (int i = 5; i < 10; ++i) {
    const IclExample& e = probe[static_cast<size_t>(i)];
    CHECK(e.group == "random");
    CHECK(e.a >= 81);
    CHECK(e.a <= 728);
    CHECK(e.b >= 81);
    CHECK(e.b <= 728);
    CHECK(std::pair<long long, long long>{e.a, e.b} != std::pair<long long, long long>{200, 300});
    seen.insert({e.a, e.b});
  }
  CHECK(seen.size() == 10);  // all distinct

  // examples carry scratchpad renderings in base 9
  Problem p = make_problem(TaskKind::base_addition(9), static_cast<unsigned long long>(probe[0].a),
                           static_cast<unsigned long long>(probe[0].b));
  IOPair io = emit(p, TraceFormat::Scratchpad);
  CHECK(probe[0].input == io.input);
  CHECK(probe[0].output == io.output);

  CHECK(icl_examples_to_json(build_icl_probe(200, 300, 5, 5, 1)) ==
        icl_examples_to_json(build_icl_probe(200, 300, 5, 5, 1)));
  CHECK(icl_examples_to_json(build_icl_probe(200, 300, 5, 5, 2)) !=
        icl_examples_to_json(build_icl_probe(200, 300, 5, 5, 1)));

  auto single = build_icl_probe(200, 300, 5, 0, 3, true);
  for (const auto& e : single) {
    CHECK(e.b == 300);
    CHECK(e.a != 200);
  }
}

TEST_CASE("coverage prediction on the centered square") {
  GridDomain dom = GridDomain::square(0, 99);
  SplitResult split = leave_square_out(dom, {{50, 50, 20}});
  PredictionGrid grid = coverage_predict(split, 10);
  REQUIRE(grid.rows.size() == 441);

  std::map<std::pair<long long, long long>, const Prediction*> at;
  for (const auto& r : grid.rows) at[{r.a, r.b}] = &r;
  REQUIRE(at.count({47, 48}) == 1);
  CHECK_FALSE(at[{47, 48}]->success);
  CHECK(at[{47, 48}]->witness == "4+4+1");
  CHECK_FALSE(at[{57, 58}]->success);
  CHECK(at[{57, 58}]->witness == "5+5+1");
  CHECK(at[{42, 43}]->success);
  CHECK(at[{42, 43}]->witness.empty());

  // cross-check every decision against an independent walk
  std::map<UnitStep, int> mult;
  for (const auto& [a, b] : split.train) {
    std::map<UnitStep, int> need;
    for (const auto& s : walk_steps(a, b)) ++need[s];
    for (const auto& [s, n] : need) {
      auto it = mult.find(s);
      if (it == mult.end())
        mult[s] = n;
      else
        it->second = std::max(it->second, n);
    }
  }
  for (const auto& r : grid.rows) CHECK(r.success == covered_naive(r.a, r.b, mult));
}

TEST_CASE("proximity prediction") {
  GridDomain dom = GridDomain::square(0, 99);
  SplitResult split = leave_square_out(dom, {{50, 50, 20}});

  PredictionGrid cheb = proximity_predict(split, 5.0, Metric::Chebyshev);
  REQUIRE(cheb.rows.size() == 441);
  long long fails = 0;
  for (const auto& r : cheb.rows) {
    bool inner = r.a >= 45 && r.a <= 55 && r.b >= 45 && r.b <= 55;
    CHECK(r.success == !inner);
    if (!r.success) ++fails;
  }
  CHECK(fails == 121);

  std::map<std::pair<long long, long long>, const Prediction*> at;
  for (const auto& r : cheb.rows) at[{r.a, r.b}] = &r;
  CHECK(at[{50, 50}]->witness == "11");
  CHECK(at[{44, 50}]->witness == "5");

  PredictionGrid eucl = proximity_predict(split, 5.0, Metric::Euclidean);
  std::map<std::pair<long long, long long>, const Prediction*> et;
  for (const auto& r : eucl.rows) et[{r.a, r.b}] = &r;
  CHECK_FALSE(et[{45, 45}]->success);
  CHECK(et[{45, 45}]->witness == "6.000000");
  CHECK(et[{44, 50}]->success);
  CHECK(et[{44, 50}]->witness == "5.000000");

  SplitResult empty_train;
  empty_train.test = {{1, 1}};
  CHECK_THROWS_AS(proximity_predict(empty_train, 1.0, Metric::Chebyshev),
                  std::invalid_argument);
}

TEST_CASE("prediction csv") {
  GridDomain dom = GridDomain::square(0, 9);
  SplitResult split = leave_square_out(dom, {{5, 5, 2}});
  PredictionGrid grid = proximity_predict(split, 1.0, Metric::Chebyshev);
  std::string csv = predictions_to_csv(grid);
  CHECK(csv.substr(0, 22) == "a,b,predicted,witness\n");
  CHECK(csv.find("FAIL") != std::string::npos);
  CHECK(csv.find("SUCCESS") != std::string::npos);
  CHECK(predictions_to_csv(grid) == csv);
}

TEST_CASE("prediction agreement") {
  GridDomain dom = GridDomain::square(0, 9);
  SplitResult split = leave_square_out(dom, {{5, 5, 4}});
  PredictionGrid pred = proximity_predict(split, 1.0, Metric::Chebyshev);
  REQUIRE(pred.rows.size() == 25);

  std::vector<ScoredProblem> scored;
  for (const auto& [a, b] : split.train) scored.push_back(scored_point(a, b, 1.0));
  for (const auto& [a, b] : split.test)
    scored.push_back(scored_point(a, b, a == 5 && b == 5 ? 0.0 : 1.0));
  AccuracyGrid obs = accuracy_grid(scored, split);

  Agreement ag = agreement(pred, obs, 0.5);
  // only the inner 3x3 is predicted FAIL; only (5,5) observed FAIL
  CHECK(ag.fail_fail == 1);
  CHECK(ag.fail_success == 8);
  CHECK(ag.success_fail == 0);
  CHECK(ag.success_success == 16);
  REQUIRE(ag.precision.has_value());
  CHECK(*ag.precision == doctest::Approx(1.0 / 9.0));
  REQUIRE(ag.recall.has_value());
  CHECK(*ag.recall == doctest::Approx(1.0));

  nlohmann::json j = agreement_to_json(ag);
  CHECK(j["fail_fail"] == 1);
  CHECK(j["precision"].is_number());

  // all-success prediction leaves recall undefined when nothing failed
  PredictionGrid all_ok = proximity_predict(split, 99.0, Metric::Chebyshev);
  std::vector<ScoredProblem> perfect;
  for (const auto& [a, b] : split.train) perfect.push_back(scored_point(a, b, 1.0));
  for (const auto& [a, b] : split.test) perfect.push_back(scored_point(a, b, 1.0));
  Agreement none = agreement(all_ok, accuracy_grid(perfect, split), 0.5);
  CHECK_FALSE(none.precision.has_value());
  CHECK_FALSE(none.recall.has_value());
  CHECK(agreement_to_json(none)["precision"].is_null());

  // prediction point missing from the observed grid
  PredictionGrid stray = pred;
  stray.rows.push_back({99, 99, true, ""});
  CHECK_THROWS_AS(agreement(stray, obs, 0.5), std::invalid_argument);
}

TEST_CASE("heatmap svg") {
  GridDomain dom = GridDomain::square(0, 9);
  SplitResult split = leave_square_out(dom, {{5, 5, 2}});
  std::vector<ScoredProblem> scored;
  for (const auto& [a, b] : split.train) scored.push_back(scored_point(a, b, 1.0));
  for (const auto& [a, b] : split.test) scored.push_back(scored_point(a, b, 0.0));
  AccuracyGrid grid = accuracy_grid(scored, split);

  std::string svg = emit_heatmap(grid, split.squares);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.substr(svg.size() - 7) == "</svg>\n");
  CHECK(svg.find("#006837") != std::string::npos);  // accuracy 1 end of ramp
  CHECK(svg.find("#a50026") != std::string::npos);  // accuracy 0 end of ramp
  CHECK(svg.find("class=\"held-out\"") != std::string::npos);
  CHECK(svg.find("opacity=\"0.45\"") != std::string::npos);
  CHECK(emit_heatmap(grid, split.squares) == svg);

  // no squares, uniform accuracy: a single fill color and no outline
  std::vector<ScoredProblem> uniform;
  for (const auto& [a, b] : split.train) uniform.push_back(scored_point(a, b, 1.0));
  for (const auto& [a, b] : split.test) uniform.push_back(scored_point(a, b, 1.0));
  std::string flat = emit_heatmap(accuracy_grid(uniform, split), {});
  CHECK(flat.find("#a50026") == std::string::npos);
  CHECK(flat.find("held-out") == std::string::npos);
}
