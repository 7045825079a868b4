#include "doctest.h"

#include <string>

#include "rulebench/formats.hpp"
#include "golden.hpp"

using namespace rulebench;

TEST_CASE("format names round trip") {
  for (TraceFormat f : {TraceFormat::Direct, TraceFormat::Scratchpad,
                        TraceFormat::ScratchpadTracing, TraceFormat::RfftCode,
                        TraceFormat::RfftNL}) {
    CHECK(format_from_name(format_name(f)) == f);
  }
  CHECK(format_name(TraceFormat::ScratchpadTracing) == std::string("scratchpad-tracing"));
  CHECK_FALSE(format_from_name("freeform").has_value());
}

TEST_CASE("format support matrix") {
  CHECK(format_supports(TaskId::Addition, TraceFormat::RfftNL));
  CHECK(format_supports(TaskId::BaseAddition, TraceFormat::ScratchpadTracing));
  CHECK(format_supports(TaskId::ModularAddition, TraceFormat::Direct));
  CHECK_FALSE(format_supports(TaskId::ModularAddition, TraceFormat::Scratchpad));
  CHECK_FALSE(format_supports(TaskId::LinearRegression, TraceFormat::RfftCode));
  CHECK_FALSE(format_supports(TaskId::ChickenRabbit, TraceFormat::Scratchpad));
  CHECK(format_supports(TaskId::LastLetterConcat, TraceFormat::Scratchpad));
  CHECK(format_supports(TaskId::LastLetterConcat, TraceFormat::RfftCode));
  CHECK_FALSE(format_supports(TaskId::LastLetterConcat, TraceFormat::RfftNL));
  CHECK_FALSE(format_supports(TaskId::LastLetterConcat, TraceFormat::ScratchpadTracing));
}

TEST_CASE("direct golden") {
  IOPair p = emit_direct(make_problem(TaskKind::addition(), 7, 6));
  CHECK(p.input == golden::kDirectAdditionInput);
  CHECK(p.output == golden::kDirectAdditionOutput);
  CHECK(p.len_a == 1);
  CHECK(p.len_b == 1);
}

TEST_CASE("direct other tasks") {
  CHECK(emit_direct(make_problem(TaskKind::modular_addition(113), 100, 100)).output == "87");
  IOPair cr = emit_direct(make_problem(TaskKind::chicken_rabbit(), 10, 4));
  CHECK(cr.output == "A: There are 1 rabbits and 3 chickens.");
  CHECK(emit_direct(make_problem(TaskKind::base_addition(9), 8, 8)).input == "8+8=");
  CHECK(emit_direct(make_problem(TaskKind::base_addition(9), 8, 8)).output == "17");
}

TEST_CASE("scratchpad golden") {
  IOPair p = emit_scratchpad(7, 6);
  CHECK(p.input == golden::kScratchpadInput);
  CHECK(p.output == golden::kScratchpadOutput);
}

TEST_CASE("scratchpad layouts agree on content") {
  IOPair canonical = emit_scratchpad(687042, 86208);
  IOPair inl = emit_scratchpad(687042, 86208, 10, ScratchpadLayout::Inline);
  CHECK(canonical.input == inl.input);
  CHECK(canonical.output != inl.output);
  // inline keeps one line per iteration: state then " # added ..."
  CHECK(inl.output.find(",C:1 # added 2+8+0=0") != std::string::npos);
  CHECK(canonical.output.find("# added 2+8+0=0\n") != std::string::npos);
}

TEST_CASE("scratchpad final carry behavior") {
  // no overflow: no virtual 0+0+1 pair
  IOPair flat = emit_scratchpad(12, 34);
  CHECK(flat.output ==
        "12+34,,C:0\n"
        "# added 2+4+0=6\n"
        "1+3,6,C:0\n"
        "# added 1+3+0=4\n"
        "+,46,C:0\n"
        "46");
  // comment records the unit digit of the column sum, not the total
  IOPair carry = emit_scratchpad(99, 1);
  CHECK(carry.output.find("# added 9+1+0=0") != std::string::npos);
  CHECK(carry.output.find("# added 0+0+1=1") != std::string::npos);
}

TEST_CASE("scratchpad base 9") {
  IOPair p = emit_scratchpad(8, 8, 9);
  CHECK(p.input == "8+8=");
  CHECK(p.output ==
        "8+8,,C:0\n"
        "# added 8+8+0=7\n"
        "+,7,C:1\n"
        "# added 0+0+1=1\n"
        "+,17,C:0\n"
        "17");
}

TEST_CASE("tracing golden") {
  IOPair p = emit_scratchpad_tracing(to_digits(73, 10), to_digits(48, 10));
  CHECK(p.input == golden::kTracingInput);
  CHECK(p.output == golden::kTracingOutput);
}

TEST_CASE("rfft code golden") {
  IOPair p = emit_rfft_code(to_digits(7, 10), to_digits(6, 10));
  CHECK(p.input == golden::kRfftCodeInput);
  CHECK(p.output == golden::kRfftCodeOutput);
}

TEST_CASE("rfft nl golden") {
  IOPair p = emit_rfft_nl(6, 7);
  CHECK(p.input == golden::kRfftNlInput);
  CHECK(p.output == golden::kRfftNlOutput);
}

TEST_CASE("rfft base 9 listing adjusts moduli") {
  std::string listing = rfft_code_listing(9);
  CHECK(listing.find("total%9") != std::string::npos);
  CHECK(listing.find("total//9") != std::string::npos);
  CHECK(listing.find("total%10") == std::string::npos);
  std::string nl = rfft_nl_rule_listing(9);
  CHECK(nl.find("larger than 8") != std::string::npos);
  IOPair p = emit_rfft_nl(8, 8, 9);
  CHECK(p.output.find("16 % 9 = 7") != std::string::npos);
  CHECK(p.output.find("16 // 9 = 1") != std::string::npos);
}

TEST_CASE("last letter goldens") {
  IOPair d = emit_last_letter(TraceFormat::Direct, {"King", "Kaur"});
  CHECK(d.input == golden::kLastLetterInput);
  CHECK(d.output == golden::kLastLetterDirectOutput);

  IOPair s = emit_last_letter(TraceFormat::Scratchpad, {"King", "Kaur"});
  CHECK(s.input == golden::kLastLetterInput);
  CHECK(s.output == golden::kLastLetterScratchpadOutput);

  IOPair r = emit_last_letter(TraceFormat::RfftCode, {"King", "Kaur"});
  CHECK(r.input == golden::kLastLetterRfftInput);
  CHECK(r.output == golden::kLastLetterRfftOutput);
}

TEST_CASE("emit dispatch matches the direct emitters") {
  Problem p = make_problem(TaskKind::addition(), 73, 48);
  CHECK(emit(p, TraceFormat::ScratchpadTracing).output == golden::kTracingOutput);
  CHECK(emit(p, TraceFormat::Scratchpad).output == emit_scratchpad(73, 48).output);
  Problem w = make_word_problem({"King", "Kaur"});
  CHECK(emit(w, TraceFormat::Scratchpad).output == golden::kLastLetterScratchpadOutput);
  CHECK_THROWS(emit(w, TraceFormat::RfftNL));
  CHECK_THROWS(emit(make_problem(TaskKind::chicken_rabbit(), 10, 4), TraceFormat::RfftCode));
}

TEST_CASE("outputs have no trailing newline and no CR") {
  for (const IOPair& p : {emit_scratchpad(99, 1), emit_rfft_nl(55, 66),
                          emit_rfft_code(to_digits(123, 10), to_digits(9, 10)),
                          emit_scratchpad_tracing(to_digits(5, 10), to_digits(5, 10)),
                          emit_last_letter(TraceFormat::RfftCode, {"Lee", "Ng"})}) {
    REQUIRE_FALSE(p.output.empty());
    CHECK(p.output.back() != '\n');
    CHECK(p.output.find('\r') == std::string::npos);
    CHECK(p.input.find('\r') == std::string::npos);
  }
}

TEST_CASE("emitters are deterministic") {
  CHECK(emit_rfft_code(to_digits(7853, 10), to_digits(868810, 10)).output ==
        emit_rfft_code(to_digits(7853, 10), to_digits(868810, 10)).output);
  CHECK(emit_rfft_nl(496943, 2382).output == emit_rfft_nl(496943, 2382).output);
}
