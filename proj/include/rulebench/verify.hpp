#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rulebench/corpus.hpp"
#include "rulebench/formats.hpp"
#include "rulebench/task.hpp"

// Step-by-step verification of model-generated traces. The expected side is
// always re-derived from the problem statement through the rule interpreter;
// nothing in the checked text is trusted. A report names the first divergent
// event and field and classifies it.

namespace rulebench {

enum class ErrorClass {
  None,
  FormatError,       // text violates the format grammar
  PopLengthError,    // remainder after a pop has the wrong number of digits
  PopValueError,     // remainder has the right length but wrong digits
  DigitSelectError,  // wrong digit1/digit2 in a comment or recitation
  TotalError,        // wrong digit sum
  ResultInsertError, // wrong inserted digit or result list
  CarryError,        // wrong carry value
  LoopControlError,  // wrong loop entry/exit or missing/extra events
  FinalAnswerError,  // every intermediate event matches, final answer differs
};

const char* error_class_name(ErrorClass e);  // e.g. "CARRY_ERROR"

// Semantic event with canonically rendered field values (digit lists are
// rendered tight, booleans as True/False), in a fixed per-kind order.
struct TraceEvent {
  enum class Kind {
    Echo,        // operand echoes before the loop
    Init,        // result/carry initialization
    ScratchInit, // first scratchpad state line
    ScratchPair, // comment + state line
    Check,       // loop stop-criterion block
    Pop,         // one digit pop
    Total,       // digit sum recitation
    Insert,      // result insertion recitation
    Carry,       // carry update recitation
    FinalCarry,  // trailing-carry section
    Word,        // one last-letter iteration
    TraceState,  // tracing state dict
    TraceLine,   // tracing source line
    Answer,      // final answer
  };

  Kind kind;
  std::vector<std::pair<std::string, std::string>> fields;
  size_t byte_offset = 0;

  const std::string* field(std::string_view name) const;
};

const char* event_kind_name(TraceEvent::Kind k);

struct ParseContext {
  int base = 10;
  TaskId task = TaskId::Addition;
  bool exotic = false;  // direct answers written in the letter alphabet
};

struct ParsedTrace {
  TraceFormat format = TraceFormat::Direct;
  std::vector<TraceEvent> events;
  // First grammar violation; events before it are kept so that an earlier
  // semantic divergence can still win during verification.
  bool has_error = false;
  size_t error_offset = 0;
  std::string error_message;
  bool answer_flagged = false;  // direct answer surrounded by extra text
};

ParsedTrace parse(TraceFormat format, std::string_view text, const ParseContext& ctx = {});

// Canonical final answer of a parsed trace: digit string for numeric tasks,
// "{r} rabbits, {c} chickens" for the word problem, concatenation for
// last-letter. Empty when the trace has none.
std::optional<std::string> extract_answer(const ParsedTrace& trace);

struct VerificationReport {
  bool valid = false;
  ErrorClass error = ErrorClass::None;
  long long event_index = -1;
  std::string field;
  std::string expected, observed;
  size_t byte_offset = 0;
  bool answer_correct = false;
  std::string extracted_answer;
  bool answer_flagged = false;
};

VerificationReport verify(TraceFormat format, const Problem& problem, std::string_view text,
                          bool exotic = false);

struct ScoredProblem {
  long long id = 0;
  IOPair record;
  long long n_samples = 0, n_correct = 0;
  double accuracy = 0.0;
  std::vector<VerificationReport> reports;
};

// Generation rows are {"id","input","generation"} with id indexing corpus
// order; several rows may share an id. Unknown ids raise.
std::vector<ScoredProblem> score_generations(const std::vector<IOPair>& corpus,
                                             const std::vector<nlohmann::json>& generations,
                                             int jobs = 1);

nlohmann::json report_to_json(const VerificationReport& r);
nlohmann::json scored_to_json(const ScoredProblem& s);
// Rebuilds the aggregate fields (coordinates, lengths, counts, accuracy);
// per-sample reports are not round-tripped.
ScoredProblem scored_from_json(const nlohmann::json& j);

}  // namespace rulebench
