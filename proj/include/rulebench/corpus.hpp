#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rulebench/formats.hpp"
#include "rulebench/task.hpp"

// Corpus construction: seeded sampling and exhaustive enumeration, with
// JSONL serialization. Sampling is without replacement and fully determined
// by (spec, seed); text emission may run on several threads but record order
// always follows draw order.

namespace rulebench {

struct SamplerSpec {
  int min_digits = 1, max_digits = 5;  // operand length range, inclusive
  long long count = 0;
  unsigned long long seed = 0;
  int min_words = 2, max_words = 4;    // last-letter word count range
};

struct Corpus {
  TaskKind task;
  TraceFormat format = TraceFormat::Direct;
  ScratchpadLayout layout = ScratchpadLayout::Canonical;
  bool exotic = false;
  std::vector<IOPair> records;
  nlohmann::json provenance;  // config echo, no timestamps
};

// Draw-length-then-value sampling: operand length uniform over the range,
// then a uniform number of that length (no leading zeros; a single 0 is the
// only 1-digit value starting with 0). Pairs never repeat; a count larger
// than the number of distinct pairs raises std::invalid_argument.
Corpus build_corpus(const TaskKind& task, TraceFormat format, const SamplerSpec& spec,
                    bool exotic = false, ScratchpadLayout layout = ScratchpadLayout::Canonical,
                    int jobs = 1);

// Row-major enumeration (a outer, b inner) of the given operand points.
Corpus build_corpus_exhaustive(const TaskKind& task, TraceFormat format,
                               const std::vector<std::pair<unsigned long long, unsigned long long>>& points,
                               bool exotic = false,
                               ScratchpadLayout layout = ScratchpadLayout::Canonical, int jobs = 1);

// Row-major points of [lo,hi]^2; for ChickenRabbit, b spans [lo,hi] and a
// runs over the valid leg counts.
std::vector<std::pair<unsigned long long, unsigned long long>> exhaustive_points(
    const TaskKind& task, unsigned long long lo, unsigned long long hi);

// Embedded surname pool used when sampling last-letter corpora.
const std::vector<std::string>& surname_pool();

nlohmann::json record_to_json(const IOPair& io);
IOPair record_from_json(const nlohmann::json& j);  // enough to rebuild the problem

void write_corpus(const Corpus& corpus, const std::string& path);  // path + ".provenance.json"
std::vector<IOPair> read_corpus(const std::string& path);

}  // namespace rulebench
