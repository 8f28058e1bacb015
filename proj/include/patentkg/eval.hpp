#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace patentkg {

// A benchmark is an ordered tree: category -> subcategory -> terms.
struct BenchmarkSubcategory {
    std::string name;
    std::vector<std::string> terms;
};

struct BenchmarkCategory {
    std::string name;
    std::vector<BenchmarkSubcategory> subcategories;
};

struct TermBenchmark {
    std::vector<BenchmarkCategory> categories;

    std::size_t term_count() const;
};

struct RecallCounts {
    std::size_t covered = 0;
    std::size_t total = 0;
    double recall = 0.0;
};

struct EvalResult {
    RecallCounts total;
    std::vector<std::pair<std::string, RecallCounts>> per_category;
    std::vector<std::string> missing;  // uncovered terms, file order, surface form
};

// Format: `# Category`, `## Subcategory`, one term per line, blank lines
// ignored, no semicolons anywhere.  Errors carry a 1-based line number.
TermBenchmark load_benchmark(std::istream& in);
TermBenchmark load_benchmark_file(const std::string& path);

// A term counts as covered when its canonical form appears in the set
// (inputs are canonicalized again, so raw surfaces work too).
EvalResult recall_rate(const std::set<std::string>& entity_set,
                       const TermBenchmark& benchmark);

// Same matching applied to relation strings; phrasal relations match whole,
// so "connect to" and "connect through" are distinct.
EvalResult relation_recall(const std::set<std::string>& relation_set,
                           const TermBenchmark& benchmark);

void write_eval_json(const EvalResult& result, std::ostream& out);
void write_eval_table(const EvalResult& result, std::ostream& out);

}  // namespace patentkg
