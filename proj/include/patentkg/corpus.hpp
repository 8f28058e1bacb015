#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace patentkg {

// One patent as ingested: identifiers, classification codes and abstract.
struct PatentRecord {
    std::string patent_id;
    std::string application_id;
    std::string earliest_filing_id;
    std::vector<std::string> cpc_codes;
    std::string title;
    std::string abstract;   // may be empty; such records are skipped downstream
    int filing_year = 0;
};

// Corpus selection: CPC section prefix, year window, family dedup.
struct CorpusFilter {
    std::string cpc_prefix = "F";
    int year_min = 2016;
    int year_max = 2021;
    bool require_earliest_in_family = true;
};

enum class CorpusFormat { Jsonl, Csv };

// Non-fatal problem tied to one input line.
struct ParseIssue {
    std::size_t line = 0;
    std::string message;
    bool is_error = false;  // errors drop the record, warnings keep it
};

struct CorpusParseResult {
    std::vector<PatentRecord> records;
    std::vector<ParseIssue> issues;

    std::size_t error_count() const;
    std::size_t warning_count() const;
};

// Reads one record per line. Malformed records are collected as issues and
// skipped; with strict=true the first error throws DataError instead.
CorpusParseResult parse_corpus_file(std::istream& in, CorpusFormat format,
                                    bool strict = false);

// One JSONL line per record, same keys the reader accepts.
void write_corpus_jsonl(const std::vector<PatentRecord>& records,
                        std::ostream& sink);

// Keeps records matching the filter's three predicates. Pure; preserves order.
std::vector<PatentRecord> filter_corpus(const std::vector<PatentRecord>& records,
                                        const CorpusFilter& filter);

// True iff the record passes every predicate of the filter.
bool matches_filter(const PatentRecord& record, const CorpusFilter& filter);

}  // namespace patentkg
