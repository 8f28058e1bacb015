#pragma once

#include <vector>

#include "patentkg/attention.hpp"
#include "patentkg/constraints.hpp"
#include "patentkg/corpus.hpp"
#include "patentkg/kgstore.hpp"
#include "patentkg/matcher.hpp"
#include "patentkg/preprocess.hpp"

namespace patentkg {

struct ExtractionOptions {
    MatchConfig match;
    AttentionConfig attention;
    ThresholdPolicy threshold;
    int jobs = 1;
};

// Extracts triples from every record. Results are indexed like the input,
// so the flattened output is independent of the worker count. Records are
// distributed over `jobs` workers; calls into providers that are not
// thread-safe are serialized behind a lock.
std::vector<std::vector<Triple>> run_extraction(
    const std::vector<PatentRecord>& records, ParseProvider& parse,
    AttentionProvider& attn, const ExtractionOptions& options = {});

std::vector<Triple> flatten(const std::vector<std::vector<Triple>>& per_record);

}  // namespace patentkg
