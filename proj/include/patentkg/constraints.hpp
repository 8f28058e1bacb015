#pragma once

#include <string>
#include <vector>

#include "patentkg/attention.hpp"
#include "patentkg/corpus.hpp"
#include "patentkg/kgstore.hpp"
#include "patentkg/matcher.hpp"

namespace patentkg {

// All surviving candidates of one abstract, across its sentences.
struct AbstractCandidates {
    std::string abstract_id;
    std::vector<CandidateFact> facts;
};

enum class ThresholdMode { Median };

struct ThresholdPolicy {
    ThresholdMode mode = ThresholdMode::Median;
};

// Keeps facts whose score is at least the median of the abstract's fact
// scores (even counts use the mean of the two middle values). Stable.
AbstractCandidates filter_by_median(const AbstractCandidates& cands,
                                    const ThresholdPolicy& policy = {});

// Per sentence, two passes. Head pass: each head keeps only the relation of
// its highest-scoring fact (multiple tails under that relation survive).
// Tail pass: each tail keeps only its single highest-scoring fact.
AbstractCandidates resolve_relations(const AbstractCandidates& cands);

// Full pipeline for one abstract: sentence split, preprocessing, attention,
// per-pair beam match, median threshold, relation resolution, and
// canonicalization into provenance-carrying triples. Sentences that fail
// (over-length, missing or bad parses) are skipped with a warning on
// stderr; ConfigError still propagates.
std::vector<Triple> extract_from_abstract(const PatentRecord& abstract,
                                          ParseProvider& parse,
                                          AttentionProvider& attn,
                                          const MatchConfig& match_cfg = {},
                                          const AttentionConfig& attn_cfg = {},
                                          const ThresholdPolicy& policy = {});

// Canonicalized triple for an accepted fact.
Triple fact_to_triple(const CandidateFact& fact);

}  // namespace patentkg
