#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "patentkg/attention.hpp"
#include "patentkg/preprocess.hpp"

namespace patentkg {

// Head/tail noun units of one candidate triple, head before tail.
struct CandidatePair {
    int head_unit = 0;
    int tail_unit = 0;
};

struct MatchConfig {
    int beam_size = 2;
    std::set<Pos> relation_pos_allow = {Pos::Verb, Pos::Aux, Pos::Adp, Pos::Part};
    std::set<Pos> relation_pos_deny = {Pos::Adv,   Pos::Noun, Pos::Propn, Pos::Det,
                                       Pos::Punct, Pos::Num,  Pos::Adj};
};

// Scored (head, relation, tail) candidate. The score is exactly
// A[tail][relation] + A[relation][head] on the sentence's word attention.
struct CandidateFact {
    std::string head;
    std::string relation;
    std::string tail;
    double score = 0.0;
    int head_idx = 0;
    int rel_idx = 0;
    int tail_idx = 0;
    std::string abstract_id;
    int sentence_index = 0;
    bool relation_is_phrasal = false;
};

// Deterministic preference between two facts: higher score, then relation
// closer to its tail, then lower relation index.
bool fact_preferred(const CandidateFact& a, const CandidateFact& b);

// All (i, j) pairs of noun-phrase units, i < j, that have at least one
// eligible relation unit strictly between them. Lexicographic by (i, j).
std::vector<CandidatePair> enumerate_pairs(const ProcessedSentence& sentence,
                                           const MatchConfig& config = {});

// Unit indices strictly between head and tail that may serve as the
// relation: phrasal verbs always, negation-dependent words always, noun
// phrases never, anything else by the POS allow/deny policy.
std::vector<int> candidate_relations(const CandidatePair& pair,
                                     const ProcessedSentence& sentence,
                                     const MatchConfig& config);

// Backward beam search t -> r -> h: expand the beam_size relation units
// with highest A[tail][r] (each visited once), then keep the expanded
// candidate with the highest total A[tail][r] + A[r][head]. Returns every
// expanded candidate, best first.
std::vector<CandidateFact> beam_expand(const CandidatePair& pair,
                                       const WordAttention& attn,
                                       const ProcessedSentence& sentence,
                                       const MatchConfig& config);

// The best expanded candidate, or nothing when the pair has no eligible
// relation.
std::optional<CandidateFact> beam_match(const CandidatePair& pair,
                                        const WordAttention& attn,
                                        const ProcessedSentence& sentence,
                                        const MatchConfig& config);

// Exhaustive oracle: scores every eligible relation with no beam pruning
// and returns the argmax under the same tie rule.
std::optional<CandidateFact> brute_force_match(const CandidatePair& pair,
                                               const WordAttention& attn,
                                               const ProcessedSentence& sentence,
                                               const MatchConfig& config);

}  // namespace patentkg
