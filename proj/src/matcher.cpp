#include "patentkg/matcher.hpp"

#include <algorithm>

#include "patentkg/errors.hpp"

namespace patentkg {

namespace {

void validate_pair(const CandidatePair& pair, const ProcessedSentence& sentence) {
    const int m = static_cast<int>(sentence.units.size());
    if (pair.head_unit < 0 || pair.tail_unit >= m || pair.head_unit >= pair.tail_unit)
        throw DataError("invalid head/tail pair (" + std::to_string(pair.head_unit) +
                        "," + std::to_string(pair.tail_unit) + ") for a sentence with " +
                        std::to_string(m) + " units");
}

void validate_config(const MatchConfig& config) {
    if (config.beam_size < 1) throw ConfigError("beam size must be at least 1");
    for (Pos p : config.relation_pos_allow)
        if (config.relation_pos_deny.count(p))
            throw ConfigError("relation POS policy lists " + pos_to_string(p) +
                              " as both allowed and denied");
}

bool has_neg_token(const ProcessedSentence& sentence, const WordUnit& unit) {
    for (int i = unit.begin; i < unit.end; ++i)
        if (sentence.tokens[static_cast<std::size_t>(i)].dep == "neg") return true;
    return false;
}

bool relation_eligible(const ProcessedSentence& sentence, const WordUnit& unit,
                       const MatchConfig& config) {
    if (unit.kind == UnitKind::NounPhrase) return false;  // entities only
    if (unit.kind == UnitKind::PhrasalVerb) return true;
    if (has_neg_token(sentence, unit)) return true;
    return config.relation_pos_allow.count(unit.unit_pos) > 0 &&
           config.relation_pos_deny.count(unit.unit_pos) == 0;
}

CandidateFact make_fact(int head, int rel, int tail, const WordAttention& attn,
                        const ProcessedSentence& sentence) {
    const auto& units = sentence.units;
    CandidateFact fact;
    fact.head = units[static_cast<std::size_t>(head)].text;
    fact.relation = units[static_cast<std::size_t>(rel)].text;
    fact.tail = units[static_cast<std::size_t>(tail)].text;
    fact.score = attn.matrix(tail, rel) + attn.matrix(rel, head);
    fact.head_idx = head;
    fact.rel_idx = rel;
    fact.tail_idx = tail;
    fact.abstract_id = sentence.abstract_id;
    fact.sentence_index = sentence.sentence_index;
    fact.relation_is_phrasal =
        units[static_cast<std::size_t>(rel)].kind == UnitKind::PhrasalVerb;
    return fact;
}

}  // namespace

bool fact_preferred(const CandidateFact& a, const CandidateFact& b) {
    if (a.score != b.score) return a.score > b.score;
    int da = a.tail_idx - a.rel_idx;
    int db = b.tail_idx - b.rel_idx;
    if (da != db) return da < db;  // relation closer to its tail wins
    return a.rel_idx < b.rel_idx;
}

std::vector<CandidatePair> enumerate_pairs(const ProcessedSentence& sentence,
                                           const MatchConfig& config) {
    std::vector<int> nouns;
    for (std::size_t i = 0; i < sentence.units.size(); ++i)
        if (sentence.units[i].kind == UnitKind::NounPhrase)
            nouns.push_back(static_cast<int>(i));

    std::vector<CandidatePair> pairs;
    for (std::size_t a = 0; a < nouns.size(); ++a) {
        for (std::size_t b = a + 1; b < nouns.size(); ++b) {
            CandidatePair pair{nouns[a], nouns[b]};
            if (!candidate_relations(pair, sentence, config).empty())
                pairs.push_back(pair);
        }
    }
    return pairs;
}

std::vector<int> candidate_relations(const CandidatePair& pair,
                                     const ProcessedSentence& sentence,
                                     const MatchConfig& config) {
    validate_pair(pair, sentence);
    validate_config(config);

    std::vector<int> relations;
    for (int r = pair.head_unit + 1; r < pair.tail_unit; ++r)
        if (relation_eligible(sentence, sentence.units[static_cast<std::size_t>(r)],
                              config))
            relations.push_back(r);
    return relations;
}

std::vector<CandidateFact> beam_expand(const CandidatePair& pair,
                                       const WordAttention& attn,
                                       const ProcessedSentence& sentence,
                                       const MatchConfig& config) {
    if (attn.matrix.rows() != static_cast<Eigen::Index>(sentence.units.size()))
        throw DataError("word attention is " + std::to_string(attn.matrix.rows()) +
                        "x" + std::to_string(attn.matrix.cols()) +
                        " but the sentence has " +
                        std::to_string(sentence.units.size()) + " units");

    std::vector<int> relations = candidate_relations(pair, sentence, config);

    // First backward step: rank by attention from the tail, keep the top
    // beam_size. Each unit enters the beam at most once.
    std::sort(relations.begin(), relations.end(), [&](int a, int b) {
        double wa = attn.matrix(pair.tail_unit, a);
        double wb = attn.matrix(pair.tail_unit, b);
        if (wa != wb) return wa > wb;
        return a > b;  // closer to the tail first
    });
    if (static_cast<int>(relations.size()) > config.beam_size)
        relations.resize(static_cast<std::size_t>(config.beam_size));

    // Second step: complete each beam entry toward the head and rank totals.
    std::vector<CandidateFact> expanded;
    expanded.reserve(relations.size());
    for (int r : relations)
        expanded.push_back(make_fact(pair.head_unit, r, pair.tail_unit, attn, sentence));
    std::sort(expanded.begin(), expanded.end(), fact_preferred);
    return expanded;
}

std::optional<CandidateFact> beam_match(const CandidatePair& pair,
                                        const WordAttention& attn,
                                        const ProcessedSentence& sentence,
                                        const MatchConfig& config) {
    std::vector<CandidateFact> expanded = beam_expand(pair, attn, sentence, config);
    if (expanded.empty()) return std::nullopt;
    return expanded.front();
}

std::optional<CandidateFact> brute_force_match(const CandidatePair& pair,
                                               const WordAttention& attn,
                                               const ProcessedSentence& sentence,
                                               const MatchConfig& config) {
    if (attn.matrix.rows() != static_cast<Eigen::Index>(sentence.units.size()))
        throw DataError("word attention does not match the sentence units");

    std::optional<CandidateFact> best;
    for (int r : candidate_relations(pair, sentence, config)) {
        CandidateFact fact = make_fact(pair.head_unit, r, pair.tail_unit, attn, sentence);
        if (!best || fact_preferred(fact, *best)) best = fact;
    }
    return best;
}

}  // namespace patentkg
