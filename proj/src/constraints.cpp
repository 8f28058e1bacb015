#include "patentkg/constraints.hpp"

#include <algorithm>
#include <iostream>
#include <map>

namespace patentkg {

namespace {

double median_score(const std::vector<CandidateFact>& facts) {
    std::vector<double> scores;
    scores.reserve(facts.size());
    for (const auto& f : facts) scores.push_back(f.score);
    std::sort(scores.begin(), scores.end());
    std::size_t n = scores.size();
    if (n % 2 == 1) return scores[n / 2];
    return (scores[n / 2 - 1] + scores[n / 2]) / 2.0;
}

// Best fact of a group under the shared tie rule.
const CandidateFact* group_best(const std::vector<const CandidateFact*>& group) {
    const CandidateFact* best = nullptr;
    for (const CandidateFact* f : group)
        if (!best || fact_preferred(*f, *best)) best = f;
    return best;
}

}  // namespace

AbstractCandidates filter_by_median(const AbstractCandidates& cands,
                                    const ThresholdPolicy&) {
    AbstractCandidates out;
    out.abstract_id = cands.abstract_id;
    if (cands.facts.empty()) return out;

    double threshold = median_score(cands.facts);
    for (const CandidateFact& f : cands.facts)
        if (f.score >= threshold) out.facts.push_back(f);
    return out;
}

AbstractCandidates resolve_relations(const AbstractCandidates& cands) {
    // Unit indices are sentence-local, so both passes group per sentence.
    std::map<std::pair<int, int>, std::vector<const CandidateFact*>> by_head;
    for (const CandidateFact& f : cands.facts)
        by_head[{f.sentence_index, f.head_idx}].push_back(&f);

    std::vector<char> keep(cands.facts.size(), 0);
    auto index_of = [&](const CandidateFact* f) {
        return static_cast<std::size_t>(f - cands.facts.data());
    };

    // Head pass: one relation per head, the one on its best fact.
    for (const auto& [key, group] : by_head) {
        int best_rel = group_best(group)->rel_idx;
        for (const CandidateFact* f : group)
            if (f->rel_idx == best_rel) keep[index_of(f)] = 1;
    }

    // Tail pass: one fact per tail.
    std::map<std::pair<int, int>, std::vector<const CandidateFact*>> by_tail;
    for (std::size_t i = 0; i < cands.facts.size(); ++i)
        if (keep[i]) by_tail[{cands.facts[i].sentence_index, cands.facts[i].tail_idx}]
                         .push_back(&cands.facts[i]);

    std::fill(keep.begin(), keep.end(), 0);
    for (const auto& [key, group] : by_tail) keep[index_of(group_best(group))] = 1;

    AbstractCandidates out;
    out.abstract_id = cands.abstract_id;
    for (std::size_t i = 0; i < cands.facts.size(); ++i)
        if (keep[i]) out.facts.push_back(cands.facts[i]);
    return out;
}

Triple fact_to_triple(const CandidateFact& fact) {
    Triple t;
    t.head = canonicalize(fact.head);
    t.relation = canonicalize(fact.relation);
    t.tail = canonicalize(fact.tail);
    t.head_surface = fact.head;
    t.relation_surface = fact.relation;
    t.tail_surface = fact.tail;
    t.score = fact.score;
    t.patent_id = fact.abstract_id;
    t.sentence_index = fact.sentence_index;
    t.relation_is_phrasal = fact.relation_is_phrasal;
    return t;
}

std::vector<Triple> extract_from_abstract(const PatentRecord& abstract,
                                          ParseProvider& parse,
                                          AttentionProvider& attn,
                                          const MatchConfig& match_cfg,
                                          const AttentionConfig& attn_cfg,
                                          const ThresholdPolicy& policy) {
    if (abstract.abstract.empty()) return {};

    AbstractCandidates cands;
    cands.abstract_id = abstract.patent_id;

    std::vector<std::string> sentences = split_sentences(abstract.abstract);
    for (std::size_t si = 0; si < sentences.size(); ++si) {
        try {
            ProcessedSentence sent = preprocess_sentence(
                sentences[si], parse, abstract.patent_id, static_cast<int>(si));

            std::vector<std::string> unit_texts;
            unit_texts.reserve(sent.units.size());
            for (const WordUnit& u : sent.units) unit_texts.push_back(u.text);

            WordAttention wa;
            if (auto direct = attn.unit_attention(unit_texts, attn_cfg)) {
                validate_attention_matrix(*direct);
                if (direct->rows() != static_cast<Eigen::Index>(unit_texts.size()))
                    throw DataError("unit attention does not match the unit count");
                wa = WordAttention{unit_texts, std::move(*direct)};
            } else {
                TokenAttention ta =
                    compute_token_attention(sent.tokens, attn_cfg, attn);
                wa = aggregate_to_words(ta, sent.units);
            }

            for (const CandidatePair& pair : enumerate_pairs(sent, match_cfg))
                if (auto fact = beam_match(pair, wa, sent, match_cfg))
                    cands.facts.push_back(std::move(*fact));
        } catch (const ConfigError&) {
            throw;
        } catch (const PipelineError& e) {
            std::cerr << "warning: skipping sentence " << si << " of abstract '"
                      << abstract.patent_id << "': " << e.what() << '\n';
        }
    }

    AbstractCandidates resolved = resolve_relations(filter_by_median(cands, policy));

    std::vector<Triple> triples;
    triples.reserve(resolved.facts.size());
    for (const CandidateFact& f : resolved.facts) triples.push_back(fact_to_triple(f));
    return triples;
}

}  // namespace patentkg
