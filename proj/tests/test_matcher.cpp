#include <doctest.h>

#include <Eigen/Dense>

#include "patentkg/errors.hpp"
#include "patentkg/matcher.hpp"
#include "patentkg/preprocess.hpp"
#include "patentkg/providers.hpp"

using namespace patentkg;

namespace {

const std::string kDataDir = PATENTKG_DATA_DIR;

FixtureParseProvider& core_parses() {
    static FixtureParseProvider provider(kDataDir + "/fixtures/parse_core.json");
    return provider;
}

FixtureAttentionProvider& core_attn() {
    static FixtureAttentionProvider provider(kDataDir + "/fixtures/attn_core.json");
    return provider;
}

// Builds a sentence whose units and tokens line up one to one; unit i
// covers exactly token i, so attention indices are easy to read.
ProcessedSentence flat_sentence(
    const std::vector<std::pair<std::string, UnitKind>>& parts,
    const std::vector<Pos>& pos = {}, const std::vector<std::string>& deps = {}) {
    ProcessedSentence s;
    s.abstract_id = "synthetic";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        Token t;
        t.text = parts[i].first;
        t.pos = pos.empty() ? (parts[i].second == UnitKind::NounPhrase ? Pos::Noun
                                                                      : Pos::Verb)
                            : pos[i];
        t.dep = deps.empty() ? "dep" : deps[i];
        t.head_index = 0;
        s.tokens.push_back(t);
        WordUnit u;
        u.text = parts[i].first;
        u.kind = parts[i].second;
        u.begin = static_cast<int>(i);
        u.end = static_cast<int>(i) + 1;
        u.unit_pos = t.pos;
        s.units.push_back(u);
        s.text += (i ? " " : "") + parts[i].first;
    }
    return s;
}

WordAttention attention_for(const ProcessedSentence& s, const Eigen::MatrixXd& m) {
    WordAttention wa;
    for (const WordUnit& u : s.units) wa.units.push_back(u.text);
    wa.matrix = m;
    return wa;
}

ProcessedSentence processed(const std::string& sentence) {
    return preprocess_sentence(sentence, core_parses(), "fixture", 0);
}

WordAttention fixture_attention(const ProcessedSentence& s) {
    std::vector<std::string> texts;
    for (const WordUnit& u : s.units) texts.push_back(u.text);
    auto m = core_attn().unit_attention(texts, AttentionConfig{});
    REQUIRE(m.has_value());
    return WordAttention{texts, *m};
}

}  // namespace

TEST_CASE("candidate_relations: unit kinds and POS policy") {
    ProcessedSentence s = flat_sentence(
        {{"the pump", UnitKind::NounPhrase},
         {"quickly", UnitKind::Word},
         {"drives", UnitKind::Word},
         {"shut off", UnitKind::PhrasalVerb},
         {"the shaft", UnitKind::NounPhrase}},
        {Pos::Noun, Pos::Adv, Pos::Verb, Pos::Verb, Pos::Noun});
    CandidatePair pair{0, 4};
    auto rels = candidate_relations(pair, s, MatchConfig{});
    CHECK(rels == std::vector<int>{2, 3});  // adverb denied, verb and phrasal kept
}

TEST_CASE("candidate_relations: negation words are always eligible") {
    ProcessedSentence s = flat_sentence({{"the pump", UnitKind::NounPhrase},
                                         {"not", UnitKind::Word},
                                         {"the shaft", UnitKind::NounPhrase}},
                                        {Pos::Noun, Pos::Adv, Pos::Noun},
                                        {"nsubj", "neg", "dobj"});
    auto rels = candidate_relations({0, 2}, s, MatchConfig{});
    CHECK(rels == std::vector<int>{1});
}

TEST_CASE("candidate_relations: noun phrases never serve as the relation") {
    ProcessedSentence s = flat_sentence({{"the pump", UnitKind::NounPhrase},
                                         {"the valve", UnitKind::NounPhrase},
                                         {"the shaft", UnitKind::NounPhrase}});
    CHECK(candidate_relations({0, 2}, s, MatchConfig{}).empty());
}

TEST_CASE("enumerate_pairs lists noun-phrase pairs with something between") {
    ProcessedSentence s = flat_sentence({{"the pump", UnitKind::NounPhrase},
                                         {"drives", UnitKind::Word},
                                         {"the gear", UnitKind::NounPhrase},
                                         {"turns", UnitKind::Word},
                                         {"the shaft", UnitKind::NounPhrase}});
    auto pairs = enumerate_pairs(s);
    REQUIRE(pairs.size() == 3);
    CHECK((pairs[0].head_unit == 0 && pairs[0].tail_unit == 2));
    CHECK((pairs[1].head_unit == 0 && pairs[1].tail_unit == 4));
    CHECK((pairs[2].head_unit == 2 && pairs[2].tail_unit == 4));
}

TEST_CASE("enumerate_pairs skips adjacent noun phrases") {
    ProcessedSentence s = flat_sentence({{"the pump", UnitKind::NounPhrase},
                                         {"the gear", UnitKind::NounPhrase},
                                         {"turns", UnitKind::Word},
                                         {"the shaft", UnitKind::NounPhrase}});
    auto pairs = enumerate_pairs(s);
    REQUIRE(pairs.size() == 2);
    CHECK((pairs[0].head_unit == 0 && pairs[0].tail_unit == 3));
    CHECK((pairs[1].head_unit == 1 && pairs[1].tail_unit == 3));
}

TEST_CASE("beam_match scores A[tail][relation] + A[relation][head]") {
    ProcessedSentence s = processed("the magnetic force provided levitates the shaft");
    WordAttention wa = fixture_attention(s);
    auto best = beam_match({0, 3}, wa, s, MatchConfig{});
    REQUIRE(best.has_value());
    CHECK(best->relation == "levitates");
    CHECK(best->score == doctest::Approx(1.0257).epsilon(1e-9));
    CHECK(best->head_idx == 0);
    CHECK(best->rel_idx == 2);
    CHECK(best->tail_idx == 3);

    auto expanded = beam_expand({0, 3}, wa, s, MatchConfig{});
    REQUIRE(expanded.size() == 2);
    CHECK(expanded[0].relation == "levitates");
    CHECK(expanded[1].relation == "provided");
    CHECK(expanded[1].score == doctest::Approx(0.5838).epsilon(1e-9));
}

TEST_CASE("beam keeps the relations with the highest attention from the tail") {
    ProcessedSentence s = flat_sentence({{"a pump", UnitKind::NounPhrase},
                                         {"spins", UnitKind::Word},
                                         {"drives", UnitKind::Word},
                                         {"feeds", UnitKind::Word},
                                         {"a shaft", UnitKind::NounPhrase}});
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(5, 5, 0.0);
    // From the tail, "spins" and "drives" outrank "feeds"; but "feeds"
    // has the best total. A narrow beam must miss it.
    m(4, 1) = 0.5;
    m(4, 2) = 0.4;
    m(4, 3) = 0.3;
    m(1, 0) = 0.05;
    m(2, 0) = 0.1;
    m(3, 0) = 0.6;
    WordAttention wa = attention_for(s, m);

    MatchConfig narrow;
    narrow.beam_size = 2;
    auto pruned = beam_match({0, 4}, wa, s, narrow);
    REQUIRE(pruned.has_value());
    CHECK(pruned->relation == "spins");
    CHECK(pruned->score == doctest::Approx(0.55));

    MatchConfig wide;
    wide.beam_size = 3;
    auto full = beam_match({0, 4}, wa, s, wide);
    REQUIRE(full.has_value());
    CHECK(full->relation == "feeds");
    CHECK(full->score == doctest::Approx(0.9));

    auto oracle = brute_force_match({0, 4}, wa, s, wide);
    REQUIRE(oracle.has_value());
    CHECK(oracle->relation == full->relation);
    CHECK(oracle->score == doctest::Approx(full->score));
}

TEST_CASE("first-step ties go to the relation closer to the tail") {
    ProcessedSentence s = flat_sentence({{"a pump", UnitKind::NounPhrase},
                                         {"spins", UnitKind::Word},
                                         {"drives", UnitKind::Word},
                                         {"a shaft", UnitKind::NounPhrase}});
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(4, 4, 0.0);
    m(3, 1) = 0.4;  // tie on the first beam step
    m(3, 2) = 0.4;
    m(1, 0) = 0.3;
    m(2, 0) = 0.1;
    WordAttention wa = attention_for(s, m);

    MatchConfig one;
    one.beam_size = 1;
    auto best = beam_match({0, 3}, wa, s, one);
    REQUIRE(best.has_value());
    // The beam admits "drives" (closer to the tail); "spins" never expands
    // even though its total would have been higher.
    CHECK(best->relation == "drives");
    CHECK(best->score == doctest::Approx(0.5));
}

TEST_CASE("total-score ties prefer the relation closer to the tail") {
    ProcessedSentence s = flat_sentence({{"a pump", UnitKind::NounPhrase},
                                         {"spins", UnitKind::Word},
                                         {"drives", UnitKind::Word},
                                         {"a shaft", UnitKind::NounPhrase}});
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(4, 4, 0.0);
    m(3, 1) = 0.5;
    m(1, 0) = 0.2;
    m(3, 2) = 0.3;
    m(2, 0) = 0.4;  // both totals are 0.7
    WordAttention wa = attention_for(s, m);
    auto best = beam_match({0, 3}, wa, s, MatchConfig{});
    REQUIRE(best.has_value());
    CHECK(best->relation == "drives");
}

TEST_CASE("beam_match returns nothing when no relation is eligible") {
    ProcessedSentence s = flat_sentence({{"a pump", UnitKind::NounPhrase},
                                         {"quickly", UnitKind::Word},
                                         {"a shaft", UnitKind::NounPhrase}},
                                        {Pos::Noun, Pos::Adv, Pos::Noun});
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(3, 3, 0.2);
    WordAttention wa = attention_for(s, m);
    CHECK_FALSE(beam_match({0, 2}, wa, s, MatchConfig{}).has_value());
    CHECK(beam_expand({0, 2}, wa, s, MatchConfig{}).empty());
}

TEST_CASE("beam_match carries provenance and phrasal flags") {
    ProcessedSentence s = processed("these gears relate to the shaft");
    s.abstract_id = "US-77";
    s.sentence_index = 4;
    WordAttention wa = fixture_attention(s);
    auto best = beam_match({0, 2}, wa, s, MatchConfig{});
    REQUIRE(best.has_value());
    CHECK(best->head == "these gears");
    CHECK(best->relation == "relate to");
    CHECK(best->tail == "the shaft");
    CHECK(best->relation_is_phrasal);
    CHECK(best->abstract_id == "US-77");
    CHECK(best->sentence_index == 4);
    CHECK(best->score == doctest::Approx(1.15).epsilon(1e-9));
}

TEST_CASE("fact_preferred orders by score, tail distance, then index") {
    CandidateFact a, b;
    a.score = 1.0;
    b.score = 0.9;
    CHECK(fact_preferred(a, b));
    CHECK_FALSE(fact_preferred(b, a));

    b.score = 1.0;
    a.rel_idx = 1;
    a.tail_idx = 5;
    b.rel_idx = 3;
    b.tail_idx = 5;
    CHECK(fact_preferred(b, a));  // closer to its tail

    b.rel_idx = 1;
    b.tail_idx = 5;
    a.rel_idx = 1;
    CHECK_FALSE(fact_preferred(b, a));
    CHECK_FALSE(fact_preferred(a, b));  // equal on the whole key
}

TEST_CASE("beam size below one is a configuration error") {
    ProcessedSentence s = flat_sentence({{"a pump", UnitKind::NounPhrase},
                                         {"drives", UnitKind::Word},
                                         {"a shaft", UnitKind::NounPhrase}});
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(3, 3, 0.2);
    WordAttention wa = attention_for(s, m);
    MatchConfig cfg;
    cfg.beam_size = 0;
    CHECK_THROWS_AS(beam_match({0, 2}, wa, s, cfg), ConfigError);
}
