#include <doctest.h>

#include <algorithm>
#include <set>

#include "patentkg/constraints.hpp"
#include "patentkg/errors.hpp"
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

CandidateFact fact(double score, int head, int rel, int tail, int sentence = 0) {
    CandidateFact f;
    f.head = "h" + std::to_string(head);
    f.relation = "r" + std::to_string(rel);
    f.tail = "t" + std::to_string(tail);
    f.score = score;
    f.head_idx = head;
    f.rel_idx = rel;
    f.tail_idx = tail;
    f.abstract_id = "abs";
    f.sentence_index = sentence;
    return f;
}

std::vector<double> scores(const AbstractCandidates& c) {
    std::vector<double> out;
    for (const auto& f : c.facts) out.push_back(f.score);
    return out;
}

PatentRecord record_with(const std::string& id, const std::string& abstract) {
    PatentRecord r;
    r.patent_id = id;
    r.application_id = id;
    r.earliest_filing_id = id;
    r.abstract = abstract;
    r.filing_year = 2019;
    return r;
}

}  // namespace

TEST_CASE("median filter keeps scores at or above the middle value") {
    AbstractCandidates cands{"abs", {fact(0.9, 0, 1, 2), fact(0.5, 0, 1, 3),
                                     fact(0.1, 2, 3, 4)}};
    AbstractCandidates kept = filter_by_median(cands);
    CHECK(scores(kept) == std::vector<double>{0.9, 0.5});
}

TEST_CASE("even counts use the mean of the two middle scores") {
    AbstractCandidates cands{"abs", {fact(1.0, 0, 1, 2), fact(0.8, 0, 1, 3),
                                     fact(0.4, 2, 3, 4), fact(0.2, 2, 3, 5)}};
    // median = (0.8 + 0.4) / 2 = 0.6
    AbstractCandidates kept = filter_by_median(cands);
    CHECK(scores(kept) == std::vector<double>{1.0, 0.8});
}

TEST_CASE("median filter is stable and keeps exact-median facts") {
    AbstractCandidates cands{"abs", {fact(0.5, 0, 1, 2), fact(0.9, 0, 1, 3),
                                     fact(0.1, 2, 3, 4)}};
    AbstractCandidates kept = filter_by_median(cands);
    CHECK(scores(kept) == std::vector<double>{0.5, 0.9});
}

TEST_CASE("median filter on zero or one candidate keeps everything") {
    AbstractCandidates empty{"abs", {}};
    CHECK(filter_by_median(empty).facts.empty());
    AbstractCandidates one{"abs", {fact(0.3, 0, 1, 2)}};
    CHECK(filter_by_median(one).facts.size() == 1);
}

TEST_CASE("head pass keeps only the best relation per head") {
    AbstractCandidates cands{"abs",
                             {fact(0.9, 0, 1, 2),    // head 0 via r1: winner
                              fact(0.4, 0, 3, 4)}};  // head 0 via r3: dropped
    AbstractCandidates kept = resolve_relations(cands);
    REQUIRE(kept.facts.size() == 1);
    CHECK(kept.facts[0].rel_idx == 1);
}

TEST_CASE("several tails under the winning relation all survive the head pass") {
    AbstractCandidates cands{"abs",
                             {fact(0.9, 0, 1, 2), fact(0.5, 0, 1, 4),
                              fact(0.4, 0, 3, 4)}};
    AbstractCandidates kept = resolve_relations(cands);
    // r1 wins for head 0; its two tails survive; tail 4 then keeps only
    // its strongest fact, which is already the r1 one.
    REQUIRE(kept.facts.size() == 2);
    CHECK(kept.facts[0].tail_idx == 2);
    CHECK(kept.facts[1].tail_idx == 4);
    for (const auto& f : kept.facts) CHECK(f.rel_idx == 1);
}

TEST_CASE("tail pass keeps a single fact per tail") {
    AbstractCandidates cands{"abs",
                             {fact(0.9, 0, 1, 4),    // wins tail 4
                              fact(0.8, 2, 3, 4)}};  // same tail, other head
    AbstractCandidates kept = resolve_relations(cands);
    REQUIRE(kept.facts.size() == 1);
    CHECK(kept.facts[0].head_idx == 0);
}

TEST_CASE("resolution is independent per sentence") {
    AbstractCandidates cands{"abs",
                             {fact(0.9, 0, 1, 4, 0), fact(0.8, 2, 3, 4, 1)}};
    AbstractCandidates kept = resolve_relations(cands);
    CHECK(kept.facts.size() == 2);  // same indices, different sentences
}

TEST_CASE("resolution preserves input order among the kept facts") {
    AbstractCandidates cands{"abs",
                             {fact(0.5, 0, 1, 2), fact(0.9, 3, 4, 5),
                              fact(0.7, 0, 1, 6)}};
    AbstractCandidates kept = resolve_relations(cands);
    REQUIRE(kept.facts.size() == 3);
    CHECK(kept.facts[0].score == 0.5);
    CHECK(kept.facts[1].score == 0.9);
    CHECK(kept.facts[2].score == 0.7);
}

TEST_CASE("fact_to_triple canonicalizes and keeps surfaces") {
    CandidateFact f = fact(1.25, 0, 1, 2);
    f.head = "The Magnetic force";
    f.relation = "Levitates";
    f.tail = "a  Shaft";
    f.relation_is_phrasal = true;
    f.abstract_id = "US-9";
    f.sentence_index = 3;
    Triple t = fact_to_triple(f);
    CHECK(t.head == "magnetic force");
    CHECK(t.relation == "levitates");
    CHECK(t.tail == "shaft");
    CHECK(t.head_surface == "The Magnetic force");
    CHECK(t.tail_surface == "a  Shaft");
    CHECK(t.patent_id == "US-9");
    CHECK(t.sentence_index == 3);
    CHECK(t.score == 1.25);
    CHECK(t.relation_is_phrasal);
}

TEST_CASE("full extraction applies threshold and resolution") {
    PatentRecord rec = record_with(
        "hub-001", "a bearingless hub assembly comprises a rim to receive a tube magnet");
    std::vector<Triple> triples =
        extract_from_abstract(rec, core_parses(), core_attn());
    REQUIRE(triples.size() == 2);
    CHECK(triples[0].head == "bearingless hub assembly");
    CHECK(triples[0].relation == "comprises");
    CHECK(triples[0].tail == "rim");
    CHECK(triples[0].score == doctest::Approx(1.0776).epsilon(1e-9));
    CHECK(triples[1].head == "rim");
    CHECK(triples[1].relation == "to receive");
    CHECK(triples[1].tail == "tube magnet");
    CHECK(triples[1].score == doctest::Approx(0.9499).epsilon(1e-9));
    CHECK(triples[1].relation_is_phrasal);
    for (const Triple& t : triples) {
        CHECK(t.patent_id == "hub-001");
        CHECK(t.sentence_index == 0);
    }
}

TEST_CASE("extraction records the phrasal relation of a particle verb") {
    PatentRecord rec = record_with("US-1003-A", "these gears relate to the shaft");
    std::vector<Triple> triples =
        extract_from_abstract(rec, core_parses(), core_attn());
    REQUIRE(triples.size() == 1);
    CHECK(triples[0].head == "these gears");  // only the/a/an are stripped
    CHECK(triples[0].relation == "relate to");
    CHECK(triples[0].tail == "shaft");
    CHECK(triples[0].relation_is_phrasal);
    CHECK(triples[0].score == doctest::Approx(1.15).epsilon(1e-9));
}

TEST_CASE("an empty abstract extracts nothing") {
    PatentRecord rec = record_with("US-0", "");
    CHECK(extract_from_abstract(rec, core_parses(), core_attn()).empty());
}

TEST_CASE("a sentence without fixtures is skipped, not fatal") {
    PatentRecord rec = record_with(
        "mix-1",
        "these gears relate to the shaft; no fixture covers this sentence");
    std::vector<Triple> triples =
        extract_from_abstract(rec, core_parses(), core_attn());
    REQUIRE(triples.size() == 1);
    CHECK(triples[0].relation == "relate to");
}

TEST_CASE("configuration errors are not swallowed by the sentence loop") {
    struct BrokenParse : ParseProvider {
        ParsedSentence parse(const std::string&) override {
            throw ConfigError("parser misconfigured");
        }
    } broken;
    PatentRecord rec = record_with("US-0", "these gears relate to the shaft");
    CHECK_THROWS_AS(extract_from_abstract(rec, broken, core_attn()), ConfigError);
}

TEST_CASE("median threshold applies across sentences of one abstract") {
    // Two sentences with fixtures: scores 1.0776, 0.6760, 0.9499 (first)
    // and 1.15 (second). Median of the four best-per-pair candidates
    // decides jointly; here per-pair bests are 1.0776, 0.6760, 0.9499,
    // 1.15 -> median (0.9499+1.0776)/2; 0.6760 and 0.9499 fall below.
    PatentRecord rec = record_with(
        "joint-1",
        "a bearingless hub assembly comprises a rim to receive a tube magnet; "
        "these gears relate to the shaft");
    std::vector<Triple> triples =
        extract_from_abstract(rec, core_parses(), core_attn());
    std::multiset<std::string> rels;
    for (const Triple& t : triples) rels.insert(t.relation);
    CHECK(rels == std::multiset<std::string>{"comprises", "relate to"});
}
