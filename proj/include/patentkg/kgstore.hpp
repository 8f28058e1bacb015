#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace patentkg {

// An accepted knowledge fact with provenance. head/relation/tail are
// canonical forms; the *_surface fields keep the original casing.
struct Triple {
    std::string head;
    std::string relation;
    std::string tail;
    std::string head_surface;
    std::string relation_surface;
    std::string tail_surface;
    double score = 0.0;
    std::string patent_id;
    int sentence_index = 0;
    bool relation_is_phrasal = false;

    friend bool operator==(const Triple&, const Triple&) = default;
};

struct EntityInfo {
    std::set<std::string> surfaces;
    std::int64_t frequency = 0;  // head/tail endpoint occurrences

    friend bool operator==(const EntityInfo&, const EntityInfo&) = default;
};

struct RelationInfo {
    std::int64_t count = 0;
    bool is_phrasal = false;

    friend bool operator==(const RelationInfo&, const RelationInfo&) = default;
};

// Accumulated graph: an indexed view over a multiset of triples. Values are
// immutable once built; parallel workers build shards and merge them.
struct KnowledgeGraph {
    std::map<std::string, EntityInfo> entities;
    std::vector<Triple> triples;
    std::map<std::string, RelationInfo> relation_stats;
};

struct KgStats {
    std::int64_t n_patents = 0;
    std::int64_t n_entities = 0;
    std::int64_t n_edges = 0;  // triple instances
    std::int64_t n_phrasal_verbs = 0;

    friend bool operator==(const KgStats&, const KgStats&) = default;
};

// Lower-cases, collapses internal whitespace, strips one leading determiner
// (the/a/an). Falls back to the lower-cased original when stripping would
// leave nothing. Throws DataError on empty input.
std::string canonicalize(const std::string& surface);

// Returns a graph extended with the given (already canonicalized) triples.
KnowledgeGraph add_triples(const KnowledgeGraph& kg, const std::vector<Triple>& triples);

// Union of two graphs; commutative and associative up to storage order.
KnowledgeGraph merge(const KnowledgeGraph& a, const KnowledgeGraph& b);

KgStats stats(const KnowledgeGraph& kg);

// Sub-graph within `depth` undirected hops of the entity (canonicalized
// before lookup). Unknown entities give an empty graph.
KnowledgeGraph query_neighbors(const KnowledgeGraph& kg, const std::string& entity,
                               int depth = 1);

// One JSONL line per triple, in the given order.
void write_triples(const std::vector<Triple>& triples, std::ostream& sink);

// Reads triple lines; malformed lines throw DataError naming the line.
std::vector<Triple> read_triples(std::istream& source);

// One JSONL line per triple.
void save(const KnowledgeGraph& kg, std::ostream& sink);

// Rebuilds a graph from its JSONL triples; malformed lines throw DataError
// naming the line.
KnowledgeGraph load(std::istream& source);

// JSON stats header written next to the persisted triples.
void write_stats(const KnowledgeGraph& kg, std::ostream& sink);

// Equality modulo triple storage order.
bool kg_equal(const KnowledgeGraph& a, const KnowledgeGraph& b);

}  // namespace patentkg
