#include "patentkg/kgstore.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <tuple>

#include "patentkg/errors.hpp"

namespace patentkg {

namespace {

auto triple_key(const Triple& t) {
    return std::tie(t.patent_id, t.sentence_index, t.head, t.relation, t.tail,
                    t.score, t.head_surface, t.relation_surface, t.tail_surface,
                    t.relation_is_phrasal);
}

std::vector<Triple> sorted_triples(const KnowledgeGraph& kg) {
    std::vector<Triple> out = kg.triples;
    std::sort(out.begin(), out.end(),
              [](const Triple& a, const Triple& b) { return triple_key(a) < triple_key(b); });
    return out;
}

void index_triple(KnowledgeGraph& kg, const Triple& t) {
    for (const auto* side : {&t.head, &t.tail}) {
        EntityInfo& info = kg.entities[*side];
        info.frequency += 1;
        info.surfaces.insert(side == &t.head ? t.head_surface : t.tail_surface);
    }
    RelationInfo& rel = kg.relation_stats[t.relation];
    rel.count += 1;
    rel.is_phrasal = rel.is_phrasal || t.relation_is_phrasal;
    kg.triples.push_back(t);
}

nlohmann::ordered_json triple_to_json(const Triple& t) {
    return nlohmann::ordered_json{{"patent_id", t.patent_id},
                                  {"sentence_index", t.sentence_index},
                                  {"head", t.head},
                                  {"head_surface", t.head_surface},
                                  {"relation", t.relation},
                                  {"relation_surface", t.relation_surface},
                                  {"tail", t.tail},
                                  {"tail_surface", t.tail_surface},
                                  {"score", t.score},
                                  {"relation_is_phrasal", t.relation_is_phrasal}};
}

Triple triple_from_json(const nlohmann::json& j, std::size_t lineno) {
    auto fail = [&](const std::string& why) -> DataError {
        return DataError("line " + std::to_string(lineno) + ": " + why);
    };
    if (!j.is_object()) throw fail("not a JSON object");
    Triple t;
    try {
        t.patent_id = j.at("patent_id").get<std::string>();
        t.sentence_index = j.at("sentence_index").get<int>();
        t.head = j.at("head").get<std::string>();
        t.head_surface = j.at("head_surface").get<std::string>();
        t.relation = j.at("relation").get<std::string>();
        t.relation_surface = j.at("relation_surface").get<std::string>();
        t.tail = j.at("tail").get<std::string>();
        t.tail_surface = j.at("tail_surface").get<std::string>();
        t.score = j.at("score").get<double>();
        t.relation_is_phrasal = j.at("relation_is_phrasal").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw fail(e.what());
    }
    if (t.head.empty() || t.relation.empty() || t.tail.empty())
        throw fail("empty canonical field");
    if (t.score < 0.0) throw fail("negative score");
    return t;
}

}  // namespace

std::string canonicalize(const std::string& surface) {
    if (surface.empty()) throw DataError("cannot canonicalize an empty string");

    std::string lowered;
    lowered.reserve(surface.size());
    bool in_space = true;  // also trims leading whitespace
    for (char c : surface) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) lowered += ' ';
            in_space = true;
        } else {
            lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            in_space = false;
        }
    }
    while (!lowered.empty() && lowered.back() == ' ') lowered.pop_back();
    if (lowered.empty()) throw DataError("cannot canonicalize a blank string");

    for (const char* det : {"the ", "a ", "an "}) {
        if (lowered.rfind(det, 0) == 0) {
            std::string stripped = lowered.substr(std::string(det).size());
            return stripped.empty() ? lowered : stripped;
        }
    }
    return lowered;
}

KnowledgeGraph add_triples(const KnowledgeGraph& kg, const std::vector<Triple>& triples) {
    KnowledgeGraph out = kg;
    for (const Triple& t : triples) index_triple(out, t);
    return out;
}

KnowledgeGraph merge(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    KnowledgeGraph out = a;
    for (const auto& [canonical, info] : b.entities) {
        EntityInfo& dst = out.entities[canonical];
        dst.frequency += info.frequency;
        dst.surfaces.insert(info.surfaces.begin(), info.surfaces.end());
    }
    for (const auto& [relation, info] : b.relation_stats) {
        RelationInfo& dst = out.relation_stats[relation];
        dst.count += info.count;
        dst.is_phrasal = dst.is_phrasal || info.is_phrasal;
    }
    out.triples.insert(out.triples.end(), b.triples.begin(), b.triples.end());
    return out;
}

KgStats stats(const KnowledgeGraph& kg) {
    KgStats s;
    std::set<std::string> patents;
    for (const Triple& t : kg.triples) {
        patents.insert(t.patent_id);
        if (t.relation_is_phrasal) ++s.n_phrasal_verbs;
    }
    s.n_patents = static_cast<std::int64_t>(patents.size());
    s.n_entities = static_cast<std::int64_t>(kg.entities.size());
    s.n_edges = static_cast<std::int64_t>(kg.triples.size());
    return s;
}

KnowledgeGraph query_neighbors(const KnowledgeGraph& kg, const std::string& entity,
                               int depth) {
    if (depth < 1) throw ConfigError("query depth must be at least 1");
    const std::string start = canonicalize(entity);
    if (!kg.entities.count(start)) return {};

    // Undirected adjacency over triple endpoints.
    std::map<std::string, std::vector<std::size_t>> incident;
    for (std::size_t i = 0; i < kg.triples.size(); ++i) {
        incident[kg.triples[i].head].push_back(i);
        incident[kg.triples[i].tail].push_back(i);
    }

    std::map<std::string, int> dist{{start, 0}};
    std::deque<std::string> frontier{start};
    std::set<std::size_t> picked;
    while (!frontier.empty()) {
        std::string node = frontier.front();
        frontier.pop_front();
        int d = dist[node];
        if (d >= depth) continue;
        for (std::size_t idx : incident[node]) {
            picked.insert(idx);
            const Triple& t = kg.triples[idx];
            for (const std::string& other : {t.head, t.tail}) {
                if (!dist.count(other)) {
                    dist[other] = d + 1;
                    frontier.push_back(other);
                }
            }
        }
    }

    std::vector<Triple> selected;
    selected.reserve(picked.size());
    for (std::size_t idx : picked) selected.push_back(kg.triples[idx]);
    return add_triples(KnowledgeGraph{}, selected);
}

void write_triples(const std::vector<Triple>& triples, std::ostream& sink) {
    for (const Triple& t : triples) sink << triple_to_json(t).dump() << '\n';
    if (!sink) throw DataError("failed to write triples");
}

std::vector<Triple> read_triples(std::istream& source) {
    std::vector<Triple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(source, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": invalid JSON: " +
                            e.what());
        }
        out.push_back(triple_from_json(j, lineno));
    }
    return out;
}

void save(const KnowledgeGraph& kg, std::ostream& sink) {
    write_triples(kg.triples, sink);
}

KnowledgeGraph load(std::istream& source) {
    return add_triples(KnowledgeGraph{}, read_triples(source));
}

void write_stats(const KnowledgeGraph& kg, std::ostream& sink) {
    KgStats s = stats(kg);
    sink << nlohmann::ordered_json{{"n_patents", s.n_patents},
                                   {"n_entities", s.n_entities},
                                   {"n_edges", s.n_edges},
                                   {"n_phrasal_verbs", s.n_phrasal_verbs}}
                .dump(2)
         << '\n';
}

bool kg_equal(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.entities == b.entities && a.relation_stats == b.relation_stats &&
           sorted_triples(a) == sorted_triples(b);
}

}  // namespace patentkg
