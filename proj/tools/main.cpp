// patent-kg: command-line surface over the extraction pipeline.
//
// Subcommands: ingest, extract, build-kg, query, eval-entities,
// eval-relations, dump-attention. Config precedence is CLI flags over the
// --config JSON file over built-in defaults. Logs go to stderr, data to
// files or stdout. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "patentkg/corpus.hpp"
#include "patentkg/errors.hpp"
#include "patentkg/eval.hpp"
#include "patentkg/kgstore.hpp"
#include "patentkg/pipeline.hpp"
#include "patentkg/providers.hpp"

using namespace patentkg;

namespace {

struct RunConfig {
    std::string model = "bert-base-uncased";
    int layer = 9;
    int beam_size = 2;
    int jobs = 1;
    bool strict = false;
    std::string threshold_mode = "median";

    std::string corpus;
    std::string out;
    std::string kg;
    std::string benchmark;
    std::string fixture_attn;
    std::string fixture_parse;
    std::string entities;
    std::string relations;
    int depth = 1;

    // ingest filter knobs (config file only)
    std::string cpc_prefix = "F";
    int year_min = 2016;
    int year_max = 2021;
    bool require_earliest = true;

    // positionals
    std::string triples_path;
    std::string query_entity;
    std::string sentence;
};

void apply_config_json(const nlohmann::json& j, RunConfig& cfg) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "model")
                cfg.model = value.get<std::string>();
            else if (key == "layer")
                cfg.layer = value.get<int>();
            else if (key == "beam_size")
                cfg.beam_size = value.get<int>();
            else if (key == "jobs")
                cfg.jobs = value.get<int>();
            else if (key == "strict")
                cfg.strict = value.get<bool>();
            else if (key == "threshold_mode")
                cfg.threshold_mode = value.get<std::string>();
            else if (key == "corpus")
                cfg.corpus = value.get<std::string>();
            else if (key == "out")
                cfg.out = value.get<std::string>();
            else if (key == "kg")
                cfg.kg = value.get<std::string>();
            else if (key == "benchmark")
                cfg.benchmark = value.get<std::string>();
            else if (key == "fixture_attn")
                cfg.fixture_attn = value.get<std::string>();
            else if (key == "fixture_parse")
                cfg.fixture_parse = value.get<std::string>();
            else if (key == "entities")
                cfg.entities = value.get<std::string>();
            else if (key == "relations")
                cfg.relations = value.get<std::string>();
            else if (key == "depth")
                cfg.depth = value.get<int>();
            else if (key == "cpc_prefix")
                cfg.cpc_prefix = value.get<std::string>();
            else if (key == "year_min")
                cfg.year_min = value.get<int>();
            else if (key == "year_max")
                cfg.year_max = value.get<int>();
            else if (key == "require_earliest")
                cfg.require_earliest = value.get<bool>();
            else
                throw ConfigError("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

void apply_config_file(int argc, char** argv, RunConfig& cfg) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0)
            path = a.substr(std::string("--config=").size());
    }
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    apply_config_json(j, cfg);
}

void validate_common(const RunConfig& cfg) {
    if (cfg.jobs < 1) throw ConfigError("--jobs must be at least 1");
    if (cfg.beam_size < 1) throw ConfigError("--beam-size must be at least 1");
    if (cfg.layer < 1) throw ConfigError("--layer must be at least 1");
    if (cfg.threshold_mode != "median")
        throw ConfigError("unsupported threshold_mode '" + cfg.threshold_mode +
                          "' (only 'median')");
}

std::ifstream open_input(const std::string& path, const char* what) {
    if (path.empty())
        throw ConfigError(std::string("missing ") + what + " path");
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + path);
    return in;
}

std::ofstream open_output(const std::string& path, const char* what) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError(std::string("cannot write ") + what + ": " + path);
    return out;
}

std::unique_ptr<ParseProvider> make_parse_provider(const RunConfig& cfg) {
    if (!cfg.fixture_parse.empty())
        return std::make_unique<FixtureParseProvider>(cfg.fixture_parse);
    return std::make_unique<ExternalParseProvider>();
}

std::unique_ptr<AttentionProvider> make_attention_provider(const RunConfig& cfg) {
    if (!cfg.fixture_attn.empty())
        return std::make_unique<FixtureAttentionProvider>(cfg.fixture_attn);
    return std::make_unique<ExternalAttentionProvider>();
}

CorpusFormat format_for(const std::string& path) {
    return path.size() >= 4 && path.substr(path.size() - 4) == ".csv"
               ? CorpusFormat::Csv
               : CorpusFormat::Jsonl;
}

std::vector<PatentRecord> read_corpus(const RunConfig& cfg) {
    std::ifstream in = open_input(cfg.corpus, "corpus");
    CorpusParseResult parsed =
        parse_corpus_file(in, format_for(cfg.corpus), cfg.strict);
    for (const ParseIssue& issue : parsed.issues)
        std::cerr << (issue.is_error ? "error: " : "warning: ") << issue.message
                  << '\n';
    return parsed.records;
}

ExtractionOptions extraction_options(const RunConfig& cfg) {
    ExtractionOptions options;
    options.match.beam_size = cfg.beam_size;
    options.attention.layer = cfg.layer;
    options.attention.model_id = cfg.model;
    options.jobs = cfg.jobs;
    return options;
}

std::set<std::string> read_term_file(const std::string& path, const char* what) {
    std::ifstream in = open_input(path, what);
    std::set<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        terms.insert(line);
    }
    return terms;
}

int cmd_ingest(const RunConfig& cfg) {
    std::vector<PatentRecord> records = read_corpus(cfg);
    std::vector<PatentRecord> kept = filter_corpus(
        records, CorpusFilter{cfg.cpc_prefix, cfg.year_min, cfg.year_max,
                              cfg.require_earliest});

    if (cfg.out.empty()) throw ConfigError("missing --out path for ingest");
    std::ofstream out = open_output(cfg.out, "output file");
    write_corpus_jsonl(kept, out);

    std::cout << "kept " << kept.size() << " dropped "
              << records.size() - kept.size() << '\n';
    return 0;
}

int cmd_extract(const RunConfig& cfg) {
    std::vector<PatentRecord> records = read_corpus(cfg);
    auto parse = make_parse_provider(cfg);
    auto attn = make_attention_provider(cfg);

    std::vector<Triple> triples =
        flatten(run_extraction(records, *parse, *attn, extraction_options(cfg)));

    if (cfg.out.empty()) {
        write_triples(triples, std::cout);
    } else {
        std::ofstream out = open_output(cfg.out, "output file");
        write_triples(triples, out);
    }
    std::cerr << "extracted " << triples.size() << " triples from "
              << records.size() << " abstracts\n";
    return 0;
}

int cmd_build_kg(const RunConfig& cfg) {
    std::ifstream in = open_input(cfg.triples_path, "triples file");
    KnowledgeGraph kg = add_triples(KnowledgeGraph{}, read_triples(in));

    if (cfg.kg.empty()) throw ConfigError("missing --kg output path");
    std::ofstream out = open_output(cfg.kg, "knowledge graph file");
    save(kg, out);

    write_stats(kg, std::cout);
    return 0;
}

int cmd_query(const RunConfig& cfg) {
    std::ifstream in = open_input(cfg.kg, "knowledge graph");
    KnowledgeGraph kg = load(in);
    KnowledgeGraph sub = query_neighbors(kg, cfg.query_entity, cfg.depth);
    write_triples(sub.triples, std::cout);
    std::cerr << "query '" << cfg.query_entity << "' depth " << cfg.depth << ": "
              << sub.triples.size() << " triples\n";
    return 0;
}

int run_eval(const RunConfig& cfg, bool relations) {
    std::ifstream bench_in = open_input(cfg.benchmark, "benchmark");
    TermBenchmark benchmark = load_benchmark(bench_in);

    const std::string& list_path = relations ? cfg.relations : cfg.entities;
    std::set<std::string> subjects;
    if (!list_path.empty()) {
        subjects = read_term_file(list_path, relations ? "relation list"
                                                       : "entity list");
    } else if (!cfg.kg.empty()) {
        std::ifstream kg_in = open_input(cfg.kg, "knowledge graph");
        KnowledgeGraph kg = load(kg_in);
        if (relations)
            for (const auto& [rel, info] : kg.relation_stats) subjects.insert(rel);
        else
            for (const auto& [ent, info] : kg.entities) subjects.insert(ent);
    } else {
        throw ConfigError(relations
                              ? "eval-relations needs --kg or --relations"
                              : "eval-entities needs --kg or --entities");
    }

    EvalResult result = relations ? relation_recall(subjects, benchmark)
                                  : recall_rate(subjects, benchmark);
    write_eval_table(result, std::cout);
    if (!cfg.out.empty()) {
        std::ofstream out = open_output(cfg.out, "output file");
        write_eval_json(result, out);
    }
    return 0;
}

int cmd_dump_attention(const RunConfig& cfg) {
    auto parse = make_parse_provider(cfg);
    auto attn = make_attention_provider(cfg);

    AttentionConfig attn_cfg;
    attn_cfg.layer = cfg.layer;
    attn_cfg.model_id = cfg.model;

    ProcessedSentence sent = preprocess_sentence(cfg.sentence, *parse, "cli", 0);
    std::vector<std::string> unit_texts;
    for (const WordUnit& u : sent.units) unit_texts.push_back(u.text);

    WordAttention wa;
    if (auto direct = attn->unit_attention(unit_texts, attn_cfg)) {
        validate_attention_matrix(*direct);
        wa = WordAttention{unit_texts, std::move(*direct)};
    } else {
        wa = aggregate_to_words(compute_token_attention(sent.tokens, attn_cfg, *attn),
                                sent.units);
    }

    if (cfg.out.empty()) {
        dump_attention(wa, std::cout);
    } else {
        std::ofstream out = open_output(cfg.out, "output file");
        dump_attention(wa, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        apply_config_file(argc, argv, cfg);
    } catch (const PipelineError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    CLI::App app{"unsupervised patent knowledge-graph extraction"};
    app.require_subcommand(1);
    // the config pre-scan accepts --config anywhere, so the parser must too
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags win)");

    auto add_pipeline_opts = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "encoder model id")
            ->capture_default_str();
        sub->add_option("--layer", cfg.layer, "encoder layer, 1-based")
            ->capture_default_str();
        sub->add_option("--beam-size", cfg.beam_size, "relation beam width")
            ->capture_default_str();
        sub->add_option("--fixture-parse", cfg.fixture_parse,
                        "parse fixture JSON (real parser otherwise)");
        sub->add_option("--fixture-attn", cfg.fixture_attn,
                        "attention fixture JSON (real encoder otherwise)");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "parse and filter a corpus");
    ingest->add_option("--corpus", cfg.corpus, "corpus file (.jsonl or .csv)");
    ingest->add_option("--out", cfg.out, "filtered corpus JSONL");
    ingest->add_flag("--strict,!--no-strict", cfg.strict,
                     "stop on the first malformed record");

    CLI::App* extract =
        app.add_subcommand("extract", "extract triples from abstracts");
    extract->add_option("--corpus", cfg.corpus, "filtered corpus JSONL");
    extract->add_option("--out", cfg.out, "triples JSONL (stdout otherwise)");
    extract->add_option("--jobs", cfg.jobs, "parallel workers")
        ->capture_default_str();
    extract->add_flag("--strict,!--no-strict", cfg.strict,
                      "stop on the first malformed record");
    add_pipeline_opts(extract);

    CLI::App* build =
        app.add_subcommand("build-kg", "index a triples file into a graph");
    build->add_option("triples", cfg.triples_path, "triples JSONL file")
        ->required();
    build->add_option("--kg", cfg.kg, "knowledge graph output path");

    CLI::App* query = app.add_subcommand("query", "neighborhood of an entity");
    query->add_option("entity", cfg.query_entity, "entity to look up")
        ->required();
    query->add_option("--kg", cfg.kg, "knowledge graph path");
    query->add_option("--depth", cfg.depth, "number of hops")
        ->capture_default_str();

    CLI::App* eval_entities =
        app.add_subcommand("eval-entities", "entity recall against a benchmark");
    eval_entities->add_option("--kg", cfg.kg, "knowledge graph path");
    eval_entities->add_option("--entities", cfg.entities,
                              "entity list file, one per line");
    eval_entities->add_option("--benchmark", cfg.benchmark, "benchmark file");
    eval_entities->add_option("--out", cfg.out, "also write the result JSON here");

    CLI::App* eval_relations =
        app.add_subcommand("eval-relations", "relation recall against a benchmark");
    eval_relations->add_option("--kg", cfg.kg, "knowledge graph path");
    eval_relations->add_option("--relations", cfg.relations,
                               "relation list file, one per line");
    eval_relations->add_option("--benchmark", cfg.benchmark, "benchmark file");
    eval_relations->add_option("--out", cfg.out,
                               "also write the result JSON here");

    CLI::App* dump =
        app.add_subcommand("dump-attention", "word-unit attention as TSV");
    dump->add_option("sentence", cfg.sentence, "sentence to analyze")
        ->required();
    dump->add_option("--out", cfg.out, "TSV output path (stdout otherwise)");
    add_pipeline_opts(dump);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.get_name() << ": " << e.what() << '\n';
        return 2;
    }

    try {
        validate_common(cfg);
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (extract->parsed()) return cmd_extract(cfg);
        if (build->parsed()) return cmd_build_kg(cfg);
        if (query->parsed()) return cmd_query(cfg);
        if (eval_entities->parsed()) return run_eval(cfg, false);
        if (eval_relations->parsed()) return run_eval(cfg, true);
        if (dump->parsed()) return cmd_dump_attention(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;  // no subcommand (require_subcommand should prevent this)
}
