#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "patentkg/attention.hpp"
#include "patentkg/errors.hpp"
#include "patentkg/providers.hpp"

using namespace patentkg;
namespace fs = std::filesystem;

namespace {

const std::string kDataDir = PATENTKG_DATA_DIR;

// Scratch directory for one test case; removed on destruction.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("patentkg-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::string file(const std::string& name, const std::string& content) const {
        fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

// A stub helper that answers with a fixed JSON payload, recording each
// request; stands in for the real spaCy/transformers tools.
std::string stub_tool(const TempDir& dir, const std::string& response_expr) {
    std::ostringstream src;
    src << "import json, sys\n"
        << "req = json.load(open(sys.argv[1]))\n"
        << "with open(sys.argv[0] + '.calls', 'a') as log:\n"
        << "    log.write(json.dumps(req) + '\\n')\n"
        << "json.dump(" << response_expr << ", open(sys.argv[2], 'w'))\n";
    return dir.file("stub_tool.py", src.str());
}

int call_count(const std::string& script) {
    std::ifstream in(script + ".calls");
    int n = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

nlohmann::json last_request(const std::string& script) {
    std::ifstream in(script + ".calls");
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    REQUIRE(!last.empty());
    return nlohmann::json::parse(last);
}

ExternalToolOptions options_for(const TempDir& dir, const std::string& script) {
    ExternalToolOptions opt;
    opt.script = script;
    opt.work_dir = dir.path.string();
    return opt;
}

const char* kParseResponse = R"PY({
  "sentences": [{
    "sentence": "a fan spins",
    "tokens": [
      {"text": "a", "pos": "DET", "dep": "det", "head_index": 1},
      {"text": "fan", "pos": "NOUN", "dep": "nsubj", "head_index": 2},
      {"text": "spins", "pos": "VERB", "dep": "ROOT", "head_index": 2}
    ],
    "noun_chunks": [[0, 2]]
  }]
})PY";

}  // namespace

TEST_CASE("fixture parse provider returns entries keyed by sentence") {
    FixtureParseProvider provider(kDataDir + "/fixtures/parse_core.json");
    CHECK(provider.size() == 7);
    ParsedSentence p = provider.parse("the magnetic force provided levitates the shaft");
    REQUIRE(p.tokens.size() == 7);
    CHECK(p.tokens[2].text == "force");
    CHECK(p.tokens[2].pos == Pos::Noun);
    CHECK(p.tokens[2].dep == "nsubj");
    CHECK(p.tokens[2].head_index == 4);
    CHECK(p.tokens[2].char_start == 13);
    CHECK(p.tokens[2].char_end == 18);
    REQUIRE(p.noun_chunks.size() == 2);
    CHECK(p.noun_chunks[0] == TokenSpan{0, 3});

    CHECK_THROWS_AS(provider.parse("an unseen sentence"), DataError);
}

TEST_CASE("fixture parse rejects token texts that are not in the sentence") {
    std::istringstream in(R"([{
        "sentence": "a fan",
        "tokens": [{"text": "a", "pos": "DET", "dep": "det", "head_index": 1},
                   {"text": "rotor", "pos": "NOUN", "dep": "ROOT", "head_index": 1}],
        "noun_chunks": []
    }])");
    CHECK_THROWS_AS(FixtureParseProvider(in, "inline"), DataError);
}

TEST_CASE("fixture attention provider serves unit and token granularity") {
    FixtureAttentionProvider provider(kDataDir + "/fixtures/attn_core.json");
    CHECK(provider.size() == 4);

    auto unit = provider.unit_attention(
        {"a bearingless hub assembly", "comprises", "a rim", "to receive",
         "a tube magnet"},
        AttentionConfig{});
    REQUIRE(unit.has_value());
    CHECK(unit->rows() == 5);
    CHECK((*unit)(1, 0) == doctest::Approx(0.4030));

    CHECK_FALSE(provider.unit_attention({"nope"}, AttentionConfig{}).has_value());

    EncoderAttention raw = provider.raw_attention({"rotates"}, AttentionConfig{});
    CHECK(raw.subwords == std::vector<std::string>{"rotates"});
    REQUIRE(raw.token_to_subwords.size() == 1);
    CHECK(raw.token_to_subwords[0] == std::pair<int, int>{0, 1});
    CHECK_THROWS_AS(provider.raw_attention({"nope"}, AttentionConfig{}), DataError);
}

TEST_CASE("fixture attention validates matrices at load time") {
    std::istringstream bad_rows(R"([{
        "units_or_tokens": ["a", "b"],
        "matrix": [[0.5, 0.5]]
    }])");
    CHECK_THROWS_AS(FixtureAttentionProvider(bad_rows, "inline"), DataError);

    std::istringstream above_one(R"([{
        "units_or_tokens": ["a", "b"],
        "matrix": [[0.9, 0.9], [0.5, 0.5]]
    }])");
    CHECK_THROWS_AS(FixtureAttentionProvider(above_one, "inline"), DataError);

    std::istringstream ragged(R"([{
        "units_or_tokens": ["a", "b"],
        "matrix": [[0.5, 0.5], [1.0]]
    }])");
    CHECK_THROWS_AS(FixtureAttentionProvider(ragged, "inline"), DataError);
}

TEST_CASE("external parse provider speaks the request protocol and caches") {
    TempDir dir;
    std::string script = stub_tool(dir, nlohmann::json::parse(kParseResponse).dump());
    ExternalParseProvider provider(options_for(dir, script), "stub_model");

    ParsedSentence p = provider.parse("a fan spins");
    REQUIRE(p.tokens.size() == 3);
    CHECK(p.tokens[1].text == "fan");
    CHECK(p.tokens[1].char_start == 2);
    REQUIRE(p.noun_chunks.size() == 1);

    nlohmann::json req = last_request(script);
    CHECK(req["sentences"] == nlohmann::json::array({"a fan spins"}));
    CHECK(req["model"] == "stub_model");

    provider.parse("a fan spins");
    CHECK(call_count(script) == 1);  // second call served from the cache
}

TEST_CASE("external attention provider decodes the matrix and alignment") {
    TempDir dir;
    nlohmann::json response = {
        {"subwords", {"a", "fa", "##n"}},
        {"matrix", {{0.2, 0.4, 0.4}, {0.3, 0.3, 0.4}, {0.25, 0.25, 0.5}}},
        {"token_to_subwords", {{0, 1}, {1, 3}}}};
    std::string script = stub_tool(dir, response.dump());
    ExternalAttentionProvider provider(options_for(dir, script));

    AttentionConfig cfg;
    cfg.layer = 7;
    cfg.model_id = "stub-encoder";
    EncoderAttention got = provider.raw_attention({"a", "fan"}, cfg);
    CHECK(got.subwords.size() == 3);
    CHECK(got.matrix.rows() == 3);
    CHECK(got.token_to_subwords.size() == 2);

    nlohmann::json req = last_request(script);
    CHECK(req["tokens"] == nlohmann::json::array({"a", "fan"}));
    CHECK(req["model"] == "stub-encoder");
    CHECK(req["layer"] == 7);
    CHECK(req["max_tokens"] == 512);
}

TEST_CASE("tool error payloads map onto the error taxonomy") {
    TempDir dir;
    auto provider_for = [&](const nlohmann::json& payload) {
        std::string script = stub_tool(dir, payload.dump());
        return ExternalParseProvider(options_for(dir, script), "m");
    };

    auto unavailable = provider_for({{"error", "no spacy"}, {"kind", "unavailable"}});
    CHECK_THROWS_AS(unavailable.parse("x"), ConfigError);

    auto misconfig = provider_for({{"error", "bad layer"}, {"kind", "config"}});
    CHECK_THROWS_AS(misconfig.parse("x"), ConfigError);

    auto broken = provider_for({{"error", "boom"}, {"kind", "data"}});
    CHECK_THROWS_AS(broken.parse("x"), DataError);
}

TEST_CASE("over-length sentences surface as SentenceTooLong") {
    TempDir dir;
    nlohmann::json payload = {{"error", "sentence has 700 tokens"},
                              {"kind", "too_long"}};
    std::string script = stub_tool(dir, payload.dump());
    ExternalAttentionProvider provider(options_for(dir, script));
    CHECK_THROWS_AS(provider.raw_attention({"x"}, AttentionConfig{}), SentenceTooLong);
}

TEST_CASE("a crashing helper reports its stderr tail") {
    TempDir dir;
    std::string script =
        dir.file("crash.py", "import sys\nsys.stderr.write('kaput')\nsys.exit(3)\n");
    ExternalParseProvider provider(options_for(dir, script), "m");
    CHECK_THROWS_WITH_AS(provider.parse("x"), doctest::Contains("kaput"), DataError);
}

TEST_CASE("a missing interpreter is a configuration error") {
    TempDir dir;
    std::string script = dir.file("noop.py", "");
    ExternalToolOptions opt = options_for(dir, script);
    opt.python = "/nonexistent/python3";
    ExternalParseProvider provider(opt, "m");
    CHECK_THROWS_AS(provider.parse("x"), ConfigError);
}

TEST_CASE("a helper that writes no response file is a data error") {
    TempDir dir;
    std::string script = dir.file("silent.py", "import sys\n");
    ExternalParseProvider provider(options_for(dir, script), "m");
    CHECK_THROWS_AS(provider.parse("x"), DataError);
}

TEST_CASE("request and response files are cleaned up afterwards") {
    TempDir dir;
    std::string script = stub_tool(dir, nlohmann::json::parse(kParseResponse).dump());
    ExternalParseProvider provider(options_for(dir, script), "m");
    provider.parse("a fan spins");
    int leftovers = 0;
    for (const auto& entry : fs::directory_iterator(dir.path)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("patentkg-req", 0) == 0 || name.rfind("patentkg-res", 0) == 0 ||
            name.rfind("patentkg-err", 0) == 0)
            ++leftovers;
    }
    CHECK(leftovers == 0);
}
