#include "patentkg/providers.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "patentkg/errors.hpp"
#include "tool_scripts.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace patentkg {

namespace {

json parse_json(std::istream& in, const std::string& origin) {
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(origin + ": invalid JSON: " + e.what());
    }
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open fixture file: " + path);
    return parse_json(in, path);
}

// Fixture files hold either one entry or an array of entries.
std::vector<json> as_entries(const json& doc, const std::string& origin) {
    if (doc.is_object()) return {doc};
    if (doc.is_array()) {
        std::vector<json> out;
        for (const auto& e : doc) {
            if (!e.is_object())
                throw DataError(origin + ": fixture entries must be objects");
            out.push_back(e);
        }
        return out;
    }
    throw DataError(origin + ": fixture must be an object or an array of objects");
}

const json& require(const json& entry, const char* key, const std::string& origin) {
    auto it = entry.find(key);
    if (it == entry.end())
        throw DataError(origin + ": fixture entry is missing \"" +
                        std::string(key) + "\"");
    return *it;
}

// Token texts appear in sentence order, so offsets follow from a single
// left-to-right scan.
void assign_char_offsets(const std::string& sentence, std::vector<Token>& tokens,
                         const std::string& origin) {
    std::size_t cursor = 0;
    for (Token& t : tokens) {
        std::size_t at = sentence.find(t.text, cursor);
        if (t.text.empty() || at == std::string::npos)
            throw DataError(origin + ": token '" + t.text +
                            "' not found in sentence '" + sentence + "'");
        t.char_start = static_cast<int>(at);
        t.char_end = static_cast<int>(at + t.text.size());
        cursor = at + t.text.size();
    }
}

ParsedSentence decode_parse_entry(const json& entry, const std::string& sentence,
                                  const std::string& origin) {
    ParsedSentence parsed;
    for (const json& jt : require(entry, "tokens", origin)) {
        Token t;
        t.text = require(jt, "text", origin).get<std::string>();
        t.pos = pos_from_string(require(jt, "pos", origin).get<std::string>());
        t.dep = require(jt, "dep", origin).get<std::string>();
        t.head_index = require(jt, "head_index", origin).get<int>();
        parsed.tokens.push_back(std::move(t));
    }
    for (const json& jc : require(entry, "noun_chunks", origin)) {
        if (!jc.is_array() || jc.size() != 2)
            throw DataError(origin + ": noun chunks must be [start,end] pairs");
        parsed.noun_chunks.emplace_back(jc[0].get<int>(), jc[1].get<int>());
    }
    assign_char_offsets(sentence, parsed.tokens, origin);
    return parsed;
}

Eigen::MatrixXd decode_matrix(const json& rows, const std::string& origin) {
    if (!rows.is_array() || rows.empty())
        throw DataError(origin + ": matrix must be a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
            throw DataError(origin + ": matrix rows have uneven lengths");
        for (Eigen::Index j = 0; j < m; ++j) {
            const json& cell = row[static_cast<std::size_t>(j)];
            if (!cell.is_number())
                throw DataError(origin + ": matrix entries must be numbers");
            out(i, j) = cell.get<double>();
        }
    }
    return out;
}

// --- external tool plumbing -------------------------------------------------

fs::path work_directory(const ExternalToolOptions& options) {
    if (!options.work_dir.empty()) return options.work_dir;
    if (const char* cache = std::getenv("PATENT_KG_CACHE"); cache && *cache)
        return cache;
    return fs::temp_directory_path();
}

fs::path unique_path(const fs::path& dir, const std::string& stem,
                     const std::string& ext) {
    static std::atomic<unsigned long> counter{0};
    return dir / (stem + "-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter.fetch_add(1)) + ext);
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s)
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    out += '\'';
    return out;
}

std::string tail_of_file(const fs::path& path, std::size_t max_bytes = 600) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string s = buf.str();
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    if (s.size() > max_bytes) s = "..." + s.substr(s.size() - max_bytes);
    return s;
}

// Writes the bundled tool source next to the request files; callers may
// point `script` at their own tool instead.
std::string materialize_script(const ExternalToolOptions& options,
                               const std::string& name, const char* source) {
    if (!options.script.empty()) return options.script;
    fs::path dir = work_directory(options);
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::path path = dir / (name + "-" + std::to_string(::getpid()) + ".py");
    std::ofstream out(path);
    out << source;
    if (!out) throw ConfigError("cannot write helper tool to " + path.string());
    return path.string();
}

json run_tool(const ExternalToolOptions& options, const std::string& script,
              const json& request, const std::string& tool_name) {
    fs::path dir = work_directory(options);
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::path req = unique_path(dir, "patentkg-req", ".json");
    fs::path res = unique_path(dir, "patentkg-res", ".json");
    fs::path err = unique_path(dir, "patentkg-err", ".log");

    {
        std::ofstream out(req);
        out << request.dump();
        if (!out) throw ConfigError("cannot write request file " + req.string());
    }

    std::string cmd = shell_quote(options.python) + " " + shell_quote(script) +
                      " " + shell_quote(req.string()) + " " +
                      shell_quote(res.string()) + " 2> " +
                      shell_quote(err.string());
    int status = std::system(cmd.c_str());

    auto cleanup = [&] {
        fs::remove(req, ec);
        fs::remove(res, ec);
        fs::remove(err, ec);
    };

    if (status == -1) {
        cleanup();
        throw ConfigError(tool_name + ": cannot launch " + options.python);
    }
    int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (exit_code != 0) {
        std::string detail = tail_of_file(err);
        cleanup();
        if (exit_code == 126 || exit_code == 127)
            throw ConfigError(tool_name + ": interpreter '" + options.python +
                              "' not runnable" +
                              (detail.empty() ? "" : ": " + detail));
        throw DataError(tool_name + ": helper exited with code " +
                        std::to_string(exit_code) +
                        (detail.empty() ? "" : ": " + detail));
    }

    std::ifstream in(res);
    if (!in) {
        cleanup();
        throw DataError(tool_name + ": helper produced no response file");
    }
    json response;
    try {
        response = parse_json(in, tool_name);
    } catch (...) {
        cleanup();
        throw;
    }
    cleanup();
    return response;
}

[[noreturn]] void throw_tool_error(const json& response,
                                   const std::string& tool_name) {
    std::string kind = response.value("kind", "error");
    std::string message =
        tool_name + ": " + response.value("error", "unknown failure");
    if (kind == "unavailable" || kind == "config") throw ConfigError(message);
    if (kind == "too_long") throw SentenceTooLong(message);
    throw DataError(message);
}

}  // namespace

// --- fixture providers ------------------------------------------------------

FixtureParseProvider::FixtureParseProvider(const std::string& path)
    : origin_(path) {
    json doc = load_json_file(path);
    for (const json& entry : as_entries(doc, origin_)) {
        std::string sentence =
            require(entry, "sentence", origin_).get<std::string>();
        by_sentence_[sentence] = decode_parse_entry(entry, sentence, origin_);
    }
}

FixtureParseProvider::FixtureParseProvider(std::istream& in,
                                           const std::string& origin)
    : origin_(origin) {
    json doc = parse_json(in, origin_);
    for (const json& entry : as_entries(doc, origin_)) {
        std::string sentence =
            require(entry, "sentence", origin_).get<std::string>();
        by_sentence_[sentence] = decode_parse_entry(entry, sentence, origin_);
    }
}

ParsedSentence FixtureParseProvider::parse(const std::string& sentence) {
    auto it = by_sentence_.find(sentence);
    if (it == by_sentence_.end())
        throw DataError(origin_ + ": no fixture parse for sentence '" + sentence +
                        "'");
    return it->second;
}

namespace {

std::map<std::vector<std::string>, Eigen::MatrixXd> load_attention_entries(
    const json& doc, const std::string& origin) {
    std::map<std::vector<std::string>, Eigen::MatrixXd> out;
    for (const json& entry : as_entries(doc, origin)) {
        auto texts = require(entry, "units_or_tokens", origin)
                         .get<std::vector<std::string>>();
        Eigen::MatrixXd m = decode_matrix(require(entry, "matrix", origin), origin);
        if (m.rows() != static_cast<Eigen::Index>(texts.size()))
            throw DataError(origin + ": matrix size does not match its " +
                            std::to_string(texts.size()) + " texts");
        validate_attention_matrix(m);
        out[std::move(texts)] = std::move(m);
    }
    return out;
}

}  // namespace

FixtureAttentionProvider::FixtureAttentionProvider(const std::string& path)
    : origin_(path) {
    by_texts_ = load_attention_entries(load_json_file(path), origin_);
}

FixtureAttentionProvider::FixtureAttentionProvider(std::istream& in,
                                                   const std::string& origin)
    : origin_(origin) {
    by_texts_ = load_attention_entries(parse_json(in, origin_), origin_);
}

EncoderAttention FixtureAttentionProvider::raw_attention(
    const std::vector<std::string>& token_texts, const AttentionConfig&) {
    auto it = by_texts_.find(token_texts);
    if (it == by_texts_.end()) {
        std::string joined;
        for (const auto& t : token_texts) joined += (joined.empty() ? "" : " ") + t;
        throw DataError(origin_ + ": no fixture attention for tokens '" + joined +
                        "'");
    }
    EncoderAttention out;
    out.subwords = token_texts;
    out.matrix = it->second;
    for (int i = 0; i < static_cast<int>(token_texts.size()); ++i)
        out.token_to_subwords.emplace_back(i, i + 1);
    return out;
}

std::optional<Eigen::MatrixXd> FixtureAttentionProvider::unit_attention(
    const std::vector<std::string>& unit_texts, const AttentionConfig&) {
    auto it = by_texts_.find(unit_texts);
    if (it == by_texts_.end()) return std::nullopt;
    return it->second;
}

// --- external providers -----------------------------------------------------

ExternalParseProvider::ExternalParseProvider(ExternalToolOptions options,
                                             std::string model)
    : options_(std::move(options)), model_(std::move(model)) {
    script_path_ = materialize_script(options_, "patentkg-parse-tool",
                                      parse_tool_source);
}

ParsedSentence ExternalParseProvider::parse(const std::string& sentence) {
    if (auto it = cache_.find(sentence); it != cache_.end()) return it->second;

    json request = {{"sentences", json::array({sentence})}, {"model", model_}};
    json response = run_tool(options_, script_path_, request, "parse tool");
    if (response.contains("error")) throw_tool_error(response, "parse tool");

    const json& sentences = require(response, "sentences", "parse tool");
    if (!sentences.is_array() || sentences.size() != 1)
        throw DataError("parse tool: expected exactly one parsed sentence");
    ParsedSentence parsed =
        decode_parse_entry(sentences[0], sentence, "parse tool");
    cache_[sentence] = parsed;
    return parsed;
}

ExternalAttentionProvider::ExternalAttentionProvider(ExternalToolOptions options)
    : options_(std::move(options)) {
    script_path_ = materialize_script(options_, "patentkg-attention-tool",
                                      attention_tool_source);
}

EncoderAttention ExternalAttentionProvider::raw_attention(
    const std::vector<std::string>& token_texts, const AttentionConfig& config) {
    json request = {{"tokens", token_texts},
                    {"model", config.model_id},
                    {"layer", config.layer},
                    {"max_tokens", config.max_tokens}};
    json response = run_tool(options_, script_path_, request, "attention tool");
    if (response.contains("error")) throw_tool_error(response, "attention tool");

    EncoderAttention out;
    out.subwords = require(response, "subwords", "attention tool")
                       .get<std::vector<std::string>>();
    out.matrix =
        decode_matrix(require(response, "matrix", "attention tool"), "attention tool");
    for (const json& span :
         require(response, "token_to_subwords", "attention tool")) {
        if (!span.is_array() || span.size() != 2)
            throw DataError("attention tool: alignment spans must be [start,end]");
        out.token_to_subwords.emplace_back(span[0].get<int>(), span[1].get<int>());
    }
    return out;
}

}  // namespace patentkg
