#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patentkg/attention.hpp"
#include "patentkg/preprocess.hpp"

namespace patentkg {

// Parses loaded from a JSON fixture, keyed by exact sentence text.
// Entry format: {"sentence": str,
//                "tokens": [{"text","pos","dep","head_index"}...],
//                "noun_chunks": [[start,end]...]}
// The file holds one entry or an array of entries. Character offsets are
// derived by matching token texts left to right in the sentence.
class FixtureParseProvider : public ParseProvider {
public:
    explicit FixtureParseProvider(const std::string& path);
    FixtureParseProvider(std::istream& in, const std::string& origin);

    ParsedSentence parse(const std::string& sentence) override;
    bool thread_safe() const override { return true; }
    std::size_t size() const { return by_sentence_.size(); }

private:
    std::map<std::string, ParsedSentence> by_sentence_;
    std::string origin_;
};

// Attention matrices from a JSON fixture, keyed by the exact text sequence.
// Entry format: {"units_or_tokens": [str...], "matrix": [[float...]...]}.
// A matching sequence serves both granularities: unit_attention() returns
// the matrix directly, raw_attention() wraps it as one encoder piece per
// token (no subword structure in fixtures).
class FixtureAttentionProvider : public AttentionProvider {
public:
    explicit FixtureAttentionProvider(const std::string& path);
    FixtureAttentionProvider(std::istream& in, const std::string& origin);

    EncoderAttention raw_attention(const std::vector<std::string>& token_texts,
                                   const AttentionConfig& config) override;
    std::optional<Eigen::MatrixXd> unit_attention(
        const std::vector<std::string>& unit_texts,
        const AttentionConfig& config) override;
    bool thread_safe() const override { return true; }
    std::size_t size() const { return by_texts_.size(); }

private:
    std::map<std::vector<std::string>, Eigen::MatrixXd> by_texts_;
    std::string origin_;
};

// How external helper tools run: interpreter, optional script override
// (tests substitute stubs), and the directory for request/response files.
struct ExternalToolOptions {
    std::string python = "python3";
    std::string script;    // empty: materialize the bundled tool source
    std::string work_dir;  // empty: $PATENT_KG_CACHE, else the system temp dir
};

// Dependency parser backed by a Python helper process (spaCy). Results are
// cached per sentence for the provider's lifetime.
class ExternalParseProvider : public ParseProvider {
public:
    explicit ExternalParseProvider(ExternalToolOptions options = {},
                                   std::string model = "en_core_web_sm");

    ParsedSentence parse(const std::string& sentence) override;
    bool thread_safe() const override { return false; }

private:
    ExternalToolOptions options_;
    std::string model_;
    std::string script_path_;
    std::map<std::string, ParsedSentence> cache_;
};

// Pretrained-encoder attention backed by a Python helper process
// (transformers). Returns the head-mean matrix of the configured layer with
// special markers dropped, plus the token -> encoder-piece alignment.
class ExternalAttentionProvider : public AttentionProvider {
public:
    explicit ExternalAttentionProvider(ExternalToolOptions options = {});

    EncoderAttention raw_attention(const std::vector<std::string>& token_texts,
                                   const AttentionConfig& config) override;
    bool thread_safe() const override { return false; }

private:
    ExternalToolOptions options_;
    std::string script_path_;
};

}  // namespace patentkg
