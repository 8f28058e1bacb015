#include "patentkg/attention.hpp"

#include <iomanip>
#include <ostream>

namespace patentkg {

void validate_partition(const std::vector<IndexSpan>& spans, int n) {
    int expect = 0;
    for (const auto& [b, e] : spans) {
        if (b != expect || e <= b)
            throw DataError("unit spans do not tile the matrix: expected span "
                            "starting at " + std::to_string(expect) + ", got [" +
                            std::to_string(b) + "," + std::to_string(e) + ")");
        expect = e;
    }
    if (expect != n)
        throw DataError("unit spans cover " + std::to_string(expect) +
                        " positions, matrix has " + std::to_string(n));
}

void validate_attention_matrix(const Eigen::MatrixXd& m, double row_sum_slack) {
    if (m.rows() != m.cols()) throw DataError("attention matrix is not square");
    if (!m.allFinite())
        throw DataError("attention matrix has non-finite entries");
    if ((m.array() < 0.0).any())
        throw DataError("attention matrix has negative entries");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double s = m.row(i).sum();
        if (s > 1.0 + row_sum_slack)
            throw DataError("attention row " + std::to_string(i) + " sums to " +
                            std::to_string(s) + ", above 1");
    }
}

TokenAttention compute_token_attention(const std::vector<Token>& sentence_tokens,
                                       const AttentionConfig& config,
                                       AttentionProvider& provider) {
    if (config.layer < 1)
        throw ConfigError("attention layer must be at least 1 (got " +
                          std::to_string(config.layer) + ")");

    std::vector<std::string> texts;
    texts.reserve(sentence_tokens.size());
    for (const Token& t : sentence_tokens) texts.push_back(t.text);

    EncoderAttention raw = provider.raw_attention(texts, config);
    if (raw.matrix.rows() != raw.matrix.cols() ||
        raw.matrix.rows() != static_cast<Eigen::Index>(raw.subwords.size()))
        throw DataError("provider attention matrix does not match its subwords");
    if (raw.token_to_subwords.size() != sentence_tokens.size())
        throw DataError("provider subword alignment covers " +
                        std::to_string(raw.token_to_subwords.size()) +
                        " tokens, sentence has " +
                        std::to_string(sentence_tokens.size()));

    TokenAttention out;
    out.tokens = std::move(texts);
    out.matrix = aggregate_matrix(raw.matrix, raw.token_to_subwords);
    validate_attention_matrix(out.matrix);
    return out;
}

WordAttention aggregate_to_words(const TokenAttention& token_attn,
                                 const std::vector<WordUnit>& units) {
    if (token_attn.matrix.rows() != static_cast<Eigen::Index>(token_attn.tokens.size()))
        throw DataError("token attention matrix does not match its token list");

    std::vector<IndexSpan> spans;
    spans.reserve(units.size());
    for (const WordUnit& u : units) spans.emplace_back(u.begin, u.end);

    WordAttention out;
    out.units.reserve(units.size());
    for (const WordUnit& u : units) out.units.push_back(u.text);
    out.matrix = aggregate_matrix(token_attn.matrix, spans);
    return out;
}

void dump_attention(const WordAttention& word_attn, std::ostream& sink) {
    for (const std::string& u : word_attn.units) sink << '\t' << u;
    sink << '\n';
    sink << std::fixed << std::setprecision(4);
    for (Eigen::Index i = 0; i < word_attn.matrix.rows(); ++i) {
        sink << word_attn.units[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < word_attn.matrix.cols(); ++j)
            sink << '\t' << word_attn.matrix(i, j);
        sink << '\n';
    }
    if (!sink) throw DataError("failed to write attention table");
}

}  // namespace patentkg
