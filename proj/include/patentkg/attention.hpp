#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patentkg/errors.hpp"
#include "patentkg/preprocess.hpp"

namespace patentkg {

struct AttentionConfig {
    int layer = 9;  // 1-based: "layer 9" is index 8 in a 0-based stack
    std::string model_id = "bert-base-uncased";
    int max_tokens = 512;  // encoder input limit including special markers
};

// Square attention matrix at encoder-token granularity. Rows are the
// attending ("from") side, columns the attended ("to") side. Rows sum to 1
// when no special-marker mass was removed, and to at most 1 otherwise
// (removed mass is never renormalized).
struct TokenAttention {
    std::vector<std::string> tokens;
    Eigen::MatrixXd matrix;
};

// Same matrix collapsed to word units. Row sums are the mean of the
// constituent token row sums.
struct WordAttention {
    std::vector<std::string> units;
    Eigen::MatrixXd matrix;
};

// Encoder output before subword alignment: matrix over subword pieces with
// special markers already removed, plus the half-open subword range owned
// by each pipeline token.
struct EncoderAttention {
    std::vector<std::string> subwords;
    Eigen::MatrixXd matrix;
    std::vector<std::pair<int, int>> token_to_subwords;
};

// Attention source: pretrained encoder or file fixture. Deterministic for
// fixed inputs and config.
class AttentionProvider {
public:
    virtual ~AttentionProvider() = default;

    virtual EncoderAttention raw_attention(const std::vector<std::string>& token_texts,
                                           const AttentionConfig& config) = 0;

    // Fixtures may carry matrices at word-unit granularity directly; a
    // provider that has one for exactly these unit texts returns it here.
    virtual std::optional<Eigen::MatrixXd> unit_attention(
        const std::vector<std::string>& /*unit_texts*/,
        const AttentionConfig& /*config*/) {
        return std::nullopt;
    }

    virtual bool thread_safe() const { return false; }
};

// --- aggregation over index spans ----------------------------------------
//
// Collapsing a matrix from one granularity to a coarser one always uses the
// same rule: attention *to* a merged span is the sum over its columns,
// attention *from* a merged span is the mean over its rows. The two steps
// commute.

using IndexSpan = std::pair<int, int>;

// Throws unless the spans are non-empty, sorted, and exactly tile [0, n).
void validate_partition(const std::vector<IndexSpan>& spans, int n);

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
sum_column_spans(const Eigen::MatrixBase<Derived>& a,
                 const std::vector<IndexSpan>& spans) {
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const auto m = static_cast<Eigen::Index>(spans.size());
    Mat out(a.rows(), m);
    for (Eigen::Index v = 0; v < m; ++v) {
        auto [b, e] = spans[static_cast<std::size_t>(v)];
        out.col(v) = a.middleCols(b, e - b).rowwise().sum();
    }
    return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
mean_row_spans(const Eigen::MatrixBase<Derived>& a,
               const std::vector<IndexSpan>& spans) {
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const auto m = static_cast<Eigen::Index>(spans.size());
    Mat out(m, a.cols());
    for (Eigen::Index u = 0; u < m; ++u) {
        auto [b, e] = spans[static_cast<std::size_t>(u)];
        out.row(u) = a.middleRows(b, e - b).colwise().mean();
    }
    return out;
}

// Square aggregation: mean over row spans, sum over column spans.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
aggregate_matrix(const Eigen::MatrixBase<Derived>& a,
                 const std::vector<IndexSpan>& spans) {
    validate_partition(spans, static_cast<int>(a.rows()));
    if (a.rows() != a.cols())
        throw DataError("attention matrix is not square");
    return mean_row_spans(sum_column_spans(a, spans), spans);
}

// --- operations ------------------------------------------------------------

// Selected-layer head-mean attention aligned to the pipeline tokens.
// Subword pieces are collapsed onto their owning token with the span
// aggregation rule above. Throws SentenceTooLong when the sentence exceeds
// the encoder limit and ConfigError on provider misconfiguration.
TokenAttention compute_token_attention(const std::vector<Token>& sentence_tokens,
                                       const AttentionConfig& config,
                                       AttentionProvider& provider);

// Collapses token attention onto the sentence's word units.
WordAttention aggregate_to_words(const TokenAttention& token_attn,
                                 const std::vector<WordUnit>& units);

// TSV table: first row and column carry the unit texts, cells are
// 4-decimal fixed point.
void dump_attention(const WordAttention& word_attn, std::ostream& sink);

// Entry and row-sum checks shared by providers and fixtures.
void validate_attention_matrix(const Eigen::MatrixXd& m, double row_sum_slack = 1e-4);

}  // namespace patentkg
