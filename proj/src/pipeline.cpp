#include "patentkg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "patentkg/errors.hpp"

namespace patentkg {

namespace {

// Adapters that make any provider callable from several threads by
// serializing the calls.
class LockedParseProvider : public ParseProvider {
public:
    explicit LockedParseProvider(ParseProvider& inner) : inner_(inner) {}
    ParsedSentence parse(const std::string& sentence) override {
        std::lock_guard<std::mutex> lock(mutex_);
        return inner_.parse(sentence);
    }
    bool thread_safe() const override { return true; }

private:
    ParseProvider& inner_;
    std::mutex mutex_;
};

class LockedAttentionProvider : public AttentionProvider {
public:
    explicit LockedAttentionProvider(AttentionProvider& inner) : inner_(inner) {}
    EncoderAttention raw_attention(const std::vector<std::string>& token_texts,
                                   const AttentionConfig& config) override {
        std::lock_guard<std::mutex> lock(mutex_);
        return inner_.raw_attention(token_texts, config);
    }
    std::optional<Eigen::MatrixXd> unit_attention(
        const std::vector<std::string>& unit_texts,
        const AttentionConfig& config) override {
        std::lock_guard<std::mutex> lock(mutex_);
        return inner_.unit_attention(unit_texts, config);
    }
    bool thread_safe() const override { return true; }

private:
    AttentionProvider& inner_;
    std::mutex mutex_;
};

}  // namespace

std::vector<std::vector<Triple>> run_extraction(
    const std::vector<PatentRecord>& records, ParseProvider& parse,
    AttentionProvider& attn, const ExtractionOptions& options) {
    if (options.jobs < 1) throw ConfigError("jobs must be at least 1");

    std::vector<std::vector<Triple>> results(records.size());
    auto extract_one = [&](ParseProvider& p, AttentionProvider& a, std::size_t i) {
        results[i] = extract_from_abstract(records[i], p, a, options.match,
                                           options.attention, options.threshold);
    };

    std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(options.jobs), records.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < records.size(); ++i)
            extract_one(parse, attn, i);
        return results;
    }

    LockedParseProvider locked_parse(parse);
    LockedAttentionProvider locked_attn(attn);
    ParseProvider& shared_parse = parse.thread_safe()
                                      ? parse
                                      : static_cast<ParseProvider&>(locked_parse);
    AttentionProvider& shared_attn =
        attn.thread_safe() ? attn : static_cast<AttentionProvider&>(locked_attn);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= records.size()) return;
            try {
                extract_one(shared_parse, shared_attn, i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(records.size());  // stop handing out work
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
    return results;
}

std::vector<Triple> flatten(const std::vector<std::vector<Triple>>& per_record) {
    std::vector<Triple> out;
    std::size_t total = 0;
    for (const auto& r : per_record) total += r.size();
    out.reserve(total);
    for (const auto& r : per_record) out.insert(out.end(), r.begin(), r.end());
    return out;
}

}  // namespace patentkg
