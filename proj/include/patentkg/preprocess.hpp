#pragma once

#include <string>
#include <utility>
#include <vector>

namespace patentkg {

// Coarse part-of-speech tags, spaCy-style universal set.
enum class Pos {
    Noun,
    Propn,
    Verb,
    Aux,
    Adp,
    Part,
    Adv,
    Adj,
    Det,
    Num,
    Punct,
    Other,
};

Pos pos_from_string(const std::string& tag);  // unknown tags map to Other
std::string pos_to_string(Pos pos);

struct Token {
    std::string text;
    Pos pos = Pos::Other;
    std::string dep;     // dependency label, e.g. "prt", "dobj", "neg"
    int head_index = 0;  // index of the syntactic head token in the sentence
    int char_start = 0;  // character offsets into the sentence text
    int char_end = 0;
};

enum class UnitKind { NounPhrase, PhrasalVerb, Word };

// A merged word unit over a half-open token range [begin, end).
struct WordUnit {
    std::string text;  // constituent token texts joined by single spaces
    UnitKind kind = UnitKind::Word;
    int begin = 0;
    int end = 0;
    Pos unit_pos = Pos::Other;  // tag of the unit's syntactic head token

    int size() const { return end - begin; }
};

struct ProcessedSentence {
    std::string text;
    std::vector<Token> tokens;
    std::vector<WordUnit> units;  // sorted by begin; spans partition the tokens
    std::string abstract_id;
    int sentence_index = 0;
};

// Half-open token index range, used for noun-chunk spans.
using TokenSpan = std::pair<int, int>;

// Raw parser output for one sentence.
struct ParsedSentence {
    std::vector<Token> tokens;
    std::vector<TokenSpan> noun_chunks;
};

// Abstracts the third-party parser. Implementations must be deterministic
// for a fixed sentence and configuration.
class ParseProvider {
public:
    virtual ~ParseProvider() = default;
    virtual ParsedSentence parse(const std::string& sentence) = 0;
    // Whether parse() may be called from several threads at once.
    virtual bool thread_safe() const { return false; }
};

// Splits an abstract into sentences: base boundaries at '.', '!' and '?'
// (when followed by whitespace and a new sentence start) plus a boundary at
// every ';'. The ';' itself is dropped from the output.
std::vector<std::string> split_sentences(const std::string& abstract);

// Runs the provider and validates its output: spans tile the non-whitespace
// text in order, head indices are in range, and no hyphen between letters
// has been split. Throws DataError on violations.
std::vector<Token> tokenize(const std::string& sentence, ParseProvider& provider);

// One NOUN_PHRASE unit per chunk span. Throws on overlapping spans.
std::vector<WordUnit> merge_noun_phrases(const std::vector<Token>& tokens,
                                         const std::vector<TokenSpan>& chunk_spans);

// One PHRASAL_VERB unit per verb with "prt" particles, covering the verb
// and all its particles.
std::vector<WordUnit> merge_phrasal_verbs(const std::vector<Token>& tokens);

// Full per-sentence pipeline: tokenize, merge noun phrases and phrasal
// verbs, resolve conflicts (noun chunks win), merge infinitival "to"+verb,
// and fill the gaps with singleton WORD units.
ProcessedSentence preprocess_sentence(const std::string& sentence,
                                      ParseProvider& provider,
                                      const std::string& abstract_id,
                                      int sentence_index);

}  // namespace patentkg
