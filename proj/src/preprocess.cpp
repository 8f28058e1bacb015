#include "patentkg/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "patentkg/errors.hpp"

namespace patentkg {

namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string to_lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

// A terminal punctuation mark ends a sentence when what follows looks like
// the start of a new one.
bool starts_new_sentence(const std::string& text, std::size_t after) {
    std::size_t i = after;
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) return true;
    if (i == after) return false;  // no whitespace after the mark
    char c = text[i];
    return std::isupper(static_cast<unsigned char>(c)) ||
           std::isdigit(static_cast<unsigned char>(c)) || c == '(' || c == '"';
}

std::string join_tokens(const std::vector<Token>& tokens, int begin, int end) {
    std::string out;
    for (int i = begin; i < end; ++i) {
        if (i > begin) out += ' ';
        out += tokens[i].text;
    }
    return out;
}

// Head token of a span: the one whose syntactic head lies outside it.
// Falls back to the last nominal token, then the last token.
int span_head_token(const std::vector<Token>& tokens, int begin, int end) {
    int found = -1;
    for (int i = begin; i < end; ++i) {
        int h = tokens[i].head_index;
        if (h < begin || h >= end || h == i) {
            if (found < 0) found = i;
        }
    }
    if (found >= 0) return found;
    for (int i = end - 1; i >= begin; --i)
        if (tokens[i].pos == Pos::Noun || tokens[i].pos == Pos::Propn) return i;
    return end - 1;
}

WordUnit make_unit(const std::vector<Token>& tokens, int begin, int end,
                   UnitKind kind, int head_token) {
    WordUnit unit;
    unit.text = join_tokens(tokens, begin, end);
    unit.kind = kind;
    unit.begin = begin;
    unit.end = end;
    unit.unit_pos = tokens[head_token].pos;
    return unit;
}

bool overlaps(const WordUnit& a, const WordUnit& b) {
    return a.begin < b.end && b.begin < a.end;
}

void validate_tokens(const std::string& sentence, const std::vector<Token>& tokens) {
    if (tokens.empty()) throw DataError("parser returned no tokens");

    const int n = static_cast<int>(tokens.size());
    int prev_end = 0;
    for (int i = 0; i < n; ++i) {
        const Token& t = tokens[i];
        if (t.char_start < prev_end || t.char_end <= t.char_start ||
            t.char_end > static_cast<int>(sentence.size()))
            throw DataError("token spans out of order or out of range at token " +
                            std::to_string(i));
        for (int c = prev_end; c < t.char_start; ++c)
            if (!is_space(sentence[static_cast<std::size_t>(c)]))
                throw DataError("character '" +
                                std::string(1, sentence[static_cast<std::size_t>(c)]) +
                                "' not covered by any token span");
        if (t.head_index < 0 || t.head_index >= n)
            throw DataError("token head index out of range at token " +
                            std::to_string(i));
        prev_end = t.char_end;
    }
    for (int c = prev_end; c < static_cast<int>(sentence.size()); ++c)
        if (!is_space(sentence[static_cast<std::size_t>(c)]))
            throw DataError("trailing text not covered by any token span");

    // A hyphen between letters must not split the surrounding word.
    auto contiguous = [&](int a, int b) {
        return tokens[a].char_end == tokens[b].char_start;
    };
    for (int i = 0; i + 1 < n; ++i) {
        if (!contiguous(i, i + 1)) continue;
        const std::string& a = tokens[i].text;
        const std::string& b = tokens[i + 1].text;
        bool a_ends_letter = !a.empty() && is_letter(a.back());
        if (a_ends_letter && b.size() >= 2 && b[0] == '-' && is_letter(b[1]))
            throw DataError("hyphenated word split at token " + std::to_string(i));
        if (a_ends_letter && b == "-" && i + 2 < n && contiguous(i + 1, i + 2) &&
            !tokens[i + 2].text.empty() && is_letter(tokens[i + 2].text.front()))
            throw DataError("hyphenated word split at token " + std::to_string(i));
        if (a.size() >= 2 && a.back() == '-' && is_letter(a[a.size() - 2]) &&
            !b.empty() && is_letter(b.front()))
            throw DataError("hyphenated word split at token " + std::to_string(i));
    }
}

}  // namespace

Pos pos_from_string(const std::string& tag) {
    static const std::map<std::string, Pos> table = {
        {"NOUN", Pos::Noun}, {"PROPN", Pos::Propn}, {"VERB", Pos::Verb},
        {"AUX", Pos::Aux},   {"ADP", Pos::Adp},     {"PART", Pos::Part},
        {"ADV", Pos::Adv},   {"ADJ", Pos::Adj},     {"DET", Pos::Det},
        {"NUM", Pos::Num},   {"PUNCT", Pos::Punct},
    };
    auto it = table.find(tag);
    return it == table.end() ? Pos::Other : it->second;
}

std::string pos_to_string(Pos pos) {
    switch (pos) {
        case Pos::Noun: return "NOUN";
        case Pos::Propn: return "PROPN";
        case Pos::Verb: return "VERB";
        case Pos::Aux: return "AUX";
        case Pos::Adp: return "ADP";
        case Pos::Part: return "PART";
        case Pos::Adv: return "ADV";
        case Pos::Adj: return "ADJ";
        case Pos::Det: return "DET";
        case Pos::Num: return "NUM";
        case Pos::Punct: return "PUNCT";
        case Pos::Other: break;
    }
    return "OTHER";
}

std::vector<std::string> split_sentences(const std::string& abstract) {
    std::vector<std::string> sentences;
    std::string current;
    auto flush = [&]() {
        std::string s = trim(current);
        if (!s.empty()) sentences.push_back(std::move(s));
        current.clear();
    };

    for (std::size_t i = 0; i < abstract.size(); ++i) {
        char c = abstract[i];
        if (c == ';') {  // always a boundary; the mark itself is dropped
            flush();
            continue;
        }
        current += c;
        if ((c == '.' || c == '!' || c == '?') && starts_new_sentence(abstract, i + 1))
            flush();
    }
    flush();
    return sentences;
}

std::vector<Token> tokenize(const std::string& sentence, ParseProvider& provider) {
    if (trim(sentence).empty()) throw DataError("cannot tokenize an empty sentence");
    ParsedSentence parsed = provider.parse(sentence);
    validate_tokens(sentence, parsed.tokens);
    return parsed.tokens;
}

std::vector<WordUnit> merge_noun_phrases(const std::vector<Token>& tokens,
                                         const std::vector<TokenSpan>& chunk_spans) {
    std::vector<TokenSpan> spans = chunk_spans;
    std::sort(spans.begin(), spans.end());
    const int n = static_cast<int>(tokens.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
        auto [b, e] = spans[i];
        if (b < 0 || e > n || b >= e)
            throw DataError("noun chunk span [" + std::to_string(b) + "," +
                            std::to_string(e) + ") out of range");
        if (i > 0 && spans[i - 1].second > b)
            throw DataError("overlapping noun chunk spans [" +
                            std::to_string(spans[i - 1].first) + "," +
                            std::to_string(spans[i - 1].second) + ") and [" +
                            std::to_string(b) + "," + std::to_string(e) + ")");
    }

    std::vector<WordUnit> units;
    units.reserve(spans.size());
    for (auto [b, e] : spans)
        units.push_back(make_unit(tokens, b, e, UnitKind::NounPhrase,
                                  span_head_token(tokens, b, e)));
    return units;
}

std::vector<WordUnit> merge_phrasal_verbs(const std::vector<Token>& tokens) {
    const int n = static_cast<int>(tokens.size());
    std::map<int, std::vector<int>> particles_by_verb;
    for (int i = 0; i < n; ++i) {
        const Token& t = tokens[i];
        if (t.dep != "prt" || t.head_index == i) continue;
        if (tokens[t.head_index].pos != Pos::Verb) continue;
        particles_by_verb[t.head_index].push_back(i);
    }

    std::vector<WordUnit> units;
    for (const auto& [verb, prts] : particles_by_verb) {
        int b = std::min(verb, *std::min_element(prts.begin(), prts.end()));
        int e = std::max(verb, *std::max_element(prts.begin(), prts.end())) + 1;
        units.push_back(make_unit(tokens, b, e, UnitKind::PhrasalVerb, verb));
    }
    std::sort(units.begin(), units.end(),
              [](const WordUnit& a, const WordUnit& b) { return a.begin < b.begin; });
    return units;
}

ProcessedSentence preprocess_sentence(const std::string& sentence,
                                      ParseProvider& provider,
                                      const std::string& abstract_id,
                                      int sentence_index) {
    if (trim(sentence).empty())
        throw DataError("empty sentence in abstract '" + abstract_id + "'");

    ParsedSentence parsed = provider.parse(sentence);
    validate_tokens(sentence, parsed.tokens);
    const std::vector<Token>& tokens = parsed.tokens;
    const int n = static_cast<int>(tokens.size());

    std::vector<WordUnit> units = merge_noun_phrases(tokens, parsed.noun_chunks);

    // Phrasal verbs merge next; on conflict the noun chunk wins and the verb
    // stays a singleton.
    for (const WordUnit& pv : merge_phrasal_verbs(tokens)) {
        bool clash = std::any_of(units.begin(), units.end(),
                                 [&](const WordUnit& u) { return overlaps(u, pv); });
        if (!clash) units.push_back(pv);
    }

    std::vector<char> covered(static_cast<std::size_t>(n), 0);
    for (const WordUnit& u : units)
        for (int i = u.begin; i < u.end; ++i) covered[static_cast<std::size_t>(i)] = 1;

    // Infinitival marker: an uncovered "to" (PART) directly before an
    // uncovered verb joins it as one relation unit.
    for (int i = 1; i < n; ++i) {
        if (covered[static_cast<std::size_t>(i)] || tokens[i].pos != Pos::Verb)
            continue;
        if (covered[static_cast<std::size_t>(i - 1)] ||
            tokens[i - 1].pos != Pos::Part ||
            to_lower_ascii(tokens[i - 1].text) != "to")
            continue;
        units.push_back(make_unit(tokens, i - 1, i + 1, UnitKind::PhrasalVerb, i));
        covered[static_cast<std::size_t>(i - 1)] = 1;
        covered[static_cast<std::size_t>(i)] = 1;
    }

    for (int i = 0; i < n; ++i)
        if (!covered[static_cast<std::size_t>(i)])
            units.push_back(make_unit(tokens, i, i + 1, UnitKind::Word, i));

    std::sort(units.begin(), units.end(),
              [](const WordUnit& a, const WordUnit& b) { return a.begin < b.begin; });

    ProcessedSentence result;
    result.text = sentence;
    result.tokens = tokens;
    result.units = std::move(units);
    result.abstract_id = abstract_id;
    result.sentence_index = sentence_index;
    return result;
}

}  // namespace patentkg
