#include "patentkg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <json.hpp>

#include "patentkg/errors.hpp"

namespace patentkg {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_codes(const std::string& joined) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= joined.size()) {
        std::size_t bar = joined.find('|', pos);
        std::string piece =
            trim(bar == std::string::npos ? joined.substr(pos)
                                          : joined.substr(pos, bar - pos));
        if (!piece.empty()) out.push_back(piece);
        if (bar == std::string::npos) break;
        pos = bar + 1;
    }
    return out;
}

// RFC-4180 style line split: quoted fields may hold commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw DataError("line " + std::to_string(lineno) + ": unterminated quote");
    fields.push_back(cur);
    return fields;
}

struct RecordOut {
    PatentRecord record;
    std::vector<std::string> warnings;
};

RecordOut record_from_json(const nlohmann::json& j, std::size_t lineno) {
    if (!j.is_object())
        throw DataError("line " + std::to_string(lineno) + ": not a JSON object");

    RecordOut out;
    auto require_string = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_string() ||
            j.at(key).get<std::string>().empty())
            throw DataError("line " + std::to_string(lineno) +
                            ": missing or empty field '" + key + "'");
        return j.at(key).get<std::string>();
    };
    out.record.patent_id = require_string("patent_id");
    out.record.application_id = require_string("application_id");
    out.record.earliest_filing_id = require_string("earliest_filing_id");

    if (!j.contains("filing_year") || !j.at("filing_year").is_number_integer())
        throw DataError("line " + std::to_string(lineno) +
                        ": missing or non-integer field 'filing_year'");
    out.record.filing_year = j.at("filing_year").get<int>();

    if (j.contains("cpc_codes") && j.at("cpc_codes").is_array()) {
        for (const auto& code : j.at("cpc_codes")) {
            if (!code.is_string())
                throw DataError("line " + std::to_string(lineno) +
                                ": cpc_codes entries must be strings");
            std::string c = trim(code.get<std::string>());
            if (!c.empty()) out.record.cpc_codes.push_back(c);
        }
    } else {
        out.warnings.push_back("missing 'cpc_codes', assuming none");
    }

    if (j.contains("title") && j.at("title").is_string())
        out.record.title = j.at("title").get<std::string>();

    if (j.contains("abstract") && j.at("abstract").is_string())
        out.record.abstract = j.at("abstract").get<std::string>();
    else
        out.warnings.push_back("missing 'abstract', record kept with empty text");

    return out;
}

}  // namespace

std::size_t CorpusParseResult::error_count() const {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(),
                      [](const ParseIssue& i) { return i.is_error; }));
}

std::size_t CorpusParseResult::warning_count() const {
    return issues.size() - error_count();
}

CorpusParseResult parse_corpus_file(std::istream& in, CorpusFormat format,
                                    bool strict) {
    CorpusParseResult result;
    std::string line;
    std::size_t lineno = 0;

    std::vector<std::string> header;
    auto column = [&](const std::vector<std::string>& fields, const char* name,
                      std::size_t recline) -> const std::string* {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return nullptr;
        std::size_t idx = static_cast<std::size_t>(it - header.begin());
        if (idx >= fields.size())
            throw DataError("line " + std::to_string(recline) +
                            ": row has fewer fields than the header");
        return &fields[idx];
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        try {
            if (format == CorpusFormat::Csv && header.empty()) {
                header = split_csv_line(line, lineno);
                for (auto& h : header) h = trim(h);
                continue;
            }

            RecordOut out;
            if (format == CorpusFormat::Jsonl) {
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(line);
                } catch (const nlohmann::json::exception& e) {
                    throw DataError("line " + std::to_string(lineno) +
                                    ": invalid JSON: " + e.what());
                }
                out = record_from_json(j, lineno);
            } else {
                auto fields = split_csv_line(line, lineno);
                nlohmann::json j = nlohmann::json::object();
                for (const char* key :
                     {"patent_id", "application_id", "earliest_filing_id", "title",
                      "abstract"}) {
                    if (const std::string* v = column(fields, key, lineno))
                        j[key] = *v;
                }
                if (const std::string* v = column(fields, "cpc_codes", lineno))
                    j["cpc_codes"] = split_codes(*v);
                if (const std::string* v = column(fields, "filing_year", lineno)) {
                    try {
                        j["filing_year"] = std::stoi(*v);
                    } catch (const std::exception&) {
                        throw DataError("line " + std::to_string(lineno) +
                                        ": filing_year is not an integer");
                    }
                }
                out = record_from_json(j, lineno);
            }

            for (const auto& w : out.warnings)
                result.issues.push_back(
                    {lineno, "line " + std::to_string(lineno) + ": " + w, false});
            result.records.push_back(std::move(out.record));
        } catch (const DataError& e) {
            if (strict) throw;
            result.issues.push_back({lineno, e.what(), true});
        }
    }
    return result;
}

void write_corpus_jsonl(const std::vector<PatentRecord>& records,
                        std::ostream& sink) {
    for (const PatentRecord& r : records) {
        sink << nlohmann::ordered_json{{"patent_id", r.patent_id},
                                       {"application_id", r.application_id},
                                       {"earliest_filing_id", r.earliest_filing_id},
                                       {"cpc_codes", r.cpc_codes},
                                       {"title", r.title},
                                       {"abstract", r.abstract},
                                       {"filing_year", r.filing_year}}
                    .dump()
             << '\n';
    }
    if (!sink) throw DataError("failed to write corpus records");
}

bool matches_filter(const PatentRecord& record, const CorpusFilter& filter) {
    bool cpc_ok = std::any_of(
        record.cpc_codes.begin(), record.cpc_codes.end(),
        [&](const std::string& code) {
            return trim(code).rfind(filter.cpc_prefix, 0) == 0;
        });
    if (!cpc_ok) return false;
    if (record.filing_year < filter.year_min ||
        record.filing_year > filter.year_max)
        return false;
    if (filter.require_earliest_in_family &&
        record.application_id != record.earliest_filing_id)
        return false;
    return true;
}

std::vector<PatentRecord> filter_corpus(const std::vector<PatentRecord>& records,
                                        const CorpusFilter& filter) {
    std::vector<PatentRecord> kept;
    kept.reserve(records.size());
    for (const auto& r : records)
        if (matches_filter(r, filter)) kept.push_back(r);
    return kept;
}

}  // namespace patentkg
