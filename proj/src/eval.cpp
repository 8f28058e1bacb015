#include "patentkg/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "patentkg/errors.hpp"
#include "patentkg/kgstore.hpp"

namespace patentkg {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw DataError("benchmark line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::size_t TermBenchmark::term_count() const {
    std::size_t n = 0;
    for (const auto& cat : categories)
        for (const auto& sub : cat.subcategories) n += sub.terms.size();
    return n;
}

TermBenchmark load_benchmark(std::istream& in) {
    TermBenchmark bm;
    std::set<std::string> seen_in_subcategory;
    std::string raw;
    std::size_t line_no = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.find(';') != std::string::npos)
            fail(line_no, "semicolons are not allowed in benchmark files");

        if (line.rfind("##", 0) == 0) {
            std::string name = trim(line.substr(2));
            if (name.empty()) fail(line_no, "empty subcategory name");
            if (bm.categories.empty())
                fail(line_no, "subcategory before any category");
            bm.categories.back().subcategories.push_back({name, {}});
            seen_in_subcategory.clear();
        } else if (line.rfind("#", 0) == 0) {
            std::string name = trim(line.substr(1));
            if (name.empty()) fail(line_no, "empty category name");
            bm.categories.push_back({name, {}});
            seen_in_subcategory.clear();
        } else {
            if (bm.categories.empty() || bm.categories.back().subcategories.empty())
                fail(line_no, "term outside any subcategory");
            std::string canon = canonicalize(line);
            if (!seen_in_subcategory.insert(canon).second)
                fail(line_no, "duplicate term '" + line + "' in subcategory '" +
                                  bm.categories.back().subcategories.back().name +
                                  "'");
            bm.categories.back().subcategories.back().terms.push_back(line);
        }
    }

    if (bm.term_count() == 0)
        throw DataError("benchmark contains no terms");
    return bm;
}

TermBenchmark load_benchmark_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open benchmark file: " + path);
    return load_benchmark(in);
}

EvalResult recall_rate(const std::set<std::string>& entity_set,
                       const TermBenchmark& benchmark) {
    std::set<std::string> canon_entities;
    for (const std::string& e : entity_set) canon_entities.insert(canonicalize(e));

    EvalResult result;
    for (const auto& cat : benchmark.categories) {
        RecallCounts counts;
        for (const auto& sub : cat.subcategories) {
            for (const std::string& term : sub.terms) {
                ++counts.total;
                if (canon_entities.count(canonicalize(term)))
                    ++counts.covered;
                else
                    result.missing.push_back(term);
            }
        }
        counts.recall =
            counts.total ? static_cast<double>(counts.covered) / counts.total : 0.0;
        result.per_category.emplace_back(cat.name, counts);
        result.total.covered += counts.covered;
        result.total.total += counts.total;
    }
    result.total.recall = result.total.total
                              ? static_cast<double>(result.total.covered) /
                                    result.total.total
                              : 0.0;
    return result;
}

EvalResult relation_recall(const std::set<std::string>& relation_set,
                           const TermBenchmark& benchmark) {
    // Matching is identical; relations are whole strings, so phrasal forms
    // only match phrasal forms.
    return recall_rate(relation_set, benchmark);
}

void write_eval_json(const EvalResult& result, std::ostream& out) {
    nlohmann::ordered_json j;
    j["total"] = {{"n", result.total.covered},
                  {"N", result.total.total},
                  {"recall", result.total.recall}};
    j["per_category"] = nlohmann::ordered_json::array();
    for (const auto& [name, counts] : result.per_category)
        j["per_category"].push_back({{"category", name},
                                     {"n", counts.covered},
                                     {"N", counts.total},
                                     {"recall", counts.recall}});
    j["missing"] = result.missing;
    out << j.dump(2) << '\n';
}

void write_eval_table(const EvalResult& result, std::ostream& out) {
    std::size_t width = std::string("category").size();
    for (const auto& [name, counts] : result.per_category)
        width = std::max(width, name.size());
    width = std::max(width, std::string("total").size());

    auto row = [&](const std::string& name, const RecallCounts& c) {
        std::ostringstream rec;
        rec << std::fixed << std::setprecision(3) << c.recall;
        out << std::left << std::setw(static_cast<int>(width)) << name << "  "
            << std::right << std::setw(6) << c.covered << "  " << std::setw(6)
            << c.total << "  " << std::setw(6) << rec.str() << '\n';
    };

    out << std::left << std::setw(static_cast<int>(width)) << "category" << "  "
        << std::right << std::setw(6) << "n" << "  " << std::setw(6) << "N"
        << "  " << std::setw(6) << "recall" << '\n';
    out << std::string(width + 2 + 6 + 2 + 6 + 2 + 6, '-') << '\n';
    for (const auto& [name, counts] : result.per_category) row(name, counts);
    row("total", result.total);
}

}  // namespace patentkg
