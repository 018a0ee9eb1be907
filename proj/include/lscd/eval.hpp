#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lscd/errors.hpp"
#include "lscd/io_util.hpp"
#include "lscd/lsc.hpp"

namespace lscd {

// Gold annotations for one language.
struct GoldData {
    std::map<std::string, int> binary;     // word -> {0,1}
    std::map<std::string, double> graded;  // word -> degree of change
};

inline std::map<std::string, std::string> load_tsv_pairs(const std::filesystem::path& path) {
    std::map<std::string, std::string> out;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        auto sep = line.find('\t');
        if (sep == std::string::npos) sep = line.find(' ');
        if (sep == std::string::npos)
            throw FormatError("'" + path.string() + "' line " + std::to_string(reader.lineno()) +
                              ": expected 'word<TAB>value'");
        out[line.substr(0, sep)] = line.substr(sep + 1);
    }
    return out;
}

inline std::map<std::string, int> load_gold_binary(const std::filesystem::path& path) {
    std::map<std::string, int> out;
    for (const auto& [word, value] : load_tsv_pairs(path)) {
        const auto label = parse_int(value, "label for '" + word + "' in " + path.string());
        if (label != 0 && label != 1)
            throw FormatError("'" + path.string() + "': label for '" + word +
                              "' must be 0 or 1");
        out[word] = static_cast<int>(label);
    }
    return out;
}

inline std::map<std::string, double> load_gold_graded(const std::filesystem::path& path) {
    std::map<std::string, double> out;
    for (const auto& [word, value] : load_tsv_pairs(path))
        out[word] = parse_double(value, "score for '" + word + "' in " + path.string());
    return out;
}

// ---------------------------------------------------------------------------
// Fraction of exact label matches over the gold key set.
inline double accuracy(const std::vector<BinaryVerdict>& predictions,
                       const std::map<std::string, int>& gold) {
    if (gold.empty()) throw DataError("accuracy: gold set is empty");
    std::map<std::string, bool> predicted;
    for (const auto& v : predictions) predicted[v.word] = v.changed;
    long long hits = 0;
    for (const auto& [word, label] : gold) {
        const auto it = predicted.find(word);
        if (it == predicted.end())
            throw CoverageError("no prediction for gold word '" + word + "'");
        if ((it->second ? 1 : 0) == label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

// ---------------------------------------------------------------------------
// Spearman's rho with average ranks for ties, computed as the Pearson
// correlation of the two rank vectors. nullopt when either rank vector has
// zero variance (the correlation is undefined, not zero).

inline std::vector<double> average_ranks(const std::vector<double>& values) {
    const auto n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0; // 1-based average
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

inline std::optional<double> spearman(const std::map<std::string, double>& predicted,
                                      const std::map<std::string, double>& gold) {
    if (gold.size() < 2) throw DataError("spearman needs at least 2 items");
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(gold.size());
    y.reserve(gold.size());
    for (const auto& [word, gold_score] : gold) {
        const auto it = predicted.find(word);
        if (it == predicted.end())
            throw CoverageError("no predicted score for gold word '" + word + "'");
        x.push_back(it->second);
        y.push_back(gold_score);
    }

    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const auto n = static_cast<double>(rx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// The best achievable accuracy when thresholding graded gold scores against
// binary gold labels: sweep cuts at midpoints between consecutive distinct
// scores plus -inf/+inf sentinels, rule "degree > t means changed". Ties in
// accuracy resolve to the smallest t.
struct OptimalThreshold {
    double t = 0.0;
    double accuracy = 0.0;
};

inline OptimalThreshold optimal_threshold(const std::map<std::string, double>& gold_graded,
                                          const std::map<std::string, int>& gold_binary) {
    if (gold_graded.size() < 2)
        throw DataError("optimal_threshold needs at least 2 items");

    std::vector<std::pair<double, int>> items;
    for (const auto& [word, score] : gold_graded) {
        const auto it = gold_binary.find(word);
        if (it == gold_binary.end())
            throw CoverageError("no binary gold label for '" + word + "'");
        items.emplace_back(score, it->second);
    }

    std::vector<double> distinct;
    for (const auto& [score, label] : items) distinct.push_back(score);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    candidates.push_back(std::numeric_limits<double>::infinity());

    OptimalThreshold best{candidates.front(), -1.0};
    for (const double t : candidates) {
        long long hits = 0;
        for (const auto& [score, label] : items)
            if ((score > t ? 1 : 0) == label) ++hits;
        const double acc = static_cast<double>(hits) / static_cast<double>(items.size());
        if (acc > best.accuracy) best = {t, acc};
    }
    return best;
}

// ---------------------------------------------------------------------------
// Report assembly.

struct LanguageEval {
    std::optional<double> accuracy;
    std::optional<double> spearman;
    long long n = 0;
    std::optional<OptimalThreshold> optimal;
};

struct EvalReport {
    std::map<std::string, LanguageEval> per_language;
    std::optional<double> average_accuracy; // unweighted over languages present
    std::optional<double> average_spearman;
};

inline EvalReport build_report(const std::map<std::string, LanguageEval>& per_language) {
    if (per_language.empty()) throw DataError("report needs at least one language");
    EvalReport report;
    report.per_language = per_language;
    double acc_total = 0.0;
    long long acc_n = 0;
    double rho_total = 0.0;
    long long rho_n = 0;
    for (const auto& [language, ev] : per_language) {
        if (ev.accuracy) {
            acc_total += *ev.accuracy;
            ++acc_n;
        }
        if (ev.spearman) {
            rho_total += *ev.spearman;
            ++rho_n;
        }
    }
    if (acc_n > 0) report.average_accuracy = acc_total / static_cast<double>(acc_n);
    if (rho_n > 0) report.average_spearman = rho_total / static_cast<double>(rho_n);
    return report;
}

inline std::string format_report_table(const EvalReport& report) {
    auto cell = [](const std::optional<double>& v) {
        return v ? format_fixed(*v, 3) : std::string("-");
    };
    std::string out;
    out += "language      accuracy  spearman  n     threshold\n";
    for (const auto& [language, ev] : report.per_language) {
        std::string row = language;
        row.resize(std::max<std::size_t>(row.size() + 1, 14), ' ');
        row += cell(ev.accuracy);
        row.resize(std::max<std::size_t>(row.size() + 1, 24), ' ');
        row += cell(ev.spearman);
        row.resize(std::max<std::size_t>(row.size() + 1, 34), ' ');
        row += std::to_string(ev.n);
        row.resize(std::max<std::size_t>(row.size() + 1, 40), ' ');
        row += ev.optimal ? format_fixed(ev.optimal->t, 3) : std::string("-");
        out += row + "\n";
    }
    std::string avg = "avg";
    avg.resize(14, ' ');
    avg += cell(report.average_accuracy);
    avg.resize(24, ' ');
    avg += cell(report.average_spearman);
    out += avg + "\n";
    return out;
}

} // namespace lscd
