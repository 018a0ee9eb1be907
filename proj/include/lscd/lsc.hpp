#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "lscd/align.hpp"
#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"
#include "lscd/errors.hpp"
#include "lscd/io_util.hpp"

namespace lscd {

// Per-target change measurement. `degree` is defined as 1 - cosine; verdicts
// are always derived from the cosine comparison so the two views can never
// disagree.
struct ChangeScore {
    std::string word;
    double cosine = 0.0;
    std::optional<int> nn_intersection; // filled by the nn threshold rule
    bool missing = false;               // absent from at least one vocabulary

    double degree() const { return 1.0 - cosine; }
};

enum class ThresholdKind { binary_threshold, global_threshold, nearest_neighbors };
enum class Statistic { mean, median };

inline std::string to_string(ThresholdKind k) {
    switch (k) {
        case ThresholdKind::binary_threshold: return "bin";
        case ThresholdKind::global_threshold: return "gl";
        case ThresholdKind::nearest_neighbors: return "nn";
    }
    return "?";
}

inline std::string to_string(Statistic s) {
    return s == Statistic::mean ? "mean" : "median";
}

inline ThresholdKind parse_threshold_kind(std::string_view s) {
    if (s == "bin") return ThresholdKind::binary_threshold;
    if (s == "gl") return ThresholdKind::global_threshold;
    if (s == "nn") return ThresholdKind::nearest_neighbors;
    throw ConfigError("unknown threshold rule '" + std::string(s) + "' (expected bin|gl|nn)");
}

inline Statistic parse_statistic(std::string_view s) {
    if (s == "mean") return Statistic::mean;
    if (s == "median") return Statistic::median;
    throw ConfigError("unknown statistic '" + std::string(s) + "' (expected mean|median)");
}

enum class Scope { per_language, global };

// A resolved classification rule. For bin/gl the value is a cosine cut; for
// nn it is the intersection-size cut.
struct ThresholdRule {
    ThresholdKind kind = ThresholdKind::binary_threshold;
    Statistic statistic = Statistic::mean;
    double value = 0.0;
    Scope scope = Scope::per_language;

    double degree_value() const { return 1.0 - value; }
};

struct BinaryVerdict {
    std::string word;
    bool changed = false;
};

// ---------------------------------------------------------------------------
// Scoring.

// What to do with targets absent from a vocabulary. The default treats
// disappearance as strong change: the maximum degree observed among scored
// targets, classified as changed.
struct MissingPolicy {
    bool use_fixed_degree = false;
    double fixed_degree = 2.0;
};

inline double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                const std::string& word) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw DegenerateVectorError("target '" + word + "' has a zero-norm vector");
    return a.dot(b) / (na * nb);
}

// One score per target, in target-file order. Missing targets are flagged
// and given the fallback degree, never dropped.
inline std::vector<ChangeScore> score_targets(const AlignedPair& pair,
                                              const TargetSet& targets,
                                              const MissingPolicy& policy = {}) {
    if (pair.source_aligned.dim() != pair.target_aligned.dim())
        throw DataError("aligned spaces have mismatched dimensions");

    std::vector<ChangeScore> scores;
    scores.reserve(targets.size());
    double max_observed_degree = 0.0;
    bool any_observed = false;

    for (const auto& word : targets.words) {
        ChangeScore score;
        score.word = word;
        const auto si = pair.source_aligned.vocab.find(word);
        const auto ti = pair.target_aligned.vocab.find(word);
        if (si && ti) {
            score.cosine = cosine_similarity(pair.source_aligned.vectors.row(*si),
                                             pair.target_aligned.vectors.row(*ti), word);
            any_observed = true;
            max_observed_degree = std::max(max_observed_degree, score.degree());
        } else {
            score.missing = true;
        }
        scores.push_back(std::move(score));
    }

    const double fallback_degree = policy.use_fixed_degree ? policy.fixed_degree
                                   : any_observed          ? max_observed_degree
                                                           : 2.0;
    for (auto& score : scores)
        if (score.missing) score.cosine = 1.0 - fallback_degree;
    return scores;
}

// Descending by degree; ties keep input order. A higher position means a
// stronger change.
inline std::vector<ChangeScore> rank_targets(const std::vector<ChangeScore>& scores) {
    std::vector<ChangeScore> ranked = scores;
    std::stable_sort(ranked.begin(), ranked.end(), [](const ChangeScore& a, const ChangeScore& b) {
        return a.degree() > b.degree();
    });
    return ranked;
}

// ---------------------------------------------------------------------------
// Threshold rules. The boundary convention everywhere: a word exactly at the
// threshold counts as unchanged.

inline double mean_of(const std::vector<double>& values) {
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
}

inline double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline double resolve_statistic(const std::vector<double>& values, Statistic statistic) {
    return statistic == Statistic::mean ? mean_of(values) : median_of(std::move(values));
}

namespace detail {

inline std::vector<double> observed_cosines(const std::vector<ChangeScore>& scores) {
    std::vector<double> cosines;
    for (const auto& s : scores)
        if (!s.missing) cosines.push_back(s.cosine);
    return cosines;
}

// changed iff cosine < threshold; missing targets are changed by definition.
inline std::vector<BinaryVerdict> verdicts_from_cosine_cut(
    const std::vector<ChangeScore>& scores, double threshold) {
    std::vector<BinaryVerdict> verdicts;
    verdicts.reserve(scores.size());
    for (const auto& s : scores)
        verdicts.push_back({s.word, s.missing ? true : s.cosine < threshold});
    return verdicts;
}

} // namespace detail

struct BinaryThresholdResult {
    ThresholdRule rule;
    std::vector<BinaryVerdict> verdicts;
};

// Per-language rule: the threshold is the mean (or median) cosine over this
// language's scored targets.
inline BinaryThresholdResult threshold_binary(const std::vector<ChangeScore>& scores,
                                              Statistic statistic) {
    const auto cosines = detail::observed_cosines(scores);
    if (cosines.empty())
        throw UnthresholdableError("cannot resolve a threshold: all targets are missing");
    BinaryThresholdResult result;
    result.rule = {ThresholdKind::binary_threshold, statistic,
                   resolve_statistic(cosines, statistic), Scope::per_language};
    result.verdicts = detail::verdicts_from_cosine_cut(scores, result.rule.value);
    return result;
}

// How the cross-language threshold is aggregated: over the pooled multiset of
// all cosines (default) or as the unweighted mean of per-language statistics.
enum class GlobalPooling { pooled, mean_of_statistics };

struct GlobalThresholdResult {
    ThresholdRule rule;
    std::map<std::string, std::vector<BinaryVerdict>> verdicts;
};

inline GlobalThresholdResult threshold_global(
    const std::map<std::string, std::vector<ChangeScore>>& per_language, Statistic statistic,
    GlobalPooling pooling = GlobalPooling::pooled) {
    if (per_language.empty())
        throw UnthresholdableError("global threshold needs at least one language");

    double value = 0.0;
    if (pooling == GlobalPooling::pooled) {
        std::vector<double> pooled;
        for (const auto& [language, scores] : per_language) {
            const auto cosines = detail::observed_cosines(scores);
            pooled.insert(pooled.end(), cosines.begin(), cosines.end());
        }
        if (pooled.empty())
            throw UnthresholdableError("cannot resolve a global threshold: all targets missing");
        value = resolve_statistic(pooled, statistic);
    } else {
        std::vector<double> per_language_values;
        for (const auto& [language, scores] : per_language) {
            const auto cosines = detail::observed_cosines(scores);
            if (cosines.empty())
                throw UnthresholdableError("language '" + language +
                                           "' has no scored targets");
            per_language_values.push_back(resolve_statistic(cosines, statistic));
        }
        value = mean_of(per_language_values);
    }

    GlobalThresholdResult result;
    result.rule = {ThresholdKind::global_threshold, statistic, value, Scope::global};
    for (const auto& [language, scores] : per_language)
        result.verdicts[language] = detail::verdicts_from_cosine_cut(scores, value);
    return result;
}

// ---------------------------------------------------------------------------
// Nearest-neighbor rule.

// Exact top-k cosine search over a space; the query row itself is excluded.
// Deterministic tie rule: higher cosine first, then lower word index.
inline std::vector<int32_t> nearest_neighbors(const EmbeddingSpace& space, int32_t row, int k) {
    const auto n = static_cast<int32_t>(space.vocab.size());
    const Eigen::VectorXd query = space.vectors.row(row);
    const double qnorm = query.norm();
    if (qnorm == 0.0)
        throw DegenerateVectorError("word '" + space.vocab.word(row) +
                                    "' has a zero-norm vector");

    std::vector<std::pair<double, int32_t>> sims;
    sims.reserve(static_cast<std::size_t>(n) - 1);
    for (int32_t i = 0; i < n; ++i) {
        if (i == row) continue;
        const double norm = space.vectors.row(i).norm();
        const double cos = norm == 0.0 ? -2.0 : query.dot(space.vectors.row(i)) / (qnorm * norm);
        sims.emplace_back(cos, i);
    }
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), sims.size());
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(kk), sims.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
    std::vector<int32_t> out;
    out.reserve(kk);
    for (std::size_t i = 0; i < kk; ++i) out.push_back(sims[i].second);
    return out;
}

// The size cut: half the second-highest intersection size, where "second
// highest" means the second sorted position, not the second distinct value.
inline double nn_threshold_from_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2)
        throw DataError("the nearest-neighbors rule needs at least 2 intersection sizes");
    std::vector<int> sorted = sizes;
    std::sort(sorted.begin(), sorted.end(), std::greater<int>());
    return static_cast<double>(sorted[1]) / 2.0;
}

struct NnThresholdResult {
    ThresholdRule rule;
    std::vector<BinaryVerdict> verdicts;
    std::vector<std::optional<int>> intersection_sizes; // aligned with targets
};

// For each target, the size of the intersection of its k-NN word sets in the
// two aligned spaces; a size at or above the cut means unchanged. Resolved
// per language.
inline NnThresholdResult threshold_nearest_neighbors(const AlignedPair& pair,
                                                     const TargetSet& targets, int k = 100) {
    if (k < 1) throw ConfigError("nn threshold: k must be >= 1");
    if (pair.source_aligned.vocab.size() <= static_cast<std::size_t>(k) ||
        pair.target_aligned.vocab.size() <= static_cast<std::size_t>(k))
        throw DataError("nn threshold: both vocabularies must have more than " +
                        std::to_string(k) + " words");

    NnThresholdResult result;
    result.intersection_sizes.resize(targets.size());
    std::vector<int> observed_sizes;

    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto& word = targets.words[t];
        const auto si = pair.source_aligned.vocab.find(word);
        const auto ti = pair.target_aligned.vocab.find(word);
        if (!si || !ti) continue;

        const auto ns = nearest_neighbors(pair.source_aligned, *si, k);
        const auto nt = nearest_neighbors(pair.target_aligned, *ti, k);
        std::unordered_set<std::string_view> source_set;
        for (auto i : ns) source_set.insert(pair.source_aligned.vocab.word(i));
        int intersection = 0;
        for (auto i : nt)
            if (source_set.count(pair.target_aligned.vocab.word(i)) > 0) ++intersection;
        result.intersection_sizes[t] = intersection;
        observed_sizes.push_back(intersection);
    }

    if (observed_sizes.size() < 2)
        throw DataError("the nearest-neighbors rule needs at least 2 scored targets (the "
                        "second-highest intersection is undefined otherwise)");

    const double cut = nn_threshold_from_sizes(observed_sizes);
    result.rule = {ThresholdKind::nearest_neighbors, Statistic::mean, cut, Scope::per_language};
    result.verdicts.reserve(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto& size = result.intersection_sizes[t];
        const bool changed = !size.has_value() || static_cast<double>(*size) < cut;
        result.verdicts.push_back({targets.words[t], changed});
    }
    return result;
}

// Convenience: annotate scores with the intersection sizes the nn rule found.
inline void attach_nn_sizes(std::vector<ChangeScore>& scores, const NnThresholdResult& nn) {
    for (std::size_t i = 0; i < scores.size() && i < nn.intersection_sizes.size(); ++i)
        scores[i].nn_intersection = nn.intersection_sizes[i];
}

// Applies the nn rule to intersection sizes recorded in a score table (the
// `score --nn-k` output), for classification without the spaces at hand.
inline NnThresholdResult threshold_nearest_neighbors_from_scores(
    const std::vector<ChangeScore>& scores) {
    NnThresholdResult result;
    std::vector<int> observed_sizes;
    for (const auto& s : scores) {
        result.intersection_sizes.push_back(s.nn_intersection);
        if (s.nn_intersection) observed_sizes.push_back(*s.nn_intersection);
    }
    if (observed_sizes.size() < 2)
        throw DataError("the nearest-neighbors rule needs at least 2 recorded intersection "
                        "sizes (re-run score with --nn-k)");
    const double cut = nn_threshold_from_sizes(observed_sizes);
    result.rule = {ThresholdKind::nearest_neighbors, Statistic::mean, cut, Scope::per_language};
    for (const auto& s : scores) {
        const bool changed =
            !s.nn_intersection || static_cast<double>(*s.nn_intersection) < cut;
        result.verdicts.push_back({s.word, changed});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Answer files and the intermediate scores table.

// Task 1: "word<TAB>{0|1}", 1 = changed, target input order.
inline void write_task1_answers(const std::vector<BinaryVerdict>& verdicts,
                                const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (const auto& v : verdicts) out << v.word << '\t' << (v.changed ? 1 : 0) << '\n';
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

// Task 2: "word<TAB>degree" with 6 decimal places, target input order.
inline void write_task2_answers(const std::vector<ChangeScore>& scores,
                                const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (const auto& s : scores)
        out << s.word << '\t' << format_fixed(s.degree(), 6) << '\n';
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

// Intermediate per-target table consumed by the classify subcommand:
// word, cosine (round-trip exact), missing flag, nn intersection or "-".
inline void write_scores(const std::vector<ChangeScore>& scores,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (const auto& s : scores) {
        out << s.word << '\t' << format_double(s.cosine) << '\t' << (s.missing ? 1 : 0) << '\t';
        if (s.nn_intersection)
            out << *s.nn_intersection;
        else
            out << '-';
        out << '\n';
    }
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

inline std::vector<ChangeScore> load_scores(const std::filesystem::path& path) {
    std::vector<ChangeScore> scores;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (fields.size() != 4)
            throw FormatError("'" + path.string() + "' line " + std::to_string(reader.lineno()) +
                              ": expected 4 tab-separated fields");
        ChangeScore s;
        s.word = fields[0];
        s.cosine = parse_double(fields[1], "cosine in " + path.string());
        s.missing = parse_int(fields[2], "missing flag in " + path.string()) != 0;
        if (fields[3] != "-")
            s.nn_intersection = static_cast<int>(parse_int(fields[3], "nn size in " + path.string()));
        scores.push_back(std::move(s));
    }
    return scores;
}

} // namespace lscd
