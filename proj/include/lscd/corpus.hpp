#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lscd/errors.hpp"
#include "lscd/io_util.hpp"

namespace lscd {

// A lemmatized corpus: one sentence per line, whitespace-separated tokens.
// Tokens are kept verbatim (no case folding; POS-suffixed forms like
// "face_nn" stay intact). Empty lines are dropped at ingestion.
struct Corpus {
    std::vector<std::vector<std::string>> sentences;
    long long token_count = 0;
    std::string source_label;
};

// Reads a corpus from plain or gzip text. Compression is detected from the
// ".gz" extension unless `gzipped` forces it. Invalid UTF-8 is rejected with
// the offending line number.
inline Corpus load_corpus(const std::filesystem::path& path,
                          std::optional<bool> gzipped = std::nullopt,
                          std::string_view label = "") {
    Corpus corpus;
    corpus.source_label = label.empty() ? path.filename().string() : std::string(label);

    LineReader reader(path, gzipped);
    std::string line;
    while (reader.next(line)) {
        if (auto bad = utf8_invalid_at(line))
            throw EncodingError("invalid UTF-8 in '" + path.string() + "' at line " +
                                std::to_string(reader.lineno()) + ", byte " +
                                std::to_string(*bad));
        std::vector<std::string> sentence;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
            if (i > start) sentence.emplace_back(line, start, i - start);
        }
        if (sentence.empty()) continue;
        corpus.token_count += static_cast<long long>(sentence.size());
        corpus.sentences.push_back(std::move(sentence));
    }
    return corpus;
}

// Word <-> row-index map with occurrence counts. Construction validates the
// bijection; the min-count floor is recorded with the instance.
class Vocabulary {
  public:
    Vocabulary() = default;

    Vocabulary(std::vector<std::string> words, std::vector<long long> counts,
               int min_count)
        : words_(std::move(words)), counts_(std::move(counts)), min_count_(min_count) {
        if (words_.size() != counts_.size())
            throw ConfigError("vocabulary words/counts size mismatch");
        index_.reserve(words_.size());
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (counts_[i] < min_count_)
                throw ConfigError("vocabulary word '" + words_[i] +
                                  "' has count below min_count");
            auto [it, inserted] = index_.emplace(words_[i], static_cast<int32_t>(i));
            if (!inserted)
                throw DataError("duplicate vocabulary word '" + words_[i] + "'");
        }
    }

    std::size_t size() const { return words_.size(); }
    bool empty() const { return words_.empty(); }
    const std::string& word(int32_t i) const { return words_[static_cast<std::size_t>(i)]; }
    long long count(int32_t i) const { return counts_[static_cast<std::size_t>(i)]; }
    int min_count() const { return min_count_; }
    const std::vector<std::string>& words() const { return words_; }
    const std::vector<long long>& counts() const { return counts_; }

    std::optional<int32_t> find(std::string_view w) const {
        auto it = index_.find(std::string(w));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view w) const { return find(w).has_value(); }

    long long total_count() const {
        long long total = 0;
        for (auto c : counts_) total += c;
        return total;
    }

  private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int32_t> index_;
    std::vector<long long> counts_;
    int min_count_ = 1;
};

// Tallies token frequencies and keeps words with count >= min_count, ordered
// by descending count with lexicographic tie-break. The ordering is what
// makes negative-sampling tables and saved spaces reproducible run-to-run.
inline Vocabulary build_vocabulary(const Corpus& corpus, int min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");

    std::unordered_map<std::string, long long> tally;
    for (const auto& sentence : corpus.sentences)
        for (const auto& token : sentence) ++tally[token];

    std::vector<std::pair<std::string, long long>> kept;
    kept.reserve(tally.size());
    for (auto& [word, count] : tally)
        if (count >= min_count) kept.emplace_back(word, count);

    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::string> words;
    std::vector<long long> counts;
    words.reserve(kept.size());
    counts.reserve(kept.size());
    for (auto& [word, count] : kept) {
        words.push_back(std::move(word));
        counts.push_back(count);
    }
    return Vocabulary(std::move(words), std::move(counts), min_count);
}

// Target words to score, in input-file order. Output files list targets in
// exactly this order.
struct TargetSet {
    std::vector<std::string> words;

    std::size_t size() const { return words.size(); }
    bool contains(std::string_view w) const {
        return std::find(words.begin(), words.end(), w) != words.end();
    }
};

// One target per line, verbatim (POS suffixes kept). Repeated entries keep
// their first position.
inline TargetSet load_targets(const std::filesystem::path& path) {
    TargetSet targets;
    std::unordered_set<std::string> seen;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        if (auto bad = utf8_invalid_at(line))
            throw EncodingError("invalid UTF-8 in '" + path.string() + "' at line " +
                                std::to_string(reader.lineno()) + ", byte " +
                                std::to_string(*bad));
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        if (line.empty()) continue;
        if (seen.insert(line).second) targets.words.push_back(line);
    }
    return targets;
}

// Mean number of context tokens within +-window of each target occurrence,
// clipped at sentence boundaries. nullopt when no target occurs at all
// (an explicit no-occurrence signal rather than a misleading zero).
inline std::optional<double> mean_target_context_size(const Corpus& corpus,
                                                      const TargetSet& targets,
                                                      int window) {
    if (window < 1) throw ConfigError("window must be >= 1");
    std::unordered_set<std::string_view> target_set;
    for (const auto& w : targets.words) target_set.insert(w);

    long long occurrences = 0;
    long long context_tokens = 0;
    for (const auto& sentence : corpus.sentences) {
        const auto len = static_cast<long long>(sentence.size());
        for (long long pos = 0; pos < len; ++pos) {
            if (target_set.count(sentence[static_cast<std::size_t>(pos)]) == 0) continue;
            const long long lo = std::max<long long>(0, pos - window);
            const long long hi = std::min<long long>(len - 1, pos + window);
            ++occurrences;
            context_tokens += hi - lo; // excludes the target itself
        }
    }
    if (occurrences == 0) return std::nullopt;
    return static_cast<double>(context_tokens) / static_cast<double>(occurrences);
}

} // namespace lscd
