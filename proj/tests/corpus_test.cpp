#include <gtest/gtest.h>

#include <random>
#include <unordered_map>

#include <zlib.h>

#include "lscd/corpus.hpp"
#include "oracles.hpp"

using namespace lscd;
using testutil::TempDir;
using testutil::write_file;

TEST(CorpusTest, LoadDropsEmptyLines) {
    TempDir dir("corpus");
    write_file(dir / "c.txt", "a b c\n\nd e\n");
    const auto corpus = load_corpus(dir / "c.txt");
    ASSERT_EQ(corpus.sentences.size(), 2u);
    EXPECT_EQ(corpus.sentences[0], (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(corpus.sentences[1], (std::vector<std::string>{"d", "e"}));
    EXPECT_EQ(corpus.token_count, 5);
}

TEST(CorpusTest, LoadEmptyFile) {
    TempDir dir("corpus");
    write_file(dir / "empty.txt", "");
    const auto corpus = load_corpus(dir / "empty.txt");
    EXPECT_TRUE(corpus.sentences.empty());
    EXPECT_EQ(corpus.token_count, 0);
}

TEST(CorpusTest, TokenCountEqualsSumOfSentenceLengths) {
    TempDir dir("corpus");
    write_file(dir / "c.txt", "x y\nz\n  \nw w w\n");
    const auto corpus = load_corpus(dir / "c.txt");
    long long total = 0;
    for (const auto& s : corpus.sentences) total += static_cast<long long>(s.size());
    EXPECT_EQ(corpus.token_count, total);
    for (const auto& s : corpus.sentences) EXPECT_FALSE(s.empty());
}

TEST(CorpusTest, TokensKeptVerbatim) {
    TempDir dir("corpus");
    write_file(dir / "c.txt", "the face_nn of Gesicht\n");
    const auto corpus = load_corpus(dir / "c.txt");
    EXPECT_EQ(corpus.sentences[0][1], "face_nn");
    EXPECT_EQ(corpus.sentences[0][3], "Gesicht"); // capitalization preserved
}

TEST(CorpusTest, LoadGzipByExtension) {
    TempDir dir("corpus");
    const auto path = (dir / "c.txt.gz").string();
    gzFile gz = gzopen(path.c_str(), "wb");
    ASSERT_NE(gz, nullptr);
    const std::string content = "a b\nc d e\n";
    gzwrite(gz, content.data(), static_cast<unsigned>(content.size()));
    gzclose(gz);

    const auto corpus = load_corpus(path);
    EXPECT_EQ(corpus.sentences.size(), 2u);
    EXPECT_EQ(corpus.token_count, 5);
}

TEST(CorpusTest, MissingFileIsIoError) {
    EXPECT_THROW(load_corpus("/nonexistent/corpus.txt"), IoError);
}

TEST(CorpusTest, InvalidUtf8ReportsLineNumber) {
    TempDir dir("corpus");
    write_file(dir / "c.txt", "good line\nbad \xff\xfe line\n");
    try {
        load_corpus(dir / "c.txt");
        FAIL() << "expected EncodingError";
    } catch (const EncodingError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(CorpusTest, BuildVocabularyAppliesThreshold) {
    Corpus corpus;
    corpus.sentences = {{"a", "a", "a", "b"}};
    corpus.token_count = 4;
    const auto vocab = build_vocabulary(corpus, 2);
    ASSERT_EQ(vocab.size(), 1u);
    EXPECT_EQ(vocab.word(0), "a");
    EXPECT_EQ(vocab.count(0), 3);
}

TEST(CorpusTest, BuildVocabularyBreaksTiesLexicographically) {
    Corpus corpus;
    corpus.sentences = {{"b", "a", "b", "a"}};
    corpus.token_count = 4;
    const auto vocab = build_vocabulary(corpus, 1);
    ASSERT_EQ(vocab.size(), 2u);
    EXPECT_EQ(vocab.word(0), "a");
    EXPECT_EQ(vocab.word(1), "b");
}

TEST(CorpusTest, BuildVocabularyMatchesCountingOracle) {
    std::mt19937 rng(41);
    Corpus corpus;
    std::vector<std::string> sentence;
    for (int i = 0; i < 1000; ++i) {
        sentence.push_back("w" + std::to_string(rng() % 50));
        if (sentence.size() == 10) {
            corpus.sentences.push_back(sentence);
            sentence.clear();
        }
    }
    corpus.token_count = 1000;

    // Independent tally.
    std::unordered_map<std::string, long long> oracle;
    for (const auto& s : corpus.sentences)
        for (const auto& w : s) ++oracle[w];

    const auto vocab = build_vocabulary(corpus, 5);
    std::size_t oracle_kept = 0;
    for (const auto& [word, count] : oracle)
        if (count >= 5) ++oracle_kept;
    EXPECT_EQ(vocab.size(), oracle_kept);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        EXPECT_EQ(vocab.count(static_cast<int32_t>(i)), oracle.at(vocab.word(static_cast<int32_t>(i))));
    }
    // Ordering: descending count, lexicographic ties.
    for (std::size_t i = 1; i < vocab.size(); ++i) {
        const auto a = static_cast<int32_t>(i - 1);
        const auto b = static_cast<int32_t>(i);
        EXPECT_TRUE(vocab.count(a) > vocab.count(b) ||
                    (vocab.count(a) == vocab.count(b) && vocab.word(a) < vocab.word(b)));
    }
}

TEST(CorpusTest, VocabularyDeterministicAcrossIngestions) {
    TempDir dir("corpus");
    std::string content;
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        content += "w" + std::to_string(rng() % 30);
        content += (i % 8 == 7) ? '\n' : ' ';
    }
    write_file(dir / "c.txt", content);
    const auto v1 = build_vocabulary(load_corpus(dir / "c.txt"), 2);
    const auto v2 = build_vocabulary(load_corpus(dir / "c.txt"), 2);
    EXPECT_EQ(v1.words(), v2.words());
    EXPECT_EQ(v1.counts(), v2.counts());
}

TEST(CorpusTest, CountConservation) {
    std::mt19937 rng(11);
    Corpus corpus;
    for (int s = 0; s < 50; ++s) {
        std::vector<std::string> sentence;
        const int len = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < len; ++i) sentence.push_back("w" + std::to_string(rng() % 40));
        corpus.token_count += len;
        corpus.sentences.push_back(std::move(sentence));
    }
    const auto vocab = build_vocabulary(corpus, 1);
    EXPECT_EQ(vocab.total_count(), corpus.token_count);
}

TEST(CorpusTest, FilterMonotonicity) {
    std::mt19937 rng(13);
    Corpus corpus;
    std::vector<std::string> sentence;
    for (int i = 0; i < 500; ++i) sentence.push_back("w" + std::to_string(rng() % 60));
    corpus.sentences.push_back(sentence);
    corpus.token_count = 500;

    std::vector<std::string> previous;
    for (int min_count = 1; min_count <= 12; ++min_count) {
        const auto vocab = build_vocabulary(corpus, min_count);
        if (min_count > 1) {
            for (const auto& w : vocab.words())
                EXPECT_NE(std::find(previous.begin(), previous.end(), w), previous.end())
                    << "min_count=" << min_count << " introduced word " << w;
        }
        previous = vocab.words();
    }
}

TEST(CorpusTest, MinCountBelowOneRejected) {
    Corpus corpus;
    corpus.sentences = {{"a"}};
    corpus.token_count = 1;
    EXPECT_THROW(build_vocabulary(corpus, 0), ConfigError);
}

TEST(CorpusTest, MeanContextClipsAtSentenceBoundary) {
    Corpus corpus;
    corpus.sentences = {{"t", "a", "b"}};
    corpus.token_count = 3;
    TargetSet targets{{"t"}};
    const auto mean = mean_target_context_size(corpus, targets, 5);
    ASSERT_TRUE(mean.has_value());
    EXPECT_DOUBLE_EQ(*mean, 2.0);
}

TEST(CorpusTest, MeanContextFullWindow) {
    Corpus corpus;
    corpus.sentences = {{"a", "t", "b"}};
    corpus.token_count = 3;
    TargetSet targets{{"t"}};
    const auto mean = mean_target_context_size(corpus, targets, 1);
    ASSERT_TRUE(mean.has_value());
    EXPECT_DOUBLE_EQ(*mean, 2.0);
}

TEST(CorpusTest, MeanContextNoOccurrencesIsEmptySignal) {
    Corpus corpus;
    corpus.sentences = {{"a", "b"}};
    corpus.token_count = 2;
    TargetSet targets{{"zzz"}};
    EXPECT_FALSE(mean_target_context_size(corpus, targets, 5).has_value());
}

TEST(CorpusTest, MeanContextAveragesOverOccurrences) {
    Corpus corpus;
    corpus.sentences = {{"t"}, {"a", "t", "b", "c"}};
    corpus.token_count = 5;
    TargetSet targets{{"t"}};
    // First occurrence: 0 context tokens; second with window 2: 3.
    const auto mean = mean_target_context_size(corpus, targets, 2);
    ASSERT_TRUE(mean.has_value());
    EXPECT_DOUBLE_EQ(*mean, 1.5);
}

TEST(CorpusTest, LoadTargetsPreservesOrderAndDeduplicates) {
    TempDir dir("targets");
    write_file(dir / "t.txt", "face_nn\nplane_nn\nface_nn\nwalk_vb\n");
    const auto targets = load_targets(dir / "t.txt");
    EXPECT_EQ(targets.words,
              (std::vector<std::string>{"face_nn", "plane_nn", "walk_vb"}));
}
