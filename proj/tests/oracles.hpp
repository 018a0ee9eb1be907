// Test-only oracles and data generators. Everything here deliberately takes
// an independent route from the library implementation it checks.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"
#include "lscd/lsc.hpp"

namespace testutil {

// ---------------------------------------------------------------------------
// Scratch directory, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lscd-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// Embedding-space construction helpers.

inline lscd::EmbeddingSpace make_space(const std::vector<std::string>& words,
                                       const Eigen::MatrixXd& vectors) {
    std::vector<long long> counts(words.size(), 1);
    return lscd::EmbeddingSpace{lscd::Vocabulary(words, counts, 1), vectors};
}

inline lscd::EmbeddingSpace random_space(int n, int dim, std::mt19937& rng,
                                         const std::string& prefix = "w") {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd m(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = gauss(rng);
    std::vector<std::string> words;
    for (int i = 0; i < n; ++i) words.push_back(prefix + std::to_string(i));
    return make_space(words, m);
}

// Haar-distributed random orthogonal matrix: QR of a Gaussian matrix with the
// sign of R's diagonal folded into Q.
inline Eigen::MatrixXd random_orthogonal(int dim, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

// Procrustes objective sum_i |W a_i - b_i|^2 over dictionary rows.
inline double procrustes_objective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& b) {
    return (a * w.transpose() - b).squaredNorm();
}

// ---------------------------------------------------------------------------
// CCA oracle: canonical correlations via the generalized symmetric
// eigenproblem (Cab Cbb^-1 Cba) v = rho^2 Caa v, same centering and ridge
// convention as the implementation but a different algebraic route.
inline std::vector<double> cca_correlations_eig_oracle(Eigen::MatrixXd a, Eigen::MatrixXd b,
                                                       double reg) {
    const auto n = a.rows();
    const auto d = a.cols();
    a.rowwise() -= a.colwise().mean();
    b.rowwise() -= b.colwise().mean();
    const double denom = static_cast<double>(n - 1);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd caa = a.transpose() * a / denom + reg * eye;
    const Eigen::MatrixXd cbb = b.transpose() * b / denom + reg * eye;
    const Eigen::MatrixXd cab = a.transpose() * b / denom;
    const Eigen::MatrixXd lhs = cab * cbb.inverse() * cab.transpose();

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(lhs, caa);
    std::vector<double> correlations;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        correlations.push_back(std::sqrt(std::max(0.0, solver.eigenvalues()(i))));
    std::sort(correlations.begin(), correlations.end(), std::greater<double>());
    return correlations;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Spearman oracle: average ranks by direct counting, then the tie-corrected
// sum-of-squared-differences formula (never Pearson-of-ranks).
inline std::vector<double> counting_ranks(const std::vector<double>& values) {
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        int less = 0;
        int equal = 0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] < values[i]) ++less;
            if (values[j] == values[i]) ++equal;
        }
        ranks[i] = less + 0.5 * (equal + 1);
    }
    return ranks;
}

inline double tie_correction(const std::vector<double>& values) {
    std::map<double, int> multiplicity;
    for (double v : values) ++multiplicity[v];
    double t = 0.0;
    for (const auto& [value, m] : multiplicity)
        t += (static_cast<double>(m) * m * m - m) / 12.0;
    return t;
}

inline double spearman_formula_oracle(const std::vector<double>& x,
                                      const std::vector<double>& y) {
    const auto rx = counting_ranks(x);
    const auto ry = counting_ranks(y);
    const double n = static_cast<double>(x.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    const double base = n * (n * n - 1.0) / 12.0;
    const double tx = tie_correction(x);
    const double ty = tie_correction(y);
    return (base - (tx + ty + d2) / 2.0) / std::sqrt((base - tx) * (base - ty));
}

// ---------------------------------------------------------------------------
// Threshold-rule oracles: direct restatements of the rules, evaluated
// independently of the library's code paths.
inline std::vector<bool> bin_rule_oracle(const std::vector<double>& cosines, bool use_median) {
    std::vector<double> sorted = cosines;
    std::sort(sorted.begin(), sorted.end());
    double t;
    if (use_median) {
        const auto n = sorted.size();
        t = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    } else {
        double total = 0;
        for (double c : sorted) total += c;
        t = total / static_cast<double>(sorted.size());
    }
    std::vector<bool> changed;
    for (double c : cosines) changed.push_back(c < t);
    return changed;
}

inline std::vector<bool> nn_rule_oracle(const std::vector<int>& sizes) {
    std::vector<int> sorted = sizes;
    std::sort(sorted.begin(), sorted.end());
    const double t = static_cast<double>(sorted[sorted.size() - 2]) / 2.0;
    std::vector<bool> changed;
    for (int s : sizes) changed.push_back(!(static_cast<double>(s) >= t));
    return changed;
}

// Best threshold accuracy by trying every distinct score as a cut (plus the
// all-changed cut); the accuracy landscape is piecewise constant, so this
// enumeration reaches the same maximum as any midpoint sweep.
inline double optimal_threshold_accuracy_oracle(const std::vector<double>& scores,
                                                const std::vector<int>& labels) {
    std::vector<double> candidates = scores;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    double best = 0.0;
    for (double t : candidates) {
        int hits = 0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if ((scores[i] > t ? 1 : 0) == labels[i]) ++hits;
        best = std::max(best, static_cast<double>(hits) / static_cast<double>(scores.size()));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Chi-square 0.999 quantile (Wilson-Hilferty approximation); good to a few
// tenths for the dozens-of-degrees range used here.
inline double chi2_quantile_999(int df) {
    const double z = 3.090232306167813; // Phi^-1(0.999)
    const double k = static_cast<double>(df);
    const double c = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * c * c * c;
}

// ---------------------------------------------------------------------------
// Synthetic two-topic drift corpora. Twenty pseudo-targets; ten keep their
// topic between the corpora and ten migrate with graded mixing rates, which
// serve as the ground-truth shift magnitudes.
struct DriftData {
    lscd::Corpus corpus1;
    lscd::Corpus corpus2;
    lscd::TargetSet targets;
    std::map<std::string, int> gold_binary;
    std::map<std::string, double> gold_graded;
};

inline DriftData make_drift_data(uint64_t seed, int sentences_per_corpus = 15000) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int topic_words = 120;
    const int function_words = 20;
    auto topic_word = [&](int topic, double u) {
        const int idx = std::min(topic_words - 1, static_cast<int>(u * u * topic_words));
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%c%03d", topic == 0 ? 'a' : 'b', idx);
        return std::string(buf);
    };

    DriftData data;
    std::vector<int> topic1(20);
    std::vector<int> topic2(20);
    std::vector<double> mix(20, 0.0); // probability of drawing the new topic in corpus 2
    for (int t = 0; t < 20; ++t) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "t%02d", t);
        data.targets.words.emplace_back(buf);
        if (t < 10) {
            topic1[t] = t % 2;
            topic2[t] = t % 2;
            data.gold_binary[buf] = 0;
            data.gold_graded[buf] = 0.0;
        } else {
            topic1[t] = t % 2;
            topic2[t] = 1 - t % 2;
            mix[t] = 0.7 + 0.3 * static_cast<double>(t - 10) / 9.0;
            data.gold_binary[buf] = 1;
            data.gold_graded[buf] = mix[t];
        }
    }

    auto build = [&](int which) {
        lscd::Corpus corpus;
        corpus.source_label = which == 0 ? "C1" : "C2";
        for (int s = 0; s < sentences_per_corpus; ++s) {
            const bool has_target = unit(rng) < 0.6;
            int topic;
            int target = -1;
            if (has_target) {
                target = static_cast<int>(rng() % 20);
                if (which == 0) {
                    topic = topic1[target];
                } else {
                    const int base = topic1[target];
                    const int flipped = topic2[target];
                    topic = unit(rng) < mix[target] ? flipped : base;
                }
            } else {
                topic = unit(rng) < 0.5 ? 0 : 1;
            }
            const int len = 12 + static_cast<int>(rng() % 7);
            std::vector<std::string> sentence;
            sentence.reserve(static_cast<std::size_t>(len) + 1);
            for (int i = 0; i < len; ++i) {
                if (unit(rng) < 0.12) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "f%02d", static_cast<int>(rng() % function_words));
                    sentence.emplace_back(buf);
                } else {
                    sentence.push_back(topic_word(topic, unit(rng)));
                }
            }
            if (has_target) {
                const auto pos = static_cast<std::ptrdiff_t>(rng() % (sentence.size() + 1));
                sentence.insert(sentence.begin() + pos, data.targets.words[static_cast<std::size_t>(target)]);
            }
            corpus.token_count += static_cast<long long>(sentence.size());
            corpus.sentences.push_back(std::move(sentence));
        }
        return corpus;
    };
    data.corpus1 = build(0);
    data.corpus2 = build(1);
    return data;
}

inline void write_corpus_file(const lscd::Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& sentence : corpus.sentences) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (i > 0) out << ' ';
            out << sentence[i];
        }
        out << '\n';
    }
}

inline void write_targets_file(const lscd::TargetSet& targets,
                               const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& w : targets.words) out << w << '\n';
}

inline void write_gold_dir(const std::map<std::string, int>& binary,
                           const std::map<std::string, double>& graded,
                           const std::string& language, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "task1");
    std::filesystem::create_directories(dir / "task2");
    std::ofstream b(dir / "task1" / (language + ".txt"), std::ios::binary);
    for (const auto& [word, label] : binary) b << word << '\t' << label << '\n';
    std::ofstream g(dir / "task2" / (language + ".txt"), std::ios::binary);
    for (const auto& [word, score] : graded) g << word << '\t' << score << '\n';
}

} // namespace testutil
