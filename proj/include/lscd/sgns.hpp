#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"
#include "lscd/errors.hpp"
#include "lscd/io_util.hpp"

namespace lscd {

struct SgnsConfig {
    int dim = 100;
    int epochs = 5;
    int negatives = 5;
    int window = 5;
    int min_count = 5;
    double initial_lr = 0.025;
    double final_lr = 1e-4;
    double subsample_t = 1e-3; // 0 disables subsampling
    uint64_t seed = 1;
    int workers = 1;
    bool shuffle_sentences = false;

    void validate() const {
        if (dim < 1) throw ConfigError("sgns: dim must be >= 1");
        if (epochs < 1) throw ConfigError("sgns: epochs must be >= 1");
        if (negatives < 0) throw ConfigError("sgns: negatives must be >= 0");
        if (window < 1) throw ConfigError("sgns: window must be >= 1");
        if (min_count < 1) throw ConfigError("sgns: min_count must be >= 1");
        if (!(initial_lr > final_lr && final_lr > 0))
            throw ConfigError("sgns: need initial_lr > final_lr > 0");
        if (subsample_t < 0) throw ConfigError("sgns: subsample_t must be >= 0");
        if (workers < 1) throw ConfigError("sgns: workers must be >= 1");
    }
};

// Draws word indices with probability proportional to count^power using the
// alias method, so the sampling distribution is exact rather than quantized
// by a lookup-table size.
class UnigramSampler {
  public:
    UnigramSampler(const std::vector<long long>& counts, double power = 0.75) {
        const auto n = counts.size();
        if (n == 0) throw ConfigError("unigram sampler needs a non-empty vocabulary");
        std::vector<double> weights(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = std::pow(static_cast<double>(counts[i]), power);
            total += weights[i];
        }
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<std::size_t> small;
        std::vector<std::size_t> large;
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] / total * static_cast<double>(n);
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const auto s = small.back();
            small.pop_back();
            const auto l = large.back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = static_cast<int32_t>(l);
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (auto i : large) prob_[i] = 1.0;
        for (auto i : small) prob_[i] = 1.0; // numerical leftovers
    }

    int32_t draw(SplitMix64& rng) const {
        const auto i = static_cast<std::size_t>(rng.next_below(prob_.size()));
        return rng.next_double() < prob_[i] ? static_cast<int32_t>(i) : alias_[i];
    }

    std::size_t size() const { return prob_.size(); }

  private:
    std::vector<double> prob_;
    std::vector<int32_t> alias_;
};

// Skip-gram with negative sampling over a single corpus.
//
// Training follows the reference trainer's behavior: per-center dynamic
// window drawn uniformly from 1..window, frequent-word subsampling with
// discard probability 1 - sqrt(t/f), negatives drawn from unigram^0.75,
// linear learning-rate decay over all (epoch, position) pairs. Input vectors
// start uniform in [-0.5/dim, 0.5/dim] seeded per word index; context vectors
// start at zero. Only input vectors are exported.
//
// With workers=1 and a fixed seed the run is bit-reproducible. With more
// workers, updates to the shared matrices are unsynchronized (benign races on
// individual cells); the output is then non-deterministic but stays finite.
class SgnsTrainer {
  public:
    SgnsTrainer(const Corpus& corpus, const SgnsConfig& config) : config_(config) {
        config_.validate();
        vocab_ = build_vocabulary(corpus, config_.min_count);
        if (vocab_.empty())
            throw ConfigError("sgns: vocabulary is empty after min_count=" +
                              std::to_string(config_.min_count) + " filtering");

        sentence_offsets_.push_back(0);
        for (const auto& sentence : corpus.sentences) {
            bool any = false;
            for (const auto& token : sentence) {
                if (auto idx = vocab_.find(token)) {
                    tokens_.push_back(*idx);
                    any = true;
                }
            }
            if (any) sentence_offsets_.push_back(tokens_.size());
        }
        train_tokens_ = static_cast<long long>(tokens_.size());

        keep_prob_.resize(vocab_.size(), 1.0);
        if (config_.subsample_t > 0) {
            const auto total = static_cast<double>(train_tokens_);
            for (std::size_t i = 0; i < vocab_.size(); ++i) {
                const double freq =
                    static_cast<double>(vocab_.count(static_cast<int32_t>(i))) / total;
                keep_prob_[i] = std::min(1.0, std::sqrt(config_.subsample_t / freq));
            }
        }

        sampler_ = std::make_unique<UnigramSampler>(vocab_.counts());
        init_exp_table();
        init_vectors();
    }

    const Vocabulary& vocab() const { return vocab_; }

    void run() {
        for (int epoch = 0; epoch < config_.epochs; ++epoch) run_epoch(epoch);
    }

    void run_epoch(int epoch) {
        visited_.store(0, std::memory_order_relaxed);
        std::vector<std::size_t> order(sentence_count());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (config_.shuffle_sentences) {
            SplitMix64 rng(mix_seed(config_.seed, 0x9e37u + static_cast<uint64_t>(epoch)));
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.next_below(i)]);
        }

        if (config_.workers == 1) {
            train_range(0, epoch, order, 0, order.size());
            return;
        }
        std::vector<std::thread> threads;
        const auto n = order.size();
        const auto w = static_cast<std::size_t>(config_.workers);
        for (std::size_t t = 0; t < w; ++t) {
            const auto begin = n * t / w;
            const auto end = n * (t + 1) / w;
            threads.emplace_back([this, t, epoch, &order, begin, end] {
                train_range(static_cast<int>(t), epoch, order, begin, end);
            });
        }
        for (auto& th : threads) th.join();
    }

    EmbeddingSpace input_space() const {
        const auto n = static_cast<Eigen::Index>(vocab_.size());
        const auto d = static_cast<Eigen::Index>(config_.dim);
        Eigen::MatrixXd vectors(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                vectors(i, j) = static_cast<double>(
                    syn0_[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
                          static_cast<std::size_t>(j)]);
        if (!vectors.allFinite())
            throw NumericError("sgns: trained vectors contain NaN/Inf");
        return EmbeddingSpace{vocab_, std::move(vectors)};
    }

    // Fixed evaluation batch for tracking training progress: an (input,
    // output, negatives) triple per entry.
    struct EvalPair {
        int32_t input;
        int32_t output;
        std::vector<int32_t> negatives;
    };

    // Mean negated objective over the batch; lower is better.
    double objective_loss(const std::vector<EvalPair>& batch) const {
        auto softplus = [](double x) {
            return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        };
        const auto d = static_cast<std::size_t>(config_.dim);
        double total = 0.0;
        for (const auto& pair : batch) {
            const float* v = &syn0_[static_cast<std::size_t>(pair.input) * d];
            const float* u = &syn1_[static_cast<std::size_t>(pair.output) * d];
            double f = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                f += static_cast<double>(v[j]) * static_cast<double>(u[j]);
            total += softplus(-f); // -log sigma(f)
            for (auto neg : pair.negatives) {
                const float* un = &syn1_[static_cast<std::size_t>(neg) * d];
                double fn = 0.0;
                for (std::size_t j = 0; j < d; ++j)
                    fn += static_cast<double>(v[j]) * static_cast<double>(un[j]);
                total += softplus(fn); // -log sigma(-fn)
            }
        }
        return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
    }

    const UnigramSampler& negative_sampler() const { return *sampler_; }
    long long train_tokens() const { return train_tokens_; }
    std::size_t sentence_count() const { return sentence_offsets_.size() - 1; }

  private:
    static constexpr int kExpTableSize = 1024;
    static constexpr double kMaxExp = 6.0;

    void init_exp_table() {
        exp_table_.resize(kExpTableSize);
        for (int i = 0; i < kExpTableSize; ++i) {
            const double x = (static_cast<double>(i) / kExpTableSize * 2.0 - 1.0) * kMaxExp;
            const double e = std::exp(x);
            exp_table_[i] = static_cast<float>(e / (e + 1.0));
        }
    }

    float sigmoid(float f) const {
        if (f >= kMaxExp) return 1.0f;
        if (f <= -kMaxExp) return 0.0f;
        const int idx =
            static_cast<int>((f + kMaxExp) * (kExpTableSize / kMaxExp / 2.0));
        return exp_table_[static_cast<std::size_t>(idx)];
    }

    void init_vectors() {
        const auto d = static_cast<std::size_t>(config_.dim);
        syn0_.resize(vocab_.size() * d);
        syn1_.assign(vocab_.size() * d, 0.0f);
        for (std::size_t i = 0; i < vocab_.size(); ++i) {
            SplitMix64 rng(mix_seed(config_.seed, static_cast<uint64_t>(i)));
            for (std::size_t j = 0; j < d; ++j)
                syn0_[i * d + j] = static_cast<float>(
                    (rng.next_double() - 0.5) / static_cast<double>(config_.dim));
        }
    }

    double learning_rate(long long visited) const {
        const double span = static_cast<double>(config_.epochs) *
                            static_cast<double>(train_tokens_);
        const double progress = span > 0 ? static_cast<double>(visited) / span : 1.0;
        const double lr =
            config_.initial_lr - (config_.initial_lr - config_.final_lr) * progress;
        return std::max(lr, config_.final_lr);
    }

    void train_range(int worker, int epoch, const std::vector<std::size_t>& order,
                     std::size_t begin, std::size_t end) {
        SplitMix64 rng(mix_seed(mix_seed(config_.seed, 0xACCE55ull + static_cast<uint64_t>(epoch)),
                                static_cast<uint64_t>(worker)));
        const auto d = static_cast<std::size_t>(config_.dim);
        std::vector<float> grad_in(d);
        std::vector<int32_t> kept;

        const long long epoch_base = static_cast<long long>(epoch) * train_tokens_;
        for (std::size_t s = begin; s < end; ++s) {
            const auto sent = order[s];
            const auto lo = sentence_offsets_[sent];
            const auto hi = sentence_offsets_[sent + 1];

            double lr = learning_rate(epoch_base + visited_.load(std::memory_order_relaxed));
            visited_.fetch_add(static_cast<long long>(hi - lo), std::memory_order_relaxed);

            kept.clear();
            for (auto t = lo; t < hi; ++t) {
                const auto word = tokens_[t];
                const double keep = keep_prob_[static_cast<std::size_t>(word)];
                if (keep >= 1.0 || rng.next_double() < keep) kept.push_back(word);
            }

            const auto len = static_cast<long long>(kept.size());
            for (long long pos = 0; pos < len; ++pos) {
                const auto center = kept[static_cast<std::size_t>(pos)];
                const auto eff =
                    static_cast<long long>(config_.window) -
                    static_cast<long long>(rng.next_below(static_cast<uint64_t>(config_.window)));
                for (long long off = -eff; off <= eff; ++off) {
                    if (off == 0) continue;
                    const long long cpos = pos + off;
                    if (cpos < 0 || cpos >= len) continue;
                    const auto context = kept[static_cast<std::size_t>(cpos)];
                    float* v_in = &syn0_[static_cast<std::size_t>(context) * d];
                    std::fill(grad_in.begin(), grad_in.end(), 0.0f);

                    for (int k = 0; k <= config_.negatives; ++k) {
                        int32_t target;
                        float label;
                        if (k == 0) {
                            target = center;
                            label = 1.0f;
                        } else {
                            target = sampler_->draw(rng);
                            if (target == center) continue;
                            label = 0.0f;
                        }
                        float* u_out = &syn1_[static_cast<std::size_t>(target) * d];
                        float f = 0.0f;
                        for (std::size_t j = 0; j < d; ++j) f += v_in[j] * u_out[j];
                        const float g = (label - sigmoid(f)) * static_cast<float>(lr);
                        for (std::size_t j = 0; j < d; ++j) grad_in[j] += g * u_out[j];
                        for (std::size_t j = 0; j < d; ++j) u_out[j] += g * v_in[j];
                    }
                    for (std::size_t j = 0; j < d; ++j) v_in[j] += grad_in[j];
                }
            }
        }
    }

    SgnsConfig config_;
    Vocabulary vocab_;
    std::vector<int32_t> tokens_;
    std::vector<std::size_t> sentence_offsets_;
    long long train_tokens_ = 0;
    std::vector<double> keep_prob_;
    std::unique_ptr<UnigramSampler> sampler_;
    std::vector<float> exp_table_;
    std::vector<float> syn0_; // input (word) vectors
    std::vector<float> syn1_; // output (context) vectors
    std::atomic<long long> visited_{0};
};

inline EmbeddingSpace train(const Corpus& corpus, const SgnsConfig& config) {
    SgnsTrainer trainer(corpus, config);
    trainer.run();
    return trainer.input_space();
}

} // namespace lscd
