#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lscd/corpus.hpp"
#include "lscd/embedding.hpp"
#include "lscd/errors.hpp"
#include "lscd/io_util.hpp"

namespace lscd {

enum class MapMethod { cca, orthogonal, unsupervised };
enum class MapDirection { s_to_t, t_to_s };

inline std::string to_string(MapMethod m) {
    switch (m) {
        case MapMethod::cca: return "cca";
        case MapMethod::orthogonal: return "orthogonal";
        case MapMethod::unsupervised: return "unsupervised";
    }
    return "?";
}

inline std::string to_string(MapDirection d) {
    return d == MapDirection::s_to_t ? "s_to_t" : "t_to_s";
}

inline MapMethod parse_method(std::string_view s) {
    if (s == "cca") return MapMethod::cca;
    if (s == "orthogonal") return MapMethod::orthogonal;
    if (s == "unsupervised") return MapMethod::unsupervised;
    throw ConfigError("unknown method '" + std::string(s) +
                      "' (expected cca|orthogonal|unsupervised)");
}

inline MapDirection parse_direction(std::string_view s) {
    if (s == "s_to_t") return MapDirection::s_to_t;
    if (s == "t_to_s") return MapDirection::t_to_s;
    throw ConfigError("unknown direction '" + std::string(s) +
                      "' (expected s_to_t|t_to_s)");
}

// A dim x dim transformation acting on column vectors: y = matrix * x. Row
// matrices of embeddings are mapped as X * matrix^T.
struct LinearMap {
    Eigen::MatrixXd matrix;
    MapMethod method = MapMethod::orthogonal;
    MapDirection direction = MapDirection::s_to_t;
    bool orthogonal = false;

    int dim() const { return static_cast<int>(matrix.rows()); }

    double orthogonality_defect() const {
        const Eigen::MatrixXd r =
            matrix.transpose() * matrix -
            Eigen::MatrixXd::Identity(matrix.cols(), matrix.cols());
        return r.cwiseAbs().maxCoeff();
    }
};

inline EmbeddingSpace apply(const LinearMap& map, const EmbeddingSpace& space) {
    if (map.matrix.cols() != space.dim())
        throw DataError("shape mismatch: map is " + std::to_string(map.dim()) +
                        "-dimensional, space is " + std::to_string(space.dim()));
    return EmbeddingSpace{space.vocab, space.vectors * map.matrix.transpose()};
}

// ---------------------------------------------------------------------------
// Seed dictionary: word pairs anchoring a supervised fit, resolved to row
// indices in their respective spaces.
struct SeedDictionary {
    std::vector<std::string> source_words;
    std::vector<std::string> target_words;
    std::vector<int32_t> source_rows;
    std::vector<int32_t> target_rows;

    std::size_t size() const { return source_rows.size(); }

    void add(std::string sw, std::string tw, int32_t sr, int32_t tr) {
        source_words.push_back(std::move(sw));
        target_words.push_back(std::move(tw));
        source_rows.push_back(sr);
        target_rows.push_back(tr);
    }
};

// Identical word forms shared by both vocabularies, minus the excluded
// targets, in source vocabulary order.
inline SeedDictionary build_seed_dictionary(const EmbeddingSpace& source,
                                            const EmbeddingSpace& target,
                                            const TargetSet& exclude) {
    if (source.vocab.empty() || target.vocab.empty())
        throw AlignmentError("cannot build a seed dictionary from an empty space");
    std::unordered_set<std::string_view> excluded;
    for (const auto& w : exclude.words) excluded.insert(w);

    SeedDictionary dict;
    for (std::size_t i = 0; i < source.vocab.size(); ++i) {
        const auto& w = source.vocab.word(static_cast<int32_t>(i));
        if (excluded.count(w) > 0) continue;
        if (auto j = target.vocab.find(w))
            dict.add(w, w, static_cast<int32_t>(i), *j);
    }
    if (dict.size() == 0)
        throw AlignmentError(
            "alignment impossible: vocabulary intersection (minus excluded targets) is empty");
    return dict;
}

inline void save_dictionary(const SeedDictionary& dict, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (std::size_t i = 0; i < dict.size(); ++i)
        out << dict.source_words[i] << '\t' << dict.target_words[i] << '\n';
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

inline SeedDictionary load_dictionary(const std::filesystem::path& path,
                                      const EmbeddingSpace& source,
                                      const EmbeddingSpace& target) {
    SeedDictionary dict;
    std::unordered_set<std::string> seen_sources;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError("'" + path.string() + "' line " +
                              std::to_string(reader.lineno()) +
                              ": expected two tab-separated words");
        const std::string sw = line.substr(0, tab);
        const std::string tw = line.substr(tab + 1);
        if (!seen_sources.insert(sw).second)
            throw DataError("duplicate source entry '" + sw + "' in '" + path.string() + "'");
        const auto si = source.vocab.find(sw);
        const auto ti = target.vocab.find(tw);
        if (!si || !ti)
            throw DataError("dictionary pair '" + sw + "' / '" + tw +
                            "' not resolvable in the given spaces");
        dict.add(sw, tw, *si, *ti);
    }
    if (dict.size() == 0)
        throw AlignmentError("alignment impossible: dictionary '" + path.string() +
                             "' is empty");
    return dict;
}

// Paired dictionary vectors as (source rows, target rows) matrices.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> dictionary_matrices(
    const SeedDictionary& dict, const EmbeddingSpace& source, const EmbeddingSpace& target) {
    const auto n = static_cast<Eigen::Index>(dict.size());
    Eigen::MatrixXd a(n, source.dim());
    Eigen::MatrixXd b(n, target.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        a.row(i) = source.vectors.row(dict.source_rows[static_cast<std::size_t>(i)]);
        b.row(i) = target.vectors.row(dict.target_rows[static_cast<std::size_t>(i)]);
    }
    return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Orthogonal Procrustes: the orthogonal W minimizing sum_i |W a_i - b_i|^2,
// via SVD of the cross-covariance. Reflections are admitted (the constraint
// is orthogonality, not properness). Dictionary vectors enter raw by
// default; centering/normalization are opt-in preprocessing of the fit only.
struct ProcrustesOptions {
    bool center = false;
    bool normalize = false;
};

inline LinearMap fit_orthogonal(const EmbeddingSpace& source, const EmbeddingSpace& target,
                                const SeedDictionary& dict,
                                const ProcrustesOptions& opts = {}) {
    if (dict.size() == 0) throw AlignmentError("orthogonal fit needs a non-empty dictionary");
    if (source.dim() != target.dim())
        throw DataError("shape mismatch: spaces have dims " + std::to_string(source.dim()) +
                        " and " + std::to_string(target.dim()));
    auto [a, b] = dictionary_matrices(dict, source, target);
    if (opts.normalize) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double na = a.row(i).norm();
            const double nb = b.row(i).norm();
            if (na > 0) a.row(i) /= na;
            if (nb > 0) b.row(i) /= nb;
        }
    }
    if (opts.center) {
        a.rowwise() -= a.colwise().mean();
        b.rowwise() -= b.colwise().mean();
    }

    const Eigen::MatrixXd cross = a.transpose() * b; // maximize tr(W * cross)
    if (cross.cwiseAbs().maxCoeff() == 0.0)
        throw SingularityError("degenerate dictionary: cross-covariance is zero");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    LinearMap map;
    map.matrix = svd.matrixV() * svd.matrixU().transpose();
    map.method = MapMethod::orthogonal;
    map.orthogonal = true;
    return map;
}

// ---------------------------------------------------------------------------
// CCA composition. Both dictionary sides are centered columnwise; covariances
// get a ridge term reg*I; the whitened cross-covariance is factored by SVD.
// The composed source-to-target map routes through the common space with a
// Moore-Penrose pseudo-inverse of the target projection.
struct CcaSolution {
    LinearMap map;                     // composed source -> target
    Eigen::MatrixXd source_to_common;  // column operator
    Eigen::MatrixXd target_to_common;
    std::vector<double> correlations;  // non-increasing canonical correlations
};

inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rcond = 1e-10) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return Eigen::MatrixXd::Zero(m.cols(), m.rows());
    const double cutoff = rcond * sv(0);
    Eigen::VectorXd inv = sv;
    for (Eigen::Index i = 0; i < inv.size(); ++i)
        inv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

namespace detail {

// Inverse symmetric square root of a covariance matrix. With reg == 0 a
// rank-deficient input is an error rather than a silently clipped solve.
inline Eigen::MatrixXd inverse_sqrt_spd(const Eigen::MatrixXd& cov, double reg,
                                        const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw NumericError("eigendecomposition failed for " + what);
    const auto& vals = eig.eigenvalues();
    const double max_val = vals.maxCoeff();
    const double tol = std::max(max_val, 0.0) * 1e-12;
    if (vals.minCoeff() <= tol)
        throw SingularityError(what + " is rank-deficient" +
                               (reg == 0.0 ? "; retry with reg > 0" : ""));
    Eigen::VectorXd inv_sqrt = vals;
    for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i)
        inv_sqrt(i) = 1.0 / std::sqrt(vals(i));
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace detail

inline CcaSolution fit_cca(const EmbeddingSpace& source, const EmbeddingSpace& target,
                           const SeedDictionary& dict, double reg = 1e-8) {
    if (reg < 0) throw ConfigError("cca: reg must be >= 0");
    if (source.dim() != target.dim())
        throw DataError("shape mismatch: spaces have dims " + std::to_string(source.dim()) +
                        " and " + std::to_string(target.dim()));
    if (dict.size() < 2)
        throw AlignmentError("cca needs at least 2 dictionary pairs, got " +
                             std::to_string(dict.size()));

    auto [a, b] = dictionary_matrices(dict, source, target);
    a.rowwise() -= a.colwise().mean();
    b.rowwise() -= b.colwise().mean();

    const auto d = source.dim();
    const double denom = static_cast<double>(dict.size() - 1);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd caa = a.transpose() * a / denom + reg * eye;
    const Eigen::MatrixXd cbb = b.transpose() * b / denom + reg * eye;
    const Eigen::MatrixXd cab = a.transpose() * b / denom;

    const Eigen::MatrixXd ka = detail::inverse_sqrt_spd(caa, reg, "source covariance");
    const Eigen::MatrixXd kb = detail::inverse_sqrt_spd(cbb, reg, "target covariance");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(ka * cab * kb,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);

    // Right-acting projections: projected rows are X_rows * P.
    const Eigen::MatrixXd pa = ka * svd.matrixU();
    const Eigen::MatrixXd pb = kb * svd.matrixV();

    CcaSolution sol;
    sol.source_to_common = pa.transpose();
    sol.target_to_common = pb.transpose();
    sol.correlations.assign(svd.singularValues().data(),
                            svd.singularValues().data() + svd.singularValues().size());
    sol.map.matrix = (pa * pseudo_inverse(pb)).transpose();
    sol.map.method = MapMethod::cca;
    sol.map.orthogonal = false;
    return sol;
}

// ---------------------------------------------------------------------------
// Simplified unsupervised self-learning: seed from identical word forms
// (falling back to a similarity-signature match), then alternate an
// orthogonal fit with mutual-nearest-neighbor dictionary induction under
// CSLS until fewer than `convergence_threshold` of the entries change.
// Relative to the full VecMap procedure this drops stochastic dictionary
// dropout, frequency-based vocabulary cutoffs and symmetric re-weighting.
struct UnsupervisedConfig {
    int csls_k = 10;
    int max_iterations = 50;
    double convergence_threshold = 0.01;
    int init_fallback_rows = 2000;
};

struct UnsupervisedResult {
    LinearMap map;
    SeedDictionary dictionary; // final induced dictionary
    int iterations = 0;
};

namespace detail {

inline Eigen::MatrixXd normalized_rows(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm > 0) out.row(i) /= norm;
    }
    return out;
}

// Mean cosine to the k nearest counterpart rows, for every row of `queries`.
inline Eigen::VectorXd csls_hub_penalty(const Eigen::MatrixXd& queries,
                                        const Eigen::MatrixXd& counterpart, int k) {
    const auto n = queries.rows();
    const auto kk = std::min<Eigen::Index>(k, counterpart.rows());
    Eigen::VectorXd penalty(n);
    constexpr Eigen::Index kBlock = 512;
    std::vector<double> sims;
    for (Eigen::Index start = 0; start < n; start += kBlock) {
        const auto rows = std::min(kBlock, n - start);
        const Eigen::MatrixXd block =
            queries.middleRows(start, rows) * counterpart.transpose();
        for (Eigen::Index r = 0; r < rows; ++r) {
            sims.assign(block.row(r).data(), block.row(r).data() + block.cols());
            std::nth_element(sims.begin(), sims.begin() + (kk - 1), sims.end(),
                             std::greater<double>());
            double total = 0.0;
            for (Eigen::Index j = 0; j < kk; ++j) total += sims[static_cast<std::size_t>(j)];
            penalty(start + r) = total / static_cast<double>(kk);
        }
    }
    return penalty;
}

// Mutual nearest neighbors under CSLS(x, y) = 2 cos(x,y) - r_t(x) - r_s(y).
// Ties resolve to the lowest word index.
inline std::vector<std::pair<int32_t, int32_t>> csls_mutual_neighbors(
    const Eigen::MatrixXd& mapped_source, const Eigen::MatrixXd& target, int k) {
    const Eigen::MatrixXd xs = normalized_rows(mapped_source);
    const Eigen::MatrixXd yt = normalized_rows(target);
    const Eigen::VectorXd rt_src = csls_hub_penalty(xs, yt, k);
    const Eigen::VectorXd rs_tgt = csls_hub_penalty(yt, xs, k);

    const auto ns = xs.rows();
    const auto nt = yt.rows();
    std::vector<int32_t> forward(static_cast<std::size_t>(ns), 0);
    std::vector<int32_t> backward(static_cast<std::size_t>(nt), 0);
    std::vector<double> backward_best(static_cast<std::size_t>(nt),
                                      -std::numeric_limits<double>::infinity());

    constexpr Eigen::Index kBlock = 512;
    for (Eigen::Index start = 0; start < ns; start += kBlock) {
        const auto rows = std::min(kBlock, ns - start);
        const Eigen::MatrixXd block = xs.middleRows(start, rows) * yt.transpose();
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto i = start + r;
            double best = -std::numeric_limits<double>::infinity();
            int32_t best_j = 0;
            for (Eigen::Index j = 0; j < nt; ++j) {
                const double cos2 = 2.0 * block(r, j);
                const double fwd = cos2 - rs_tgt(j);
                if (fwd > best) {
                    best = fwd;
                    best_j = static_cast<int32_t>(j);
                }
                const double bwd = cos2 - rt_src(i);
                if (bwd > backward_best[static_cast<std::size_t>(j)]) {
                    backward_best[static_cast<std::size_t>(j)] = bwd;
                    backward[static_cast<std::size_t>(j)] = static_cast<int32_t>(i);
                }
            }
            forward[static_cast<std::size_t>(i)] = best_j;
        }
    }

    std::vector<std::pair<int32_t, int32_t>> pairs;
    for (Eigen::Index i = 0; i < ns; ++i) {
        const auto j = forward[static_cast<std::size_t>(i)];
        if (backward[static_cast<std::size_t>(j)] == static_cast<int32_t>(i))
            pairs.emplace_back(static_cast<int32_t>(i), j);
    }
    return pairs;
}

// Initialization for fully disjoint vocabularies: match words across spaces
// by comparing their sorted intra-space similarity profiles.
inline std::vector<std::pair<int32_t, int32_t>> similarity_signature_match(
    const EmbeddingSpace& source, const EmbeddingSpace& target, int max_rows) {
    const auto ms = std::min<Eigen::Index>(source.vectors.rows(), max_rows);
    const auto mt = std::min<Eigen::Index>(target.vectors.rows(), max_rows);
    const auto width = std::min(ms, mt);

    auto signatures = [width](const Eigen::MatrixXd& vectors, Eigen::Index m) {
        const Eigen::MatrixXd norm = normalized_rows(vectors.topRows(m));
        const Eigen::MatrixXd sim = norm * norm.transpose();
        Eigen::MatrixXd sig(m, width);
        std::vector<double> row;
        for (Eigen::Index i = 0; i < m; ++i) {
            row.assign(sim.row(i).data(), sim.row(i).data() + m);
            std::sort(row.begin(), row.end(), std::greater<double>());
            for (Eigen::Index j = 0; j < width; ++j)
                sig(i, j) = row[static_cast<std::size_t>(j)];
        }
        return normalized_rows(sig);
    };

    const Eigen::MatrixXd sig_s = signatures(source.vectors, ms);
    const Eigen::MatrixXd sig_t = signatures(target.vectors, mt);
    const Eigen::MatrixXd scores = sig_s * sig_t.transpose();

    struct Candidate {
        double score;
        int32_t i, j;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(ms));
    for (Eigen::Index i = 0; i < ms; ++i) {
        Eigen::Index j = 0;
        scores.row(i).maxCoeff(&j);
        candidates.push_back({scores(i, j), static_cast<int32_t>(i), static_cast<int32_t>(j)});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.i < b.i;
    });

    std::vector<bool> used_t(static_cast<std::size_t>(mt), false);
    std::vector<std::pair<int32_t, int32_t>> pairs;
    for (const auto& c : candidates) {
        if (used_t[static_cast<std::size_t>(c.j)]) continue;
        used_t[static_cast<std::size_t>(c.j)] = true;
        pairs.emplace_back(c.i, c.j);
    }
    return pairs;
}

inline SeedDictionary pairs_to_dictionary(const std::vector<std::pair<int32_t, int32_t>>& pairs,
                                          const EmbeddingSpace& source,
                                          const EmbeddingSpace& target) {
    SeedDictionary dict;
    for (const auto& [i, j] : pairs)
        dict.add(source.vocab.word(i), target.vocab.word(j), i, j);
    return dict;
}

} // namespace detail

inline UnsupervisedResult fit_unsupervised(const EmbeddingSpace& source,
                                           const EmbeddingSpace& target,
                                           const UnsupervisedConfig& config = {}) {
    if (source.dim() != target.dim())
        throw DataError("shape mismatch: spaces have dims " + std::to_string(source.dim()) +
                        " and " + std::to_string(target.dim()));
    if (config.csls_k < 1) throw ConfigError("unsupervised: csls_k must be >= 1");

    SeedDictionary dict;
    try {
        dict = build_seed_dictionary(source, target, TargetSet{});
    } catch (const AlignmentError&) {
        const auto pairs =
            detail::similarity_signature_match(source, target, config.init_fallback_rows);
        if (static_cast<int>(pairs.size()) < source.dim())
            throw AlignmentError(
                "alignment impossible: no identical word forms and the similarity-signature "
                "fallback produced only " +
                std::to_string(pairs.size()) + " pairs (need >= " +
                std::to_string(source.dim()) + ")");
        dict = detail::pairs_to_dictionary(pairs, source, target);
    }

    auto as_pair_set = [](const SeedDictionary& d) {
        std::vector<std::pair<int32_t, int32_t>> v;
        v.reserve(d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            v.emplace_back(d.source_rows[i], d.target_rows[i]);
        std::sort(v.begin(), v.end());
        return v;
    };

    UnsupervisedResult result;
    auto prev_pairs = as_pair_set(dict);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        result.map = fit_orthogonal(source, target, dict);
        result.iterations = iter + 1;

        const Eigen::MatrixXd mapped = source.vectors * result.map.matrix.transpose();
        auto induced = detail::csls_mutual_neighbors(mapped, target.vectors, config.csls_k);
        std::sort(induced.begin(), induced.end());

        std::vector<std::pair<int32_t, int32_t>> common;
        std::set_intersection(prev_pairs.begin(), prev_pairs.end(), induced.begin(),
                              induced.end(), std::back_inserter(common));
        const auto larger = std::max(prev_pairs.size(), induced.size());
        const double changed =
            larger == 0 ? 0.0
                        : 1.0 - static_cast<double>(common.size()) / static_cast<double>(larger);

        dict = detail::pairs_to_dictionary(induced, source, target);
        prev_pairs = std::move(induced);
        if (changed < config.convergence_threshold) break;
    }

    result.map.method = MapMethod::unsupervised;
    result.dictionary = std::move(dict);
    return result;
}

// ---------------------------------------------------------------------------
// Direction-aware pairing of two spaces into a common space. The earlier
// corpus's space always comes back as source_aligned:
//   s_to_t  fits earlier->later and transforms the earlier space;
//   t_to_s  fits later->earlier and transforms the later space instead.
struct AlignedPair {
    EmbeddingSpace source_aligned; // earlier corpus
    EmbeddingSpace target_aligned; // later corpus
    LinearMap map;
};

struct AlignOptions {
    double cca_reg = 1e-8;
    ProcrustesOptions procrustes{};
    UnsupervisedConfig unsupervised{};
};

inline LinearMap fit_map(const EmbeddingSpace& fit_source, const EmbeddingSpace& fit_target,
                         MapMethod method, const TargetSet& exclude,
                         const AlignOptions& opts = {}) {
    switch (method) {
        case MapMethod::cca: {
            const auto dict = build_seed_dictionary(fit_source, fit_target, exclude);
            return fit_cca(fit_source, fit_target, dict, opts.cca_reg).map;
        }
        case MapMethod::orthogonal: {
            const auto dict = build_seed_dictionary(fit_source, fit_target, exclude);
            return fit_orthogonal(fit_source, fit_target, dict, opts.procrustes);
        }
        case MapMethod::unsupervised:
            return fit_unsupervised(fit_source, fit_target, opts.unsupervised).map;
    }
    throw ConfigError("unknown alignment method");
}

inline AlignedPair align_pair(const EmbeddingSpace& earlier, const EmbeddingSpace& later,
                              MapMethod method, MapDirection direction,
                              const TargetSet& exclude, const AlignOptions& opts = {}) {
    if (direction == MapDirection::s_to_t) {
        LinearMap map = fit_map(earlier, later, method, exclude, opts);
        map.direction = direction;
        return AlignedPair{apply(map, earlier), later, std::move(map)};
    }
    LinearMap map = fit_map(later, earlier, method, exclude, opts);
    map.direction = direction;
    return AlignedPair{earlier, apply(map, later), std::move(map)};
}

// ---------------------------------------------------------------------------
// Map file: versioned text header, then the row-major matrix.
inline void save_map(const LinearMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "LSCDMAP 1 " << to_string(map.method) << ' ' << to_string(map.direction) << ' '
        << map.dim() << ' ' << (map.orthogonal ? 1 : 0) << '\n';
    for (Eigen::Index i = 0; i < map.matrix.rows(); ++i) {
        std::string line;
        for (Eigen::Index j = 0; j < map.matrix.cols(); ++j) {
            if (j > 0) line += ' ';
            line += format_double(map.matrix(i, j));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

inline LinearMap load_map(const std::filesystem::path& path) {
    LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw FormatError("empty map file '" + path.string() + "'");

    std::vector<std::string> fields;
    {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && line[i] == ' ') ++i;
            std::size_t start = i;
            while (i < line.size() && line[i] != ' ') ++i;
            if (i > start) fields.push_back(line.substr(start, i - start));
        }
    }
    if (fields.size() != 6 || fields[0] != "LSCDMAP" || fields[1] != "1")
        throw FormatError("'" + path.string() + "': bad map header");

    LinearMap map;
    map.method = parse_method(fields[2]);
    map.direction = parse_direction(fields[3]);
    const auto dim = parse_int(fields[4], "map dim in " + path.string());
    map.orthogonal = parse_int(fields[5], "orthogonal flag in " + path.string()) != 0;
    if (dim < 1) throw FormatError("'" + path.string() + "': bad dimension");

    map.matrix.resize(dim, dim);
    for (long long i = 0; i < dim; ++i) {
        if (!reader.next(line))
            throw FormatError("'" + path.string() + "': expected " + std::to_string(dim) +
                              " matrix rows");
        std::size_t pos = 0;
        for (long long j = 0; j < dim; ++j) {
            while (pos < line.size() && line[pos] == ' ') ++pos;
            std::size_t start = pos;
            while (pos < line.size() && line[pos] != ' ') ++pos;
            if (pos == start)
                throw FormatError("'" + path.string() + "': row " + std::to_string(i + 1) +
                                  " has fewer than " + std::to_string(dim) + " values");
            map.matrix(i, j) = parse_double(std::string_view(line).substr(start, pos - start),
                                            "map row " + std::to_string(i + 1));
        }
    }
    return map;
}

} // namespace lscd
