#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lscd/corpus.hpp"
#include "lscd/errors.hpp"
#include "lscd/io_util.hpp"

namespace lscd {

// A trained semantic space: row i of `vectors` is the embedding of
// vocab.word(i).
struct EmbeddingSpace {
    Vocabulary vocab;
    Eigen::MatrixXd vectors; // |V| x dim

    int dim() const { return static_cast<int>(vectors.cols()); }

    bool all_finite() const { return vectors.allFinite(); }

    Eigen::VectorXd row_of(std::string_view word) const {
        auto idx = vocab.find(word);
        if (!idx) throw DataError("word '" + std::string(word) + "' not in vocabulary");
        return vectors.row(*idx);
    }
};

namespace detail {
constexpr char kSpaceMagic[8] = {'L', 'S', 'C', 'D', 'S', 'P', 'C', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& v, const std::string& path) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("truncated space file '" + path + "'");
}
} // namespace detail

// Text format: header "<vocab_size> <dim>", then one line per word with
// space-separated coordinates. Values use the shortest round-tripping
// representation, so a text round trip is lossless in practice (the format
// contract only promises 1e-6 per coordinate).
inline void save_space_text(const EmbeddingSpace& space, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << space.vocab.size() << ' ' << space.dim() << '\n';
    std::string line;
    for (std::size_t i = 0; i < space.vocab.size(); ++i) {
        line = space.vocab.word(static_cast<int32_t>(i));
        for (int j = 0; j < space.dim(); ++j) {
            line += ' ';
            line += format_double(space.vectors(static_cast<Eigen::Index>(i), j));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

inline EmbeddingSpace load_space_text(const std::filesystem::path& path) {
    LineReader reader(path);
    std::string line;
    if (!reader.next(line))
        throw FormatError("empty space file '" + path.string() + "'");

    auto split = [](const std::string& s) {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && s[i] == ' ') ++i;
            std::size_t start = i;
            while (i < s.size() && s[i] != ' ') ++i;
            if (i > start) out.push_back(std::string_view(s).substr(start, i - start));
        }
        return out;
    };

    const auto header = split(line);
    if (header.size() != 2)
        throw FormatError("malformed header in '" + path.string() +
                          "': expected '<vocab_size> <dim>'");
    const auto n = parse_int(header[0], "vocab size in " + path.string());
    const auto dim = parse_int(header[1], "dim in " + path.string());
    if (n < 0 || dim < 1)
        throw FormatError("malformed header in '" + path.string() + "'");

    std::vector<std::string> words;
    std::vector<long long> counts;
    words.reserve(static_cast<std::size_t>(n));
    Eigen::MatrixXd vectors(n, dim);
    for (long long row = 0; row < n; ++row) {
        if (!reader.next(line))
            throw FormatError("'" + path.string() + "': expected " + std::to_string(n) +
                              " rows, file ends at row " + std::to_string(row));
        const auto fields = split(line);
        if (static_cast<long long>(fields.size()) != dim + 1)
            throw FormatError("'" + path.string() + "': row " + std::to_string(row + 1) +
                              " has " + std::to_string(fields.size() - 1) +
                              " values, expected " + std::to_string(dim));
        words.emplace_back(fields[0]);
        for (long long j = 0; j < dim; ++j)
            vectors(row, j) = parse_double(fields[static_cast<std::size_t>(j + 1)],
                                           "row " + std::to_string(row + 1) + " of " +
                                               path.string());
    }
    counts.assign(words.size(), 0);
    return EmbeddingSpace{Vocabulary(std::move(words), std::move(counts), 0),
                          std::move(vectors)};
}

// Binary format (exact round trip): magic "LSCDSPC1", vocab size, dim,
// min_count, then length-prefixed words with counts, then row-major doubles.
inline void save_space_binary(const EmbeddingSpace& space, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(detail::kSpaceMagic, sizeof(detail::kSpaceMagic));
    detail::write_raw(out, static_cast<uint64_t>(space.vocab.size()));
    detail::write_raw(out, static_cast<uint64_t>(space.dim()));
    detail::write_raw(out, static_cast<int64_t>(space.vocab.min_count()));
    for (std::size_t i = 0; i < space.vocab.size(); ++i) {
        const auto& w = space.vocab.word(static_cast<int32_t>(i));
        detail::write_raw(out, static_cast<uint32_t>(w.size()));
        out.write(w.data(), static_cast<std::streamsize>(w.size()));
        detail::write_raw(out, static_cast<int64_t>(space.vocab.count(static_cast<int32_t>(i))));
    }
    for (Eigen::Index i = 0; i < space.vectors.rows(); ++i)
        for (Eigen::Index j = 0; j < space.vectors.cols(); ++j)
            detail::write_raw(out, space.vectors(i, j));
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

inline EmbeddingSpace load_space_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const auto p = path.string();

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || !std::equal(magic, magic + 8, detail::kSpaceMagic))
        throw FormatError("'" + p + "' is not a binary space file (bad magic)");

    uint64_t n = 0;
    uint64_t dim = 0;
    int64_t min_count = 0;
    detail::read_raw(in, n, p);
    detail::read_raw(in, dim, p);
    detail::read_raw(in, min_count, p);

    std::vector<std::string> words;
    std::vector<long long> counts;
    words.reserve(n);
    counts.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        uint32_t len = 0;
        detail::read_raw(in, len, p);
        std::string w(len, '\0');
        in.read(w.data(), len);
        if (!in) throw FormatError("truncated space file '" + p + "' at word " +
                                   std::to_string(i));
        int64_t count = 0;
        detail::read_raw(in, count, p);
        words.push_back(std::move(w));
        counts.push_back(count);
    }

    Eigen::MatrixXd vectors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < vectors.rows(); ++i)
        for (Eigen::Index j = 0; j < vectors.cols(); ++j)
            detail::read_raw(in, vectors(i, j), p);

    return EmbeddingSpace{
        Vocabulary(std::move(words), std::move(counts), static_cast<int>(min_count)),
        std::move(vectors)};
}

// Format auto-detection via the magic bytes.
inline EmbeddingSpace load_space(const std::filesystem::path& path) {
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open '" + path.string() + "'");
        char magic[8] = {};
        in.read(magic, sizeof(magic));
        if (in.gcount() == 8 && std::equal(magic, magic + 8, detail::kSpaceMagic))
            return load_space_binary(path);
    }
    return load_space_text(path);
}

} // namespace lscd
