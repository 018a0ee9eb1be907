#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <zlib.h>

#include "lscd/errors.hpp"

namespace lscd {

// ---------------------------------------------------------------------------
// UTF-8 validation. Returns the byte offset of the first invalid sequence,
// or nullopt when the string is well formed. Rejects overlong encodings,
// surrogates and code points above U+10FFFF.
inline std::optional<std::size_t> utf8_invalid_at(std::string_view s) {
    std::size_t i = 0;
    const auto n = s.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            ++i;
            continue;
        }
        std::size_t len;
        uint32_t cp;
        if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1Fu;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0Fu;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07u;
        } else {
            return i;
        }
        if (i + len > n) return i;
        for (std::size_t k = 1; k < len; ++k) {
            const auto bk = static_cast<unsigned char>(s[i + k]);
            if ((bk & 0xC0) != 0x80) return i;
            cp = (cp << 6) | (bk & 0x3Fu);
        }
        const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                              (len == 4 && cp < 0x10000);
        if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
        i += len;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Line reader over plain or gzip-compressed text. Strips '\n' and a trailing
// '\r'; the final line is yielded even without a terminating newline.
class LineReader {
  public:
    explicit LineReader(const std::filesystem::path& path,
                        std::optional<bool> gzipped = std::nullopt)
        : path_(path.string()) {
        gz_ = gzipped.value_or(path.extension() == ".gz");
        if (!std::filesystem::exists(path))
            throw IoError("cannot open '" + path_ + "': no such file");
        if (gz_) {
            gzf_ = gzopen(path_.c_str(), "rb");
            if (gzf_ == nullptr) throw IoError("cannot open '" + path_ + "'");
        } else {
            in_.open(path, std::ios::binary);
            if (!in_) throw IoError("cannot open '" + path_ + "'");
        }
    }

    ~LineReader() {
        if (gzf_ != nullptr) gzclose(gzf_);
    }

    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    // Reads the next line into `line`; false at end of input.
    bool next(std::string& line) {
        if (gz_) return next_gz(line);
        if (!std::getline(in_, line)) {
            if (in_.bad()) throw IoError("read error on '" + path_ + "'");
            return false;
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++lineno_;
        return true;
    }

    long long lineno() const { return lineno_; }

  private:
    bool next_gz(std::string& line) {
        line.clear();
        while (true) {
            if (buf_pos_ < buf_.size()) {
                const auto nl = buf_.find('\n', buf_pos_);
                if (nl != std::string::npos) {
                    line.append(buf_, buf_pos_, nl - buf_pos_);
                    buf_pos_ = nl + 1;
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    ++lineno_;
                    return true;
                }
                line.append(buf_, buf_pos_, buf_.size() - buf_pos_);
                buf_.clear();
                buf_pos_ = 0;
            }
            char chunk[1 << 16];
            const int got = gzread(gzf_, chunk, sizeof(chunk));
            if (got < 0) {
                int errnum = 0;
                const char* msg = gzerror(gzf_, &errnum);
                throw IoError("gzip read error on '" + path_ + "': " +
                              (msg != nullptr ? msg : "unknown"));
            }
            if (got == 0) {
                if (line.empty()) return false;
                if (line.back() == '\r') line.pop_back();
                ++lineno_;
                return true;
            }
            buf_.append(chunk, static_cast<std::size_t>(got));
        }
    }

    std::string path_;
    bool gz_ = false;
    std::ifstream in_;
    gzFile gzf_ = nullptr;
    std::string buf_;
    std::size_t buf_pos_ = 0;
    long long lineno_ = 0;
};

// ---------------------------------------------------------------------------
// Locale-independent numeric formatting. Answer files and saved matrices must
// be byte-stable across environments, so iostream formatting is avoided.

// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Fixed decimal places (answer files use 6).
inline std::string format_fixed(double v, int precision) {
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError("expected a number, got '" + std::string(s) + "' (" +
                          context + ")");
    return v;
}

inline long long parse_int(std::string_view s, const std::string& context) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError("expected an integer, got '" + std::string(s) + "' (" +
                          context + ")");
    return v;
}

// ---------------------------------------------------------------------------
// FNV-1a 64-bit, used for input fingerprints in run manifests.
inline uint64_t fnv1a64(const void* data, std::size_t len, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

// ---------------------------------------------------------------------------
// SplitMix64: tiny deterministic PRNG. Used where reproducibility across
// platforms matters more than period length (initialization, sampling).
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n).
    uint64_t next_below(uint64_t n) { return next() % n; }
};

// Mixes components into a single stream seed.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    SplitMix64 m(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
    return m.next();
}

} // namespace lscd
