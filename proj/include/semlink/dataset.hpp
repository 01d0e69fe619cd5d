#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "semlink/error.hpp"
#include "semlink/rng.hpp"

namespace semlink {

inline constexpr std::size_t kMinWords = 4;
inline constexpr std::size_t kMaxWords = 30;

struct Sentence {
    std::vector<std::string> tokens;
    std::size_t source_id = 0;

    std::size_t size() const noexcept { return tokens.size(); }
    bool operator==(const Sentence& other) const { return tokens == other.tokens; }
};

inline std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

inline std::string join(const Sentence& s) { return join(s.tokens); }

enum class Rejection { empty, too_short, too_long };

inline std::string_view to_string(Rejection r) {
    switch (r) {
    case Rejection::empty: return "empty";
    case Rejection::too_short: return "too_short";
    case Rejection::too_long: return "too_long";
    }
    return "unknown";
}

using NormalizeResult = std::variant<Sentence, Rejection>;

namespace detail {

inline bool starts_with_at(std::string_view s, std::size_t i, std::string_view pat) {
    return s.substr(i, pat.size()) == pat;
}

} // namespace detail

/// Lowercase, drop apostrophes, turn every other punctuation mark into a
/// word break, and split on whitespace. Digits and non-ASCII letters survive.
/// No length filtering; see normalize() for that.
inline std::vector<std::string> tokenize(std::string_view raw) {
    // UTF-8 punctuation that shows up in parliamentary transcripts
    static constexpr std::string_view kDeleted[] = {"\xE2\x80\x98", "\xE2\x80\x99"};
    static constexpr std::string_view kBreaks[] = {"\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x93",
                                                   "\xE2\x80\x94", "\xE2\x80\xA6", "\xC2\xA0"};
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) tokens.push_back(std::move(cur));
        cur.clear();
    };
    std::size_t i = 0;
    while (i < raw.size()) {
        const auto c = static_cast<unsigned char>(raw[i]);
        if (c >= 0x80) {
            bool handled = false;
            for (auto d : kDeleted)
                if (detail::starts_with_at(raw, i, d)) {
                    i += d.size();
                    handled = true;
                    break;
                }
            if (handled) continue;
            for (auto b : kBreaks)
                if (detail::starts_with_at(raw, i, b)) {
                    flush();
                    i += b.size();
                    handled = true;
                    break;
                }
            if (handled) continue;
            cur.push_back(static_cast<char>(c));
            ++i;
            continue;
        }
        if (c == '\'' || c == '`') {
            ++i;
            continue;
        }
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
        ++i;
    }
    flush();
    return tokens;
}

inline NormalizeResult normalize(std::string_view raw_line, std::size_t source_id = 0) {
    auto tokens = tokenize(raw_line);
    if (tokens.empty()) return Rejection::empty;
    if (tokens.size() < kMinWords) return Rejection::too_short;
    if (tokens.size() > kMaxWords) return Rejection::too_long;
    return Sentence{std::move(tokens), source_id};
}

inline bool accepted(const NormalizeResult& r) { return std::holds_alternative<Sentence>(r); }

/// Word <-> index map. Index 0 is PAD and 1 is UNK; real words start at 2.
class Vocabulary {
public:
    static constexpr std::uint32_t kPad = 0;
    static constexpr std::uint32_t kUnk = 1;
    static constexpr std::uint32_t kFirstWord = 2;
    static constexpr std::string_view kUnkToken = "unk";

    Vocabulary() = default;

    explicit Vocabulary(std::vector<std::string> ranked_words) : words_(std::move(ranked_words)) {
        index_.reserve(words_.size());
        for (std::size_t i = 0; i < words_.size(); ++i) {
            auto [_, inserted] = index_.emplace(words_[i], static_cast<std::uint32_t>(i + kFirstWord));
            require(inserted, Errc::precondition, "duplicate vocabulary word '" + words_[i] + "'");
        }
    }

    /// Total index space including the two reserved entries.
    std::size_t size() const noexcept { return words_.size() + kFirstWord; }

    std::uint32_t index(std::string_view word) const {
        auto it = index_.find(std::string(word));
        return it == index_.end() ? kUnk : it->second;
    }

    bool contains(std::string_view word) const { return index_.count(std::string(word)) != 0; }

    /// Reserved and out-of-range indices render as "unk".
    std::string word(std::uint64_t idx) const {
        if (idx < kFirstWord || idx >= size()) return std::string(kUnkToken);
        return words_[idx - kFirstWord];
    }

    const std::vector<std::string>& words() const noexcept { return words_; }

    bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

    void save(const std::string& path) const {
        std::ofstream out(path);
        require(static_cast<bool>(out), Errc::io_error, "cannot write " + path);
        out << "<pad>\t" << kPad << "\n<unk>\t" << kUnk << "\n";
        for (std::size_t i = 0; i < words_.size(); ++i) out << words_[i] << '\t' << i + kFirstWord << '\n';
    }

    static Vocabulary load(const std::string& path) {
        std::ifstream in(path);
        require(static_cast<bool>(in), Errc::missing_artifact, "vocabulary file " + path);
        std::vector<std::pair<std::uint32_t, std::string>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto tab = line.find('\t');
            require(tab != std::string::npos, Errc::io_error, "malformed vocabulary line: " + line);
            auto idx = static_cast<std::uint32_t>(std::stoul(line.substr(tab + 1)));
            if (idx < kFirstWord) continue;
            rows.emplace_back(idx, line.substr(0, tab));
        }
        std::sort(rows.begin(), rows.end());
        std::vector<std::string> words;
        words.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            require(rows[i].first == i + kFirstWord, Errc::io_error, "vocabulary indices are not contiguous");
            words.push_back(std::move(rows[i].second));
        }
        return Vocabulary(std::move(words));
    }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Rank words by descending frequency, ties lexicographic; keep max_size.
inline Vocabulary build_vocab(const std::vector<Sentence>& train, std::size_t max_size) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : train)
        for (const auto& t : s.tokens) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > max_size) ranked.resize(max_size);
    std::vector<std::string> words;
    words.reserve(ranked.size());
    for (auto& [w, _] : ranked) words.push_back(w);
    return Vocabulary(std::move(words));
}

struct CorpusSplit {
    std::vector<Sentence> train;
    std::vector<Sentence> test;
    std::uint64_t seed = 0;
};

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    return idx;
}

inline CorpusSplit split(const std::vector<Sentence>& corpus, std::size_t n_train, std::size_t n_test,
                         std::uint64_t seed) {
    require(corpus.size() >= n_train + n_test, Errc::insufficient_corpus,
            "need " + std::to_string(n_train + n_test) + " sentences, corpus has " +
                std::to_string(corpus.size()));
    const auto order = shuffled_indices(corpus.size(), seed);
    CorpusSplit out;
    out.seed = seed;
    out.train.reserve(n_train);
    out.test.reserve(n_test);
    for (std::size_t i = 0; i < n_train; ++i) out.train.push_back(corpus[order[i]]);
    for (std::size_t i = n_train; i < n_train + n_test; ++i) out.test.push_back(corpus[order[i]]);
    return out;
}

struct CorpusStats {
    std::size_t lines = 0;
    std::size_t accepted = 0;
    std::size_t rejected_empty = 0;
    std::size_t rejected_short = 0;
    std::size_t rejected_long = 0;
};

/// Accepted sentences keep their 0-based line number as source_id.
inline std::vector<Sentence> load_corpus(const std::string& path, CorpusStats* stats = nullptr) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::missing_artifact, "corpus file " + path);
    std::vector<Sentence> out;
    CorpusStats st;
    std::string line;
    for (std::size_t lineno = 0; std::getline(in, line); ++lineno) {
        ++st.lines;
        auto r = normalize(line, lineno);
        if (auto* s = std::get_if<Sentence>(&r)) {
            out.push_back(std::move(*s));
            ++st.accepted;
        } else {
            switch (std::get<Rejection>(r)) {
            case Rejection::empty: ++st.rejected_empty; break;
            case Rejection::too_short: ++st.rejected_short; break;
            case Rejection::too_long: ++st.rejected_long; break;
            }
        }
    }
    if (stats) *stats = st;
    return out;
}

inline void save_ids(const std::string& path, const std::vector<Sentence>& sentences) {
    std::ofstream out(path);
    require(static_cast<bool>(out), Errc::io_error, "cannot write " + path);
    for (const auto& s : sentences) out << s.source_id << '\n';
}

/// Resolve a line-index list against the loaded corpus.
inline std::vector<Sentence> load_ids(const std::string& path, const std::vector<Sentence>& corpus) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::missing_artifact, "split file " + path);
    std::unordered_map<std::size_t, const Sentence*> by_id;
    for (const auto& s : corpus) by_id.emplace(s.source_id, &s);
    std::vector<Sentence> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto id = static_cast<std::size_t>(std::stoull(line));
        auto it = by_id.find(id);
        require(it != by_id.end(), Errc::io_error,
                "split references line " + line + " which is not an accepted corpus sentence");
        out.push_back(*it->second);
    }
    return out;
}

} // namespace semlink
