#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "semlink/dataset.hpp"
#include "semlink/error.hpp"

namespace semlink {

enum class Strategy { plain, prompted, adaptive };

inline std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::plain: return "plain";
    case Strategy::prompted: return "prompted";
    case Strategy::adaptive: return "adaptive";
    }
    return "unknown";
}

struct ExamplePair {
    std::vector<std::string> corrupted;
    std::vector<std::string> correct;
};

struct ReconRequest {
    Sentence sentence;
    Strategy strategy = Strategy::plain;
    std::optional<std::string> summary;
    std::vector<ExamplePair> examples;
};

struct ReconResponse {
    Sentence sentence;
    std::string oracle_id;
    std::chrono::nanoseconds latency{0};
    /// Set when the oracle could not produce a usable answer and echoed its input.
    bool fallback = false;
    int retries = 0;
};

inline void validate(const ReconRequest& req) {
    if (req.strategy == Strategy::prompted) {
        require(req.summary.has_value(), Errc::precondition, "prompted request needs a summary");
        require(!req.examples.empty(), Errc::precondition, "prompted request needs at least one example pair");
    }
}

// Prompt templates. These strings are part of the external contract (cache
// keys are derived from them), so they must not drift.
inline constexpr std::string_view kFixInstruction = "Fix the errors in this sentence: ";
inline constexpr std::string_view kSummaryPrefix = "The sentences are about: ";
inline constexpr std::string_view kExamplesHeader =
    "Examples of received sentences with transmission errors and their corrections:";
inline constexpr std::string_view kCorruptedPrefix = "corrupted: ";
inline constexpr std::string_view kCorrectedPrefix = "corrected: ";

inline std::string build_prompt(const ReconRequest& req) {
    validate(req);
    std::string out;
    if (req.strategy == Strategy::prompted) {
        out += kSummaryPrefix;
        out += *req.summary;
        out += '\n';
        out += kExamplesHeader;
        out += '\n';
        for (const auto& ex : req.examples) {
            out += kCorruptedPrefix;
            out += join(ex.corrupted);
            out += '\n';
            out += kCorrectedPrefix;
            out += join(ex.correct);
            out += '\n';
        }
    }
    out += kFixInstruction;
    out += join(req.sentence);
    return out;
}

inline const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",     "an",   "the",   "and",   "or",    "but",  "of",    "to",   "in",    "on",    "for",  "with",
        "at",    "by",   "from",  "as",    "is",    "are",  "was",   "were", "be",    "been",  "being", "it",
        "its",   "this", "that",  "these", "those", "we",   "you",   "they", "he",    "she",   "i",    "me",
        "my",    "our",  "your",  "their", "them",  "us",   "not",   "no",   "have",  "has",   "had",  "do",
        "does",  "did",  "will",  "would", "shall", "should", "can", "could", "may",  "must",  "there", "here",
        "which", "who",  "what",  "also",  "all",   "very", "more",  "so",   "if",    "than",  "then", "about",
        "into",  "such", "other", "only",  "unk"};
    return words;
}

/// Frequency summary of example sentences: the k_words most frequent
/// non-stopword tokens (ties lexicographic), space-joined.
inline std::string summarize(const std::vector<Sentence>& examples, std::size_t k_words) {
    require(!examples.empty(), Errc::precondition, "summarize needs at least one example");
    std::map<std::string, std::size_t> counts;
    for (const auto& s : examples)
        for (const auto& t : s.tokens)
            if (!stopwords().count(t)) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > k_words) ranked.resize(k_words);
    std::vector<std::string> words;
    for (auto& [w, _] : ranked) words.push_back(w);
    return join(words);
}

class ReconOracle {
public:
    virtual ~ReconOracle() = default;
    virtual ReconResponse repair(const ReconRequest& req) = 0;
    virtual std::string id() const = 0;
};

/// Returns its input untouched.
class IdentityOracle final : public ReconOracle {
public:
    ReconResponse repair(const ReconRequest& req) override { return {req.sentence, id()}; }
    std::string id() const override { return "identity"; }
};

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

/// Bigram counts over training sentences, with sentence boundary markers.
class BigramTable {
public:
    BigramTable() = default;

    explicit BigramTable(const std::vector<Sentence>& train) {
        for (const auto& s : train) add(s.tokens);
    }

    void add(const std::vector<std::string>& tokens) {
        std::string_view prev = kBos;
        for (const auto& t : tokens) {
            bump(prev, t);
            prev = t;
        }
        bump(prev, kEos);
    }

    std::size_t count(std::string_view a, std::string_view b) const {
        auto it = next_.find(std::string(a));
        if (it == next_.end()) return 0;
        auto jt = it->second.find(std::string(b));
        return jt == it->second.end() ? 0 : jt->second;
    }

    /// Successors of `a` in lexicographic order.
    const std::map<std::string, std::size_t>& successors(std::string_view a) const {
        static const std::map<std::string, std::size_t> kEmpty;
        auto it = next_.find(std::string(a));
        return it == next_.end() ? kEmpty : it->second;
    }

    /// Words w with count(prev, w) > 0 and count(w, next) > 0, lexicographic.
    std::vector<std::string> bridges(std::string_view prev, std::string_view next) const {
        std::vector<std::string> out;
        for (const auto& [w, c] : successors(prev))
            if (w != kEos && count(w, next) > 0) out.push_back(w);
        return out;
    }

    bool all_attested(const std::vector<std::string>& tokens) const {
        std::string_view prev = kBos;
        for (const auto& t : tokens) {
            if (count(prev, t) == 0) return false;
            prev = t;
        }
        return count(prev, kEos) > 0;
    }

private:
    void bump(std::string_view a, std::string_view b) { ++next_[std::string(a)][std::string(b)]; }

    std::unordered_map<std::string, std::map<std::string, std::size_t>> next_;
};

namespace detail {

inline std::string_view left_of(const std::vector<std::string>& w, std::size_t i) {
    return i == 0 ? kBos : std::string_view(w[i - 1]);
}

inline std::string_view right_of(const std::vector<std::string>& w, std::size_t i) {
    return i + 1 == w.size() ? kEos : std::string_view(w[i + 1]);
}

} // namespace detail

/// Offline stand-in for the LLM: a bigram-bridge corrector. Scanning left to
/// right (with earlier replacements already applied), a word whose left
/// bigram was never seen in training is replaced when exactly one training
/// word bridges its neighbours. Prompted requests add a preference for words
/// from the summary and the corrected examples when several bridges exist.
class BigramMockOracle final : public ReconOracle {
public:
    explicit BigramMockOracle(const std::vector<Sentence>& train) : table_(train) {}
    explicit BigramMockOracle(BigramTable table) : table_(std::move(table)) {}

    ReconResponse repair(const ReconRequest& req) override {
        validate(req);
        std::unordered_set<std::string> preferred;
        if (req.strategy == Strategy::prompted) {
            for (const auto& w : tokenize(*req.summary)) preferred.insert(w);
            for (const auto& ex : req.examples)
                for (const auto& w : ex.correct) preferred.insert(w);
        }
        auto words = req.sentence.tokens;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto prev = detail::left_of(words, i);
            if (table_.count(prev, words[i]) > 0) continue;
            const auto cands = table_.bridges(prev, detail::right_of(words, i));
            if (cands.size() == 1) {
                words[i] = cands.front();
            } else if (cands.size() > 1 && !preferred.empty()) {
                std::vector<std::string> hits;
                for (const auto& c : cands)
                    if (preferred.count(c)) hits.push_back(c);
                if (hits.size() == 1) words[i] = hits.front();
            }
        }
        return {Sentence{std::move(words), req.sentence.source_id}, id()};
    }

    std::string id() const override { return "mock-bigram"; }
    const BigramTable& table() const noexcept { return table_; }

private:
    BigramTable table_;
};

/// Mock that models an LLM misled by badly garbled input. When the share of
/// suspect words (unattested left bigram, or "unk") exceeds `rewrite_threshold`
/// it rewrites the sentence from the first suspect word onward as the most
/// frequent continuation. Otherwise each suspect word becomes the bridge word
/// maximizing count(prev, w) * count(w, next).
class AdversarialMockOracle final : public ReconOracle {
public:
    AdversarialMockOracle(const std::vector<Sentence>& train, double rewrite_threshold)
        : table_(train), threshold_(rewrite_threshold) {}

    ReconResponse repair(const ReconRequest& req) override {
        validate(req);
        auto words = req.sentence.tokens;
        std::vector<std::size_t> suspect;
        for (std::size_t i = 0; i < words.size(); ++i)
            if (words[i] == Vocabulary::kUnkToken || table_.count(detail::left_of(words, i), words[i]) == 0)
                suspect.push_back(i);
        if (suspect.empty()) return {req.sentence, id()};

        const double share = static_cast<double>(suspect.size()) / static_cast<double>(words.size());
        if (share > threshold_) {
            for (std::size_t i = suspect.front(); i < words.size(); ++i) {
                const auto& succ = table_.successors(detail::left_of(words, i));
                const std::string* best = nullptr;
                std::size_t best_c = 0;
                for (const auto& [w, c] : succ)
                    if (w != kEos && c > best_c) {
                        best = &w;
                        best_c = c;
                    }
                if (best) words[i] = *best;
            }
        } else {
            for (auto i : suspect) {
                const auto prev = detail::left_of(words, i);
                const auto next = detail::right_of(words, i);
                std::size_t best_score = 0;
                for (const auto& w : table_.bridges(prev, next)) {
                    const auto score = table_.count(prev, w) * table_.count(w, next);
                    if (score > best_score) {
                        best_score = score;
                        words[i] = w;
                    }
                }
            }
        }
        return {Sentence{std::move(words), req.sentence.source_id}, id()};
    }

    std::string id() const override { return "mock-adversarial"; }

private:
    BigramTable table_;
    double threshold_;
};

} // namespace semlink
