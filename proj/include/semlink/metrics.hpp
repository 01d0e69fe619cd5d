#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semlink/dataset.hpp"
#include "semlink/error.hpp"

namespace semlink {

enum class Method { sc, sc_gpt, sc_gpt_prompt, sc_gpt_adaptive };

inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::sc: return "sc";
    case Method::sc_gpt: return "sc_gpt";
    case Method::sc_gpt_prompt: return "sc_gpt_prompt";
    case Method::sc_gpt_adaptive: return "sc_gpt_adaptive";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view s) {
    for (auto m : {Method::sc, Method::sc_gpt, Method::sc_gpt_prompt, Method::sc_gpt_adaptive})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

inline int sentence_error(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    return ref == hyp ? 0 : 1;
}

inline int sentence_error(const Sentence& ref, const Sentence& hyp) { return sentence_error(ref.tokens, hyp.tokens); }

inline constexpr int kBleuMaxOrder = 4;

namespace detail {

inline std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
    std::unordered_map<std::string, int> counts;
    if (toks.size() < n) return counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key;
        for (std::size_t k = 0; k < n; ++k) {
            key += toks[i + k];
            key += '\x1f';
        }
        ++counts[key];
    }
    return counts;
}

} // namespace detail

/// Sentence BLEU: uniform weights over 1..4-gram modified precisions, add-one
/// smoothing on orders >= 2, brevity penalty min(1, exp(1 - |ref|/|hyp|)).
inline double bleu(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    require(!ref.empty() && !hyp.empty(), Errc::precondition, "bleu needs nonempty sentences");
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= kBleuMaxOrder; ++n) {
        const auto hyp_counts = detail::ngram_counts(hyp, n);
        const auto ref_counts = detail::ngram_counts(ref, n);
        long matched = 0;
        long total = 0;
        for (const auto& [gram, c] : hyp_counts) {
            total += c;
            if (auto it = ref_counts.find(gram); it != ref_counts.end()) matched += std::min(c, it->second);
        }
        double p;
        if (n == 1) {
            if (matched == 0) return 0.0;
            p = static_cast<double>(matched) / static_cast<double>(total);
        } else {
            p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
        }
        log_sum += std::log(p);
    }
    const double r = static_cast<double>(ref.size());
    const double c = static_cast<double>(hyp.size());
    const double bp = std::min(1.0, std::exp(1.0 - r / c));
    return std::clamp(bp * std::exp(log_sum / kBleuMaxOrder), 0.0, 1.0);
}

inline double bleu(const Sentence& ref, const Sentence& hyp) { return bleu(ref.tokens, hyp.tokens); }

struct SentenceResult {
    double snr_db = 0.0;
    Method method = Method::sc;
    std::uint64_t seed = 0;
    int error = 0;
    double bleu = 0.0;
};

struct EvalRow {
    double snr_db = 0.0;
    Method method = Method::sc;
    std::size_t n_sentences = 0;
    double ser = 0.0;
    double bleu = 0.0;
    std::uint64_t seed = 0;
    /// Standard error of the SER estimate; not part of the CSV.
    double ser_stderr = 0.0;
};

inline EvalRow aggregate(std::span<const SentenceResult> rows) {
    require(!rows.empty(), Errc::precondition, "cannot aggregate an empty batch");
    const auto& first = rows.front();
    EvalRow out;
    out.snr_db = first.snr_db;
    out.method = first.method;
    out.seed = first.seed;
    double err_sum = 0.0;
    double bleu_sum = 0.0;
    for (const auto& r : rows) {
        require(r.snr_db == first.snr_db && r.method == first.method && r.seed == first.seed,
                Errc::heterogeneous_batch, "batch mixes SNR, method or seed");
        err_sum += r.error;
        bleu_sum += r.bleu;
    }
    const double n = static_cast<double>(rows.size());
    out.n_sentences = rows.size();
    out.ser = err_sum / n;
    out.bleu = bleu_sum / n;
    out.ser_stderr = rows.size() > 1 ? std::sqrt(out.ser * (1.0 - out.ser) / (n - 1.0)) : 0.0;
    return out;
}

inline constexpr std::string_view kCsvHeader = "snr_db,method,n,ser,bleu,seed";

inline std::string csv_line(const EvalRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%g,%s,%zu,%.6f,%.6f,%llu", r.snr_db, std::string(to_string(r.method)).c_str(),
                  r.n_sentences, r.ser, r.bleu, static_cast<unsigned long long>(r.seed));
    return buf;
}

inline void write_csv(const std::string& path, std::span<const EvalRow> rows) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), Errc::io_error, "cannot write " + path);
    out << kCsvHeader << '\n';
    for (const auto& r : rows) out << csv_line(r) << '\n';
}

inline std::vector<EvalRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::missing_artifact, "results file " + path);
    std::string line;
    std::getline(in, line);
    require(line == kCsvHeader, Errc::io_error, path + ": unexpected header '" + line + "'");
    std::vector<EvalRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
            f.push_back(line.substr(start, pos - start));
        f.push_back(line.substr(start));
        require(f.size() == 6, Errc::io_error, path + ": bad row '" + line + "'");
        EvalRow r;
        r.snr_db = std::stod(f[0]);
        auto m = parse_method(f[1]);
        require(m.has_value(), Errc::io_error, path + ": unknown method '" + f[1] + "'");
        r.method = *m;
        r.n_sentences = std::stoul(f[2]);
        r.ser = std::stod(f[3]);
        r.bleu = std::stod(f[4]);
        r.seed = std::stoull(f[5]);
        rows.push_back(r);
    }
    return rows;
}

/// One-sided exact sign test on discordant pairs: P[X >= wins] for
/// X ~ Binomial(wins + losses, 1/2). Small p means "wins" beats chance.
inline double sign_test_pvalue(std::size_t wins, std::size_t losses) {
    const std::size_t n = wins + losses;
    if (n == 0) return 1.0;
    double p = 0.0;
    for (std::size_t k = wins; k <= n; ++k) {
        const double log_term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                                static_cast<double>(n) * std::log(2.0);
        p += std::exp(log_term);
    }
    return std::min(p, 1.0);
}

} // namespace semlink
