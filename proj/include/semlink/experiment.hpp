#pragma once

// Artifact-level stages behind the CLI. Every stage reads what earlier
// stages wrote under cfg.out_dir and writes its own files:
//
//   vocab.tsv, train_ids.txt, test_ids.txt     build-vocab
//   labels.tsv, label_failures.tsv             label
//   classifier.bin, training_log.csv           train-classifier
//   results.csv                                simulate
//   report.csv, report.dat                     report
//   llm_cache/                                 live oracle replies

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "semlink/codec_client.hpp"
#include "semlink/config.hpp"
#include "semlink/dataset.hpp"
#include "semlink/importance.hpp"
#include "semlink/llm_client.hpp"
#include "semlink/metrics.hpp"
#include "semlink/oracle.hpp"
#include "semlink/pipeline.hpp"

namespace semlink {

using Log = std::function<void(const std::string&)>;

struct Workspace {
    std::vector<Sentence> train;
    std::vector<Sentence> test;
    Vocabulary vocab;
};

namespace detail {

inline void say(const Log& log, const std::string& msg) {
    if (log) log(msg);
}

inline std::vector<Sentence> load_checked_corpus(const RunConfig& cfg) {
    require(!cfg.corpus.empty(), Errc::config_error, "no corpus given (set corpus = <path>)");
    return load_corpus(cfg.corpus);
}

} // namespace detail

inline Workspace load_workspace(const RunConfig& cfg) {
    for (const char* name : {"vocab.tsv", "train_ids.txt", "test_ids.txt"})
        require(std::filesystem::exists(cfg.path(name)), Errc::missing_artifact,
                cfg.path(name).string() + " (run build-vocab first)");
    const auto corpus = detail::load_checked_corpus(cfg);
    Workspace ws;
    ws.vocab = Vocabulary::load(cfg.path("vocab.tsv").string());
    ws.train = load_ids(cfg.path("train_ids.txt").string(), corpus);
    ws.test = load_ids(cfg.path("test_ids.txt").string(), corpus);
    return ws;
}

struct VocabSummary {
    CorpusStats stats;
    std::size_t vocab_size = 0;
};

inline VocabSummary build_vocab_stage(const RunConfig& cfg, const Log& log = {}) {
    std::filesystem::create_directories(cfg.out_dir);
    VocabSummary out;
    require(!cfg.corpus.empty(), Errc::config_error, "no corpus given (set corpus = <path>)");
    const auto corpus = load_corpus(cfg.corpus, &out.stats);
    const auto sp = split(corpus, cfg.n_train, cfg.n_test, cfg.seed);
    const auto vocab = build_vocab(sp.train, cfg.vocab_size);
    vocab.save(cfg.path("vocab.tsv").string());
    save_ids(cfg.path("train_ids.txt").string(), sp.train);
    save_ids(cfg.path("test_ids.txt").string(), sp.test);
    out.vocab_size = vocab.size();
    detail::say(log, "corpus: " + std::to_string(out.stats.lines) + " lines, " + std::to_string(out.stats.accepted) +
                         " accepted; vocabulary " + std::to_string(vocab.size()) + " entries");
    return out;
}

/// The reconstruction oracle selected by cfg.oracle.
inline std::unique_ptr<ReconOracle> make_oracle(const RunConfig& cfg, const std::vector<Sentence>& train,
                                                const Log& log = {}) {
    if (cfg.oracle == "mock") return std::make_unique<BigramMockOracle>(train);
    if (cfg.oracle == "adversarial") return std::make_unique<AdversarialMockOracle>(train, cfg.adversarial_threshold);
    if (cfg.oracle == "live") {
        const char* token = std::getenv(cfg.llm_token_env.c_str());
        require(token && *token, Errc::oracle_unavailable,
                "live oracle needs an API token in $" + cfg.llm_token_env);
        LlmConfig lc;
        lc.base_url = cfg.llm_url;
        lc.model = cfg.llm_model;
        lc.token_env = cfg.llm_token_env;
        lc.cache_dir = cfg.path("llm_cache");
        return std::make_unique<LlmOracle>(lc, log);
    }
    require(cfg.oracle.rfind("http://", 0) == 0 || cfg.oracle.rfind("https://", 0) == 0, Errc::config_error,
            "unknown oracle '" + cfg.oracle + "'");
    return std::make_unique<ServiceOracle>(ServiceOracleConfig{cfg.oracle});
}

inline LabelingResult label_stage(const RunConfig& cfg, const Log& log = {}) {
    const auto ws = load_workspace(cfg);
    auto oracle = make_oracle(cfg, ws.train, log);
    auto res = label_corpus(ws.train, ws.vocab, *oracle, {cfg.seed, cfg.label_passes, cfg.workers});
    save_labels(cfg.path("labels.tsv").string(), res.records);
    std::ofstream fail(cfg.path("label_failures.tsv"));
    require(static_cast<bool>(fail), Errc::io_error, "cannot write " + cfg.path("label_failures.tsv").string());
    fail << "sentence_id\tpass\terror\n";
    for (const auto& f : res.failures) fail << f.sentence_id << '\t' << f.pass << '\t' << f.what << '\n';
    std::size_t positive = 0;
    for (const auto& r : res.records) positive += r.label;
    detail::say(log, "labels: " + std::to_string(res.records.size()) + " records (" + std::to_string(positive) +
                         " important), " + std::to_string(res.failures.size()) + " oracle failures");
    return res;
}

inline TrainResult train_stage(const RunConfig& cfg, const Log& log = {}) {
    const auto ws = load_workspace(cfg);
    require(std::filesystem::exists(cfg.path("labels.tsv")), Errc::missing_artifact,
            cfg.path("labels.tsv").string() + " (run label first)");
    const auto data = make_examples(load_labels(cfg.path("labels.tsv").string()), ws.train, ws.vocab);
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.lr = cfg.lr;
    tc.batch_size = cfg.batch_size;
    tc.seed = cfg.seed;
    auto res = train_classifier(data, ws.vocab.size(), tc);
    save_classifier(cfg.path("classifier.bin").string(), res.model);
    std::ofstream out(cfg.path("training_log.csv"));
    require(static_cast<bool>(out), Errc::io_error, "cannot write " + cfg.path("training_log.csv").string());
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.8f", e + 1, res.epoch_loss[e]);
        out << buf << '\n';
    }
    detail::say(log, "classifier: " + std::to_string(data.size()) + " examples, training accuracy " +
                         std::to_string(accuracy(res.model, data)));
    return res;
}

inline SimulationOptions simulation_options(const RunConfig& cfg) {
    SimulationOptions so;
    so.seed = cfg.seed;
    so.channel.decay = cfg.decay;
    so.gate = cfg.gate == "heuristic" ? Gate::heuristic : Gate::reference;
    so.csi = cfg.csi == "estimated" ? CsiMode::estimated : CsiMode::genie;
    so.allocation = cfg.allocation == "random" ? AllocationMode::random : AllocationMode::importance;
    so.workers = cfg.workers;
    return so;
}

/// One EvalRow per (method, SNR), methods outer, SNR inner.
inline std::vector<EvalRow> simulate_stage(const RunConfig& cfg, const std::string& out_csv, const Log& log = {}) {
    validate(cfg);
    const auto ws = load_workspace(cfg);
    Simulator sim(ws.vocab, ws.train, simulation_options(cfg));

    bool needs_oracle = false, needs_classifier = false, needs_prompt = false;
    for (auto m : cfg.methods) {
        needs_oracle |= m != Method::sc;
        needs_classifier |= m == Method::sc_gpt_adaptive && cfg.allocation == "importance";
        needs_prompt |= m == Method::sc_gpt_prompt;
    }
    std::unique_ptr<ReconOracle> oracle;
    if (needs_oracle) {
        oracle = make_oracle(cfg, ws.train, log);
        sim.set_oracle(oracle.get());
    }
    std::optional<ClassifierModel> model;
    if (needs_classifier) {
        require(std::filesystem::exists(cfg.path("classifier.bin")), Errc::missing_artifact,
                "classifier " + cfg.path("classifier.bin").string() + " (run train-classifier first)");
        model = load_classifier(cfg.path("classifier.bin").string());
        require(model->vocab == ws.vocab.size(), Errc::missing_artifact,
                "classifier was trained for a different vocabulary (retrain it)");
        sim.set_classifier(&*model);
    }
    if (needs_prompt)
        sim.set_prompt_context(
            build_prompt_context(ws.train, ws.vocab, cfg.prompt_examples, cfg.summary_words, cfg.seed));
    std::unique_ptr<CodecClient> codec;
    if (cfg.codec != "builtin") {
        codec = std::make_unique<CodecClient>(CodecClientConfig{.endpoint = cfg.codec});
        sim.set_external_codec(codec.get());
    }

    std::vector<EvalRow> rows;
    for (auto m : cfg.methods) {
        for (double snr : cfg.snr_grid) {
            rows.push_back(sim.run(m, snr, ws.test).row);
            const auto& r = rows.back();
            char buf[128];
            std::snprintf(buf, sizeof buf, "%-16s %6g dB  ser %.4f  bleu %.4f", std::string(to_string(m)).c_str(), snr,
                          r.ser, r.bleu);
            detail::say(log, buf);
        }
    }
    write_csv(out_csv, rows);
    return rows;
}

/// Joins result files into a long table (one row per snr/method/metric) and a
/// wide whitespace-separated .dat file with one line per SNR.
inline void report_stage(const std::vector<std::string>& inputs, const std::string& out_prefix) {
    require(!inputs.empty(), Errc::config_error, "report needs at least one results file");
    std::vector<EvalRow> rows;
    for (const auto& in : inputs) {
        auto part = read_csv(in);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    {
        std::ofstream out(out_prefix + ".csv", std::ios::binary);
        require(static_cast<bool>(out), Errc::io_error, "cannot write " + out_prefix + ".csv");
        out << "snr_db,method,metric,value,n,seed\n";
        for (const auto& r : rows) {
            char buf[200];
            const std::string m(to_string(r.method));
            std::snprintf(buf, sizeof buf, "%g,%s,ser,%.6f,%zu,%llu\n%g,%s,bleu,%.6f,%zu,%llu", r.snr_db, m.c_str(),
                          r.ser, r.n_sentences, static_cast<unsigned long long>(r.seed), r.snr_db, m.c_str(), r.bleu,
                          r.n_sentences, static_cast<unsigned long long>(r.seed));
            out << buf << '\n';
        }
    }
    std::set<double> snrs;
    std::vector<Method> methods;
    std::map<std::pair<double, Method>, const EvalRow*> cell;
    for (const auto& r : rows) {
        snrs.insert(r.snr_db);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        cell[{r.snr_db, r.method}] = &r;
    }
    std::ofstream dat(out_prefix + ".dat", std::ios::binary);
    require(static_cast<bool>(dat), Errc::io_error, "cannot write " + out_prefix + ".dat");
    dat << "# snr_db";
    for (auto m : methods) dat << ' ' << to_string(m) << "_ser " << to_string(m) << "_bleu";
    dat << '\n';
    for (double snr : snrs) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%g", snr);
        dat << buf;
        for (auto m : methods) {
            auto it = cell.find({snr, m});
            if (it == cell.end()) {
                dat << " nan nan";
                continue;
            }
            std::snprintf(buf, sizeof buf, " %.6f %.6f", it->second->ser, it->second->bleu);
            dat << buf;
        }
        dat << '\n';
    }
}

} // namespace semlink
