// semlink: command-line front end for the corpus, labeling, training and
// simulation stages.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semlink/conformance.hpp"
#include "semlink/config.hpp"
#include "semlink/experiment.hpp"
#include "semlink/reference_service.hpp"
#include "semlink/synthetic_corpus.hpp"

namespace {

using namespace semlink;

// Keys accepted both in config files and as --flags.
const std::vector<std::string> kKeys = {
    "corpus",      "n_train",     "n_test",   "seed",        "snr",          "methods",  "vocab_size",
    "oracle",      "adversarial_threshold",   "codec",       "gate",         "csi",      "allocation",
    "decay",       "passes",      "epochs",   "lr",          "batch_size",   "prompt_examples",
    "summary_words", "llm_url",   "llm_model", "llm_token_env", "out_dir",   "workers"};

struct Common {
    std::string config_file;
    std::map<std::string, std::string> flags;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_file, "config file (key = value, schema_version = 1)");
        for (const auto& key : kKeys) {
            std::string names = "--" + key;
            std::string dashed = key;
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            if (dashed != key) names += ",--" + dashed;
            app->add_option_function<std::string>(
                names, [this, key](const std::string& v) { flags[key] = v; }, "overrides '" + key + "'");
        }
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_file.empty()) load_config_file(cfg, config_file);
        for (const auto& [k, v] : flags) set_option(cfg, k, v);
        validate(cfg);
        return cfg;
    }
};

int exit_code(Errc code) {
    switch (code) {
    case Errc::config_error:
    case Errc::insufficient_corpus: return 2;
    case Errc::missing_artifact: return 3;
    case Errc::oracle_unavailable: return 4;
    default: return 1;
    }
}

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic transmission over OFDM with oracle-assisted reconstruction"};
    app.require_subcommand(1);

    Common common;

    auto* gen = app.add_subcommand("gen-corpus", "write a synthetic parliamentary-style corpus");
    std::size_t gen_lines = 16000;
    std::uint64_t gen_seed = 7;
    std::string gen_out;
    gen->add_option("--lines", gen_lines, "number of lines")->capture_default_str();
    gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    gen->add_option("-o,--output", gen_out, "output file")->required();

    auto* vocab_cmd = app.add_subcommand("build-vocab", "normalize corpus, split it and build the vocabulary");
    auto* label_cmd = app.add_subcommand("label", "perturb-and-repair importance labeling");
    auto* train_cmd = app.add_subcommand("train-classifier", "fit the importance classifier to the labels");
    auto* sim_cmd = app.add_subcommand("simulate", "run the SNR sweep and write results CSV");
    auto* all_cmd = app.add_subcommand("all", "build-vocab, label, train-classifier and simulate in sequence");
    std::string sim_out;
    sim_cmd->add_option("-o,--output", sim_out, "results CSV (default <out_dir>/results.csv)");
    all_cmd->add_option("-o,--output", sim_out, "results CSV (default <out_dir>/results.csv)");
    for (auto* sub : {vocab_cmd, label_cmd, train_cmd, sim_cmd, all_cmd}) common.attach(sub);

    auto* report_cmd = app.add_subcommand("report", "join results CSVs into plot-ready tables");
    std::vector<std::string> report_in;
    std::string report_out = "report";
    report_cmd->add_option("inputs", report_in, "results CSV files")->required();
    report_cmd->add_option("-o,--output", report_out, "output prefix (writes .csv and .dat)")->capture_default_str();

    auto* serve_cmd = app.add_subcommand("serve-reference", "serve the built-in codec and mock oracle over HTTP");
    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    std::string serve_vocab;
    serve_cmd->add_option("--host", serve_host)->capture_default_str();
    serve_cmd->add_option("--port", serve_port)->capture_default_str();
    serve_cmd->add_option("--vocab", serve_vocab, "vocabulary file (default <out_dir>/vocab.tsv)");
    common.attach(serve_cmd);

    auto* conf_cmd = app.add_subcommand("conformance", "replay golden wire-protocol cases against an endpoint");
    std::string conf_endpoint, conf_golden = "data/conformance/golden.json";
    conf_cmd->add_option("--endpoint", conf_endpoint, "service base URL")->required();
    conf_cmd->add_option("--golden", conf_golden, "golden cases")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            std::ofstream out(gen_out);
            require(static_cast<bool>(out), Errc::io_error, "cannot write " + gen_out);
            for (const auto& line : synthetic::generate(gen_lines, gen_seed)) out << line << '\n';
            return 0;
        }
        if (report_cmd->parsed()) {
            report_stage(report_in, report_out);
            return 0;
        }
        if (conf_cmd->parsed()) {
            const auto results = run_conformance(conf_endpoint, load_golden(conf_golden));
            int failed = 0;
            for (const auto& r : results) {
                std::cout << (r.pass ? "PASS " : "FAIL ") << r.name;
                if (!r.pass) std::cout << "  (" << r.detail << ")";
                std::cout << '\n';
                failed += !r.pass;
            }
            std::cout << results.size() - failed << "/" << results.size() << " cases passed\n";
            return failed == 0 ? 0 : 1;
        }

        const auto cfg = common.resolve();
        const std::string results = sim_out.empty() ? cfg.path("results.csv").string() : sim_out;
        if (vocab_cmd->parsed()) build_vocab_stage(cfg, log_line);
        if (label_cmd->parsed()) label_stage(cfg, log_line);
        if (train_cmd->parsed()) train_stage(cfg, log_line);
        if (sim_cmd->parsed()) simulate_stage(cfg, results, log_line);
        if (all_cmd->parsed()) {
            build_vocab_stage(cfg, log_line);
            label_stage(cfg, log_line);
            train_stage(cfg, log_line);
            simulate_stage(cfg, results, log_line);
        }
        if (serve_cmd->parsed()) {
            const auto vocab_path = serve_vocab.empty() ? cfg.path("vocab.tsv").string() : serve_vocab;
            const auto vocab = Vocabulary::load(vocab_path);
            std::vector<Sentence> train;
            if (std::filesystem::exists(cfg.path("train_ids.txt")) && !cfg.corpus.empty())
                train = load_workspace(cfg).train;
            auto oracle = make_oracle(cfg, train, log_line);
            ReferenceService service(vocab, oracle.get());
            std::cerr << "serving on http://" << serve_host << ":" << serve_port << '\n';
            service.listen(serve_host, serve_port);
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "semlink: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "semlink: " << e.what() << '\n';
        return 1;
    }
}
