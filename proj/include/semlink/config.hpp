#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "semlink/error.hpp"
#include "semlink/metrics.hpp"

namespace semlink {

inline constexpr int kConfigSchemaVersion = 1;

/// Every knob of a run. Config files are flat `key = value` text with a
/// mandatory `schema_version`; CLI flags use the same key names.
struct RunConfig {
    std::string corpus;
    std::size_t n_train = 10000;
    std::size_t n_test = 1000;
    std::uint64_t seed = 1;
    std::vector<double> snr_grid = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
    std::vector<Method> methods = {Method::sc, Method::sc_gpt, Method::sc_gpt_prompt, Method::sc_gpt_adaptive};
    std::size_t vocab_size = 65534;

    /// mock | adversarial | live | http(s)://... (reconstruction service)
    std::string oracle = "mock";
    double adversarial_threshold = 0.25;
    /// builtin | http(s)://... (external codec service)
    std::string codec = "builtin";
    std::string gate = "reference";          // reference | heuristic
    std::string csi = "genie";               // genie | estimated
    std::string allocation = "importance";   // importance | random
    double decay = 1.0;

    std::size_t label_passes = 3;
    std::size_t epochs = 30;
    double lr = 1e-4;
    std::size_t batch_size = 32;

    std::size_t prompt_examples = 4;
    std::size_t summary_words = 8;

    std::string llm_url = "https://api.openai.com";
    std::string llm_model = "gpt-3.5-turbo";
    std::string llm_token_env = "OPENAI_API_KEY";

    std::string out_dir = "artifacts";
    std::size_t workers = 1;

    std::filesystem::path path(const std::string& name) const { return std::filesystem::path(out_dir) / name; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        T v;
        if constexpr (std::is_same_v<T, double>)
            v = std::stod(value, &used);
        else
            v = static_cast<T>(std::stoull(value, &used));
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::config_error, "bad value for " + key + ": '" + value + "'");
    }
}

/// "0:20:2" expands to 0,2,...,20; otherwise a comma list.
inline std::vector<double> parse_grid(const std::string& value) {
    if (value.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(value);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(trim(p));
        require(parts.size() == 3, Errc::config_error, "snr range must be start:stop:step, got '" + value + "'");
        const double a = parse_number<double>("snr", parts[0]);
        const double b = parse_number<double>("snr", parts[1]);
        const double step = parse_number<double>("snr", parts[2]);
        require(step > 0, Errc::config_error, "snr step must be positive");
        std::vector<double> grid;
        for (int i = 0;; ++i) {
            const double v = a + i * step;
            if (v > b + 1e-9) break;
            grid.push_back(v);
        }
        return grid;
    }
    std::vector<double> grid;
    for (const auto& item : split_list(value)) grid.push_back(parse_number<double>("snr", item));
    return grid;
}

} // namespace detail

inline void set_option(RunConfig& cfg, const std::string& key, const std::string& raw) {
    using detail::parse_number;
    const auto value = detail::trim(raw);
    if (key == "corpus") cfg.corpus = value;
    else if (key == "n_train") cfg.n_train = parse_number<std::size_t>(key, value);
    else if (key == "n_test") cfg.n_test = parse_number<std::size_t>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "snr") cfg.snr_grid = detail::parse_grid(value);
    else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& m : detail::split_list(value)) {
            auto parsed = parse_method(m);
            require(parsed.has_value(), Errc::config_error, "unknown method '" + m + "'");
            cfg.methods.push_back(*parsed);
        }
    } else if (key == "vocab_size") cfg.vocab_size = parse_number<std::size_t>(key, value);
    else if (key == "oracle") cfg.oracle = value;
    else if (key == "adversarial_threshold") cfg.adversarial_threshold = parse_number<double>(key, value);
    else if (key == "codec") cfg.codec = value;
    else if (key == "gate") cfg.gate = value;
    else if (key == "csi") cfg.csi = value;
    else if (key == "allocation") cfg.allocation = value;
    else if (key == "decay") cfg.decay = parse_number<double>(key, value);
    else if (key == "label_passes" || key == "passes") cfg.label_passes = parse_number<std::size_t>(key, value);
    else if (key == "epochs") cfg.epochs = parse_number<std::size_t>(key, value);
    else if (key == "lr") cfg.lr = parse_number<double>(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "prompt_examples") cfg.prompt_examples = parse_number<std::size_t>(key, value);
    else if (key == "summary_words") cfg.summary_words = parse_number<std::size_t>(key, value);
    else if (key == "llm_url") cfg.llm_url = value;
    else if (key == "llm_model") cfg.llm_model = value;
    else if (key == "llm_token_env") cfg.llm_token_env = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "workers") cfg.workers = parse_number<std::size_t>(key, value);
    else throw Error(Errc::config_error, "unknown key '" + key + "'");
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::config_error, "cannot read config " + path);
    std::string line;
    bool saw_version = false;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, Errc::config_error,
                path + ":" + std::to_string(lineno) + ": expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key == "schema_version") {
            const auto v = detail::parse_number<int>(key, value);
            require(v == kConfigSchemaVersion, Errc::config_error,
                    path + ": schema_version " + value + " is not supported (expected " +
                        std::to_string(kConfigSchemaVersion) + ")");
            saw_version = true;
            continue;
        }
        set_option(cfg, key, value);
    }
    require(saw_version, Errc::config_error, path + ": missing schema_version");
}

inline void validate(const RunConfig& cfg) {
    require(!cfg.snr_grid.empty(), Errc::config_error, "snr grid is empty");
    require(std::is_sorted(cfg.snr_grid.begin(), cfg.snr_grid.end()), Errc::config_error, "snr grid must be sorted");
    require(!cfg.methods.empty(), Errc::config_error, "no methods selected");
    require(cfg.gate == "reference" || cfg.gate == "heuristic", Errc::config_error, "gate must be reference|heuristic");
    require(cfg.csi == "genie" || cfg.csi == "estimated", Errc::config_error, "csi must be genie|estimated");
    require(cfg.allocation == "importance" || cfg.allocation == "random", Errc::config_error,
            "allocation must be importance|random");
    const bool url = cfg.oracle.rfind("http://", 0) == 0 || cfg.oracle.rfind("https://", 0) == 0;
    require(url || cfg.oracle == "mock" || cfg.oracle == "adversarial" || cfg.oracle == "live", Errc::config_error,
            "oracle must be mock|adversarial|live|<service url>");
    require(cfg.codec == "builtin" || cfg.codec.rfind("http://", 0) == 0 || cfg.codec.rfind("https://", 0) == 0,
            Errc::config_error, "codec must be builtin|<service url>");
    require(cfg.n_test > 0, Errc::config_error, "n_test must be positive");
    require(cfg.batch_size > 0, Errc::config_error, "batch_size must be positive");
    require(cfg.decay >= 0, Errc::config_error, "decay must be non-negative");
    if (!cfg.corpus.empty())
        require(std::filesystem::exists(cfg.corpus), Errc::config_error, "corpus file " + cfg.corpus + " not found");
}

} // namespace semlink
