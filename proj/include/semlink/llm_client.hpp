#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>
#include <openssl/evp.h>

#include "semlink/http.hpp"
#include "semlink/oracle.hpp"

namespace semlink {

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    require(EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) == 1, Errc::io_error,
            "sha256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 15];
    }
    return out;
}

struct LlmConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-3.5-turbo";
    /// Name of the environment variable holding the bearer token.
    std::string token_env = "OPENAI_API_KEY";
    std::filesystem::path cache_dir = "llm_cache";
    std::chrono::milliseconds timeout{30000};
    int max_retries = 5;
    std::chrono::milliseconds initial_backoff{500};
};

/// Chat-completion client. Replies are cached on disk under
/// sha256(model + '\n' + prompt), so reruns are free and deterministic.
/// Requests use temperature 0.
class LlmOracle final : public ReconOracle {
public:
    static constexpr std::ptrdiff_t kMaxInFlight = 4;

    using Logger = std::function<void(const std::string&)>;

    explicit LlmOracle(LlmConfig cfg, Logger log = {}) : cfg_(std::move(cfg)), log_(std::move(log)) {
        std::filesystem::create_directories(cfg_.cache_dir);
    }

    ReconResponse repair(const ReconRequest& req) override {
        const auto t0 = std::chrono::steady_clock::now();
        const auto prompt = build_prompt(req);
        const auto key = sha256_hex(cfg_.model + "\n" + prompt);
        const auto path = cfg_.cache_dir / (key + ".json");

        std::string reply;
        int retries = 0;
        if (auto cached = read_cache(path, prompt)) {
            reply = std::move(*cached);
        } else {
            reply = fetch(prompt, retries);
            write_cache(path, prompt, reply);
        }

        ReconResponse res;
        res.oracle_id = id();
        res.retries = retries;
        auto tokens = tokenize(reply);
        if (tokens.empty()) {
            log("malformed reply for prompt " + key + ", echoing input");
            res.sentence = req.sentence;
            res.fallback = true;
        } else {
            res.sentence = Sentence{std::move(tokens), req.sentence.source_id};
        }
        res.latency = std::chrono::steady_clock::now() - t0;
        return res;
    }

    std::string id() const override { return "llm:" + cfg_.model; }

    std::size_t network_calls() const noexcept { return network_calls_.load(); }
    std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

private:
    void log(const std::string& msg) const {
        if (log_) log_(msg);
    }

    std::optional<std::string> read_cache(const std::filesystem::path& path, const std::string& prompt) {
        std::ifstream in(path);
        if (!in) return std::nullopt;
        try {
            auto j = nlohmann::json::parse(in);
            if (j.at("prompt").get<std::string>() != prompt) return std::nullopt;
            ++cache_hits_;
            return j.at("reply").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;
        }
    }

    void write_cache(const std::filesystem::path& path, const std::string& prompt, const std::string& reply) {
        // write-then-rename so concurrent workers never see a torn file
        const auto tmp = path.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
        {
            std::ofstream out(tmp);
            require(static_cast<bool>(out), Errc::io_error, "cannot write cache file " + tmp);
            out << nlohmann::json{{"model", cfg_.model}, {"prompt", prompt}, {"reply", reply}}.dump(2);
        }
        std::filesystem::rename(tmp, path);
    }

    std::string fetch(const std::string& prompt, int& retries) {
        http::Headers headers;
        if (const char* token = std::getenv(cfg_.token_env.c_str()); token && *token)
            headers.emplace_back("Authorization", std::string("Bearer ") + token);
        const nlohmann::json body = {{"model", cfg_.model},
                                     {"temperature", 0},
                                     {"messages", {{{"role", "user"}, {"content", prompt}}}}};
        auto backoff = cfg_.initial_backoff;
        for (int attempt = 0;; ++attempt) {
            http::Response r;
            {
                in_flight_.acquire();
                struct Release {
                    std::counting_semaphore<kMaxInFlight>& s;
                    ~Release() { s.release(); }
                } release{in_flight_};
                ++network_calls_;
                r = http::post_json(cfg_.base_url, cfg_.path, body, cfg_.timeout, headers);
            }
            const bool retryable = r.status == 429 || r.status >= 500;
            if (retryable) {
                if (attempt >= cfg_.max_retries)
                    throw Error(Errc::rate_limited, "gave up after " + std::to_string(attempt + 1) + " attempts (HTTP " +
                                                        std::to_string(r.status) + ")");
                ++retries;
                log("HTTP " + std::to_string(r.status) + ", retry " + std::to_string(retries) + " in " +
                    std::to_string(backoff.count()) + " ms");
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
                continue;
            }
            require(r.status == 200, Errc::transport_error, "chat endpoint answered HTTP " + std::to_string(r.status));
            try {
                auto j = nlohmann::json::parse(r.body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception&) {
                // handled as an empty reply by the caller
                return {};
            }
        }
    }

    LlmConfig cfg_;
    Logger log_;
    std::atomic<std::size_t> network_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
    std::counting_semaphore<kMaxInFlight> in_flight_{kMaxInFlight};
};

struct ServiceOracleConfig {
    std::string endpoint;
    std::chrono::milliseconds timeout{10000};
};

inline nlohmann::json reconstruct_request_json(const ReconRequest& req) {
    nlohmann::json j = wire::sentence_to_json(req.sentence.tokens);
    // the service route knows plain and prompted; adaptive repair is plain repair
    j["strategy"] = req.strategy == Strategy::prompted ? "prompted" : "plain";
    if (req.summary) j["summary"] = *req.summary;
    auto examples = nlohmann::json::array();
    for (const auto& ex : req.examples) examples.push_back({{"corrupted", ex.corrupted}, {"correct", ex.correct}});
    if (!examples.empty()) j["examples"] = examples;
    return j;
}

inline ReconRequest reconstruct_request_from_json(const nlohmann::json& j) {
    try {
        ReconRequest req;
        req.sentence.tokens = wire::sentence_from_json(j);
        const auto strategy = j.value("strategy", std::string("plain"));
        if (strategy == "prompted")
            req.strategy = Strategy::prompted;
        else
            require(strategy == "plain", Errc::protocol_error, "unknown strategy '" + strategy + "'");
        if (j.contains("summary")) req.summary = j.at("summary").get<std::string>();
        if (j.contains("examples"))
            for (const auto& e : j.at("examples"))
                req.examples.push_back({e.at("corrupted").get<std::vector<std::string>>(),
                                        e.at("correct").get<std::vector<std::string>>()});
        return req;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::protocol_error, std::string("malformed reconstruct request: ") + e.what());
    }
}

/// Client for an external /v1/reconstruct service.
class ServiceOracle final : public ReconOracle {
public:
    explicit ServiceOracle(ServiceOracleConfig cfg) : cfg_(std::move(cfg)) {}

    ReconResponse repair(const ReconRequest& req) override {
        validate(req);
        const auto t0 = std::chrono::steady_clock::now();
        auto r = http::post_json(cfg_.endpoint, "/v1/reconstruct", reconstruct_request_json(req), cfg_.timeout);
        auto j = http::parse_body(r, "POST /v1/reconstruct");
        ReconResponse res;
        res.oracle_id = id();
        res.sentence = Sentence{tokenize(join(wire::sentence_from_json(j))), req.sentence.source_id};
        if (res.sentence.tokens.empty()) {
            res.sentence = req.sentence;
            res.fallback = true;
        }
        res.latency = std::chrono::steady_clock::now() - t0;
        return res;
    }

    std::string id() const override { return "service:" + cfg_.endpoint; }

private:
    ServiceOracleConfig cfg_;
};

} // namespace semlink
