#pragma once

// In-process HTTP server speaking the wire protocol with the built-in codec
// and any ReconOracle behind it. Used by `semlink serve-reference`, by the
// conformance harness and by the client tests.

#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "semlink/codec.hpp"
#include "semlink/dataset.hpp"
#include "semlink/error.hpp"
#include "semlink/llm_client.hpp"
#include "semlink/oracle.hpp"
#include "semlink/wire.hpp"

namespace semlink {

struct ReferenceServiceConfig {
    unsigned width = kDefaultFeatureWidth;
    bool serve_info = true;
    /// Test hook: width stamped on /v1/encode replies (0 = the real width).
    unsigned reply_width = 0;
    /// Test hook: artificial latency per request.
    std::chrono::milliseconds delay{0};
};

class ReferenceService {
public:
    ReferenceService(const Vocabulary& vocab, ReconOracle* oracle, ReferenceServiceConfig cfg = {})
        : vocab_(vocab), oracle_(oracle), cfg_(cfg) {
        detail::check_width(cfg_.width);
        require(vocab_.size() <= detail::width_capacity(cfg_.width), Errc::capacity_exceeded,
                "vocabulary does not fit the service width");
        routes();
    }

    ~ReferenceService() { stop(); }
    ReferenceService(const ReferenceService&) = delete;
    ReferenceService& operator=(const ReferenceService&) = delete;

    /// Binds to host on an ephemeral port and serves on a background thread.
    int start(const std::string& host = "127.0.0.1") {
        port_ = server_.bind_to_any_port(host);
        require(port_ > 0, Errc::transport_error, "cannot bind " + host);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        host_ = host;
        return port_;
    }

    /// Blocks serving on host:port.
    void listen(const std::string& host, int port) {
        require(server_.listen(host, port), Errc::transport_error,
                "cannot listen on " + host + ":" + std::to_string(port));
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    int port() const { return port_; }
    std::string url() const { return "http://" + host_ + ":" + std::to_string(port_); }

private:
    using Handler = std::function<nlohmann::json(const nlohmann::json&)>;

    void routes() {
        server_.Get("/v1/info", [this](const httplib::Request& req, httplib::Response& res) {
            if (!cfg_.serve_info) {
                res.status = 404;
                return;
            }
            if (!version_ok(req, res)) return;
            reply(res, {{"protocol_version", wire::kProtocolVersion}, {"width", cfg_.width}});
        });
        post("/v1/encode", [this](const nlohmann::json& j) {
            Sentence s{wire::sentence_from_json(j)};
            auto out = wire::frame_to_json(encode(s, vocab_, cfg_.width));
            if (cfg_.reply_width) out["width"] = cfg_.reply_width;
            return out;
        });
        post("/v1/decode", [this](const nlohmann::json& j) {
            const auto frame = wire::frame_from_json(j);
            require(frame.width == cfg_.width, Errc::protocol_error,
                    "frame width " + std::to_string(frame.width) + " != service width");
            return wire::sentence_to_json(decode(frame, vocab_).tokens);
        });
        post("/v1/reconstruct", [this](const nlohmann::json& j) {
            require(oracle_ != nullptr, Errc::oracle_unavailable, "no reconstruction oracle configured");
            auto req = reconstruct_request_from_json(j);
            std::lock_guard lock(oracle_mutex_);
            return wire::sentence_to_json(oracle_->repair(req).sentence.tokens);
        });
    }

    void post(const std::string& path, Handler fn) {
        server_.Post(path, [this, fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            if (cfg_.delay.count() > 0) std::this_thread::sleep_for(cfg_.delay);
            if (!version_ok(req, res)) return;
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception& e) {
                fail(res, 400, std::string("body is not JSON: ") + e.what());
                return;
            }
            try {
                auto out = fn(body);
                if (body.contains("id")) out["id"] = body["id"];
                reply(res, out);
            } catch (const Error& e) {
                fail(res, e.code() == Errc::oracle_unavailable ? 503 : 400, e.what());
            }
        });
    }

    static bool version_ok(const httplib::Request& req, httplib::Response& res) {
        const auto v = req.get_header_value(wire::kVersionHeader);
        if (v != std::to_string(wire::kProtocolVersion)) {
            fail(res, 409, "protocol version '" + v + "' not supported");
            return false;
        }
        return true;
    }

    static void reply(httplib::Response& res, const nlohmann::json& j) {
        res.status = 200;
        res.set_content(j.dump(), "application/json");
    }

    static void fail(httplib::Response& res, int status, const std::string& msg) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
    }

    const Vocabulary& vocab_;
    ReconOracle* oracle_;
    ReferenceServiceConfig cfg_;
    std::mutex oracle_mutex_;
    httplib::Server server_;
    std::thread thread_;
    std::string host_ = "127.0.0.1";
    int port_ = 0;
};

} // namespace semlink
