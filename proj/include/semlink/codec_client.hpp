#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "semlink/codec.hpp"
#include "semlink/http.hpp"
#include "semlink/wire.hpp"

namespace semlink {

struct CodecClientConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    std::chrono::milliseconds timeout{2000};
    /// Width this side expects. Unset means "accept whatever the service advertises".
    std::optional<unsigned> width{};
};

/// Client for an external codec speaking the wire protocol. Same contract as
/// the built-in encode/decode; failures surface as transport_error,
/// protocol_error or timeout so callers can fall back to the built-in codec.
class CodecClient {
public:
    static constexpr std::ptrdiff_t kMaxInFlight = 8;

    explicit CodecClient(CodecClientConfig cfg) : cfg_(std::move(cfg)) {}

    /// Session start: settle the feature width. Uses GET /v1/info when the
    /// service offers it, otherwise the configured width (default 16).
    unsigned negotiate() {
        std::lock_guard lock(negotiate_mutex_);
        if (width_) return *width_;
        unsigned w = cfg_.width.value_or(kDefaultFeatureWidth);
        auto r = http::get(cfg_.endpoint, "/v1/info", cfg_.timeout);
        if (r.status == 200) {
            auto j = http::parse_body(r, "GET /v1/info");
            try {
                const auto version = j.at("protocol_version").get<int>();
                require(version == wire::kProtocolVersion, Errc::protocol_error,
                        "service speaks protocol version " + std::to_string(version));
                const auto advertised = j.at("width").get<unsigned>();
                require(!cfg_.width || *cfg_.width == advertised, Errc::protocol_error,
                        "service width " + std::to_string(advertised) + " != requested " + std::to_string(w));
                w = advertised;
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::protocol_error, std::string("malformed /v1/info: ") + e.what());
            }
        } else if (r.status == 409) {
            throw Error(Errc::protocol_error, "protocol version rejected (409)");
        }
        require(w >= 1 && w <= kMaxFeatureWidth, Errc::protocol_error, "unusable width " + std::to_string(w));
        width_ = w;
        return w;
    }

    FeatureFrame encode(const Sentence& s) {
        const unsigned w = negotiate();
        Slot slot(in_flight_);
        auto body = wire::sentence_to_json(s.tokens);
        body["id"] = next_id_++;
        auto r = http::post_json(cfg_.endpoint, "/v1/encode", body, cfg_.timeout);
        auto j = http::parse_body(r, "POST /v1/encode");
        check_id(j, body["id"].get<std::uint64_t>());
        auto frame = wire::frame_from_json(j);
        require(frame.width == w, Errc::protocol_error,
                "service returned width " + std::to_string(frame.width) + ", session width is " + std::to_string(w));
        require(frame.length() == s.size(), Errc::protocol_error,
                "service returned " + std::to_string(frame.length()) + " features for a " +
                    std::to_string(s.size()) + "-word sentence");
        return frame;
    }

    Sentence decode(const FeatureFrame& f, std::size_t source_id = 0) {
        const unsigned w = negotiate();
        require(f.width == w, Errc::protocol_error,
                "frame width " + std::to_string(f.width) + " != session width " + std::to_string(w));
        Slot slot(in_flight_);
        auto body = wire::frame_to_json(f);
        body["id"] = next_id_++;
        auto r = http::post_json(cfg_.endpoint, "/v1/decode", body, cfg_.timeout);
        auto j = http::parse_body(r, "POST /v1/decode");
        check_id(j, body["id"].get<std::uint64_t>());
        Sentence s{wire::sentence_from_json(j), source_id};
        require(s.size() == f.length(), Errc::protocol_error,
                "service decoded " + std::to_string(s.size()) + " words from " + std::to_string(f.length()) +
                    " features");
        return s;
    }

    const CodecClientConfig& config() const noexcept { return cfg_; }

private:
    struct Slot {
        explicit Slot(std::counting_semaphore<kMaxInFlight>& s) : sem(s) { sem.acquire(); }
        ~Slot() { sem.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;
        std::counting_semaphore<kMaxInFlight>& sem;
    };

    static void check_id(const nlohmann::json& j, std::uint64_t id) {
        // Services are not required to echo ids; if they do, it must match.
        if (j.contains("id"))
            require(j["id"].is_number_unsigned() && j["id"].get<std::uint64_t>() == id, Errc::protocol_error,
                    "response id does not match request id");
    }

    CodecClientConfig cfg_;
    std::mutex negotiate_mutex_;
    std::optional<unsigned> width_;
    std::atomic<std::uint64_t> next_id_{1};
    std::counting_semaphore<kMaxInFlight> in_flight_{kMaxInFlight};
};

} // namespace semlink
