#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "semlink/error.hpp"
#include "semlink/wire.hpp"

namespace semlink::http {

struct Response {
    int status = 0;
    std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// POST a JSON body and return status + raw body. Connection failures map to
/// transport_error, timeouts to timeout. HTTP status codes are left to the
/// caller.
inline Response post_json(const std::string& base_url, const std::string& path, const nlohmann::json& body,
                          std::chrono::milliseconds timeout, const Headers& extra = {}) {
    httplib::Client client(base_url);
    require(client.is_valid(), Errc::transport_error, "invalid endpoint " + base_url);
    const auto secs = timeout.count() / 1000;
    const auto usecs = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers{{wire::kVersionHeader, std::to_string(wire::kProtocolVersion)}};
    for (const auto& [k, v] : extra) headers.emplace(k, v);
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        const std::string what = base_url + path + ": " + httplib::to_string(err);
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
            // Read errors after a successful connect are what a stalled server looks like.
            throw Error(Errc::timeout, what);
        }
        throw Error(Errc::transport_error, what);
    }
    return {res->status, res->body};
}

inline Response get(const std::string& base_url, const std::string& path, std::chrono::milliseconds timeout) {
    httplib::Client client(base_url);
    require(client.is_valid(), Errc::transport_error, "invalid endpoint " + base_url);
    const auto secs = timeout.count() / 1000;
    const auto usecs = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    httplib::Headers headers{{wire::kVersionHeader, std::to_string(wire::kProtocolVersion)}};
    auto res = client.Get(path, headers);
    if (!res) {
        const auto err = res.error();
        const std::string what = base_url + path + ": " + httplib::to_string(err);
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) throw Error(Errc::timeout, what);
        throw Error(Errc::transport_error, what);
    }
    return {res->status, res->body};
}

inline nlohmann::json parse_body(const Response& r, const std::string& context) {
    if (r.status == 409) throw Error(Errc::protocol_error, context + ": protocol version rejected (409)");
    require(r.status == 200, Errc::protocol_error, context + ": HTTP " + std::to_string(r.status));
    try {
        return nlohmann::json::parse(r.body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::protocol_error, context + ": body is not JSON: " + e.what());
    }
}

} // namespace semlink::http
