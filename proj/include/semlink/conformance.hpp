#pragma once

// Replays golden request/response pairs against a wire-protocol endpoint.

#include <fstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "semlink/error.hpp"
#include "semlink/wire.hpp"

namespace semlink {

struct ConformanceResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline nlohmann::json load_golden(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::missing_artifact, "golden file " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, path + ": " + e.what());
    }
}

/// Each case names a route, a request body, the expected status and either
/// an exact `response` (every listed field must match) or a `shape`.
inline std::vector<ConformanceResult> run_conformance(const std::string& endpoint, const nlohmann::json& golden) {
    std::vector<ConformanceResult> out;
    httplib::Client client(endpoint);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(10, 0);
    for (const auto& c : golden.at("cases")) {
        ConformanceResult r;
        r.name = c.at("name").get<std::string>();
        const auto version = c.value("version", std::to_string(wire::kProtocolVersion));
        httplib::Headers headers{{wire::kVersionHeader, version}};
        auto res = client.Post(c.at("route").get<std::string>(), headers, c.at("request").dump(), "application/json");
        if (!res) {
            r.detail = "no response: " + httplib::to_string(res.error());
            out.push_back(std::move(r));
            continue;
        }
        const int want = c.at("status").get<int>();
        if (res->status != want) {
            r.detail = "status " + std::to_string(res->status) + ", expected " + std::to_string(want);
            out.push_back(std::move(r));
            continue;
        }
        r.pass = true;
        if (want == 200) {
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception&) {
                r.pass = false;
                r.detail = "reply is not JSON";
            }
            if (r.pass && c.contains("response")) {
                for (const auto& [key, value] : c.at("response").items()) {
                    if (!body.contains(key) || body[key] != value) {
                        r.pass = false;
                        r.detail = "field '" + key + "': got " + (body.contains(key) ? body[key].dump() : "nothing") +
                                   ", expected " + value.dump();
                        break;
                    }
                }
            }
            if (r.pass && c.value("shape", "") == "sentence") {
                const auto& s = body.contains("sentence") ? body["sentence"] : nlohmann::json();
                bool ok = s.is_array() && !s.empty();
                if (ok)
                    for (const auto& w : s) ok = ok && w.is_string();
                if (!ok) {
                    r.pass = false;
                    r.detail = "reply has no non-empty 'sentence' string array";
                }
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace semlink
