#pragma once

// JSON/HTTP wire protocol shared by the external codec and the
// reconstruction service.
//
//   POST /v1/encode       {"sentence": [words]}
//                      -> {"bits": base64, "width": B, "length": n}
//   POST /v1/decode       {"bits": base64, "width": B, "length": n}
//                      -> {"sentence": [words]}
//   POST /v1/reconstruct  {"sentence": [words], "strategy": "plain|prompted",
//                          "summary": str, "examples": [{"corrupted": [...], "correct": [...]}]}
//                      -> {"sentence": [words]}
//   GET  /v1/info      -> {"protocol_version": 1, "width": B}      (optional)
//
// Every request carries the X-Protocol-Version header; a server speaking a
// different version answers 409. Bits are the big-endian bitstream of the
// frame, zero-padded to a byte boundary before base64.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semlink/codec.hpp"
#include "semlink/error.hpp"

namespace semlink::wire {

inline constexpr int kProtocolVersion = 1;
inline constexpr const char* kVersionHeader = "X-Protocol-Version";

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    require(text.size() % 4 == 0, Errc::protocol_error, "base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::array<int, 4> q{};
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                q[k] = 0;
                ++pad;
            } else {
                require(pad == 0, Errc::protocol_error, "misplaced base64 padding");
                q[k] = value(c);
                require(q[k] >= 0, Errc::protocol_error, "invalid base64 character");
            }
        }
        const std::uint32_t v = (q[0] << 18) | (q[1] << 12) | (q[2] << 6) | q[3];
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
    return out;
}

inline std::vector<std::uint8_t> pack_bits(const Bits& bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return bytes;
}

inline Bits unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t n_bits) {
    require(bytes.size() == (n_bits + 7) / 8, Errc::protocol_error,
            "payload of " + std::to_string(bytes.size()) + " bytes does not carry " + std::to_string(n_bits) +
                " bits");
    Bits bits(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    return bits;
}

inline nlohmann::json frame_to_json(const FeatureFrame& f) {
    return {{"bits", base64_encode(pack_bits(frame_to_bits(f)))}, {"width", f.width}, {"length", f.length()}};
}

inline FeatureFrame frame_from_json(const nlohmann::json& j) {
    try {
        const auto width = j.at("width").get<unsigned>();
        const auto length = j.at("length").get<std::size_t>();
        require(width >= 1 && width <= kMaxFeatureWidth, Errc::protocol_error,
                "width " + std::to_string(width) + " out of range");
        require(length >= kMinWords && length <= kMaxWords, Errc::protocol_error,
                "length " + std::to_string(length) + " out of range");
        const auto bits = unpack_bits(base64_decode(j.at("bits").get<std::string>()), width * length);
        return bits_to_frame(bits, length, width);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::protocol_error, std::string("malformed frame: ") + e.what());
    }
}

inline nlohmann::json sentence_to_json(const std::vector<std::string>& tokens) {
    return {{"sentence", tokens}};
}

inline std::vector<std::string> sentence_from_json(const nlohmann::json& j) {
    try {
        return j.at("sentence").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::protocol_error, std::string("malformed sentence: ") + e.what());
    }
}

} // namespace semlink::wire
