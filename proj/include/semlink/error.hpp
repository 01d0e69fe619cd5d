#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semlink {

enum class Errc {
    precondition,
    insufficient_corpus,
    length_mismatch,
    bad_length,
    overflow,
    invalid_plan,
    bad_sample_count,
    index_out_of_range,
    degenerate_labels,
    capacity_exceeded,
    heterogeneous_batch,
    oracle_failure,
    transport_error,
    protocol_error,
    timeout,
    rate_limited,
    malformed_reply,
    missing_artifact,
    oracle_unavailable,
    config_error,
    io_error,
};

inline std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::precondition: return "precondition";
    case Errc::insufficient_corpus: return "insufficient_corpus";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::bad_length: return "bad_length";
    case Errc::overflow: return "overflow";
    case Errc::invalid_plan: return "invalid_plan";
    case Errc::bad_sample_count: return "bad_sample_count";
    case Errc::index_out_of_range: return "index_out_of_range";
    case Errc::degenerate_labels: return "degenerate_labels";
    case Errc::capacity_exceeded: return "capacity_exceeded";
    case Errc::heterogeneous_batch: return "heterogeneous_batch";
    case Errc::oracle_failure: return "oracle_failure";
    case Errc::transport_error: return "transport_error";
    case Errc::protocol_error: return "protocol_error";
    case Errc::timeout: return "timeout";
    case Errc::rate_limited: return "rate_limited";
    case Errc::malformed_reply: return "malformed_reply";
    case Errc::missing_artifact: return "missing_artifact";
    case Errc::oracle_unavailable: return "oracle_unavailable";
    case Errc::config_error: return "config_error";
    case Errc::io_error: return "io_error";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable code so
/// callers (and the CLI's exit-code mapping) can branch on it.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

} // namespace semlink
