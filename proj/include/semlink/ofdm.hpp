#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "semlink/codec.hpp"
#include "semlink/error.hpp"
#include "semlink/fft.hpp"

namespace semlink {

inline constexpr std::size_t kSubcarriers = 64;
inline constexpr std::size_t kSymbolsPerBlock = 8;
inline constexpr std::size_t kDataRows = kSymbolsPerBlock - 1;
inline constexpr std::size_t kDataSlots = kDataRows * kSubcarriers;  // 448
inline constexpr std::size_t kCpLength = 16;
inline constexpr std::size_t kSamplesPerSymbol = kSubcarriers + kCpLength;
inline constexpr std::size_t kSamplesPerBlock = kSymbolsPerBlock * kSamplesPerSymbol;  // 640
inline constexpr std::size_t kBitsPerSymbol = 4;

// ---------------------------------------------------------------------------
// 16-QAM, Gray labelled per axis. The first two bits pick the in-phase level,
// the last two the quadrature level:
//
//   00 -> -3    01 -> -1    11 -> +1    10 -> +3      (all scaled by 1/sqrt(10))
//
// so 0000 -> (-3-3j)/sqrt(10) and 1010 -> (+3+3j)/sqrt(10). The same table is
// published in data/qam16_gray.tsv.
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kPadNibble = 0b0000;
inline constexpr std::uint8_t kPilotNibble = 0b1010;

namespace detail {

constexpr int gray_level(unsigned two_bits) {
    switch (two_bits & 3u) {
    case 0b00: return -3;
    case 0b01: return -1;
    case 0b11: return 1;
    default: return 3;
    }
}

} // namespace detail

/// Constellation point for a 4-bit label (MSB = first transmitted bit).
inline cplx qam16_point(std::uint8_t nibble) {
    static const double kScale = 1.0 / std::sqrt(10.0);
    return {detail::gray_level(nibble >> 2) * kScale, detail::gray_level(nibble) * kScale};
}

inline const std::array<cplx, 16>& qam16_constellation() {
    static const auto table = [] {
        std::array<cplx, 16> t{};
        for (std::uint8_t v = 0; v < 16; ++v) t[v] = qam16_point(v);
        return t;
    }();
    return table;
}

inline std::vector<cplx> map_16qam(std::span<const std::uint8_t> bits) {
    require(bits.size() % kBitsPerSymbol == 0, Errc::bad_length,
            std::to_string(bits.size()) + " bits is not a multiple of 4");
    std::vector<cplx> out;
    out.reserve(bits.size() / kBitsPerSymbol);
    for (std::size_t i = 0; i < bits.size(); i += kBitsPerSymbol) {
        const auto v = static_cast<std::uint8_t>(((bits[i] & 1u) << 3) | ((bits[i + 1] & 1u) << 2) |
                                                 ((bits[i + 2] & 1u) << 1) | (bits[i + 3] & 1u));
        out.push_back(qam16_point(v));
    }
    return out;
}

/// Minimum-Euclidean-distance hard decision.
inline std::uint8_t demap_16qam_symbol(cplx y) {
    const auto& table = qam16_constellation();
    std::uint8_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint8_t v = 0; v < 16; ++v) {
        const double d = std::norm(y - table[v]);
        if (d < best_d) {
            best_d = d;
            best = v;
        }
    }
    return best;
}

inline Bits demap_16qam(std::span<const cplx> symbols) {
    Bits bits;
    bits.reserve(symbols.size() * kBitsPerSymbol);
    for (auto y : symbols) {
        const auto v = demap_16qam_symbol(y);
        for (int b = 3; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((v >> b) & 1u));
    }
    return bits;
}

inline cplx pad_symbol() { return qam16_point(kPadNibble); }

/// Known pilot: the 1010 corner point on every subcarrier.
inline const std::vector<cplx>& pilot_sequence() {
    static const std::vector<cplx> pilot(kSubcarriers, qam16_point(kPilotNibble));
    return pilot;
}

/// Data symbol i travels in data slot slot_of[i]; slot s sits on OFDM symbol
/// 1 + s / 64, subcarrier s % 64.
struct AllocationPlan {
    std::vector<std::uint16_t> slot_of;
    /// Diagnostics filled by make_plan: data slots best-first, features by descending score.
    std::vector<std::uint16_t> slot_ranking;
    std::vector<std::size_t> feature_ranking;

    static AllocationPlan identity() {
        AllocationPlan p;
        p.slot_of.resize(kDataSlots);
        std::iota(p.slot_of.begin(), p.slot_of.end(), std::uint16_t{0});
        return p;
    }

    bool valid() const {
        if (slot_of.size() != kDataSlots) return false;
        std::array<bool, kDataSlots> seen{};
        for (auto s : slot_of) {
            if (s >= kDataSlots || seen[s]) return false;
            seen[s] = true;
        }
        return true;
    }

    bool operator==(const AllocationPlan& o) const { return slot_of == o.slot_of; }
};

inline constexpr std::size_t slot_subcarrier(std::size_t slot) { return slot % kSubcarriers; }
inline constexpr std::size_t slot_row(std::size_t slot) { return 1 + slot / kSubcarriers; }

/// Frequency-domain resource grid, 8 OFDM symbols x 64 subcarriers, row-major.
struct OfdmBlock {
    std::vector<cplx> grid = std::vector<cplx>(kSymbolsPerBlock * kSubcarriers, cplx{});

    cplx& at(std::size_t row, std::size_t k) { return grid[row * kSubcarriers + k]; }
    const cplx& at(std::size_t row, std::size_t k) const { return grid[row * kSubcarriers + k]; }

    std::span<const cplx> row(std::size_t r) const {
        return std::span<const cplx>(grid).subspan(r * kSubcarriers, kSubcarriers);
    }
};

inline OfdmBlock assemble_block(std::span<const cplx> data_symbols, const AllocationPlan& plan) {
    require(data_symbols.size() <= kDataSlots, Errc::overflow,
            std::to_string(data_symbols.size()) + " symbols exceed the 448 data slots");
    require(plan.valid(), Errc::invalid_plan, "allocation plan is not a permutation of the 448 data slots");
    OfdmBlock b;
    for (std::size_t k = 0; k < kSubcarriers; ++k) b.at(0, k) = pilot_sequence()[k];
    const cplx pad = pad_symbol();
    for (std::size_t i = 0; i < kDataSlots; ++i) {
        const auto s = plan.slot_of[i];
        b.at(slot_row(s), slot_subcarrier(s)) = i < data_symbols.size() ? data_symbols[i] : pad;
    }
    return b;
}

/// Unitary IFFT per OFDM symbol, cyclic prefix prepended.
inline std::vector<cplx> to_time(const OfdmBlock& block) {
    std::vector<cplx> out;
    out.reserve(kSamplesPerBlock);
    for (std::size_t r = 0; r < kSymbolsPerBlock; ++r) {
        const auto t = ifft(block.row(r));
        out.insert(out.end(), t.end() - kCpLength, t.end());
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

inline OfdmBlock from_time(std::span<const cplx> samples) {
    require(samples.size() == kSamplesPerBlock, Errc::bad_sample_count,
            "expected 640 samples, got " + std::to_string(samples.size()));
    OfdmBlock b;
    for (std::size_t r = 0; r < kSymbolsPerBlock; ++r) {
        const auto f = fft(samples.subspan(r * kSamplesPerSymbol + kCpLength, kSubcarriers));
        std::copy(f.begin(), f.end(), b.grid.begin() + static_cast<std::ptrdiff_t>(r * kSubcarriers));
    }
    return b;
}

struct ChannelEstimate {
    std::vector<cplx> h_hat;
    std::vector<double> quality;  // |h_hat|^2
};

/// Least-squares estimate from the pilot row.
inline ChannelEstimate estimate_ls(std::span<const cplx> received_pilot, std::span<const cplx> known_pilot) {
    require(received_pilot.size() == known_pilot.size(), Errc::precondition, "pilot length mismatch");
    ChannelEstimate est;
    est.h_hat.resize(known_pilot.size());
    est.quality.resize(known_pilot.size());
    for (std::size_t k = 0; k < known_pilot.size(); ++k) {
        est.h_hat[k] = received_pilot[k] / known_pilot[k];
        est.quality[k] = std::norm(est.h_hat[k]);
    }
    return est;
}

struct Equalized {
    Bits bits;                          // 448 * 4 bits in data-symbol order
    std::vector<double> per_slot_gain;  // |h_hat|^2 seen by each data symbol
};

/// Zero-forcing: divide each data slot by the estimate on its subcarrier,
/// hard-demap, and undo the allocation.
inline Equalized equalize_demap(const OfdmBlock& rx, const ChannelEstimate& est, const AllocationPlan& plan) {
    require(plan.valid(), Errc::invalid_plan, "allocation plan is not a permutation of the 448 data slots");
    require(est.h_hat.size() == kSubcarriers, Errc::precondition, "channel estimate must cover 64 subcarriers");
    Equalized out;
    out.bits.reserve(kDataSlots * kBitsPerSymbol);
    out.per_slot_gain.reserve(kDataSlots);
    for (std::size_t i = 0; i < kDataSlots; ++i) {
        const auto s = plan.slot_of[i];
        const auto k = slot_subcarrier(s);
        const cplx x_hat = rx.at(slot_row(s), k) / est.h_hat[k];
        const auto v = demap_16qam_symbol(x_hat);
        for (int b = 3; b >= 0; --b) out.bits.push_back(static_cast<std::uint8_t>((v >> b) & 1u));
        out.per_slot_gain.push_back(est.quality[k]);
    }
    return out;
}

} // namespace semlink
