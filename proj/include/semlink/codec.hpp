#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semlink/dataset.hpp"
#include "semlink/error.hpp"

namespace semlink {

/// One element per bit, each 0 or 1, most significant bit of each feature first.
using Bits = std::vector<std::uint8_t>;

inline constexpr unsigned kDefaultFeatureWidth = 16;
inline constexpr unsigned kMaxFeatureWidth = 32;

/// One fixed-width feature per word. The receiver learns `length` out of band.
struct FeatureFrame {
    std::vector<std::uint32_t> features;
    unsigned width = kDefaultFeatureWidth;

    std::size_t length() const noexcept { return features.size(); }
    bool operator==(const FeatureFrame&) const = default;
};

namespace detail {

inline void check_width(unsigned width) {
    require(width >= 1 && width <= kMaxFeatureWidth, Errc::precondition,
            "feature width must be in [1, 32], got " + std::to_string(width));
}

inline void check_frame_length(std::size_t length) {
    require(length >= kMinWords && length <= kMaxWords, Errc::precondition,
            "frame length must be in [4, 30], got " + std::to_string(length));
}

inline std::uint64_t width_capacity(unsigned width) { return std::uint64_t{1} << width; }

} // namespace detail

/// Deterministic word-codeword codec: feature i is the vocabulary index of
/// word i. No redundancy; channel damage lands on whole words.
inline FeatureFrame encode(const Sentence& s, const Vocabulary& vocab, unsigned width = kDefaultFeatureWidth) {
    detail::check_width(width);
    detail::check_frame_length(s.size());
    require(vocab.size() <= detail::width_capacity(width), Errc::precondition,
            "vocabulary of " + std::to_string(vocab.size()) + " entries does not fit " + std::to_string(width) +
                "-bit features");
    FeatureFrame f;
    f.width = width;
    f.features.reserve(s.size());
    for (const auto& t : s.tokens) f.features.push_back(vocab.index(t));
    return f;
}

inline Sentence decode(const FeatureFrame& f, const Vocabulary& vocab, std::size_t source_id = 0) {
    Sentence s;
    s.source_id = source_id;
    s.tokens.reserve(f.length());
    for (auto v : f.features) s.tokens.push_back(vocab.word(v));
    return s;
}

inline Bits frame_to_bits(const FeatureFrame& f) {
    detail::check_width(f.width);
    detail::check_frame_length(f.length());
    Bits bits;
    bits.reserve(f.length() * f.width);
    for (auto v : f.features)
        for (int b = static_cast<int>(f.width) - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((v >> b) & 1u));
    return bits;
}

inline FeatureFrame bits_to_frame(std::span<const std::uint8_t> bits, std::size_t length,
                                  unsigned width = kDefaultFeatureWidth) {
    detail::check_width(width);
    detail::check_frame_length(length);
    require(bits.size() == length * width, Errc::length_mismatch,
            std::to_string(bits.size()) + " bits cannot hold " + std::to_string(length) + " features of width " +
                std::to_string(width));
    FeatureFrame f;
    f.width = width;
    f.features.resize(length, 0);
    for (std::size_t i = 0; i < length; ++i) {
        std::uint32_t v = 0;
        for (unsigned b = 0; b < width; ++b) v = (v << 1) | (bits[i * width + b] & 1u);
        f.features[i] = v;
    }
    return f;
}

} // namespace semlink
