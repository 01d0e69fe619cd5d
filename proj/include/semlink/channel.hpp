#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "semlink/fft.hpp"
#include "semlink/rng.hpp"

namespace semlink {

struct ChannelConfig {
    std::size_t n_paths = 3;
    /// Tap l has mean power proportional to exp(-decay * l).
    double decay = 1.0;
    std::size_t n_subcarriers = 64;
};

/// One block-fading draw: time-domain taps and their frequency response.
struct ChannelRealization {
    std::vector<cplx> taps;
    std::vector<cplx> freq_response;
    std::uint64_t block_id = 0;
};

/// SNR = average received symbol energy / noise variance per complex sample,
/// with unit average transmit symbol energy and unit average channel gain.
struct NoiseSpec {
    double snr_db = std::numeric_limits<double>::infinity();

    double variance() const { return std::isinf(snr_db) && snr_db > 0 ? 0.0 : std::pow(10.0, -snr_db / 10.0); }
};

inline std::vector<double> power_profile(const ChannelConfig& cfg) {
    std::vector<double> p(cfg.n_paths);
    double total = 0.0;
    for (std::size_t l = 0; l < cfg.n_paths; ++l) total += p[l] = std::exp(-cfg.decay * static_cast<double>(l));
    for (auto& v : p) v /= total;
    return p;
}

/// H[k] = sum_l h_l e^{-j 2 pi k l / N}.
inline std::vector<cplx> frequency_response(std::span<const cplx> taps, std::size_t n_subcarriers) {
    require(taps.size() <= n_subcarriers, Errc::precondition, "more taps than subcarriers");
    std::vector<cplx> padded(n_subcarriers, cplx{});
    std::copy(taps.begin(), taps.end(), padded.begin());
    auto h = fft(padded);
    const double scale = std::sqrt(static_cast<double>(n_subcarriers));
    for (auto& v : h) v *= scale;
    return h;
}

inline ChannelRealization make_channel(std::vector<cplx> taps, std::size_t n_subcarriers = 64,
                                       std::uint64_t block_id = 0) {
    ChannelRealization ch;
    ch.freq_response = frequency_response(taps, n_subcarriers);
    ch.taps = std::move(taps);
    ch.block_id = block_id;
    return ch;
}

/// Rayleigh taps h_l ~ CN(0, p_l), independent per call (one call per block).
inline ChannelRealization draw_channel(Rng& rng, const ChannelConfig& cfg = {}, std::uint64_t block_id = 0) {
    const auto p = power_profile(cfg);
    Gaussian g;
    std::vector<cplx> taps(cfg.n_paths);
    for (std::size_t l = 0; l < cfg.n_paths; ++l) {
        const double s = std::sqrt(p[l] / 2.0);
        const double re = g(rng);
        const double im = g(rng);
        taps[l] = {s * re, s * im};
    }
    return make_channel(std::move(taps), cfg.n_subcarriers, block_id);
}

/// Circularly-symmetric complex Gaussian noise of the given variance.
inline std::vector<cplx> complex_noise(std::size_t n, double variance, Rng& rng) {
    Gaussian g;
    const double s = std::sqrt(variance / 2.0);
    std::vector<cplx> out(n);
    for (auto& v : out) {
        const double re = g(rng);
        const double im = g(rng);
        v = {s * re, s * im};
    }
    return out;
}

/// Linear convolution with the taps, truncated to the input length, plus AWGN.
/// An infinite snr_db skips noise generation and leaves rng untouched.
inline std::vector<cplx> apply(std::span<const cplx> signal, const ChannelRealization& ch, const NoiseSpec& noise,
                               Rng& rng) {
    std::vector<cplx> out(signal.size(), cplx{});
    for (std::size_t n = 0; n < signal.size(); ++n) {
        cplx acc{};
        for (std::size_t l = 0; l < ch.taps.size() && l <= n; ++l) acc += ch.taps[l] * signal[n - l];
        out[n] = acc;
    }
    const double var = noise.variance();
    if (var > 0.0) {
        const auto w = complex_noise(out.size(), var, rng);
        for (std::size_t n = 0; n < out.size(); ++n) out[n] += w[n];
    }
    return out;
}

} // namespace semlink
