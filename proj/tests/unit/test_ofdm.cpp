#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <sstream>

#include "semlink/channel.hpp"
#include "semlink/ofdm.hpp"
#include "test_support.hpp"

using namespace semlink;

namespace {

Bits random_bits(Rng& rng, std::size_t n) {
    Bits b(n);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1u);
    return b;
}

OfdmBlock random_block(Rng& rng) {
    const auto bits = random_bits(rng, kDataSlots * kBitsPerSymbol);
    return assemble_block(map_16qam(bits), AllocationPlan::identity());
}

// independent unitary DFT (sign = -1 forward)
std::vector<cplx> dft(std::span<const cplx> x, int sign) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t t = 0; t < n; ++t)
            out[k] += x[t] * std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
    for (auto& v : out) v /= std::sqrt(static_cast<double>(n));
    return out;
}

double max_err(std::span<const cplx> a, std::span<const cplx> b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST(Qam16, MatchesPublishedTable) {
    std::ifstream in(testsupport::data_path("qam16_gray.tsv"));
    ASSERT_TRUE(in);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("bits", 0) == 0) continue;
        std::istringstream ss(line);
        std::string bits;
        int re, im;
        ss >> bits >> re >> im;
        const auto nibble = static_cast<std::uint8_t>(std::stoi(bits, nullptr, 2));
        EXPECT_NEAR(std::abs(qam16_point(nibble) - cplx(re, im) / std::sqrt(10.0)), 0.0, 1e-15) << bits;
        ++rows;
    }
    EXPECT_EQ(rows, 16);
    EXPECT_EQ(qam16_point(0b0000), cplx(-3, -3) / std::sqrt(10.0));
    EXPECT_EQ(pilot_sequence()[0], cplx(3, 3) / std::sqrt(10.0));
}

TEST(Qam16, PilotMatchesPublishedTable) {
    std::ifstream in(testsupport::data_path("pilot.tsv"));
    ASSERT_TRUE(in);
    std::string line;
    std::size_t k = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("subcarrier", 0) == 0) continue;
        std::istringstream ss(line);
        std::size_t sc;
        std::string bits;
        int re, im;
        ss >> sc >> bits >> re >> im;
        ASSERT_EQ(sc, k);
        EXPECT_EQ(bits, "1010");
        EXPECT_NEAR(std::abs(pilot_sequence()[k] - cplx(re, im) / std::sqrt(10.0)), 0.0, 1e-15);
        ++k;
    }
    EXPECT_EQ(k, kSubcarriers);
}

TEST(Qam16, ExhaustiveRoundTrip) {
    for (unsigned v = 0; v < 16; ++v) {
        const Bits b = {static_cast<std::uint8_t>(v >> 3 & 1), static_cast<std::uint8_t>(v >> 2 & 1),
                        static_cast<std::uint8_t>(v >> 1 & 1), static_cast<std::uint8_t>(v & 1)};
        EXPECT_EQ(demap_16qam(map_16qam(b)), b) << v;
    }
}

TEST(Qam16, UnitAverageEnergy) {
    double e = 0;
    for (const auto& p : qam16_constellation()) e += std::norm(p);
    EXPECT_NEAR(e / 16.0, 1.0, 1e-15);
}

TEST(Qam16, GrayNeighboursDifferInOneBit) {
    for (unsigned a = 0; a < 16; ++a)
        for (unsigned b = 0; b < 16; ++b) {
            const double d = std::abs(qam16_point(a) - qam16_point(b)) * std::sqrt(10.0);
            if (std::abs(d - 2.0) < 1e-9) {
                EXPECT_EQ(__builtin_popcount(a ^ b), 1) << a << " " << b;
            }
        }
}

TEST(Qam16, BadLength) {
    try {
        map_16qam(Bits(7, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::bad_length);
    }
}

TEST(Assemble, IdentityPlanRowMajor) {
    Rng rng(1);
    const auto sym = map_16qam(random_bits(rng, kDataSlots * 4));
    const auto b = assemble_block(sym, AllocationPlan::identity());
    for (std::size_t k = 0; k < kSubcarriers; ++k) EXPECT_EQ(b.at(0, k), pilot_sequence()[k]);
    for (std::size_t i = 0; i < kDataSlots; ++i) EXPECT_EQ(b.grid[kSubcarriers + i], sym[i]);
}

TEST(Assemble, ShortSentencePadding) {
    const std::vector<cplx> sym(120, qam16_point(0b0101));
    const auto b = assemble_block(sym, AllocationPlan::identity());
    std::size_t pads = 0;
    for (std::size_t i = kSubcarriers; i < b.grid.size(); ++i) pads += b.grid[i] == pad_symbol();
    EXPECT_EQ(pads, 328u);
}

TEST(Assemble, Errors) {
    auto plan = AllocationPlan::identity();
    plan.slot_of[5] = plan.slot_of[6];
    try {
        assemble_block(std::vector<cplx>(4), plan);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_plan);
    }
    try {
        assemble_block(std::vector<cplx>(449), AllocationPlan::identity());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::overflow);
    }
}

TEST(Transform, MatchesDirectDft) {
    Rng rng(4);
    const auto b = random_block(rng);
    const auto t = to_time(b);
    ASSERT_EQ(t.size(), 640u);
    for (std::size_t r = 0; r < kSymbolsPerBlock; ++r) {
        const auto ref = dft(b.row(r), +1);
        const auto body = std::span<const cplx>(t).subspan(r * 80 + 16, 64);
        EXPECT_LT(max_err(body, ref), 1e-12);
        // cyclic prefix is the tail
        EXPECT_LT(max_err(std::span<const cplx>(t).subspan(r * 80, 16), body.subspan(48, 16)), 1e-15);
    }
}

TEST(Transform, RoundTrip) {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto b = random_block(rng);
        EXPECT_LT(max_err(from_time(to_time(b)).grid, b.grid), 1e-9);
    }
    for (auto v : to_time(OfdmBlock{})) EXPECT_EQ(v, cplx{});
}

TEST(Transform, BadSampleCount) {
    try {
        from_time(std::vector<cplx>(639));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::bad_sample_count);
    }
}

TEST(Receiver, PerSubcarrierMultiplicativeModel) {
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        const auto b = random_block(rng);
        const auto ch = draw_channel(rng);
        const auto rx = from_time(apply(to_time(b), ch, {}, rng));
        double err = 0;
        for (std::size_t r = 0; r < kSymbolsPerBlock; ++r)
            for (std::size_t k = 0; k < kSubcarriers; ++k)
                err = std::max(err, std::abs(rx.at(r, k) - ch.freq_response[k] * b.at(r, k)));
        EXPECT_LT(err, 1e-9);
    }
}

TEST(Receiver, LsExactWhenNoiseless) {
    Rng rng(7);
    const auto ch = draw_channel(rng);
    const auto rx = from_time(apply(to_time(random_block(rng)), ch, {}, rng));
    const auto est = estimate_ls(rx.row(0), pilot_sequence());
    EXPECT_LT(max_err(est.h_hat, ch.freq_response), 1e-9);

    const auto id = make_channel({{1, 0}});
    const auto rx1 = from_time(apply(to_time(random_block(rng)), id, {}, rng));
    for (auto h : estimate_ls(rx1.row(0), pilot_sequence()).h_hat) EXPECT_LT(std::abs(h - 1.0), 1e-9);
}

TEST(Receiver, NoiselessChainIdentity) {
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        const auto bits = random_bits(rng, kDataSlots * 4);
        Rng prng(i);
        std::vector<std::uint16_t> perm(kDataSlots);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t j = perm.size(); j > 1; --j) std::swap(perm[j - 1], perm[uniform_index(prng, j)]);
        AllocationPlan plan;
        plan.slot_of = perm;
        const auto ch = draw_channel(rng);
        const auto rx = from_time(apply(to_time(assemble_block(map_16qam(bits), plan)), ch, {}, rng));
        EXPECT_EQ(equalize_demap(rx, estimate_ls(rx.row(0), pilot_sequence()), plan).bits, bits);
    }
}

TEST(Receiver, ZfScaleInvariance) {
    Rng rng(9);
    const auto ch = draw_channel(rng);
    const auto rx = from_time(apply(to_time(random_block(rng)), ch, NoiseSpec{12}, rng));
    const auto est = estimate_ls(rx.row(0), pilot_sequence());
    const cplx c(0.3, -1.7);
    OfdmBlock rx2 = rx;
    for (auto& v : rx2.grid) v *= c;
    ChannelEstimate est2 = est;
    for (auto& h : est2.h_hat) h *= c;
    const auto plan = AllocationPlan::identity();
    EXPECT_EQ(equalize_demap(rx, est, plan).bits, equalize_demap(rx2, est2, plan).bits);
}

TEST(Receiver, EstimateMseFallsWithSnr) {
    auto mse = [](double snr) {
        Rng rng(derive_seed(10, static_cast<std::uint64_t>(snr)));
        double acc = 0;
        for (int i = 0; i < 10000; ++i) {
            const auto ch = draw_channel(rng);
            OfdmBlock b;
            for (std::size_t k = 0; k < kSubcarriers; ++k) b.at(0, k) = pilot_sequence()[k];
            const auto rx = from_time(apply(to_time(b), ch, NoiseSpec{snr}, rng));
            const auto est = estimate_ls(rx.row(0), pilot_sequence());
            for (std::size_t k = 0; k < kSubcarriers; ++k) acc += std::norm(est.h_hat[k] - ch.freq_response[k]);
        }
        return acc / (10000.0 * kSubcarriers);
    };
    EXPECT_LT(mse(30), mse(0));
}

TEST(Receiver, BitErrorRateFallsWithSnr) {
    auto ber = [](double snr) {
        Rng rng(derive_seed(11, static_cast<std::uint64_t>(snr)));
        std::size_t errs = 0, total = 0;
        for (int i = 0; i < 10000; ++i) {
            const auto bits = random_bits(rng, kDataSlots * 4);
            const auto ch = draw_channel(rng);
            const auto plan = AllocationPlan::identity();
            const auto rx = from_time(apply(to_time(assemble_block(map_16qam(bits), plan)), ch, NoiseSpec{snr}, rng));
            const auto got = equalize_demap(rx, estimate_ls(rx.row(0), pilot_sequence()), plan).bits;
            for (std::size_t j = 0; j < bits.size(); ++j) errs += got[j] != bits[j];
            total += bits.size();
        }
        return static_cast<double>(errs) / static_cast<double>(total);
    };
    const double hi = ber(25), lo = ber(5);
    EXPECT_LT(hi, lo);
    EXPECT_GT(lo, 0.05);
}
