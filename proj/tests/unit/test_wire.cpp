#include <gtest/gtest.h>

#include "semlink/conformance.hpp"
#include "semlink/wire.hpp"
#include "test_support.hpp"

using namespace semlink;

namespace {

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

} // namespace

TEST(Base64, Rfc4648Vectors) {
    const std::pair<const char*, const char*> vectors[] = {
        {"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},        {"foo", "Zm9v"},
        {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"},
    };
    for (const auto& [plain, coded] : vectors) {
        EXPECT_EQ(wire::base64_encode(bytes(plain)), coded);
        EXPECT_EQ(wire::base64_decode(coded), bytes(plain));
    }
}

TEST(Base64, RejectsGarbage) {
    for (const char* bad : {"Zg=", "Z===", "Zm9v!A==", "Zg==Zg=="}) {
        try {
            wire::base64_decode(bad);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::protocol_error) << bad;
        }
    }
}

TEST(PackBits, MsbFirstZeroPadded) {
    const Bits bits = {1, 0, 1, 1, 0, 0, 0, 0, 1, 1};
    const auto packed = wire::pack_bits(bits);
    EXPECT_EQ(packed, (std::vector<std::uint8_t>{0xB0, 0xC0}));
    EXPECT_EQ(wire::unpack_bits(packed, bits.size()), bits);
    EXPECT_THROW(wire::unpack_bits(packed, 17), Error);
}

TEST(FrameJson, MatchesGoldenEncodings) {
    // golden bits come from an independent packer (tools/golden)
    const auto golden = load_golden(testsupport::data_path("conformance/golden.json"));
    const auto vocab = Vocabulary::load(testsupport::data_path("conformance/vocab.tsv"));
    int checked = 0;
    for (const auto& c : golden.at("cases")) {
        if (c.at("route") != "/v1/encode" || c.at("status") != 200) continue;
        Sentence s{c.at("request").at("sentence").get<std::vector<std::string>>()};
        EXPECT_EQ(wire::frame_to_json(encode(s, vocab)), c.at("response")) << c.at("name");
        EXPECT_EQ(wire::frame_from_json(c.at("response")), encode(s, vocab));
        ++checked;
    }
    EXPECT_GE(checked, 4);
}

TEST(FrameJson, MalformedIsProtocolError) {
    const nlohmann::json cases[] = {
        {{"bits", "AAA="}, {"width", 16}},
        {{"bits", "AAAAAAAA"}, {"width", 16}, {"length", 4}},
        {{"bits", "AAAAAAAAAAA="}, {"width", 40}, {"length", 4}},
        {{"bits", 7}, {"width", 16}, {"length", 4}},
    };
    for (const auto& j : cases) {
        try {
            wire::frame_from_json(j);
            ADD_FAILURE() << j.dump();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::protocol_error) << j.dump();
        }
    }
}

TEST(SentenceJson, RoundTrip) {
    const std::vector<std::string> t = {"the", "debate", "is", "closed"};
    EXPECT_EQ(wire::sentence_from_json(wire::sentence_to_json(t)), t);
    EXPECT_THROW(wire::sentence_from_json(nlohmann::json{{"words", t}}), Error);
}
