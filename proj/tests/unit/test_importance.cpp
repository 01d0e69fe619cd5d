#include <gtest/gtest.h>

#include <map>

#include "semlink/importance.hpp"
#include "test_support.hpp"

using namespace semlink;
using testsupport::words;

namespace {

/// Knows every training sentence and always restores it.
class PerfectOracle final : public ReconOracle {
public:
    explicit PerfectOracle(const std::vector<Sentence>& train) {
        for (const auto& s : train) by_id_[s.source_id] = s;
    }
    ReconResponse repair(const ReconRequest& req) override {
        ReconResponse r;
        r.sentence = by_id_.at(req.sentence.source_id);
        r.oracle_id = id();
        return r;
    }
    std::string id() const override { return "perfect"; }

private:
    std::map<std::size_t, Sentence> by_id_;
};

std::vector<Sentence> small_train() {
    std::vector<Sentence> out;
    std::size_t id = 0;
    for (const auto* s : {"first and foremost there is a message for the council of ministers",
                          "there is a message for the commission", "the council of ministers must act now",
                          "the commission must act now", "we thank the rapporteur for her excellent report",
                          "the debate is closed"})
        out.push_back(words(s, id++));
    return out;
}

FeatureFrame frame_of(std::vector<std::uint32_t> f, unsigned width = 16) {
    FeatureFrame fr;
    fr.width = width;
    fr.features = std::move(f);
    return fr;
}

std::vector<double> ramp_gains() {
    // slot s has gain s, except a few deliberate ties
    std::vector<double> g(kDataSlots);
    for (std::size_t s = 0; s < kDataSlots; ++s) g[s] = static_cast<double>(s % 100);
    return g;
}

// sort-and-zip reading of the allocation rule
std::vector<std::uint16_t> oracle_plan(const std::vector<double>& scores, const std::vector<double>& gains,
                                       std::size_t spf) {
    std::vector<std::pair<double, std::size_t>> feats, slots;
    for (std::size_t i = 0; i < scores.size(); ++i) feats.push_back({-scores[i], i});
    for (std::size_t s = 0; s < gains.size(); ++s) slots.push_back({-gains[s], s});
    std::sort(feats.begin(), feats.end());
    std::sort(slots.begin(), slots.end());
    std::vector<std::uint16_t> slot_of(kDataSlots);
    for (std::size_t r = 0; r < feats.size(); ++r)
        for (std::size_t j = 0; j < spf; ++j)
            slot_of[feats[r].second * spf + j] = static_cast<std::uint16_t>(slots[r * spf + j].second);
    for (std::size_t i = feats.size() * spf; i < kDataSlots; ++i)
        slot_of[i] = static_cast<std::uint16_t>(slots[i].second);
    return slot_of;
}

std::vector<TrainingExample> separable_data(std::size_t n, std::uint64_t seed) {
    // label = 1 iff the word at the position has an even index
    Rng rng(seed);
    std::vector<TrainingExample> out;
    for (std::size_t i = 0; i < n; ++i) {
        TrainingExample ex;
        ex.ids.resize(5 + uniform_index(rng, 6));
        for (auto& v : ex.ids) v = static_cast<std::uint32_t>(2 + uniform_index(rng, 20));
        ex.position = uniform_index(rng, ex.ids.size());
        ex.label = ex.ids[ex.position] % 2 == 0 ? 1 : 0;
        out.push_back(std::move(ex));
    }
    return out;
}

} // namespace

TEST(Disrupt, TouchesOnlyTheChosenFeature) {
    Rng rng(1);
    const auto f = frame_of({10, 20, 30, 40});
    for (int t = 0; t < 200; ++t) {
        const auto idx = uniform_index(rng, 4);
        const auto d = disrupt(f, idx, rng);
        ASSERT_EQ(d.length(), 4u);
        EXPECT_EQ(d.width, 16u);
        for (std::size_t i = 0; i < 4; ++i)
            if (i != idx) {
                EXPECT_EQ(d.features[i], f.features[i]);
            }
        EXPECT_LT(d.features[idx], 1u << 16);
    }
}

TEST(Disrupt, DeterministicAndInRange) {
    const auto f = frame_of({1, 2, 3});
    Rng a(5), b(5);
    EXPECT_EQ(disrupt(f, 1, a).features, disrupt(f, 1, b).features);
    try {
        disrupt(f, 3, a);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::index_out_of_range);
    }
}

TEST(Disrupt, UniformOverWidth) {
    // with 4-bit features the replacement equals the original 1/16 of the time
    Rng rng(9);
    const auto f = frame_of({7}, 4);
    const int n = 100000;
    int same = 0;
    for (int t = 0; t < n; ++t) same += disrupt(f, 0, rng).features[0] == 7;
    EXPECT_NEAR(same / static_cast<double>(n), 1.0 / 16.0, 0.005);
}

TEST(Labeling, PerfectOracleLabelsEverythingUnimportant) {
    const auto train = small_train();
    const auto vocab = build_vocab(train, 100);
    PerfectOracle oracle(train);
    const auto res = label_corpus(train, vocab, oracle, {1, 3, 1});
    EXPECT_EQ(res.records.size(), 3 * train.size());
    EXPECT_TRUE(res.failures.empty());
    for (const auto& r : res.records) EXPECT_EQ(r.label, 0);
}

TEST(Labeling, IdentityOracleLabelsChangedWords) {
    const auto train = small_train();
    const auto vocab = build_vocab(train, 100);
    IdentityOracle oracle;
    const auto res = label_corpus(train, vocab, oracle, {2, 20, 1});
    ASSERT_EQ(res.records.size(), 20 * train.size());
    for (const auto& r : res.records) {
        const auto& s = train[r.sentence_id];
        ASSERT_LT(r.feature_index, s.size());
        EXPECT_EQ(r.label, r.oracle_output.tokens[r.feature_index] != s.tokens[r.feature_index] ? 1 : 0);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (i != r.feature_index) {
                EXPECT_EQ(r.oracle_output.tokens[i], s.tokens[i]);
            }
    }
}

TEST(Labeling, UniquelyRestoredWordIsUnimportant) {
    // "and ? there" has a single bridge in this corpus, so feature 2 of sentence 0 always comes back
    const auto train = small_train();
    const auto vocab = build_vocab(train, 100);
    BigramMockOracle oracle(train);
    const auto res = label_corpus(train, vocab, oracle, {3, 200, 1});
    std::size_t seen = 0;
    for (const auto& r : res.records)
        if (r.sentence_id == 0 && r.feature_index == 2) {
            ++seen;
            EXPECT_EQ(r.label, 0);
        }
    EXPECT_GT(seen, 0u);
}

TEST(Labeling, WorkerCountDoesNotMatter) {
    const auto train = small_train();
    const auto vocab = build_vocab(train, 100);
    BigramMockOracle oracle(train);
    const auto a = label_corpus(train, vocab, oracle, {4, 5, 1});
    const auto b = label_corpus(train, vocab, oracle, {4, 5, 3});
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].feature_index, b.records[i].feature_index);
        EXPECT_EQ(a.records[i].label, b.records[i].label);
    }
}

TEST(Labels, SaveLoadRoundTrip) {
    testsupport::TempDir dir;
    std::vector<ImportanceRecord> recs = {{3, 1, 0, {}}, {7, 4, 1, {}}};
    save_labels(dir.file("labels.tsv"), recs);
    const auto back = load_labels(dir.file("labels.tsv"));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].sentence_id, 7u);
    EXPECT_EQ(back[1].feature_index, 4u);
    EXPECT_EQ(back[1].label, 1);
    try {
        load_labels(dir.file("nope.tsv"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::missing_artifact);
    }
}

TEST(Classifier, GradientMatchesFiniteDifferences) {
    TrainConfig cfg;
    cfg.embed = 3;
    cfg.hidden = 4;
    auto m = init_classifier(12, cfg, 0.3);
    Rng rng(17);
    Gaussian g;
    for (auto& p : m.params) p += 0.3 * g(rng);
    auto data = separable_data(6, 3);
    for (auto& ex : data)
        for (auto& v : ex.ids) v %= 12;

    std::vector<double> grad, scratch;
    loss_and_grad(m, data, grad);
    double worst = 0;
    const double h = 1e-6;
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        const double keep = m.params[i];
        m.params[i] = keep + h;
        const double up = loss_and_grad(m, data, scratch);
        m.params[i] = keep - h;
        const double down = loss_and_grad(m, data, scratch);
        m.params[i] = keep;
        const double fd = (up - down) / (2 * h);
        const double scale = std::max(std::abs(fd) + std::abs(grad[i]), 1e-6);
        worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(Classifier, LearnsSeparableRule) {
    const auto train = separable_data(4000, 1);
    const auto held = separable_data(1000, 2);
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.lr = 1e-2;
    const auto res = train_classifier(train, 24, cfg);
    EXPECT_GE(accuracy(res.model, held), 0.95);
    EXPECT_EQ(res.epoch_loss.size(), 15u);
    EXPECT_LT(res.epoch_loss.back(), res.epoch_loss.front());
}

TEST(Classifier, DegenerateLabels) {
    auto data = separable_data(50, 1);
    for (auto& ex : data) ex.label = 0;
    try {
        train_classifier(data, 24, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::degenerate_labels);
    }
}

TEST(Classifier, DeterministicTraining) {
    const auto data = separable_data(300, 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    EXPECT_EQ(train_classifier(data, 24, cfg).model.params, train_classifier(data, 24, cfg).model.params);
}

TEST(Classifier, ScoresAreProbabilitiesAndLocal) {
    TrainConfig cfg;
    auto m = init_classifier(50, cfg, 0.4);
    const auto f = frame_of({2, 3, 4, 5, 6, 7, 8, 9});
    const auto s = score_frame(m, f);
    ASSERT_EQ(s.size(), 8u);
    for (double v : s) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    // the window is +-2 words: changing word 0 leaves feature 5 alone
    auto f2 = f;
    f2.features[0] = 40;
    const auto s2 = score_frame(m, f2);
    EXPECT_EQ(s2[5], s[5]);
    EXPECT_NE(s2[1], s[1]);
    // indices beyond the model vocabulary read as unk
    auto f3 = f;
    f3.features[3] = 60000;
    auto f4 = f;
    f4.features[3] = Vocabulary::kUnk;
    EXPECT_EQ(score_frame(m, f3), score_frame(m, f4));
}

TEST(Classifier, SaveLoadRoundTrip) {
    testsupport::TempDir dir;
    auto m = init_classifier(30, {}, 0.5);
    save_classifier(dir.file("c.bin"), m);
    const auto back = load_classifier(dir.file("c.bin"));
    EXPECT_EQ(back.vocab, 30u);
    EXPECT_EQ(back.params, m.params);
    try {
        load_classifier(dir.file("missing.bin"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::missing_artifact);
    }
    std::ofstream(dir.file("junk.bin")) << "not a model";
    try {
        load_classifier(dir.file("junk.bin"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::io_error);
    }
}

TEST(Allocation, BestFeatureGetsBestSlots) {
    std::vector<double> gains(kDataSlots, 1.0);
    for (std::size_t s = 0; s < 8; ++s) gains[100 + s] = 10.0 - static_cast<double>(s);
    const auto plan = make_plan(std::vector<double>{0.1, 0.9, 0.5}, gains, 3, 4);
    ASSERT_TRUE(plan.valid());
    EXPECT_EQ(plan.feature_ranking, (std::vector<std::size_t>{1, 2, 0}));
    // feature 1 occupies symbols 4..7
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(plan.slot_of[4 + j], 100 + j);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(plan.slot_of[8 + j], 104 + j);
    // remaining gains tie at 1.0, so feature 0 takes the lowest free slots
    EXPECT_EQ(plan.slot_of[0], 0u);
    EXPECT_EQ(plan.slot_of[3], 3u);
}

TEST(Allocation, MatchesSortAndZipOracle) {
    Rng rng(21);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 4 + uniform_index(rng, 27);
        std::vector<double> scores(n), gains(kDataSlots);
        // coarse values force ties on both sides
        for (auto& v : scores) v = static_cast<double>(uniform_index(rng, 5)) / 5.0;
        for (auto& v : gains) v = static_cast<double>(uniform_index(rng, 40));
        EXPECT_EQ(make_plan(scores, gains, n, 4).slot_of, oracle_plan(scores, gains, 4));
    }
}

TEST(Allocation, ScaleInvariant) {
    const auto gains = ramp_gains();
    auto scaled = gains;
    for (auto& g : scaled) g *= 3.7;
    const std::vector<double> scores = {0.2, 0.7, 0.4, 0.9, 0.1};
    EXPECT_EQ(make_plan(scores, gains, 5).slot_of, make_plan(scores, scaled, 5).slot_of);
}

TEST(Allocation, CapacityExceeded) {
    try {
        make_plan(std::vector<double>(113, 0.5), ramp_gains(), 113, 4);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::capacity_exceeded);
    }
}

TEST(Allocation, SlotGainsRepeatPerRow) {
    std::vector<double> sc(kSubcarriers);
    for (std::size_t k = 0; k < kSubcarriers; ++k) sc[k] = static_cast<double>(k);
    const auto g = slot_gains(sc);
    ASSERT_EQ(g.size(), kDataSlots);
    for (std::size_t s = 0; s < kDataSlots; ++s) EXPECT_EQ(g[s], static_cast<double>(s % kSubcarriers));
}

TEST(Allocation, RandomPlanIsPermutation) {
    Rng rng(2);
    const auto p = random_plan(rng);
    EXPECT_TRUE(p.valid());
    EXPECT_FALSE(p == AllocationPlan::identity());
}
