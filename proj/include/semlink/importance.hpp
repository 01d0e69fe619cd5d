#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semlink/codec.hpp"
#include "semlink/dataset.hpp"
#include "semlink/error.hpp"
#include "semlink/ofdm.hpp"
#include "semlink/oracle.hpp"
#include "semlink/parallel.hpp"
#include "semlink/rng.hpp"

namespace semlink {

// ---------------------------------------------------------------------------
// Perturb-and-repair labeling
// ---------------------------------------------------------------------------

/// Replace feature `index` with uniformly random bits of the frame width.
inline FeatureFrame disrupt(const FeatureFrame& frame, std::size_t index, Rng& rng) {
    require(index < frame.length(), Errc::index_out_of_range,
            "feature " + std::to_string(index) + " of a " + std::to_string(frame.length()) + "-feature frame");
    FeatureFrame out = frame;
    out.features[index] = static_cast<std::uint32_t>(uniform_index(rng, std::uint64_t{1} << frame.width));
    return out;
}

/// label 0: the oracle restored the sentence (unimportant feature);
/// label 1: it did not (important feature).
struct ImportanceRecord {
    std::size_t sentence_id = 0;
    std::size_t feature_index = 0;
    int label = 0;
    Sentence oracle_output;
};

struct LabelConfig {
    std::uint64_t seed = 1;
    std::size_t passes = 1;
    std::size_t workers = 1;
    unsigned width = kDefaultFeatureWidth;
};

struct LabelFailure {
    std::size_t sentence_id = 0;
    std::size_t pass = 0;
    std::string what;
};

struct LabelingResult {
    std::vector<ImportanceRecord> records;
    std::vector<LabelFailure> failures;
};

/// One randomly chosen feature per sentence per pass is disrupted, decoded and
/// handed to the oracle. Oracle failures are collected, not dropped silently.
inline LabelingResult label_corpus(const std::vector<Sentence>& train, const Vocabulary& vocab, ReconOracle& oracle,
                                   const LabelConfig& cfg) {
    const std::size_t n = train.size() * cfg.passes;
    struct Slot {
        std::optional<ImportanceRecord> record;
        std::optional<LabelFailure> failure;
    };
    std::vector<Slot> slots(n);
    parallel_for(n, cfg.workers, [&](std::size_t job) {
        const std::size_t pass = job / train.size();
        const Sentence& s = train[job % train.size()];
        Rng rng(derive_seed(cfg.seed, s.source_id, pass));
        const auto frame = encode(s, vocab, cfg.width);
        const auto index = static_cast<std::size_t>(uniform_index(rng, frame.length()));
        const auto received = decode(disrupt(frame, index, rng), vocab, s.source_id);
        try {
            auto res = oracle.repair(ReconRequest{received, Strategy::plain, std::nullopt, {}});
            const int label = res.sentence.tokens == s.tokens ? 0 : 1;
            slots[job].record = ImportanceRecord{s.source_id, index, label, std::move(res.sentence)};
        } catch (const Error& e) {
            slots[job].failure = LabelFailure{s.source_id, pass, e.what()};
        }
    });
    LabelingResult out;
    for (auto& slot : slots) {
        if (slot.record) out.records.push_back(std::move(*slot.record));
        if (slot.failure) out.failures.push_back(std::move(*slot.failure));
    }
    return out;
}

inline void save_labels(const std::string& path, const std::vector<ImportanceRecord>& records) {
    std::ofstream out(path);
    require(static_cast<bool>(out), Errc::io_error, "cannot write " + path);
    out << "sentence_id\tfeature_index\tlabel\n";
    for (const auto& r : records) out << r.sentence_id << '\t' << r.feature_index << '\t' << r.label << '\n';
}

inline std::vector<ImportanceRecord> load_labels(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::missing_artifact, "labels file " + path);
    std::string line;
    std::getline(in, line);
    require(line == "sentence_id\tfeature_index\tlabel", Errc::io_error, path + ": unexpected header");
    std::vector<ImportanceRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ImportanceRecord r;
        char* end = nullptr;
        r.sentence_id = std::strtoull(line.c_str(), &end, 10);
        r.feature_index = std::strtoull(end, &end, 10);
        r.label = static_cast<int>(std::strtol(end, &end, 10));
        require(r.label == 0 || r.label == 1, Errc::io_error, path + ": bad label in '" + line + "'");
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Importance classifier
//
// For feature i the model looks at the word indices at offsets -2..+2 (PAD
// outside the sentence):
//
//   a     = tanh(c + sum_o W_o emb[x_{i+o}])      W_o: H x E
//   score = sigmoid(b + v . a)
//
// Trained with binary cross-entropy and Adam.
// ---------------------------------------------------------------------------

struct ClassifierModel {
    static constexpr std::size_t kWindow = 2;
    static constexpr std::size_t kTaps = 2 * kWindow + 1;

    std::size_t vocab = 0;
    std::size_t embed = 16;
    std::size_t hidden = 16;
    std::vector<double> params;

    static ClassifierModel make(std::size_t vocab, std::size_t embed = 16, std::size_t hidden = 16) {
        ClassifierModel m;
        m.vocab = vocab;
        m.embed = embed;
        m.hidden = hidden;
        m.params.assign(m.param_count(), 0.0);
        return m;
    }

    std::size_t emb_offset() const { return 0; }
    std::size_t w_offset() const { return vocab * embed; }
    std::size_t c_offset() const { return w_offset() + kTaps * hidden * embed; }
    std::size_t v_offset() const { return c_offset() + hidden; }
    std::size_t b_offset() const { return v_offset() + hidden; }
    std::size_t param_count() const { return b_offset() + 1; }

    double& emb(std::size_t word, std::size_t e) { return params[emb_offset() + word * embed + e]; }
    double emb(std::size_t word, std::size_t e) const { return params[emb_offset() + word * embed + e]; }
    double& w(std::size_t o, std::size_t h, std::size_t e) { return params[w_offset() + (o * hidden + h) * embed + e]; }
    double w(std::size_t o, std::size_t h, std::size_t e) const {
        return params[w_offset() + (o * hidden + h) * embed + e];
    }

    std::uint32_t clamp_word(std::uint64_t idx) const {
        return idx < vocab ? static_cast<std::uint32_t>(idx) : Vocabulary::kUnk;
    }

    std::array<std::uint32_t, kTaps> context(std::span<const std::uint32_t> ids, std::size_t pos) const {
        std::array<std::uint32_t, kTaps> ctx{};
        for (std::size_t o = 0; o < kTaps; ++o) {
            const auto j = static_cast<std::ptrdiff_t>(pos + o) - static_cast<std::ptrdiff_t>(kWindow);
            ctx[o] = (j < 0 || j >= static_cast<std::ptrdiff_t>(ids.size())) ? Vocabulary::kPad
                                                                            : clamp_word(ids[static_cast<std::size_t>(j)]);
        }
        return ctx;
    }

    /// Returns the logit; fills the hidden activations when asked.
    double logit(std::span<const std::uint32_t> ids, std::size_t pos, std::vector<double>* act = nullptr) const {
        const auto ctx = context(ids, pos);
        std::vector<double> a(hidden);
        for (std::size_t h = 0; h < hidden; ++h) {
            double pre = params[c_offset() + h];
            for (std::size_t o = 0; o < kTaps; ++o)
                for (std::size_t e = 0; e < embed; ++e) pre += w(o, h, e) * emb(ctx[o], e);
            a[h] = std::tanh(pre);
        }
        double z = params[b_offset()];
        for (std::size_t h = 0; h < hidden; ++h) z += params[v_offset() + h] * a[h];
        if (act) *act = std::move(a);
        return z;
    }
};

inline double sigmoid(double z) {
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// A sentence (as word indices) with one labelled position.
struct TrainingExample {
    std::vector<std::uint32_t> ids;
    std::size_t position = 0;
    int label = 0;
};

inline std::vector<TrainingExample> make_examples(const std::vector<ImportanceRecord>& records,
                                                  const std::vector<Sentence>& sentences, const Vocabulary& vocab) {
    std::unordered_map<std::size_t, const Sentence*> by_id;
    for (const auto& s : sentences) by_id.emplace(s.source_id, &s);
    std::vector<TrainingExample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        auto it = by_id.find(r.sentence_id);
        require(it != by_id.end(), Errc::precondition,
                "label references sentence " + std::to_string(r.sentence_id) + " outside the training split");
        TrainingExample ex;
        for (const auto& t : it->second->tokens) ex.ids.push_back(vocab.index(t));
        require(r.feature_index < ex.ids.size(), Errc::index_out_of_range, "label feature index beyond sentence");
        ex.position = r.feature_index;
        ex.label = r.label;
        out.push_back(std::move(ex));
    }
    return out;
}

/// Mean binary cross-entropy over the batch and its gradient w.r.t. params.
inline double loss_and_grad(const ClassifierModel& m, std::span<const TrainingExample> batch, std::vector<double>& grad) {
    grad.assign(m.param_count(), 0.0);
    if (batch.empty()) return 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<double> a;
    std::vector<double> dpre(m.hidden);
    for (const auto& ex : batch) {
        const double z = m.logit(ex.ids, ex.position, &a);
        const double y = ex.label;
        // softplus(z) - y z, written to avoid overflow
        loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y * z;
        const double dz = (sigmoid(z) - y) * inv_n;
        grad[m.b_offset()] += dz;
        for (std::size_t h = 0; h < m.hidden; ++h) {
            grad[m.v_offset() + h] += dz * a[h];
            dpre[h] = dz * m.params[m.v_offset() + h] * (1.0 - a[h] * a[h]);
            grad[m.c_offset() + h] += dpre[h];
        }
        const auto ctx = m.context(ex.ids, ex.position);
        for (std::size_t o = 0; o < ClassifierModel::kTaps; ++o) {
            for (std::size_t h = 0; h < m.hidden; ++h) {
                const double d = dpre[h];
                const std::size_t wbase = m.w_offset() + (o * m.hidden + h) * m.embed;
                const std::size_t ebase = m.emb_offset() + ctx[o] * m.embed;
                for (std::size_t e = 0; e < m.embed; ++e) {
                    grad[wbase + e] += d * m.params[ebase + e];
                    grad[ebase + e] += d * m.params[wbase + e];
                }
            }
        }
    }
    return loss * inv_n;
}

struct TrainConfig {
    std::size_t epochs = 20;
    double lr = 1e-4;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
    std::size_t embed = 16;
    std::size_t hidden = 16;
};

struct TrainResult {
    ClassifierModel model;
    std::vector<double> epoch_loss;  // mean training loss over each epoch
};

inline ClassifierModel init_classifier(std::size_t vocab, const TrainConfig& cfg, double positive_rate) {
    auto m = ClassifierModel::make(vocab, cfg.embed, cfg.hidden);
    Rng rng(derive_seed(cfg.seed, 0x1417));
    Gaussian g;
    for (std::size_t i = 0; i < m.vocab * m.embed; ++i) m.params[m.emb_offset() + i] = 0.1 * g(rng);
    // unit-variance pre-activations given 0.1-scale embeddings
    const double w_scale = 1.0 / (0.1 * std::sqrt(static_cast<double>(ClassifierModel::kTaps * m.embed)));
    for (std::size_t i = m.w_offset(); i < m.c_offset(); ++i) m.params[i] = w_scale * g(rng);
    const double v_scale = 1.0 / std::sqrt(static_cast<double>(m.hidden));
    for (std::size_t h = 0; h < m.hidden; ++h) m.params[m.v_offset() + h] = v_scale * g(rng);
    // start at the prior log-odds
    const double p = std::clamp(positive_rate, 1e-3, 1.0 - 1e-3);
    m.params[m.b_offset()] = std::log(p / (1.0 - p));
    return m;
}

/// Mini-batch Adam on binary cross-entropy. Deterministic in (seed, data, cfg).
inline TrainResult train_classifier(const std::vector<TrainingExample>& data, std::size_t vocab,
                                    const TrainConfig& cfg) {
    std::size_t positives = 0;
    for (const auto& ex : data) positives += ex.label == 1;
    require(positives > 0 && positives < data.size(), Errc::degenerate_labels,
            "training labels must contain both classes (" + std::to_string(positives) + " of " +
                std::to_string(data.size()) + " positive)");
    require(cfg.batch_size > 0, Errc::precondition, "batch size must be positive");

    TrainResult out;
    out.model = init_classifier(vocab, cfg, static_cast<double>(positives) / static_cast<double>(data.size()));
    auto& m = out.model;

    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    std::vector<double> m1(m.param_count(), 0.0), m2(m.param_count(), 0.0), grad;
    std::vector<TrainingExample> batch;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = shuffled_indices(data.size(), derive_seed(cfg.seed, epoch));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < data.size(); start += cfg.batch_size) {
            batch.clear();
            for (std::size_t k = start; k < std::min(start + cfg.batch_size, data.size()); ++k)
                batch.push_back(data[order[k]]);
            epoch_loss += loss_and_grad(m, batch, grad) * static_cast<double>(batch.size());
            ++step;
            const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            for (std::size_t i = 0; i < m.params.size(); ++i) {
                m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * grad[i];
                m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * grad[i] * grad[i];
                m.params[i] -= cfg.lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + kEps);
            }
        }
        out.epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
    }
    return out;
}

/// One score in (0, 1) per feature, in feature order.
inline std::vector<double> score_frame(const ClassifierModel& m, const FeatureFrame& frame) {
    std::vector<double> out;
    out.reserve(frame.length());
    for (std::size_t i = 0; i < frame.length(); ++i) out.push_back(sigmoid(m.logit(frame.features, i)));
    return out;
}

inline int predict(const ClassifierModel& m, const TrainingExample& ex) {
    return sigmoid(m.logit(ex.ids, ex.position)) >= 0.5 ? 1 : 0;
}

inline double accuracy(const ClassifierModel& m, std::span<const TrainingExample> data) {
    if (data.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& ex : data) hits += predict(m, ex) == ex.label;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace detail {
inline constexpr char kModelMagic[8] = {'S', 'E', 'M', 'L', 'C', 'L', 'S', 'F'};
inline constexpr std::uint32_t kModelVersion = 1;
} // namespace detail

// Weights are stored as raw host doubles.
static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

inline void save_classifier(const std::string& path, const ClassifierModel& m) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), Errc::io_error, "cannot write " + path);
    out.write(detail::kModelMagic, sizeof detail::kModelMagic);
    const std::uint32_t header[5] = {detail::kModelVersion, static_cast<std::uint32_t>(m.vocab),
                                     static_cast<std::uint32_t>(m.embed), static_cast<std::uint32_t>(m.hidden),
                                     static_cast<std::uint32_t>(ClassifierModel::kWindow)};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    const std::uint64_t n = m.params.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(m.params.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

inline ClassifierModel load_classifier(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), Errc::missing_artifact, "classifier file " + path);
    char magic[8];
    std::uint32_t header[5];
    std::uint64_t n = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(header), sizeof header);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    require(static_cast<bool>(in) && std::memcmp(magic, detail::kModelMagic, sizeof magic) == 0, Errc::io_error,
            path + " is not a classifier file");
    require(header[0] == detail::kModelVersion, Errc::io_error,
            path + ": unsupported model version " + std::to_string(header[0]));
    require(header[4] == ClassifierModel::kWindow, Errc::io_error, path + ": window mismatch");
    auto m = ClassifierModel::make(header[1], header[2], header[3]);
    require(n == m.param_count(), Errc::io_error, path + ": parameter count mismatch");
    in.read(reinterpret_cast<char*>(m.params.data()), static_cast<std::streamsize>(n * sizeof(double)));
    require(static_cast<bool>(in), Errc::io_error, path + ": truncated");
    return m;
}

// ---------------------------------------------------------------------------
// Importance-aware allocation
// ---------------------------------------------------------------------------

/// Per-subcarrier gains repeated for each of the 7 data rows, in slot order.
inline std::vector<double> slot_gains(std::span<const double> subcarrier_gain) {
    require(subcarrier_gain.size() == kSubcarriers, Errc::precondition, "need 64 subcarrier gains");
    std::vector<double> g(kDataSlots);
    for (std::size_t s = 0; s < kDataSlots; ++s) g[s] = subcarrier_gain[slot_subcarrier(s)];
    return g;
}

inline std::vector<double> subcarrier_gains(std::span<const cplx> h) {
    std::vector<double> g(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) g[k] = std::norm(h[k]);
    return g;
}

/// Features ranked by descending score (ties: lower index), slots by
/// descending gain (ties: lower slot). The i-th ranked feature takes the i-th
/// best group of `symbols_per_feature` slots; padding gets what is left, worst last.
inline AllocationPlan make_plan(std::span<const double> scores, std::span<const double> gains, std::size_t n_features,
                                std::size_t symbols_per_feature = kDefaultFeatureWidth / kBitsPerSymbol) {
    require(scores.size() == n_features, Errc::precondition, "one score per feature required");
    require(gains.size() == kDataSlots, Errc::precondition, "need one gain per data slot");
    for (double g : gains) require(std::isfinite(g), Errc::precondition, "gains must be finite");
    require(n_features * symbols_per_feature <= kDataSlots, Errc::capacity_exceeded,
            std::to_string(n_features) + " features need more than 448 data slots");

    AllocationPlan plan;
    plan.feature_ranking.resize(n_features);
    std::iota(plan.feature_ranking.begin(), plan.feature_ranking.end(), std::size_t{0});
    std::stable_sort(plan.feature_ranking.begin(), plan.feature_ranking.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    plan.slot_ranking.resize(kDataSlots);
    std::iota(plan.slot_ranking.begin(), plan.slot_ranking.end(), std::uint16_t{0});
    std::stable_sort(plan.slot_ranking.begin(), plan.slot_ranking.end(),
                     [&](std::uint16_t a, std::uint16_t b) { return gains[a] > gains[b]; });

    plan.slot_of.resize(kDataSlots);
    for (std::size_t r = 0; r < n_features; ++r) {
        const auto f = plan.feature_ranking[r];
        for (std::size_t j = 0; j < symbols_per_feature; ++j)
            plan.slot_of[f * symbols_per_feature + j] = plan.slot_ranking[r * symbols_per_feature + j];
    }
    for (std::size_t i = n_features * symbols_per_feature; i < kDataSlots; ++i) plan.slot_of[i] = plan.slot_ranking[i];
    return plan;
}

/// Uniformly random permutation; the allocation ablation baseline.
inline AllocationPlan random_plan(Rng& rng) {
    auto plan = AllocationPlan::identity();
    for (std::size_t i = kDataSlots; i > 1; --i) std::swap(plan.slot_of[i - 1], plan.slot_of[uniform_index(rng, i)]);
    return plan;
}

} // namespace semlink
