#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semlink/channel.hpp"
#include "semlink/codec.hpp"
#include "semlink/codec_client.hpp"
#include "semlink/dataset.hpp"
#include "semlink/importance.hpp"
#include "semlink/metrics.hpp"
#include "semlink/ofdm.hpp"
#include "semlink/oracle.hpp"
#include "semlink/parallel.hpp"

namespace semlink {

/// When the receiver asks the oracle for help.
enum class Gate {
    reference,  // evaluation: hypothesis differs from the reference
    heuristic,  // deployment: any "unk" or any bigram unseen in training
};

/// Where the transmitter's per-subcarrier gains come from.
enum class CsiMode {
    genie,      // true |H[k]|^2
    estimated,  // LS estimate from a separate noisy pilot exchange
};

enum class AllocationMode {
    importance,  // classifier scores + gain sorting
    random,      // uniformly random permutation (ablation)
};

struct PromptContext {
    std::string summary;
    std::vector<ExamplePair> examples;
};

/// Summary of the training split plus k (corrupted, correct) pairs made by
/// disrupting one feature of randomly chosen training sentences.
inline PromptContext build_prompt_context(const std::vector<Sentence>& train, const Vocabulary& vocab,
                                          std::size_t k_examples, std::size_t summary_words, std::uint64_t seed,
                                          unsigned width = kDefaultFeatureWidth) {
    require(!train.empty(), Errc::precondition, "prompt context needs training sentences");
    PromptContext ctx;
    ctx.summary = summarize(train, summary_words);
    Rng rng(derive_seed(seed, 0x9E3779B9));
    for (std::size_t k = 0; k < k_examples; ++k) {
        const auto& s = train[uniform_index(rng, train.size())];
        const auto frame = encode(s, vocab, width);
        const auto idx = static_cast<std::size_t>(uniform_index(rng, frame.length()));
        ctx.examples.push_back({decode(disrupt(frame, idx, rng), vocab).tokens, s.tokens});
    }
    return ctx;
}

struct SimulationOptions {
    std::uint64_t seed = 1;
    ChannelConfig channel;
    Gate gate = Gate::reference;
    CsiMode csi = CsiMode::genie;
    AllocationMode allocation = AllocationMode::importance;
    std::size_t workers = 1;
    unsigned width = kDefaultFeatureWidth;
};

struct CellResult {
    EvalRow row;
    std::vector<SentenceResult> sentences;
    std::vector<Sentence> hypotheses;
    std::size_t oracle_calls = 0;
    std::size_t channel_errors = 0;  // sentences wrong before any repair
};

/// Runs the full transmit/receive chain for one (method, SNR) cell. Every
/// sentence draws its channel and noise from seed = derive(run seed, source
/// id), so methods and SNR points see paired realizations.
class Simulator {
public:
    Simulator(const Vocabulary& vocab, const std::vector<Sentence>& train, SimulationOptions opts)
        : vocab_(vocab), bigrams_(train), opts_(opts) {}

    void set_oracle(ReconOracle* oracle) { oracle_ = oracle; }
    void set_classifier(const ClassifierModel* model) { classifier_ = model; }
    void set_prompt_context(PromptContext ctx) { prompt_ = std::move(ctx); }
    /// Route encode/decode through an external codec service.
    void set_external_codec(CodecClient* client) { codec_client_ = client; }

    const SimulationOptions& options() const noexcept { return opts_; }
    SimulationOptions& options() noexcept { return opts_; }

    CellResult run(Method method, double snr_db, std::span<const Sentence> test) const {
        require(!test.empty(), Errc::precondition, "no test sentences");
        if (method != Method::sc)
            require(oracle_ != nullptr, Errc::oracle_unavailable,
                    "method " + std::string(to_string(method)) + " needs a reconstruction oracle");
        if (method == Method::sc_gpt_adaptive && opts_.allocation == AllocationMode::importance)
            require(classifier_ != nullptr, Errc::missing_artifact, "classifier (needed by sc_gpt_adaptive)");
        if (method == Method::sc_gpt_prompt)
            require(prompt_.has_value(), Errc::missing_artifact, "prompt context (needed by sc_gpt_prompt)");

        CellResult out;
        out.sentences.resize(test.size());
        out.hypotheses.resize(test.size());
        std::vector<std::uint8_t> called(test.size(), 0), damaged(test.size(), 0);
        // the external codec client is not reentrant across sessions; keep it single-threaded
        const std::size_t workers = codec_client_ ? 1 : opts_.workers;
        parallel_for(test.size(), workers, [&](std::size_t k) {
            auto r = transmit(method, snr_db, test[k]);
            out.sentences[k] = {snr_db, method, opts_.seed, sentence_error(test[k], r.hypothesis),
                                bleu(test[k], r.hypothesis)};
            out.hypotheses[k] = std::move(r.hypothesis);
            called[k] = r.oracle_called;
            damaged[k] = r.channel_error;
        });
        for (std::size_t k = 0; k < test.size(); ++k) {
            out.oracle_calls += called[k];
            out.channel_errors += damaged[k];
        }
        out.row = aggregate(out.sentences);
        return out;
    }

    /// Whether the receiver would consult the oracle for this hypothesis.
    bool suspect(const Sentence& reference, const Sentence& hyp) const {
        if (opts_.gate == Gate::reference) return hyp.tokens != reference.tokens;
        for (const auto& t : hyp.tokens)
            if (t == Vocabulary::kUnkToken) return true;
        return !bigrams_.all_attested(hyp.tokens);
    }

private:
    struct Outcome {
        Sentence hypothesis;
        bool oracle_called = false;
        bool channel_error = false;
    };

    FeatureFrame encode_sentence(const Sentence& s) const {
        return codec_client_ ? codec_client_->encode(s) : encode(s, vocab_, opts_.width);
    }

    Sentence decode_frame(const FeatureFrame& f, std::size_t id) const {
        return codec_client_ ? codec_client_->decode(f, id) : decode(f, vocab_, id);
    }

    AllocationPlan plan_for(Method method, const FeatureFrame& frame, const ChannelRealization& ch,
                            std::uint64_t sentence_seed, double snr_db) const {
        if (method != Method::sc_gpt_adaptive) return AllocationPlan::identity();
        if (opts_.allocation == AllocationMode::random) {
            Rng plan_rng(derive_seed(sentence_seed, 0xA110C));
            return random_plan(plan_rng);
        }
        std::vector<double> gains;
        if (opts_.csi == CsiMode::genie) {
            gains = subcarrier_gains(ch.freq_response);
        } else {
            // separate pilot-only exchange; its noise stream must not disturb the data block's
            Rng csi_rng(derive_seed(sentence_seed, 0xC51));
            OfdmBlock pilot_block;
            for (std::size_t k = 0; k < kSubcarriers; ++k) pilot_block.at(0, k) = pilot_sequence()[k];
            const auto rx = from_time(apply(to_time(pilot_block), ch, NoiseSpec{snr_db}, csi_rng));
            gains = estimate_ls(rx.row(0), pilot_sequence()).quality;
        }
        const std::size_t spf = frame.width / kBitsPerSymbol;
        return make_plan(score_frame(*classifier_, frame), slot_gains(gains), frame.length(), spf);
    }

    Outcome transmit(Method method, double snr_db, const Sentence& s) const {
        const std::uint64_t sentence_seed = derive_seed(opts_.seed, s.source_id);
        Rng rng(sentence_seed);

        const auto frame = encode_sentence(s);
        require(frame.width % kBitsPerSymbol == 0, Errc::precondition, "feature width must be a multiple of 4");
        const auto bits = frame_to_bits(frame);
        const auto symbols = map_16qam(bits);
        const auto ch = draw_channel(rng, opts_.channel, s.source_id);
        const auto plan = plan_for(method, frame, ch, sentence_seed, snr_db);

        const auto tx = to_time(assemble_block(symbols, plan));
        const auto rx = from_time(apply(tx, ch, NoiseSpec{snr_db}, rng));
        const auto est = estimate_ls(rx.row(0), pilot_sequence());
        auto eq = equalize_demap(rx, est, plan);
        eq.bits.resize(bits.size());
        Outcome out;
        out.hypothesis = decode_frame(bits_to_frame(eq.bits, frame.length(), frame.width), s.source_id);
        out.channel_error = out.hypothesis.tokens != s.tokens;

        if (method != Method::sc && suspect(s, out.hypothesis)) {
            ReconRequest req;
            req.sentence = out.hypothesis;
            if (method == Method::sc_gpt_prompt) {
                req.strategy = Strategy::prompted;
                req.summary = prompt_->summary;
                req.examples = prompt_->examples;
            } else {
                req.strategy = method == Method::sc_gpt_adaptive ? Strategy::adaptive : Strategy::plain;
            }
            out.hypothesis = oracle_->repair(req).sentence;
            out.hypothesis.source_id = s.source_id;
            out.oracle_called = true;
        }
        return out;
    }

    const Vocabulary& vocab_;
    BigramTable bigrams_;
    SimulationOptions opts_;
    ReconOracle* oracle_ = nullptr;
    const ClassifierModel* classifier_ = nullptr;
    std::optional<PromptContext> prompt_;
    CodecClient* codec_client_ = nullptr;
};

} // namespace semlink
