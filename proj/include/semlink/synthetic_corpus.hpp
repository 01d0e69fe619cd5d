#pragma once

// Template grammar producing parliamentary-debate style text. It mixes fixed
// phrases (which a bigram corrector can restore) with open slots drawn from
// Zipf-weighted word lists (which it cannot), and emits raw lines with case
// and punctuation so the normalizer has work to do. A few lines fall outside
// the 4..30 word window on purpose.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "semlink/rng.hpp"

namespace semlink::synthetic {

struct Grammar {
    std::vector<std::string> templates;
    std::map<std::string, std::vector<std::string>> slots;
};

inline const Grammar& parliament_grammar() {
    static const Grammar g = [] {
        Grammar g;
        g.templates = {
            "{OPEN}I would like to thank the {PERSON} for {POSS} {QUALITY} report on {TOPIC}.",
            "First and foremost, there is a message for the council of ministers.",
            "First and foremost, there is a message for the {INST} on {TOPIC}.",
            "Let me also remind you that over {NUM} of that budget is spent on projects that benefit member states.",
            "They have made and are making considerable efforts in the fight against {ISSUE} and organized crime.",
            "The {INST} must {VERB} the proposal on {TOPIC} as soon as possible.",
            "We cannot accept that {COUNTRY} is treated differently from other member states.",
            "It is {ADJ} that we {VERB} this report on {TOPIC}.",
            "I voted in favour of the report because it {VERB_S} the {ADJ} role of {TOPIC} policy.",
            "The situation in {COUNTRY} is {STATE} and requires an urgent response from the {INST}.",
            "This is why my group will {VERB} the amendments tabled by the {GROUP}.",
            "We need a {QUALITY} debate on the future of {TOPIC} in the european union.",
            "The question of {TOPIC} is {ADJ} for the citizens of {COUNTRY}.",
            "I should like to point out that the {INST} has already presented a proposal on {TOPIC}.",
            "{OPEN}the vote will take place tomorrow at 12 noon.",
            "The debate is closed.",
            "We must not forget the victims of {ISSUE} in {COUNTRY}.",
            "The {PERSON} has done an excellent job and deserves our {THANKS}.",
            "In {COUNTRY} more than {NUM} percent of young people are unemployed.",
            "Our citizens expect the {INST} to take concrete action on {TOPIC} and {TOPIC}.",
            "The next item is the report by {NAME}, on behalf of the committee on {TOPIC}, on {TOPIC}.",
            "I therefore support the {QUALITY} proposal of the {INST} on {TOPIC}.",
            "{OPEN}the {INST} and the {INST} must work together to ensure that {TOPIC} policy is {ADJ} "
            "and fair for all member states.",
            "On the subject of {TOPIC}, I must say that the position of the {INST} is {STATE}.",
            "We have to take into account the {ADJ} needs of {COUNTRY} and {COUNTRY}.",
            "That is why I believe that this {QUALITY} report deserves the support of the house.",
            "The {INST} has a responsibility to protect the rights of {PEOPLE}.",
            "I hope that the {INST} will listen to the concerns of {PEOPLE} in {COUNTRY}.",
            "{OPEN}I want to say a few words about {TOPIC} and {ISSUE}.",
            "It is not acceptable that {PEOPLE} in {COUNTRY} still suffer from {ISSUE}.",
            "We welcome the agreement reached with the {INST} at first reading.",
            "The Commission's proposal on {TOPIC} goes in the right direction, but it does not go far enough.",
            "Thank you.",
            "Applause",
            "{OPEN}the {INST} must {VERB} the proposal on {TOPIC} as soon as possible, and the {INST} must "
            "{VERB} the report on {TOPIC} because {PEOPLE} in {COUNTRY} and {COUNTRY} are waiting for a clear "
            "answer from the european union.",
        };
        g.slots = {
            {"OPEN", {"", "", "Mr President, ", "Madam President, ", "Ladies and gentlemen, ", "Commissioner, "}},
            {"PERSON", {"rapporteur", "commissioner", "minister", "president", "presidency", "shadow rapporteur"}},
            {"POSS", {"her", "his", "their"}},
            {"QUALITY", {"excellent", "balanced", "ambitious", "detailed", "thorough", "constructive", "important"}},
            {"TOPIC",
             {"agriculture", "fisheries", "energy", "transport", "trade", "employment", "immigration",
              "security", "research", "education", "health", "competition", "taxation", "enlargement",
              "cohesion", "the environment", "climate change", "human rights", "consumer protection",
              "the internal market", "development aid", "regional policy", "public health", "food safety",
              "financial services", "the single currency", "social policy", "data protection", "tourism",
              "innovation"}},
            {"INST",
             {"commission", "council", "parliament", "court of justice", "presidency", "committee",
              "european central bank", "court of auditors"}},
            {"VERB", {"support", "reject", "welcome", "oppose", "endorse", "examine", "consider", "approve",
                      "amend", "adopt"}},
            {"VERB_S", {"strengthens", "recognises", "underlines", "reinforces", "clarifies", "protects"}},
            {"ADJ", {"important", "essential", "crucial", "vital", "necessary", "fundamental", "urgent",
                     "clear", "right", "significant"}},
            {"STATE", {"very worrying", "unacceptable", "extremely serious", "still unclear", "deteriorating",
                       "alarming", "disappointing"}},
            {"COUNTRY",
             {"france", "germany", "spain", "italy", "poland", "sweden", "greece", "portugal", "ireland",
              "austria", "hungary", "romania", "belgium", "the netherlands", "denmark", "finland", "turkey",
              "ukraine", "belarus", "russia"}},
            {"ISSUE", {"corruption", "terrorism", "poverty", "unemployment", "discrimination", "fraud",
                       "human trafficking", "money laundering", "violence against women", "drug trafficking"}},
            {"NUM", {"90", "80", "50", "20", "10", "25", "30", "40", "60", "70"}},
            {"GROUP", {"socialist group", "greens", "liberals", "conservatives", "left", "rapporteur"}},
            {"THANKS", {"thanks", "gratitude", "support", "congratulations", "respect"}},
            {"NAME", {"mr smith", "mrs jensen", "mr rossi", "mrs schmidt", "mr dupont", "mrs kowalska",
                      "mr garcia", "mrs larsen"}},
            {"PEOPLE", {"citizens", "workers", "farmers", "women", "children", "consumers", "refugees",
                        "small businesses", "pensioners", "young people"}},
        };
        return g;
    }();
    return g;
}

namespace detail {

/// Index with probability proportional to 1/(k+1).
inline std::size_t zipf_pick(Rng& rng, std::size_t n) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += 1.0 / static_cast<double>(k + 1);
    double u = uniform01(rng) * total;
    for (std::size_t k = 0; k < n; ++k) {
        u -= 1.0 / static_cast<double>(k + 1);
        if (u < 0) return k;
    }
    return n - 1;
}

inline std::string expand(std::string_view tmpl, const Grammar& g, Rng& rng) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            const std::string key(tmpl.substr(i + 1, close - i - 1));
            const auto& options = g.slots.at(key);
            out += options[zipf_pick(rng, options.size())];
            i = close + 1;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

inline std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

} // namespace detail

/// n raw corpus lines, deterministic in seed. Templates are drawn uniformly.
inline std::vector<std::string> generate(std::size_t n, std::uint64_t seed, const Grammar& g = parliament_grammar()) {
    Rng rng(seed);
    std::vector<std::string> lines;
    lines.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = g.templates[uniform_index(rng, g.templates.size())];
        lines.push_back(detail::capitalize(detail::expand(t, g, rng)));
    }
    return lines;
}

} // namespace semlink::synthetic
