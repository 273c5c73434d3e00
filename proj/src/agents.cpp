#include "convsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "convsim/errors.hpp"

namespace convsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// beta * ln p, with a zero weight switching the term off entirely (so that
// 0 * ln 0 does not poison the sum).
double weighted_log(double beta, double p) {
    if (beta == 0.0) return 0.0;
    if (p <= 0.0) return kNegInf;
    return beta * std::log(p);
}

std::size_t index_in(std::span<const Symbol> space, const Symbol& s) {
    const auto it = std::find(space.begin(), space.end(), s);
    if (it == space.end()) throw CategoryMismatch(fmt::format("{} is not in the decode space", s.name()));
    return static_cast<std::size_t>(it - space.begin());
}

void check_space(std::span<const Symbol> space) {
    if (space.empty()) throw ValidationError("decode space is empty");
    for (const Symbol& s : space)
        if (!same_category(s, space.front())) throw CategoryMismatch("decode space mixes positions and things");
}

double literal_product(const SubMessage& m, const Symbol& t, const Semantics& sem, const Lexicon& lex) {
    double v = literal_semantics(m.utterance(), t, sem, lex);
    if (m.gesture()) v *= literal_semantics(*m.gesture(), t, sem, lex);
    return v;
}

// Literal weights of a single signal over the category of `t`, normalized at t.
double single_signal_literal(const Signal& s, const Symbol& t, const Semantics& sem, const Lexicon& lex) {
    const auto space = decode_space_for(t);
    double total = 0.0;
    double at_t = 0.0;
    for (const Symbol& x : space) {
        const double v = literal_semantics(s, x, sem, lex);
        total += v;
        if (x == t) at_t = v;
    }
    return total > 0.0 ? at_t / total : 0.0;
}

// Softmax over `options`, evaluated at `chosen`.
double modality_softmax(std::span<const Signal> options, const Signal& chosen, const Symbol& t, double beta_i,
                        double beta_cost, const Semantics& sem, const Lexicon& lex) {
    std::vector<double> u(options.size());
    std::size_t chosen_index = options.size();
    for (std::size_t i = 0; i < options.size(); ++i) {
        u[i] = weighted_log(beta_i, single_signal_literal(options[i], t, sem, lex)) - beta_cost * options[i].cost;
        if (options[i] == chosen) chosen_index = i;
    }
    if (chosen_index == options.size())
        throw CategoryMismatch(fmt::format("signal '{}' is not available for {}", chosen.surface, t.name()));
    const double peak = *std::max_element(u.begin(), u.end());
    if (peak == kNegInf) return 0.0;
    double z = 0.0;
    for (double x : u) z += std::exp(x - peak);
    return std::exp(u[chosen_index] - peak) / z;
}

// Representative lexicons: for word w and chunk k, the first lexicon in
// canonical order with meaning(w) == k.
const std::array<std::array<std::size_t, kNumChunks>, kNumWords>& representatives() {
    static const auto table = [] {
        std::array<std::array<std::size_t, kNumChunks>, kNumWords> out{};
        const auto& all = enumerate_lexicons();
        for (int w = 0; w < kNumWords; ++w)
            for (int k = 0; k < kNumChunks; ++k)
                for (std::size_t i = 0; i < all.size(); ++i)
                    if (all[i].meaning(static_cast<Word>(w)) == static_cast<Chunk>(k)) {
                        out[w][k] = i;
                        break;
                    }
        return out;
    }();
    return table;
}

struct LexiconClass {
    std::size_t representative;
    double weight;
};

// Every quantity about one sub-message depends on the lexicon only through
// the meaning of the word it carries (all words cost the same and each clear
// signal is true of exactly one thing), so lexicons collapse into at most five
// classes. Sub-messages mixing two words fall back to one class per lexicon.
std::vector<LexiconClass> lexicon_classes(const SubMessage& m, const LexiconBelief& belief) {
    std::vector<LexiconClass> out;
    const auto uw = m.utterance().word();
    const auto gw = m.gesture() ? m.gesture()->word() : std::nullopt;
    if (!uw && !gw) {
        out.push_back({0, 1.0});
        return out;
    }
    if (uw && gw && *uw != *gw) {
        for (std::size_t i = 0; i < kNumLexicons; ++i)
            if (belief[i] > 0.0) out.push_back({i, belief[i]});
        return out;
    }
    const Word w = uw ? *uw : *gw;
    for (int k = 0; k < kNumChunks; ++k) {
        const double weight = belief.marginal(w, static_cast<Chunk>(k));
        if (weight > 0.0) out.push_back({representatives()[static_cast<std::size_t>(w)][k], weight});
    }
    return out;
}

// Per-lexicon class index lookup for update_belief.
std::size_t class_of(const SubMessage& m, std::size_t lexicon_index) {
    const auto uw = m.utterance().word();
    const auto gw = m.gesture() ? m.gesture()->word() : std::nullopt;
    if (!uw && !gw) return 0;
    const Word w = uw ? *uw : *gw;
    return static_cast<std::size_t>(enumerate_lexicons()[lexicon_index].meaning(w));
}

}  // namespace

std::string_view kind_name(MessageKind k) {
    switch (k) {
        case MessageKind::Redundant: return "redundant";
        case MessageKind::LanguageOnly: return "language_only";
        case MessageKind::Complementary: return "complementary";
    }
    return "?";
}

SubMessage::SubMessage(const Signal& utterance, std::optional<Signal> gesture, const Symbol& intended)
    : utterance_(utterance), gesture_(std::move(gesture)), intended_(intended) {
    if (!utterance_.is_utterance()) throw ValidationError("sub-message utterance slot holds a gesture");
    if (gesture_ && !gesture_->is_gesture()) throw ValidationError("sub-message gesture slot holds an utterance");
    if (utterance_.is_ambiguous() && !gesture_)
        throw ValidationError("an ambiguous utterance must be accompanied by a gesture");
    if (utterance_.about_positions() != intended_.is_position() ||
        (gesture_ && gesture_->about_positions() != intended_.is_position()))
        throw ValidationError(fmt::format("signals do not talk about the category of {}", intended_.name()));
}

SubMessage SubMessage::of_kind(MessageKind kind, const Symbol& intended, const Lexicon& own) {
    const auto options = kind_options(intended);
    if (std::find(options.begin(), options.end(), kind) == options.end())
        throw ValidationError(fmt::format("{} message not available for {}", kind_name(kind), intended.name()));
    if (intended.is_position()) {
        switch (kind) {
            case MessageKind::Redundant:
                return {position_utterance(intended), point_gesture(intended), intended};
            case MessageKind::LanguageOnly: return {position_utterance(intended), std::nullopt, intended};
            case MessageKind::Complementary: return {here_utterance(), point_gesture(intended), intended};
        }
    }
    if (intended.is_block()) return {block_utterance(intended.as_block()), std::nullopt, intended};
    const Word w = own.word_for(intended.as_chunk());
    if (kind == MessageKind::Redundant) return {word_utterance(w), shape_gesture(w), intended};
    return {word_utterance(w), std::nullopt, intended};
}

MessageKind SubMessage::kind() const {
    if (!gesture_) return MessageKind::LanguageOnly;
    return utterance_.is_ambiguous() ? MessageKind::Complementary : MessageKind::Redundant;
}

std::optional<Word> SubMessage::word() const {
    if (auto w = utterance_.word()) return w;
    return gesture_ ? gesture_->word() : std::nullopt;
}

std::span<const MessageKind> kind_options(const Symbol& s) {
    static constexpr std::array<MessageKind, 3> position{MessageKind::Redundant, MessageKind::LanguageOnly,
                                                         MessageKind::Complementary};
    static constexpr std::array<MessageKind, 1> block{MessageKind::LanguageOnly};
    static constexpr std::array<MessageKind, 2> chunk{MessageKind::Redundant, MessageKind::LanguageOnly};
    if (s.is_position()) return position;
    if (s.is_block()) return block;
    return chunk;
}

Theta Theta::constant(double beta_i, double beta_u, double beta_h, double gamma, Semantics sem) {
    Theta t;
    t.beta_i = beta_i;
    t.beta_u.fill(beta_u);
    t.beta_h.fill(beta_h);
    t.gamma = gamma;
    t.sem = sem;
    return t;
}

double Theta::beta_u_at(int r) const {
    if (r < 1 || r > kRepetitions) throw ValidationError(fmt::format("repetition {} outside 1..{}", r, kRepetitions));
    return beta_u[static_cast<std::size_t>(r - 1)];
}

double Theta::beta_h_at(int r) const {
    if (r < 1 || r > kRepetitions) throw ValidationError(fmt::format("repetition {} outside 1..{}", r, kRepetitions));
    return beta_h[static_cast<std::size_t>(r - 1)];
}

void Theta::validate() const {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0) throw ValidationError(fmt::format("{} = {} must be finite and >= 0", name, v));
    };
    check(beta_i, "beta_i");
    for (double v : beta_u) check(v, "beta_u");
    for (double v : beta_h) check(v, "beta_h");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError(fmt::format("gamma = {} outside [0, 1]", gamma));
    sem.validate();
}

std::vector<double> literal_builder_distribution(const SubMessage& m, std::span<const Symbol> space,
                                                 const Semantics& sem, const Lexicon& lex) {
    check_space(space);
    std::vector<double> p(space.size());
    double total = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        p[i] = literal_product(m, space[i], sem, lex);
        total += p[i];
    }
    if (!(total > 0.0)) throw ZeroMass(fmt::format("literal meaning of the message is zero for every symbol"));
    for (double& x : p) x /= total;
    return p;
}

std::vector<double> literal_builder_distribution(const SubMessage& m, std::span<const Symbol> space,
                                                 const Semantics& sem, const LexiconBelief& belief) {
    check_space(space);
    const auto& lexicons = enumerate_lexicons();
    std::vector<double> acc(space.size(), 0.0);
    double mass = 0.0;
    for (const LexiconClass& c : lexicon_classes(m, belief)) {
        try {
            const auto p = literal_builder_distribution(m, space, sem, lexicons[c.representative]);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c.weight * p[i];
            mass += c.weight;
        } catch (const ZeroMass&) {
            // contradictory under this lexicon; contributes nothing
        }
    }
    if (!(mass > 0.0)) throw ZeroMass("literal meaning of the message is zero under every believed lexicon");
    for (double& x : acc) x /= mass;
    return acc;
}

double classic_speaker_utility(const Signal& u, const Symbol& t, std::span<const Symbol> space, const Semantics& sem,
                               const Lexicon& lex) {
    if (!u.is_utterance()) throw ValidationError("classic speaker utility takes an utterance");
    check_space(space);
    double total = 0.0;
    double at_t = 0.0;
    bool found = false;
    for (const Symbol& x : space) {
        const double v = literal_semantics(u, x, sem, lex);
        total += v;
        if (x == t) {
            at_t = v;
            found = true;
        }
    }
    if (!found) throw CategoryMismatch(fmt::format("{} is not in the decode space", t.name()));
    if (!(total > 0.0)) throw ZeroMass("utterance is false of every symbol");
    return (at_t > 0.0 ? std::log(at_t / total) : kNegInf) - u.cost;
}

double submessage_utility(const SubMessage& m, const Theta& theta, int r, const LexiconBelief& belief) {
    const double cost = theta.beta_u_at(r) * m.utterance_cost() + theta.beta_h_at(r) * m.gesture_cost();
    if (theta.beta_i == 0.0) return -cost;
    const auto space = decode_space_for(m.intended());
    double p = 0.0;
    try {
        p = literal_builder_distribution(m, space, theta.sem, belief)[index_in(space, m.intended())];
    } catch (const ZeroMass&) {
        return kNegInf;
    }
    return weighted_log(theta.beta_i, p) - cost;
}

double message_utility(const Message& msg, std::span<const Symbol> targets, const Theta& theta, int r,
                       const LexiconBelief& belief) {
    if (msg.size() != targets.size())
        throw MisalignedMessage(
            fmt::format("message has {} sub-messages for {} program symbols", msg.size(), targets.size()));
    double total = 0.0;
    for (std::size_t s = 0; s < msg.size(); ++s) {
        if (!(msg[s].intended() == targets[s]))
            throw MisalignedMessage(fmt::format("sub-message {} is about {} but the program has {}", s,
                                                msg[s].intended().name(), targets[s].name()));
        total += submessage_utility(msg[s], theta, r, belief);
    }
    return total;
}

double message_utility(const Message& msg, std::span<const Symbol> targets, const Theta& theta, int r,
                       const Lexicon& lex) {
    return message_utility(msg, targets, theta, r, LexiconBelief::point_mass(lex));
}

double message_utility(const Message& msg, const TowerProgram& program, const Theta& theta, int r,
                       const Lexicon& lex) {
    const auto targets = program.symbols();
    return message_utility(msg, targets, theta, r, lex);
}

std::vector<Message> message_candidates(const TowerProgram& program, const Lexicon& own) {
    std::vector<Message> out{Message{}};
    for (const Symbol& s : program.symbols()) {
        std::vector<Message> next;
        const auto options = kind_options(s);
        next.reserve(out.size() * options.size());
        for (const Message& prefix : out)
            for (MessageKind k : options) {
                Message m = prefix;
                m.push_back(SubMessage::of_kind(k, s, own));
                next.push_back(std::move(m));
            }
        out = std::move(next);
    }
    return out;
}

std::vector<double> softmax(std::span<const double> utilities) {
    double peak = kNegInf;
    for (double u : utilities) {
        if (std::isnan(u)) throw NoFiniteCandidate("utility is NaN");
        if (u > peak) peak = u;
    }
    if (!std::isfinite(peak)) throw NoFiniteCandidate("no candidate has a finite utility");
    std::vector<double> p(utilities.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(utilities[i] - peak);
        z += p[i];
    }
    for (double& x : p) x /= z;
    return p;
}

std::size_t choose_message(std::span<const double> utilities, Rng& rng) {
    const auto p = softmax(utilities);
    return rng.categorical(p);
}

double pragmatic_speaker_likelihood(const SubMessage& m, const Symbol& t, const Lexicon& lex, const Theta& theta,
                                    int r) {
    if (m.utterance().about_positions() != t.is_position())
        throw CategoryMismatch(fmt::format("message about {} cannot describe {}", m.intended().name(), t.name()));
    const double from_utterance = modality_softmax(utterances_for(t), m.utterance(), t, theta.beta_i,
                                                   theta.beta_u_at(r), theta.sem, lex);
    if (m.kind() != MessageKind::Complementary) return from_utterance;
    const double from_gesture =
        modality_softmax(gestures_for(t), *m.gesture(), t, theta.beta_i, theta.beta_h_at(r), theta.sem, lex);
    return theta.gamma * from_utterance + (1.0 - theta.gamma) * from_gesture;
}

std::vector<double> pragmatic_builder_distribution(const SubMessage& m, std::span<const Symbol> space,
                                                   const LexiconBelief& belief, const Theta& theta, int r) {
    check_space(space);
    const auto& lexicons = enumerate_lexicons();
    std::vector<double> p(space.size(), 0.0);
    for (const LexiconClass& c : lexicon_classes(m, belief)) {
        const Lexicon& lex = lexicons[c.representative];
        for (std::size_t i = 0; i < space.size(); ++i)
            p[i] += c.weight * pragmatic_speaker_likelihood(m, space[i], lex, theta, r);
    }
    double total = 0.0;
    for (double x : p) total += x;
    if (!(total > 0.0)) throw ZeroMass("pragmatic Builder assigns zero mass to every symbol");
    for (double& x : p) x /= total;
    return p;
}

Decoded map_decode(std::span<const double> distribution, std::span<const Symbol> space) {
    if (distribution.empty() || distribution.size() != space.size())
        throw ValidationError("distribution and decode space sizes differ");
    std::size_t best = 0;
    for (std::size_t i = 1; i < distribution.size(); ++i)
        if (distribution[i] > distribution[best]) best = i;
    bool tie = false;
    for (std::size_t i = 0; i < distribution.size(); ++i)
        if (i != best && std::abs(distribution[i] - distribution[best]) <= 1e-12) tie = true;
    return {space[best], distribution[best], tie};
}

LexiconBelief update_belief(const LexiconBelief& belief, std::span<const Observation> observations, UpdateSide side,
                            const Theta& theta, int r) {
    if (observations.empty()) return belief;
    const auto& lexicons = enumerate_lexicons();

    std::array<double, kNumLexicons> log_post{};
    for (std::size_t i = 0; i < kNumLexicons; ++i) log_post[i] = belief[i] > 0.0 ? std::log(belief[i]) : kNegInf;

    for (const Observation& obs : observations) {
        const SubMessage& m = obs.message;
        const auto space = decode_space_for(obs.symbol);
        index_in(space, obs.symbol);  // category check

        auto likelihood = [&](const Lexicon& lex) {
            const double at = pragmatic_speaker_likelihood(m, obs.symbol, lex, theta, r);
            if (side == UpdateSide::Instructor) return at;
            double z = 0.0;
            for (const Symbol& t : space) z += pragmatic_speaker_likelihood(m, t, lex, theta, r);
            return z > 0.0 ? at / z : 0.0;
        };

        const auto uw = m.utterance().word();
        const auto gw = m.gesture() ? m.gesture()->word() : std::nullopt;
        if (uw && gw && *uw != *gw) {
            for (std::size_t i = 0; i < kNumLexicons; ++i) {
                if (log_post[i] == kNegInf) continue;
                const double l = likelihood(lexicons[i]);
                log_post[i] += l > 0.0 ? std::log(l) : kNegInf;
            }
            continue;
        }
        std::array<double, kNumChunks> per_class{};
        const std::size_t n_classes = (uw || gw) ? kNumChunks : 1;
        const Word w = uw ? *uw : (gw ? *gw : Word::Alpha);
        for (std::size_t k = 0; k < n_classes; ++k) {
            const std::size_t rep = (uw || gw) ? representatives()[static_cast<std::size_t>(w)][k] : 0;
            const double l = likelihood(lexicons[rep]);
            per_class[k] = l > 0.0 ? std::log(l) : kNegInf;
        }
        for (std::size_t i = 0; i < kNumLexicons; ++i)
            if (log_post[i] != kNegInf) log_post[i] += per_class[class_of(m, i)];
    }

    const double peak = *std::max_element(log_post.begin(), log_post.end());
    if (peak == kNegInf) throw ZeroMass("no lexicon is consistent with the observations");
    LexiconBelief::Probs weights{};
    for (std::size_t i = 0; i < kNumLexicons; ++i) weights[i] = std::exp(log_post[i] - peak);
    return LexiconBelief::from_weights(weights);
}

}  // namespace convsim
