#pragma once

// Instructor and Builder reasoning: the literal Builder, the multimodal
// informativeness-minus-cost utility, softmax message choice, the pragmatic
// Builder that marginalizes over lexicon uncertainty, and Bayesian belief
// updates after consensus.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "convsim/dsl.hpp"
#include "convsim/lexicon.hpp"
#include "convsim/rng.hpp"

namespace convsim {

inline constexpr int kRepetitions = 4;

enum class MessageKind : std::uint8_t { Redundant, LanguageOnly, Complementary };
inline constexpr std::array<MessageKind, 3> kAllKinds{MessageKind::Redundant, MessageKind::LanguageOnly,
                                                     MessageKind::Complementary};
std::string_view kind_name(MessageKind k);

// One utterance, optionally accompanied by a gesture, about one program symbol.
class SubMessage {
public:
    // Throws ValidationError for an ambiguous utterance without a gesture, a
    // gesture in the utterance slot, or signals about the wrong category.
    SubMessage(const Signal& utterance, std::optional<Signal> gesture, const Symbol& intended);

    // The inventory signals for `kind`; chunk signals use the word `own`
    // assigns to the chunk. Throws ValidationError if the kind is not
    // available for the symbol (see kind_options).
    static SubMessage of_kind(MessageKind kind, const Symbol& intended, const Lexicon& own);

    const Signal& utterance() const { return utterance_; }
    const std::optional<Signal>& gesture() const { return gesture_; }
    const Symbol& intended() const { return intended_; }
    MessageKind kind() const;
    // Word carried by the chunk signals, if any (both signals share it when
    // built through of_kind).
    std::optional<Word> word() const;

    double utterance_cost() const { return utterance_.cost; }
    // Absent gestures cost nothing.
    double gesture_cost() const { return gesture_ ? gesture_->cost : 0.0; }

private:
    Signal utterance_;
    std::optional<Signal> gesture_;
    Symbol intended_;
};

using Message = std::vector<SubMessage>;

// Kinds the inventory supports for a symbol: positions all three, blocks
// language-only (no block gesture), chunks redundant or language-only (no
// ambiguous chunk utterance).
std::span<const MessageKind> kind_options(const Symbol& s);

struct Theta {
    double beta_i = 1.0;                         // informativeness weight
    std::array<double, kRepetitions> beta_u{};   // utterance-cost weight per repetition
    std::array<double, kRepetitions> beta_h{};   // gesture-cost weight per repetition
    double gamma = 0.5;                          // utterance/gesture mixture in the pragmatic Builder
    Semantics sem;

    static Theta constant(double beta_i, double beta_u, double beta_h, double gamma = 0.5, Semantics sem = {});

    double beta_u_at(int repetition) const;
    double beta_h_at(int repetition) const;
    void validate() const;  // ValidationError on negative/non-finite weights or gamma outside [0, 1]
};

enum class Role : std::uint8_t { Instructor, Builder };

struct AgentState {
    Role role = Role::Instructor;
    LexiconBelief belief = LexiconBelief::uniform();  // over the partner's lexicon
    Lexicon own_lexicon;
};

// ---- literal Builder ------------------------------------------------------

// P_B0(t | m) proportional to l(u, t) * l(h, t) over `space`. Throws ZeroMass
// if every product vanishes.
std::vector<double> literal_builder_distribution(const SubMessage& m, std::span<const Symbol> space,
                                                 const Semantics& sem, const Lexicon& lex);

// Literal Builder averaged over a belief about the Builder's lexicon; this is
// how an Instructor who is unsure of the convention scores informativeness.
std::vector<double> literal_builder_distribution(const SubMessage& m, std::span<const Symbol> space,
                                                 const Semantics& sem, const LexiconBelief& belief);

// ---- utilities --------------------------------------------------------------

// log P_L0(t | u) - C(u): the single-utterance speaker utility.
double classic_speaker_utility(const Signal& u, const Symbol& t, std::span<const Symbol> space,
                               const Semantics& sem, const Lexicon& lex = Lexicon{});

// beta_i * ln P_B0(t | m) - beta_u(r) * C_u(u) - beta_h(r) * C_h(h) for one
// sub-message, decoded over the category of its intended symbol. Returns
// -inf when the target gets zero literal mass.
double submessage_utility(const SubMessage& m, const Theta& theta, int repetition, const LexiconBelief& belief);

// Sum of submessage_utility over a message aligned with `targets`; throws
// MisalignedMessage when lengths or intended symbols differ.
double message_utility(const Message& msg, std::span<const Symbol> targets, const Theta& theta, int repetition,
                       const LexiconBelief& belief);
double message_utility(const Message& msg, std::span<const Symbol> targets, const Theta& theta, int repetition,
                       const Lexicon& lex);
double message_utility(const Message& msg, const TowerProgram& program, const Theta& theta, int repetition,
                       const Lexicon& lex);

// Cartesian product of kind_options over the program's symbols, in
// lexicographic order of the per-step option lists.
std::vector<Message> message_candidates(const TowerProgram& program, const Lexicon& own);

// Temperature-1 softmax; -inf entries get probability 0. Throws
// NoFiniteCandidate if nothing is finite.
std::vector<double> softmax(std::span<const double> utilities);

// Index sampled with probability softmax(utilities).
std::size_t choose_message(std::span<const double> utilities, Rng& rng);

// ---- pragmatic Builder -------------------------------------------------------

// P_I1(m | t, l): the Builder's model of a pragmatic Instructor. Each
// modality term is a softmax over the signals of that modality available for
// t's category, scored with the single-step utility. Complementary messages
// mix the terms with gamma; redundant and language-only messages use the
// utterance term alone.
double pragmatic_speaker_likelihood(const SubMessage& m, const Symbol& t, const Lexicon& lex, const Theta& theta,
                                    int repetition = 1);

// P_B1(t | m) proportional to sum_l P_I1(m | t, l) P(l). Throws ZeroMass if the
// whole space gets zero mass.
std::vector<double> pragmatic_builder_distribution(const SubMessage& m, std::span<const Symbol> space,
                                                   const LexiconBelief& belief, const Theta& theta,
                                                   int repetition = 1);

struct Decoded {
    Symbol symbol;
    double probability = 0.0;
    bool tie = false;  // another symbol reached the same maximum
};

// Most probable symbol; ties go to the earliest symbol in canonical order.
Decoded map_decode(std::span<const double> distribution, std::span<const Symbol> space);

// ---- belief update ------------------------------------------------------------

struct Observation {
    SubMessage message;
    Symbol symbol;
};

enum class UpdateSide : std::uint8_t { Instructor, Builder };

// Instructor side adds sum log P_I1(m | t, l); Builder side adds
// sum log P_B1(t | m, l) with P_B1(. | m, l) the single-lexicon pragmatic
// Builder. The result is renormalized; ZeroMass if nothing survives.
LexiconBelief update_belief(const LexiconBelief& belief, std::span<const Observation> observations, UpdateSide side,
                            const Theta& theta, int repetition = 1);

}  // namespace convsim
