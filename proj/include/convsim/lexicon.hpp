#pragma once

// Multimodal signal inventory, soft literal semantics, and the space of
// chunk lexicons (bijections from the five chunk words to the five chunks).

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "convsim/dsl.hpp"

namespace convsim {

enum class Modality : std::uint8_t { Utterance, Gesture };
enum class Clarity : std::uint8_t { Clear, Ambiguous };

// Arbitrary chunk names (alpha..epsilon); which chunk each one means is the
// convention the agents have to establish.
enum class Word : std::uint8_t { Alpha, Beta, Gamma, Delta, Epsilon };
inline constexpr int kNumWords = 5;
inline constexpr int kNumLexicons = 120;

std::string_view word_name(Word w);

// Primitive signals name a Symbol directly, chunk signals name a Word, and
// the ambiguous "here" names only a category.
using Referent = std::variant<Symbol, Word, SymbolKind>;

struct Signal {
    Modality modality = Modality::Utterance;
    Clarity clarity = Clarity::Clear;
    Referent refers_to = Symbol{};
    double cost = 0.0;
    std::string_view surface;

    bool is_utterance() const { return modality == Modality::Utterance; }
    bool is_gesture() const { return modality == Modality::Gesture; }
    bool is_ambiguous() const { return clarity == Clarity::Ambiguous; }
    // Position signals vs. block/chunk signals.
    bool about_positions() const;
    std::optional<Word> word() const;

    friend bool operator==(const Signal& a, const Signal& b) {
        return a.modality == b.modality && a.clarity == b.clarity && a.refers_to == b.refers_to;
    }
};

// Signal inventory with costs (cost of an utterance grows with its word count;
// gesture costs are fixed).
Signal block_utterance(Block b);
Signal position_utterance(const Symbol& position);
Signal here_utterance();
Signal word_utterance(Word w);
Signal point_gesture(const Symbol& position);
Signal shape_gesture(Word w);

// Clear utterance naming a primitive symbol. Chunks have no fixed name, use
// word_utterance with a lexicon instead.
Signal primitive_utterance(const Symbol& s);

// All utterances (resp. gestures) a speaker can use for a target in the same
// category as `target`. Positions: 9 clear + "here" / 9 points.
// Things: 3 block + 5 word utterances / 5 shapes (blocks have no gesture).
std::span<const Signal> utterances_for(const Symbol& target);
std::span<const Signal> gestures_for(const Symbol& target);

struct Semantics {
    double x_u = 1.0;
    double x_h = 1.0;

    void validate() const;  // throws ValidationError unless both in [0, 1]
};

class Lexicon {
public:
    Lexicon();  // identity: alpha->C, beta->L, gamma->TR, delta->T, epsilon->PL
    explicit Lexicon(const std::array<Chunk, kNumWords>& meaning);

    Chunk meaning(Word w) const { return meaning_[static_cast<std::size_t>(w)]; }
    Word word_for(Chunk c) const;
    const std::array<Chunk, kNumWords>& meanings() const { return meaning_; }

    // Position in the canonical enumeration.
    std::size_t index() const;
    std::string to_string() const;

    friend bool operator==(const Lexicon&, const Lexicon&) = default;

private:
    std::array<Chunk, kNumWords> meaning_;
};

// All 5! lexicons, lexicographic in the images of (alpha..epsilon) under the
// chunk order C < L < TR < T < PL.
const std::vector<Lexicon>& enumerate_lexicons();

// What a signal is true of under `lex`; empty for ambiguous signals.
std::optional<Symbol> denotation(const Signal& s, const Lexicon& lex);

// Soft truth value of `s` for target `t`. Throws CategoryMismatch when `t`
// is outside the category `s` talks about.
double literal_semantics(const Signal& s, const Symbol& t, const Semantics& sem, const Lexicon& lex);

class LexiconBelief {
public:
    using Probs = std::array<double, kNumLexicons>;

    static LexiconBelief uniform();
    // Normalizes; throws ZeroMass if every weight is zero.
    static LexiconBelief from_weights(const Probs& weights);
    static LexiconBelief point_mass(const Lexicon& lex);

    double operator[](std::size_t i) const { return probs_[i]; }
    double prob(const Lexicon& lex) const { return probs_[lex.index()]; }
    const Probs& probs() const { return probs_; }

    // P(meaning(w) == c).
    double marginal(Word w, Chunk c) const;
    double entropy() const;
    std::size_t support_size() const;

    friend bool operator==(const LexiconBelief&, const LexiconBelief&) = default;

private:
    LexiconBelief() = default;
    Probs probs_{};
};

inline LexiconBelief uniform_prior() { return LexiconBelief::uniform(); }

}  // namespace convsim
