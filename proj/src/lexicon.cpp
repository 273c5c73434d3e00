#include "convsim/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "convsim/errors.hpp"

namespace convsim {

namespace {

constexpr double kBlockUtteranceCost = 0.4;
constexpr double kWordUtteranceCost = 0.4;
constexpr double kPositionUtteranceCost = 0.7;
constexpr double kMiddleUtteranceCost = 0.6;
constexpr double kHereCost = 0.1;
constexpr double kPointCost = 0.6;
constexpr double kShapeCost = 0.6;

constexpr std::array<std::string_view, kNumWords> kWordNames{"alpha", "beta", "gamma", "delta", "epsilon"};
constexpr std::array<std::string_view, kNumBlocks> kBlockSurfaces{"place a red block", "place a green block",
                                                                  "place a blue block"};
constexpr std::array<std::string_view, kNumPositions> kPositionSurfaces{
    "top left",    "top half", "top right",   "left half",   "middle",
    "right half",  "bottom left", "bottom half", "bottom right"};
constexpr std::array<std::string_view, kNumPositions> kPointSurfaces{
    "point: top left",    "point: top half", "point: top right",   "point: left half",   "point: middle",
    "point: right half",  "point: bottom left", "point: bottom half", "point: bottom right"};
constexpr std::array<std::string_view, kNumWords> kWordSurfaces{"place an alpha tower", "place a beta tower",
                                                                "place a gamma tower", "place a delta tower",
                                                                "place an epsilon tower"};
constexpr std::array<std::string_view, kNumWords> kShapeSurfaces{"shape: alpha", "shape: beta", "shape: gamma",
                                                                 "shape: delta", "shape: epsilon"};

std::vector<Signal> build_position_utterances() {
    std::vector<Signal> out;
    for (const Symbol& p : all_positions()) out.push_back(position_utterance(p));
    out.push_back(here_utterance());
    return out;
}

std::vector<Signal> build_thing_utterances() {
    std::vector<Signal> out;
    for (const Symbol& b : all_blocks()) out.push_back(block_utterance(b.as_block()));
    for (int w = 0; w < kNumWords; ++w) out.push_back(word_utterance(static_cast<Word>(w)));
    return out;
}

std::vector<Signal> build_position_gestures() {
    std::vector<Signal> out;
    for (const Symbol& p : all_positions()) out.push_back(point_gesture(p));
    return out;
}

std::vector<Signal> build_thing_gestures() {
    std::vector<Signal> out;
    for (int w = 0; w < kNumWords; ++w) out.push_back(shape_gesture(static_cast<Word>(w)));
    return out;
}

std::vector<Lexicon> build_lexicons() {
    std::array<Chunk, kNumWords> perm{Chunk::C, Chunk::L, Chunk::TR, Chunk::T, Chunk::PL};
    std::vector<Lexicon> out;
    out.reserve(kNumLexicons);
    do {
        out.emplace_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

}  // namespace

std::string_view word_name(Word w) { return kWordNames.at(static_cast<std::size_t>(w)); }

bool Signal::about_positions() const {
    if (const auto* s = std::get_if<Symbol>(&refers_to)) return s->is_position();
    if (const auto* k = std::get_if<SymbolKind>(&refers_to)) return *k == SymbolKind::Position;
    return false;
}

std::optional<Word> Signal::word() const {
    if (const auto* w = std::get_if<Word>(&refers_to)) return *w;
    return std::nullopt;
}

Signal block_utterance(Block b) {
    return {Modality::Utterance, Clarity::Clear, Symbol::block(b), kBlockUtteranceCost,
            kBlockSurfaces.at(static_cast<std::size_t>(b))};
}

Signal position_utterance(const Symbol& p) {
    if (!p.is_position()) throw CategoryMismatch(fmt::format("{} is not a position", p.name()));
    const bool middle = p.row() == 2 && p.col() == 2;
    return {Modality::Utterance, Clarity::Clear, p, middle ? kMiddleUtteranceCost : kPositionUtteranceCost,
            kPositionSurfaces.at(p.id)};
}

Signal here_utterance() {
    return {Modality::Utterance, Clarity::Ambiguous, SymbolKind::Position, kHereCost, "here"};
}

Signal word_utterance(Word w) {
    return {Modality::Utterance, Clarity::Clear, w, kWordUtteranceCost, kWordSurfaces.at(static_cast<std::size_t>(w))};
}

Signal point_gesture(const Symbol& p) {
    if (!p.is_position()) throw CategoryMismatch(fmt::format("cannot point at {}", p.name()));
    return {Modality::Gesture, Clarity::Clear, p, kPointCost, kPointSurfaces.at(p.id)};
}

Signal shape_gesture(Word w) {
    return {Modality::Gesture, Clarity::Clear, w, kShapeCost, kShapeSurfaces.at(static_cast<std::size_t>(w))};
}

Signal primitive_utterance(const Symbol& s) {
    if (s.is_block()) return block_utterance(s.as_block());
    if (s.is_position()) return position_utterance(s);
    throw CategoryMismatch(fmt::format("{} has no fixed utterance; it is named through the lexicon", s.name()));
}

std::span<const Signal> utterances_for(const Symbol& target) {
    static const std::vector<Signal> positions = build_position_utterances();
    static const std::vector<Signal> things = build_thing_utterances();
    return target.is_position() ? std::span<const Signal>(positions) : std::span<const Signal>(things);
}

std::span<const Signal> gestures_for(const Symbol& target) {
    static const std::vector<Signal> positions = build_position_gestures();
    static const std::vector<Signal> things = build_thing_gestures();
    return target.is_position() ? std::span<const Signal>(positions) : std::span<const Signal>(things);
}

void Semantics::validate() const {
    if (!(x_u >= 0.0 && x_u <= 1.0)) throw ValidationError(fmt::format("x_u = {} outside [0, 1]", x_u));
    if (!(x_h >= 0.0 && x_h <= 1.0)) throw ValidationError(fmt::format("x_h = {} outside [0, 1]", x_h));
}

Lexicon::Lexicon() : meaning_{Chunk::C, Chunk::L, Chunk::TR, Chunk::T, Chunk::PL} {}

Lexicon::Lexicon(const std::array<Chunk, kNumWords>& meaning) : meaning_(meaning) {
    std::array<bool, kNumChunks> seen{};
    for (Chunk c : meaning_) {
        const auto i = static_cast<std::size_t>(c);
        if (i >= seen.size() || seen[i]) throw ValidationError("lexicon must be a bijection from words to chunks");
        seen[i] = true;
    }
}

Word Lexicon::word_for(Chunk c) const {
    for (int w = 0; w < kNumWords; ++w)
        if (meaning_[w] == c) return static_cast<Word>(w);
    throw ValidationError("lexicon has no word for chunk");  // unreachable for a bijection
}

std::size_t Lexicon::index() const {
    // Lehmer code of the permutation.
    std::size_t rank = 0;
    for (int i = 0; i < kNumWords; ++i) {
        std::size_t smaller_after = 0;
        for (int j = i + 1; j < kNumWords; ++j)
            if (meaning_[j] < meaning_[i]) ++smaller_after;
        std::size_t fact = 1;
        for (int k = 2; k < kNumWords - i; ++k) fact *= static_cast<std::size_t>(k);
        rank += smaller_after * fact;
    }
    return rank;
}

std::string Lexicon::to_string() const {
    std::string out;
    for (int w = 0; w < kNumWords; ++w) {
        if (w) out += ' ';
        out += fmt::format("{}->{}", word_name(static_cast<Word>(w)), Symbol::chunk(meaning_[w]).name());
    }
    return out;
}

const std::vector<Lexicon>& enumerate_lexicons() {
    static const std::vector<Lexicon> all = build_lexicons();
    return all;
}

std::optional<Symbol> denotation(const Signal& s, const Lexicon& lex) {
    if (const auto* sym = std::get_if<Symbol>(&s.refers_to)) return *sym;
    if (const auto* w = std::get_if<Word>(&s.refers_to)) return Symbol::chunk(lex.meaning(*w));
    return std::nullopt;
}

double literal_semantics(const Signal& s, const Symbol& t, const Semantics& sem, const Lexicon& lex) {
    if (s.about_positions() != t.is_position())
        throw CategoryMismatch(fmt::format("signal '{}' cannot refer to {}", s.surface, t.name()));
    if (s.is_ambiguous()) return 1.0 / kNumPositions;
    const double x = s.is_utterance() ? sem.x_u : sem.x_h;
    return denotation(s, lex) == t ? x : 1.0 - x;
}

LexiconBelief LexiconBelief::uniform() {
    LexiconBelief b;
    b.probs_.fill(1.0 / kNumLexicons);
    return b;
}

LexiconBelief LexiconBelief::from_weights(const Probs& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("lexicon weights must be finite and non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw ZeroMass("every lexicon has zero weight");
    LexiconBelief b;
    for (std::size_t i = 0; i < weights.size(); ++i) b.probs_[i] = weights[i] / total;
    return b;
}

LexiconBelief LexiconBelief::point_mass(const Lexicon& lex) {
    LexiconBelief b;
    b.probs_[lex.index()] = 1.0;
    return b;
}

double LexiconBelief::marginal(Word w, Chunk c) const {
    const auto& lexicons = enumerate_lexicons();
    double sum = 0.0;
    for (std::size_t i = 0; i < lexicons.size(); ++i)
        if (lexicons[i].meaning(w) == c) sum += probs_[i];
    return sum;
}

double LexiconBelief::entropy() const {
    double h = 0.0;
    for (double p : probs_)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

std::size_t LexiconBelief::support_size() const {
    return static_cast<std::size_t>(std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
}

}  // namespace convsim
