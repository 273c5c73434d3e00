#pragma once

// Random sub-messages, beliefs and parameters for oracle comparisons.

#include <array>
#include <cmath>

#include "convsim/agents.hpp"
#include "convsim/rng.hpp"

namespace cases {

using namespace convsim;

struct Case {
    SubMessage message;
    LexiconBelief::Probs belief;
    Theta theta;
    int repetition;
};

inline Symbol random_position(Rng& rng) {
    return Symbol::position(static_cast<int>(rng.below(3)) + 1, static_cast<int>(rng.below(3)) + 1);
}

inline Word random_word(Rng& rng) { return static_cast<Word>(rng.below(kNumWords)); }

// Any well-formed sub-message, including ones no Instructor would send
// (a point at the wrong cell, a shape for a different word).
inline SubMessage random_submessage(Rng& rng) {
    switch (rng.below(6)) {
        case 0: {
            const Symbol p = random_position(rng);
            return SubMessage(position_utterance(p), std::nullopt, p);
        }
        case 1: {
            const Symbol p = random_position(rng);
            const Symbol at = rng.below(4) == 0 ? random_position(rng) : p;
            return SubMessage(position_utterance(p), point_gesture(at), p);
        }
        case 2: {
            const Symbol p = random_position(rng);
            return SubMessage(here_utterance(), point_gesture(p), p);
        }
        case 3: {
            const Symbol b = Symbol::block(static_cast<Block>(rng.below(kNumBlocks)));
            return SubMessage(block_utterance(b.as_block()), std::nullopt, b);
        }
        case 4: {
            const Symbol c = Symbol::chunk(static_cast<Chunk>(rng.below(kNumChunks)));
            return SubMessage(word_utterance(random_word(rng)), std::nullopt, c);
        }
        default: {
            const Symbol c = Symbol::chunk(static_cast<Chunk>(rng.below(kNumChunks)));
            const Word w = random_word(rng);
            const Word g = rng.below(4) == 0 ? random_word(rng) : w;
            return SubMessage(word_utterance(w), shape_gesture(g), c);
        }
    }
}

// Dirichlet-like weights; about a third of the draws zero out some lexicons
// and some put nearly all mass on one lexicon.
inline LexiconBelief::Probs random_belief(Rng& rng) {
    LexiconBelief::Probs w{};
    const auto style = rng.below(3);
    for (auto& x : w) {
        x = -std::log(1.0 - rng.uniform());
        if (style == 1 && rng.below(2) == 0) x = 0.0;
    }
    if (style == 2) w[rng.below(kNumLexicons)] += 1000.0;
    w[rng.below(kNumLexicons)] += 1e-3;  // never all zero
    double z = 0.0;
    for (double x : w) z += x;
    for (auto& x : w) x /= z;
    return w;
}

inline Theta random_theta(Rng& rng) {
    Theta t;
    t.beta_i = rng.below(8) == 0 ? 0.0 : rng.uniform(0.0, 20.0);
    for (int r = 0; r < kRepetitions; ++r) {
        t.beta_u[static_cast<std::size_t>(r)] = rng.uniform(0.0, 40.0);
        t.beta_h[static_cast<std::size_t>(r)] = rng.uniform(0.0, 40.0);
    }
    t.gamma = rng.uniform();
    t.sem.x_u = rng.below(6) == 0 ? 1.0 : rng.uniform(0.5, 1.0);
    t.sem.x_h = rng.below(6) == 0 ? 1.0 : rng.uniform(0.5, 1.0);
    return t;
}

inline Case random_case(Rng& rng) {
    SubMessage m = random_submessage(rng);
    return {m, random_belief(rng), random_theta(rng), static_cast<int>(rng.below(kRepetitions)) + 1};
}

}  // namespace cases
