#pragma once

// Repeated-trial convention formation: the Instructor picks a program and a
// message, the Builder decodes it, and after each success both agents update
// their lexicon beliefs and the next, more abstract program is taught.

#include <array>
#include <cstdint>
#include <vector>

#include "convsim/agents.hpp"
#include "convsim/dsl.hpp"
#include "convsim/rng.hpp"

namespace convsim {

enum class ProgramChoice : std::uint8_t {
    // Each unlocked program is scored by its best message; softmax over programs.
    BestMessage,
    // Softmax over every (program, message) pair.
    Joint,
    // Always the most recently unlocked program, with its best message.
    Newest,
};

struct ConventionOptions {
    ProgramChoice program_choice = ProgramChoice::BestMessage;
    MessageKind teaching_kind = MessageKind::Redundant;  // how a new chunk is introduced
    int threads = 1;
};

struct TrialRecord {
    int repetition = 1;
    TowerId tower = TowerId::C;
    TowerProgram program_used;
    std::size_t program_index = 0;  // into programs_for_tower(tower)
    std::vector<MessageKind> message_kinds;
    std::vector<Symbol> decoded;
    bool success = false;
    int program_length = 0;
    int ties = 0;  // MAP decodes that had to break a tie

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct RunResult {
    std::vector<TrialRecord> trials;  // kRepetitions x 3 towers
    std::uint64_t seed = 0;
    Theta theta;
    Lexicon true_lexicon;
    LexiconBelief instructor_belief = LexiconBelief::uniform();
    LexiconBelief builder_belief = LexiconBelief::uniform();
};

struct TrialOutcome {
    TrialRecord record;
    std::size_t unlocked = 0;  // highest usable program index after the trial
};

// One trial. Updates both agents' beliefs in place on success.
TrialOutcome run_trial(AgentState& instructor, AgentState& builder, TowerId tower, std::size_t unlocked,
                       const Theta& theta, int repetition, Rng& rng, const ConventionOptions& options = {});

// Probability of each program in library[0..unlocked] under the Instructor's
// program choice rule (one-hot for Newest).
std::vector<double> program_choice_distribution(const AgentState& instructor, TowerId tower, std::size_t unlocked,
                                                const Theta& theta, int repetition,
                                                ProgramChoice mode = ProgramChoice::BestMessage);

// One run of 3 towers x 4 repetitions, tower order shuffled per repetition,
// with a fresh random true lexicon.
RunResult run_convention(const Theta& theta, Rng& rng, std::uint64_t seed, const ConventionOptions& options = {});

// n_runs independent runs; run i uses stream i of `seed`. Results do not
// depend on options.threads.
std::vector<RunResult> run_simulation1(const Theta& theta, int n_runs, std::uint64_t seed,
                                       const ConventionOptions& options = {});

struct RepetitionStats {
    int repetition = 1;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n - 1)
    std::size_t n = 0;
};

// Program length per repetition over all towers and runs. Throws EmptyInput.
std::array<RepetitionStats, kRepetitions> aggregate_lengths(const std::vector<RunResult>& results);
// Fraction of successful trials per repetition.
std::array<RepetitionStats, kRepetitions> aggregate_success(const std::vector<RunResult>& results);

}  // namespace convsim
