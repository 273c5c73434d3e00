#include "convsim/convention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "convsim/errors.hpp"
#include "convsim/parallel.hpp"

namespace convsim {

namespace {

struct StepOption {
    SubMessage message;
    double utility;
};

// Utility of every available kind for every symbol of a program, scored
// against the Instructor's belief about the Builder's lexicon.
class StepScorer {
public:
    StepScorer(const AgentState& instructor, const Theta& theta, int r)
        : instructor_(instructor), theta_(theta), r_(r) {}

    const std::vector<StepOption>& options(const Symbol& s) {
        auto it = cache_.find(s);
        if (it != cache_.end()) return it->second;
        std::vector<StepOption> out;
        for (MessageKind k : kind_options(s)) {
            SubMessage m = SubMessage::of_kind(k, s, instructor_.own_lexicon);
            const double u = submessage_utility(m, theta_, r_, instructor_.belief);
            out.push_back({std::move(m), u});
        }
        return cache_.emplace(s, std::move(out)).first->second;
    }

    // Highest-utility message for the program; ties keep the earlier kind.
    std::pair<Message, double> best_message(const TowerProgram& p) {
        Message msg;
        double total = 0.0;
        for (const Symbol& s : p.symbols()) {
            const auto& opts = options(s);
            std::size_t best = 0;
            for (std::size_t i = 1; i < opts.size(); ++i)
                if (opts[i].utility > opts[best].utility) best = i;
            msg.push_back(opts[best].message);
            total += opts[best].utility;
        }
        return {std::move(msg), total};
    }

private:
    const AgentState& instructor_;
    const Theta& theta_;
    int r_;
    std::map<Symbol, std::vector<StepOption>> cache_;
};

std::pair<std::size_t, Message> choose_program(const std::vector<TowerProgram>& library, std::size_t unlocked,
                                               StepScorer& scorer, Rng& rng, ProgramChoice mode) {
    if (mode == ProgramChoice::Newest) return {unlocked, scorer.best_message(library[unlocked]).first};

    if (mode == ProgramChoice::BestMessage) {
        std::vector<Message> messages;
        std::vector<double> utilities;
        for (std::size_t p = 0; p <= unlocked; ++p) {
            auto [msg, u] = scorer.best_message(library[p]);
            messages.push_back(std::move(msg));
            utilities.push_back(u);
        }
        const std::size_t pick = choose_message(utilities, rng);
        return {pick, std::move(messages[pick])};
    }

    // Joint: enumerate every candidate message of every unlocked program.
    std::vector<std::pair<std::size_t, Message>> candidates;
    std::vector<double> utilities;
    for (std::size_t p = 0; p <= unlocked; ++p) {
        std::vector<std::pair<Message, double>> partial{{Message{}, 0.0}};
        for (const Symbol& s : library[p].symbols()) {
            std::vector<std::pair<Message, double>> next;
            for (const StepOption& o : scorer.options(s))
                for (const auto& [prefix, u] : partial) {
                    Message m = prefix;
                    m.push_back(o.message);
                    next.emplace_back(std::move(m), u + o.utility);
                }
            partial = std::move(next);
        }
        for (auto& [m, u] : partial) {
            candidates.emplace_back(p, std::move(m));
            utilities.push_back(u);
        }
    }
    const std::size_t pick = choose_message(utilities, rng);
    return std::move(candidates[pick]);
}

std::vector<Observation> chunk_observations(const Message& msg) {
    std::vector<Observation> out;
    for (const SubMessage& m : msg)
        if (m.intended().is_chunk()) out.push_back({m, m.intended()});
    return out;
}

void update_both(AgentState& instructor, AgentState& builder, const std::vector<Observation>& obs,
                 const Theta& theta, int r) {
    if (obs.empty()) return;
    instructor.belief = update_belief(instructor.belief, obs, UpdateSide::Instructor, theta, r);
    builder.belief = update_belief(builder.belief, obs, UpdateSide::Builder, theta, r);
}

RepetitionStats summarize(int repetition, const std::vector<double>& values) {
    RepetitionStats st;
    st.repetition = repetition;
    st.n = values.size();
    if (values.empty()) return st;
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - st.mean) * (v - st.mean);
        st.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return st;
}

template <class Metric>
std::array<RepetitionStats, kRepetitions> aggregate(const std::vector<RunResult>& results, Metric metric) {
    if (results.empty()) throw EmptyInput("no simulation runs to aggregate");
    std::array<std::vector<double>, kRepetitions> values;
    for (const RunResult& run : results)
        for (const TrialRecord& t : run.trials) values.at(static_cast<std::size_t>(t.repetition - 1)).push_back(metric(t));
    std::array<RepetitionStats, kRepetitions> out;
    for (int r = 1; r <= kRepetitions; ++r) out[r - 1] = summarize(r, values[r - 1]);
    return out;
}

}  // namespace

TrialOutcome run_trial(AgentState& instructor, AgentState& builder, TowerId tower, std::size_t unlocked,
                       const Theta& theta, int r, Rng& rng, const ConventionOptions& options) {
    const auto& library = programs_for_tower(tower);
    if (unlocked >= library.size()) throw ValidationError("unlocked program index beyond the tower's library");

    StepScorer scorer(instructor, theta, r);
    auto [index, message] = choose_program(library, unlocked, scorer, rng, options.program_choice);
    const TowerProgram& program = library[index];

    TrialRecord rec;
    rec.repetition = r;
    rec.tower = tower;
    rec.program_used = program;
    rec.program_index = index;
    rec.program_length = program_length(program);
    rec.success = true;
    for (const SubMessage& m : message) {
        rec.message_kinds.push_back(m.kind());
        const auto space = decode_space_for(m.intended());
        const auto dist = pragmatic_builder_distribution(m, space, builder.belief, theta, r);
        const Decoded d = map_decode(dist, space);
        rec.decoded.push_back(d.symbol);
        if (d.tie) ++rec.ties;
        if (!(d.symbol == m.intended())) rec.success = false;
    }

    if (!rec.success) return {std::move(rec), unlocked};

    update_both(instructor, builder, chunk_observations(message), theta, r);

    if (unlocked + 1 < library.size()) {
        ++unlocked;
        Message teaching;
        for (const Step& s : library[unlocked].steps)
            if (s.thing.is_chunk())
                teaching.push_back(SubMessage::of_kind(options.teaching_kind, s.thing, instructor.own_lexicon));
        update_both(instructor, builder, chunk_observations(teaching), theta, r);
    }
    return {std::move(rec), unlocked};
}

std::vector<double> program_choice_distribution(const AgentState& instructor, TowerId tower, std::size_t unlocked,
                                                const Theta& theta, int r, ProgramChoice mode) {
    const auto& library = programs_for_tower(tower);
    if (unlocked >= library.size()) throw ValidationError("unlocked program index beyond the tower's library");
    StepScorer scorer(instructor, theta, r);
    std::vector<double> out(unlocked + 1, 0.0);
    if (mode == ProgramChoice::Newest) {
        out.back() = 1.0;
        return out;
    }
    std::vector<double> utilities;
    for (std::size_t p = 0; p <= unlocked; ++p) {
        if (mode == ProgramChoice::BestMessage) {
            utilities.push_back(scorer.best_message(library[p]).second);
            continue;
        }
        // Joint: the log-sum over a program's messages factorizes per step.
        double total = 0.0;
        for (const Symbol& s : library[p].symbols()) {
            double peak = -std::numeric_limits<double>::infinity();
            for (const StepOption& o : scorer.options(s)) peak = std::max(peak, o.utility);
            if (std::isinf(peak)) {
                total = peak;
                break;
            }
            double z = 0.0;
            for (const StepOption& o : scorer.options(s)) z += std::exp(o.utility - peak);
            total += peak + std::log(z);
        }
        utilities.push_back(total);
    }
    out = softmax(utilities);
    return out;
}

RunResult run_convention(const Theta& theta, Rng& rng, std::uint64_t seed, const ConventionOptions& options) {
    theta.validate();
    RunResult result;
    result.seed = seed;
    result.theta = theta;
    result.true_lexicon = enumerate_lexicons()[rng.below(kNumLexicons)];

    AgentState instructor{Role::Instructor, LexiconBelief::uniform(), result.true_lexicon};
    AgentState builder{Role::Builder, LexiconBelief::uniform(), result.true_lexicon};
    std::array<std::size_t, kAllTowers.size()> unlocked{};

    for (int r = 1; r <= kRepetitions; ++r) {
        auto order = kAllTowers;
        rng.shuffle(std::span<TowerId>(order));
        for (TowerId tower : order) {
            auto& slot = unlocked[static_cast<std::size_t>(tower)];
            auto outcome = run_trial(instructor, builder, tower, slot, theta, r, rng, options);
            slot = outcome.unlocked;
            result.trials.push_back(std::move(outcome.record));
        }
    }
    result.instructor_belief = instructor.belief;
    result.builder_belief = builder.belief;
    return result;
}

std::vector<RunResult> run_simulation1(const Theta& theta, int n_runs, std::uint64_t seed,
                                       const ConventionOptions& options) {
    if (n_runs < 1) throw ValidationError("n_runs must be at least 1");
    theta.validate();
    std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
    parallel_for(results.size(), options.threads, [&](std::size_t i) {
        Rng rng = Rng::stream(seed, i);
        results[i] = run_convention(theta, rng, stream_seed(seed, i), options);
    });
    return results;
}

std::array<RepetitionStats, kRepetitions> aggregate_lengths(const std::vector<RunResult>& results) {
    return aggregate(results, [](const TrialRecord& t) { return static_cast<double>(t.program_length); });
}

std::array<RepetitionStats, kRepetitions> aggregate_success(const std::vector<RunResult>& results) {
    return aggregate(results, [](const TrialRecord& t) { return t.success ? 1.0 : 0.0; });
}

}  // namespace convsim
