#include <doctest.h>

#include <cmath>
#include <set>

#include "convsim/convention.hpp"
#include "convsim/errors.hpp"
#include "random_cases.hpp"

using namespace convsim;

namespace {

const Semantics kSim{0.87, 0.62};

Theta sim_theta(double beta_u) { return Theta::constant(0.3, beta_u, 0.0, 0.5, kSim); }

AgentState fresh(Role role, const Lexicon& lex) { return {role, LexiconBelief::uniform(), lex}; }
AgentState knowing(Role role, const Lexicon& lex) { return {role, LexiconBelief::point_mass(lex), lex}; }

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST_CASE("the first trial of a tower uses the primitive program") {
    const Lexicon& lex = enumerate_lexicons()[37];
    for (TowerId tower : kAllTowers) {
        AgentState inst = fresh(Role::Instructor, lex), build = fresh(Role::Builder, lex);
        Rng rng(4);
        const auto out = run_trial(inst, build, tower, 0, sim_theta(1.0), 1, rng);
        CHECK(out.record.program_length == 6);
        CHECK(out.record.program_index == 0);
        CHECK(out.record.success);
        CHECK(out.record.decoded.size() == 6);
        CHECK(out.unlocked == 1);
        // The new chunk was taught: both agents now favour lexicons naming it.
        CHECK(inst.belief.support_size() == kNumLexicons);
        CHECK(build.belief.entropy() < LexiconBelief::uniform().entropy());
    }
}

TEST_CASE("with an established convention the chunk program is favoured") {
    const Lexicon& lex = enumerate_lexicons()[5];
    const AgentState inst = knowing(Role::Instructor, lex);
    const auto p = program_choice_distribution(inst, TowerId::C, 1, sim_theta(1.0), 4);
    REQUIRE(p.size() == 2);
    CHECK(p[1] > p[0]);
    CHECK(sum(p) == doctest::Approx(1.0));

    AgentState i2 = inst, b2 = knowing(Role::Builder, lex);
    Rng rng(8);
    ConventionOptions newest;
    newest.program_choice = ProgramChoice::Newest;
    const auto out = run_trial(i2, b2, TowerId::C, 1, sim_theta(1.0), 4, rng, newest);
    CHECK(out.record.program_length == 2);
    CHECK(out.record.success);
    CHECK(out.unlocked == 1);
}

TEST_CASE("zero weights make every unlocked program equally likely") {
    const Lexicon lex;
    const Theta zero = Theta::constant(0.0, 0.0, 0.0, 0.5, kSim);
    const auto p = program_choice_distribution(fresh(Role::Instructor, lex), TowerId::TREE, 3, zero, 2);
    REQUIRE(p.size() == 4);
    for (double x : p) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("exact semantics and free signals tie every program") {
    const Lexicon& lex = enumerate_lexicons()[90];
    const Theta t = Theta::constant(5.0, 0.0, 0.0, 0.5, {1.0, 1.0});
    for (TowerId tower : kAllTowers) {
        const std::size_t last = programs_for_tower(tower).size() - 1;
        const auto p = program_choice_distribution(knowing(Role::Instructor, lex), tower, last, t, 3);
        for (double x : p) CHECK(x == doctest::Approx(1.0 / static_cast<double>(p.size())).epsilon(1e-12));
    }
}

TEST_CASE("program choice distributions are normalized in every mode") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const Theta th = cases::random_theta(rng);
        const Lexicon& lex = enumerate_lexicons()[rng.below(kNumLexicons)];
        const AgentState inst{Role::Instructor, LexiconBelief::from_weights(cases::random_belief(rng)), lex};
        const TowerId tower = kAllTowers[rng.below(kAllTowers.size())];
        const std::size_t unlocked = rng.below(programs_for_tower(tower).size());
        const int r = static_cast<int>(rng.below(kRepetitions)) + 1;
        for (ProgramChoice mode : {ProgramChoice::BestMessage, ProgramChoice::Joint, ProgramChoice::Newest}) {
            const auto p = program_choice_distribution(inst, tower, unlocked, th, r, mode);
            CHECK(p.size() == unlocked + 1);
            for (double x : p) CHECK(x >= 0.0);
            CHECK(std::abs(sum(p) - 1.0) < 1e-9);
        }
    }
    CHECK_THROWS_AS(program_choice_distribution(fresh(Role::Instructor, Lexicon{}), TowerId::C, 2, sim_theta(1), 1),
                    ValidationError);
}

TEST_CASE("a run has twelve trials, each tower once per repetition") {
    const auto runs = run_simulation1(sim_theta(0.5), 6, 11);
    for (const RunResult& run : runs) {
        REQUIRE(run.trials.size() == 12);
        for (int r = 1; r <= kRepetitions; ++r) {
            std::set<TowerId> seen;
            for (std::size_t k = 0; k < 3; ++k) {
                const auto& t = run.trials[static_cast<std::size_t>(r - 1) * 3 + k];
                CHECK(t.repetition == r);
                seen.insert(t.tower);
            }
            CHECK(seen.size() == 3);
        }
        for (const TrialRecord& t : run.trials) {
            CHECK(t.program_length == program_length(t.program_used));
            CHECK(t.decoded.size() == t.program_used.symbols().size());
            if (t.program_index == 0) CHECK(t.success);
        }
        double si = 0.0, sb = 0.0;
        for (std::size_t i = 0; i < kNumLexicons; ++i) {
            si += run.instructor_belief[i];
            sb += run.builder_belief[i];
        }
        CHECK(std::abs(si - 1.0) < 1e-9);
        CHECK(std::abs(sb - 1.0) < 1e-9);
    }
}

TEST_CASE("simulation is reproducible and independent of thread count") {
    ConventionOptions one, four;
    four.threads = 4;
    const auto a = run_simulation1(sim_theta(1.0), 12, 2024, one);
    const auto b = run_simulation1(sim_theta(1.0), 12, 2024, four);
    const auto c = run_simulation1(sim_theta(1.0), 12, 2025, one);
    REQUIRE(a.size() == b.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].trials == b[i].trials);
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].builder_belief == b[i].builder_belief);
        differs = differs || !(a[i].trials == c[i].trials);
    }
    CHECK(differs);
    CHECK_THROWS_AS(run_simulation1(sim_theta(1.0), 0, 1), ValidationError);
}

TEST_CASE("aggregation") {
    auto record = [](int r, int len, bool ok) {
        TrialRecord t;
        t.repetition = r;
        t.program_length = len;
        t.success = ok;
        return t;
    };
    RunResult run;
    run.trials = {record(1, 6, true), record(1, 6, true), record(1, 2, false), record(2, 2, true)};
    const auto lengths = aggregate_lengths({run});
    CHECK(lengths[0].mean == doctest::Approx(14.0 / 3.0));
    CHECK(lengths[0].sd == doctest::Approx(std::sqrt(16.0 / 3.0)));
    CHECK(lengths[0].n == 3);
    CHECK(lengths[1].mean == 2.0);
    CHECK(lengths[1].sd == 0.0);
    CHECK(lengths[2].n == 0);
    const auto success = aggregate_success({run});
    CHECK(success[0].mean == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(aggregate_lengths({}), EmptyInput);
    CHECK_THROWS_AS(aggregate_success({}), EmptyInput);
}

TEST_CASE("cheaper words shorten programs over repetitions") {
    const auto lengths = aggregate_lengths(run_simulation1(sim_theta(1.0), 30, 7));
    CHECK(lengths[0].mean == doctest::Approx(6.0));
    CHECK(lengths[3].mean < lengths[0].mean);
    for (const auto& st : lengths) {
        CHECK(st.mean >= 2.0);
        CHECK(st.mean <= 6.0);
    }
}
