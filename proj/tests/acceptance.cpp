// End-to-end acceptance checks. One PASS/FAIL line per criterion; exits
// nonzero if any fails.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <sys/wait.h>

#include "convsim/cli_io.hpp"
#include "convsim/convention.hpp"
#include "convsim/errors.hpp"
#include "convsim/preference.hpp"
#include "oracle.hpp"
#include "random_cases.hpp"

using namespace convsim;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    fmt::print("criterion {} {}: {}\n", id, ok ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Program length shrinks with the utterance-cost weight.
void criterion1() {
    const SimConfig cfg = default_config(Experiment::SimAbstraction);
    std::vector<std::array<RepetitionStats, kRepetitions>> lengths;
    for (const Condition& c : cfg.conditions) lengths.push_back(aggregate_lengths(run_simulation1(c.theta, 100, cfg.seed)));
    // conditions are beta_u = 0.1, 0.5, 1.0
    const double l01 = lengths[0][3].mean, l05 = lengths[1][3].mean, l10 = lengths[2][3].mean;
    bool ok = l10 < l05 && l05 < l01 && std::abs(l10 - 2.0) <= 0.75;
    for (const auto& cond : lengths)
        for (int r = 1; r < kRepetitions; ++r) ok = ok && cond[r].mean <= cond[r - 1].mean + 0.2;
    std::string trace;
    for (std::size_t i = 0; i < lengths.size(); ++i)
        trace += fmt::format(" {}=[{:.2f} {:.2f} {:.2f} {:.2f}]", cfg.conditions[i].name, lengths[i][0].mean,
                             lengths[i][1].mean, lengths[i][2].mean, lengths[i][3].mean);
    report(1, ok, fmt::format("R4 lengths {:.3f} < {:.3f} < {:.3f};{}", l10, l05, l01, trace));
}

// Fitted endpoints move preferences toward language-only / complementary.
void criterion2() {
    const SimConfig cfg = default_config(Experiment::SimModality);
    const Theta& r1 = cfg.theta_r1;
    const Theta& prefer_u = cfg.conditions.at(0).theta;
    const Theta& prefer_h = cfg.conditions.at(1).theta;
    const auto u = simulate_modality_preferences(r1, prefer_u, 200, cfg.seed);
    const auto h = simulate_modality_preferences(r1, prefer_h, 200, cfg.seed);
    const double du = u.mean[3].p_u - u.mean[0].p_u;
    const double dh = h.mean[3].p_c - h.mean[0].p_c;
    const double eu = predicted_modality_distribution(interpolate_theta(r1, prefer_u), 4).p_u -
                      predicted_modality_distribution(r1, 1).p_u;
    const double eh = predicted_modality_distribution(interpolate_theta(r1, prefer_h), 4).p_c -
                      predicted_modality_distribution(r1, 1).p_c;
    const bool ok = du >= 0.05 && dh >= 0.05;
    report(2, ok,
           fmt::format("Prefer U language-only +{:.4f} (expected +{:.4f}); Prefer H complementary +{:.4f} "
                       "(expected +{:.4f}); threshold 0.05",
                       du, eu, dh, eh));
}

// Fits to synthetic targets come within 0.02 of the target entropy.
void criterion3() {
    Rng rng(2718);
    double worst = 0.0;
    const Bounds b = modality_fit_bounds();
    for (int draw = 0; draw < 10; ++draw) {
        std::array<double, 5> truth{};
        for (std::size_t k = 0; k < truth.size(); ++k) truth[k] = rng.uniform(b.ranges[k].lower, b.ranges[k].upper);
        const FitTarget target{"synthetic", predicted_modality_distribution(theta_from_params(truth))};
        FitOptions opt;
        opt.seed = stream_seed(2718, static_cast<std::uint64_t>(draw));
        const FitResult fit = fit_modality(target, b, opt);
        worst = std::max(worst, fit.best_loss - fit.target_entropy);
    }
    report(3, worst < 0.02, fmt::format("worst excess cross-entropy over 10 targets {:.3g}", worst));
}

// One consensus pair under exact semantics leaves 1/24 on each consistent lexicon.
void criterion4() {
    const Theta t = Theta::constant(1.0, 1.0, 1.0, 0.5, {1.0, 1.0});
    const Symbol c = Symbol::chunk(Chunk::C);
    const std::vector<Observation> obs{{SubMessage(word_utterance(Word::Alpha), std::nullopt, c), c}};
    bool ok = true;
    double worst = 0.0;
    int consistent = 0;
    for (UpdateSide side : {UpdateSide::Instructor, UpdateSide::Builder}) {
        const auto post = update_belief(LexiconBelief::uniform(), obs, side, t);
        consistent = 0;
        for (std::size_t l = 0; l < kNumLexicons; ++l) {
            const bool alpha_is_c = oracle::lexicons()[l][0] == static_cast<int>(Chunk::C);
            consistent += alpha_is_c;
            const double want = alpha_is_c ? 1.0 / 24.0 : 0.0;
            worst = std::max(worst, std::abs(post[l] - want));
            ok = ok && (alpha_is_c ? std::abs(post[l] * 24.0 - 1.0) <= 4e-16 : post[l] == 0.0);
        }
    }
    ok = ok && consistent == 24;
    report(4, ok, fmt::format("{} consistent lexicons, max deviation from 1/24 {:.3g}", consistent, worst));
}

// Single-step gesture-free multimodal utility equals the classic speaker utility.
void criterion5() {
    const Theta t = Theta::constant(1.0, 1.0, 0.0, 0.5, {1.0, 1.0});
    const auto belief = LexiconBelief::point_mass(Lexicon{});
    const std::vector<Symbol> space(all_positions().begin(), all_positions().end());
    double worst = 0.0;
    bool ok = true;
    int pairs = 0;
    for (const Symbol& target : all_positions())
        for (const Symbol& named : all_positions()) {
            const Signal u = position_utterance(named);
            const double multimodal = submessage_utility(SubMessage(u, std::nullopt, target), t, 1, belief);
            const double classic = classic_speaker_utility(u, target, space, {1.0, 1.0});
            ++pairs;
            if (std::isinf(classic) || std::isinf(multimodal)) {
                ok = ok && multimodal == classic;
                continue;
            }
            worst = std::max(worst, std::abs(multimodal - classic));
        }
    ok = ok && worst < 1e-12;
    report(5, ok, fmt::format("{} (target, utterance) pairs, max diff {:.3g}", pairs, worst));
}

// Pragmatic Builder agrees with the naive 120-lexicon reference.
void criterion6() {
    Rng rng(6);
    double worst = 0.0;
    int mismatched_errors = 0, zero_mass = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto c = cases::random_case(rng);
        const auto space = oracle::space_of(c.message.intended());
        const auto belief = LexiconBelief::from_weights(c.belief);
        std::vector<double> want, got;
        bool oracle_zero = false, lib_zero = false;
        try {
            want = oracle::pragmatic_builder(c.message, space, belief.probs(), c.theta, c.repetition);
        } catch (const std::domain_error&) {
            oracle_zero = true;
        }
        try {
            got = pragmatic_builder_distribution(c.message, space, belief, c.theta, c.repetition);
        } catch (const ZeroMass&) {
            lib_zero = true;
        }
        if (oracle_zero || lib_zero) {
            mismatched_errors += oracle_zero != lib_zero;
            zero_mass += oracle_zero && lib_zero;
            continue;
        }
        for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
    }
    const bool ok = worst < 1e-12 && mismatched_errors == 0;
    report(6, ok,
           fmt::format("1000 cases, max abs diff {:.3g} ({} agreed zero-mass cases, {} disagreements)", worst,
                       zero_mass, mismatched_errors));
}

// Literal Builder spot values against the enumeration oracle.
void criterion7() {
    const Semantics sem{0.87, 0.62};
    const std::vector<Symbol> space(all_positions().begin(), all_positions().end());
    const Symbol p11 = Symbol::position(1, 1), p33 = Symbol::position(3, 3);
    const SubMessage amb(here_utterance(), point_gesture(p11), p11);
    const SubMessage clear(position_utterance(p33), point_gesture(p33), p33);
    const double a = literal_builder_distribution(amb, space, sem, Lexicon{})[0];
    const double b = literal_builder_distribution(clear, space, sem, Lexicon{})[8];
    const double oa = oracle::literal_builder(amb.utterance(), amb.gesture(), space, 0.87, 0.62, oracle::lexicons()[0])[0];
    const double ob =
        oracle::literal_builder(clear.utterance(), clear.gesture(), space, 0.87, 0.62, oracle::lexicons()[0])[8];
    const bool ok = std::abs(a - 0.1694) < 1e-4 && std::abs(b - 0.5772) < 1e-4 && std::abs(a - oa) < 1e-4 &&
                    std::abs(b - ob) < 1e-4;
    report(7, ok, fmt::format("ambiguous+point {:.4f}, clear+point {:.4f} (oracle {:.4f}, {:.4f})", a, b, oa, ob));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Byte-identical CLI output on reruns, serial and parallel.
void criterion8(const std::string& cli) {
    const fs::path dir = fs::temp_directory_path() / "convsim_acceptance";
    fs::create_directories(dir);
    bool ok = true;
    std::string detail;
    for (const char* exp : {"sim-abstraction", "sim-modality", "fit"}) {
        std::string first;
        bool same = true;
        int runs = 0;
        for (int threads : {1, 1, 4}) {
            const fs::path out = dir / fmt::format("{}_{}_{}.out", exp, threads, runs);
            fs::remove(out);
            const int code = run(fmt::format("{} {} --seed 17 --threads {} --out {}", cli, exp, threads, out.string()));
            const std::string bytes = code == 0 ? slurp(out) : std::string();
            if (code != 0 || bytes.empty()) same = false;
            if (runs++ == 0)
                first = bytes;
            else
                same = same && bytes == first;
        }
        ok = ok && same;
        detail += fmt::format(" {}={}", exp, same ? "identical" : "DIFFERENT");
    }
    report(8, ok, "three runs each (threads 1, 1, 4):" + detail);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "convsim";
    try {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        criterion6();
        criterion7();
        criterion8(cli);
    } catch (const std::exception& e) {
        fmt::print("acceptance aborted: {}\n", e.what());
        return 2;
    }
    fmt::print("{} of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
