// convsim: run the convention-formation experiments from the command line.
//
//   convsim sim-abstraction [--config FILE] [--seed N] [--runs N] [--beta-u X] ...
//   convsim sim-modality    ...
//   convsim fit             ...
//
// Flags override the config file, which overrides the built-in defaults.
// Exit status: 0 success, 1 invalid input, 2 runtime failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "convsim/cli_io.hpp"
#include "convsim/errors.hpp"

using namespace convsim;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs, threads, n_init, n_iter;
    std::optional<double> beta_u, beta_h, beta_i, gamma;
    std::optional<std::string> out, format, program_choice;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "YAML configuration file");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--runs", o.runs, "runs per condition");
    cmd->add_option("--beta-u", o.beta_u, "utterance-cost weight");
    cmd->add_option("--beta-h", o.beta_h, "gesture-cost weight");
    cmd->add_option("--beta-i", o.beta_i, "informativeness weight");
    cmd->add_option("--gamma", o.gamma, "utterance/gesture mixture weight");
    cmd->add_option("--out", o.out, "output file");
    cmd->add_option("--format", o.format, "csv or json");
    cmd->add_option("--threads", o.threads, "worker threads");
}

SimConfig build_config(Experiment e, const Overrides& o) {
    SimConfig c = o.config.empty() ? default_config(e) : load_config(o.config);
    if (c.experiment != e)
        throw ValidationError("config file is for '" + std::string(experiment_name(c.experiment)) +
                              "', not '" + std::string(experiment_name(e)) + "'");
    if (o.seed) c.seed = *o.seed;
    if (o.runs) c.n_runs = *o.runs;
    if (o.threads) c.threads = *o.threads;
    if (o.out) c.output_path = *o.out;
    if (o.format) c.format = parse_format(*o.format);
    if (o.program_choice) c.program_choice = parse_program_choice(*o.program_choice);
    if (o.n_init) c.n_init = *o.n_init;
    if (o.n_iter) c.n_iter = *o.n_iter;
    if (o.gamma) {
        c.theta_r1.gamma = *o.gamma;
        for (auto& cond : c.conditions) cond.theta.gamma = *o.gamma;
    }

    switch (e) {
        case Experiment::SimAbstraction:
            if (o.beta_u) {
                // A single condition at the requested weight.
                Condition one = c.conditions.front();
                one.theta.beta_u.fill(*o.beta_u);
                one.name = fmt::format("beta_u={}", *o.beta_u);
                c.conditions = {one};
            }
            for (auto& cond : c.conditions) {
                if (o.beta_i) cond.theta.beta_i = *o.beta_i;
                if (o.beta_h) cond.theta.beta_h.fill(*o.beta_h);
            }
            break;
        case Experiment::SimModality:
            // Weights apply to the first-repetition parameters.
            if (o.beta_i) c.theta_r1.beta_i = *o.beta_i;
            if (o.beta_u) c.theta_r1.beta_u.fill(*o.beta_u);
            if (o.beta_h) c.theta_r1.beta_h.fill(*o.beta_h);
            break;
        case Experiment::Fit:
            if (o.beta_u || o.beta_h) throw ValidationError("--beta-u and --beta-h are fitted, not set, by 'fit'");
            if (o.beta_i) c.fit_beta_i = *o.beta_i;
            break;
    }
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multimodal convention-formation simulator"};
    app.require_subcommand(1);

    Overrides abstraction, modality, fit;
    auto* sim1 = app.add_subcommand("sim-abstraction", "chunk abstraction over repetitions");
    add_common(sim1, abstraction);
    sim1->add_option("--program-choice", abstraction.program_choice, "best_message, joint or newest");
    auto* sim2 = app.add_subcommand("sim-modality", "modality preference over repetitions");
    add_common(sim2, modality);
    auto* fitc = app.add_subcommand("fit", "fit parameters to observed modality proportions");
    add_common(fitc, fit);
    fitc->add_option("--n-init", fit.n_init, "initial design points");
    fitc->add_option("--n-iter", fit.n_iter, "total loss evaluations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    Experiment e = Experiment::SimAbstraction;
    const Overrides* o = &abstraction;
    if (sim2->parsed()) {
        e = Experiment::SimModality;
        o = &modality;
    } else if (fitc->parsed()) {
        e = Experiment::Fit;
        o = &fit;
    }

    SimConfig config;
    try {
        config = build_config(e, *o);
    } catch (const ValidationError& err) {
        std::cerr << "error: validation: " << err.what() << '\n';
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: runtime: " << err.what() << '\n';
        return 2;
    }
    for (const auto& w : config.warnings) std::cerr << "warning: " << w << '\n';
    return run_command(config, std::cout, std::cerr);
}
