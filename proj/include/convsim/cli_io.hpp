#pragma once

// Experiment configuration, orchestration and result files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convsim/agents.hpp"
#include "convsim/convention.hpp"
#include "convsim/preference.hpp"

namespace convsim {

enum class Experiment : std::uint8_t { SimAbstraction, SimModality, Fit };
enum class OutputFormat : std::uint8_t { Csv, Json };

std::string_view experiment_name(Experiment e);
Experiment parse_experiment(std::string_view s);  // ValidationError
std::string_view format_name(OutputFormat f);
OutputFormat parse_format(std::string_view s);  // ValidationError
std::string_view program_choice_name(ProgramChoice c);
ProgramChoice parse_program_choice(std::string_view s);  // ValidationError

// One named parameter set. For sim-modality the conditions are R4 endpoints
// and only their beta_u / beta_h are used.
struct Condition {
    std::string name;
    Theta theta;
};

struct FitSpec {
    FitTarget target;
    int repetition = 1;  // 4: semantics held at the R1 fit when one is present
};

struct SimConfig {
    Experiment experiment = Experiment::SimAbstraction;
    std::uint64_t seed = 0;
    int n_runs = 100;
    int threads = 1;
    std::filesystem::path output_path = "results.csv";
    OutputFormat format = OutputFormat::Csv;

    std::vector<Condition> conditions;

    // sim-abstraction
    ProgramChoice program_choice = ProgramChoice::BestMessage;

    // sim-modality
    Theta theta_r1;
    int messages_per_repetition = 9;

    // fit
    std::vector<FitSpec> fit_targets;
    int n_init = 40;
    int n_iter = 200;
    double fit_beta_i = 10.0;

    // Non-fatal notes produced while loading (e.g. renormalized targets).
    std::vector<std::string> warnings;

    // ValidationError naming the violated bound.
    void validate() const;
};

inline constexpr double kMaxBeta = 40.0;
inline constexpr double kMinSemantics = 0.5;

// Built-in parameter sets of the two simulations and the fit.
SimConfig default_config(Experiment e);

// YAML file; keys not given keep the defaults of the named experiment.
// ParseError carries the 1-based line and the offending key.
SimConfig load_config(const std::filesystem::path& path);
SimConfig parse_config(std::string_view yaml_text);

// Renormalizes to sum 1; appends a warning when the input sum was not 1.
ModalityDistribution normalize_observed(const ModalityDistribution& d, std::string_view label,
                                        std::vector<std::string>& warnings);

struct OutputRow {
    std::string experiment;
    std::string condition;
    int repetition = 0;
    std::string metric;
    double value = 0.0;
    std::size_t n = 0;
    double sd = 0.0;

    friend bool operator==(const OutputRow&, const OutputRow&) = default;
};

inline constexpr std::string_view kCsvHeader = "experiment,condition,repetition,metric,value,n,sd";

std::string format_rows(const std::vector<OutputRow>& rows, OutputFormat format);  // EmptyInput
std::vector<OutputRow> parse_rows(std::string_view text, OutputFormat format);      // ParseError
// Atomic: written to a sibling temp file, then renamed. EmptyInput, IoError.
void write_results(const std::vector<OutputRow>& rows, const std::filesystem::path& path, OutputFormat format);
std::vector<OutputRow> read_results(const std::filesystem::path& path, OutputFormat format);

// Runs the configured experiment and returns its rows; one summary line per
// condition goes to `summary`.
std::vector<OutputRow> run_experiment(const SimConfig& config, std::ostream& summary);

// run_experiment + write_results. Returns 0, or 1 for validation errors and 2
// for runtime errors after printing a structured message to `err`.
int run_command(const SimConfig& config, std::ostream& summary, std::ostream& err);

}  // namespace convsim
