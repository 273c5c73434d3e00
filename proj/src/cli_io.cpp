#include "convsim/cli_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "convsim/errors.hpp"
#include "convsim/rng.hpp"

#include <unistd.h>

namespace convsim {

// ---- names ----------------------------------------------------------------------

std::string_view experiment_name(Experiment e) {
    switch (e) {
        case Experiment::SimAbstraction: return "sim-abstraction";
        case Experiment::SimModality: return "sim-modality";
        case Experiment::Fit: return "fit";
    }
    return "?";
}

Experiment parse_experiment(std::string_view s) {
    for (auto e : {Experiment::SimAbstraction, Experiment::SimModality, Experiment::Fit})
        if (experiment_name(e) == s) return e;
    throw ValidationError(fmt::format("unknown experiment '{}' (sim-abstraction, sim-modality, fit)", s));
}

std::string_view format_name(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat parse_format(std::string_view s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw ValidationError(fmt::format("unknown format '{}' (csv, json)", s));
}

std::string_view program_choice_name(ProgramChoice c) {
    switch (c) {
        case ProgramChoice::BestMessage: return "best_message";
        case ProgramChoice::Joint: return "joint";
        case ProgramChoice::Newest: return "newest";
    }
    return "?";
}

ProgramChoice parse_program_choice(std::string_view s) {
    for (auto c : {ProgramChoice::BestMessage, ProgramChoice::Joint, ProgramChoice::Newest})
        if (program_choice_name(c) == s) return c;
    throw ValidationError(fmt::format("unknown program_choice '{}' (best_message, joint, newest)", s));
}

// ---- defaults and validation ----------------------------------------------------------

namespace {

constexpr Semantics kFittedSemantics{0.87, 0.62};

void check_range(double v, double lo, double hi, const std::string& what) {
    if (!std::isfinite(v) || v < lo || v > hi)
        throw ValidationError(fmt::format("{} = {} is outside [{}, {}]", what, v, lo, hi));
}

void check_theta(const Theta& t, const std::string& where) {
    check_range(t.beta_i, 0.0, kMaxBeta, where + ".beta_i");
    for (int r = 1; r <= kRepetitions; ++r) {
        check_range(t.beta_u_at(r), 0.0, kMaxBeta, where + ".beta_u");
        check_range(t.beta_h_at(r), 0.0, kMaxBeta, where + ".beta_h");
    }
    check_range(t.gamma, 0.0, 1.0, where + ".gamma");
    check_range(t.sem.x_u, kMinSemantics, 1.0, where + ".x_u");
    check_range(t.sem.x_h, kMinSemantics, 1.0, where + ".x_h");
}

}  // namespace

void SimConfig::validate() const {
    if (n_runs < 1) throw ValidationError(fmt::format("n_runs = {} must be at least 1", n_runs));
    if (threads < 1) throw ValidationError(fmt::format("threads = {} must be at least 1", threads));
    if (output_path.empty()) throw ValidationError("output path is empty");
    switch (experiment) {
        case Experiment::SimAbstraction:
            if (conditions.empty()) throw ValidationError("sim-abstraction needs at least one condition");
            break;
        case Experiment::SimModality:
            if (conditions.empty()) throw ValidationError("sim-modality needs at least one R4 condition");
            check_theta(theta_r1, "r1");
            if (messages_per_repetition < 1)
                throw ValidationError(
                    fmt::format("messages_per_repetition = {} must be at least 1", messages_per_repetition));
            break;
        case Experiment::Fit:
            if (fit_targets.empty()) throw ValidationError("fit needs at least one target");
            if (n_init < 1) throw ValidationError(fmt::format("n_init = {} must be at least 1", n_init));
            if (n_iter < n_init) throw ValidationError(fmt::format("n_iter = {} is below n_init = {}", n_iter, n_init));
            check_range(fit_beta_i, 0.0, kMaxBeta, "beta_i");
            for (const auto& f : fit_targets) {
                if (f.repetition < 1 || f.repetition > kRepetitions)
                    throw ValidationError(fmt::format("fit target '{}': repetition {} is outside [1, {}]",
                                                      f.target.label, f.repetition, kRepetitions));
                f.target.observed.validate();
            }
            break;
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        const auto& c = conditions[i];
        if (c.name.empty()) throw ValidationError(fmt::format("conditions[{}] has an empty name", i));
        if (!names.insert(c.name).second) throw ValidationError(fmt::format("duplicate condition name '{}'", c.name));
        check_theta(c.theta, fmt::format("conditions[{}]", i));
    }
}

SimConfig default_config(Experiment e) {
    SimConfig c;
    c.experiment = e;
    c.seed = 1;
    switch (e) {
        case Experiment::SimAbstraction:
            c.n_runs = 100;
            c.output_path = "sim_abstraction.csv";
            for (double bu : {0.1, 0.5, 1.0})
                c.conditions.push_back({fmt::format("beta_u={}", bu), Theta::constant(0.3, bu, 0.0, 0.5, kFittedSemantics)});
            break;
        case Experiment::SimModality:
            c.n_runs = 200;
            c.output_path = "sim_modality.csv";
            c.theta_r1 = Theta::constant(10.0, 20.25, 9.23, 0.5, kFittedSemantics);
            c.conditions.push_back({"prefer_u", Theta::constant(10.0, 6.17, 10.15, 0.5, kFittedSemantics)});
            c.conditions.push_back({"prefer_h", Theta::constant(10.0, 21.01, 3.09, 0.5, kFittedSemantics)});
            break;
        case Experiment::Fit:
            c.n_runs = 1;
            c.output_path = "fit.json";
            c.format = OutputFormat::Json;
            // Block-position proportions in the first repetition, renormalized.
            c.fit_targets.push_back({{"R1", ModalityDistribution{0.81, 0.12, 0.06}.normalized()}, 1});
            // Group-specific last-repetition proportions are not reported
            // numerically; these two only encode the direction of each shift.
            c.fit_targets.push_back({{"R4_PreferU_placeholder", {0.50, 0.45, 0.05}}, 4});
            c.fit_targets.push_back({{"R4_PreferH_placeholder", {0.50, 0.05, 0.45}}, 4});
            break;
    }
    return c;
}

ModalityDistribution normalize_observed(const ModalityDistribution& d, std::string_view label,
                                        std::vector<std::string>& warnings) {
    const auto n = d.normalized();
    if (std::abs(d.sum() - 1.0) > 1e-9)
        warnings.push_back(fmt::format("fit target '{}' sums to {:.6f}; renormalized to ({:.4f}, {:.4f}, {:.4f})", label,
                                       d.sum(), n.p_r, n.p_u, n.p_c));
    return n;
}

// ---- YAML loading -------------------------------------------------------------

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] void parse_fail(const YAML::Node& n, const std::string& field, const std::string& why) {
    const int line = line_of(n);
    throw ParseError(fmt::format("line {}: {}: {}", line, field, why), line, field);
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& field, std::string_view expected) {
    if (!n.IsScalar()) parse_fail(n, field, fmt::format("expected {}", expected));
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        parse_fail(n, field, fmt::format("expected {}, got '{}'", expected, n.Scalar()));
    }
}

double real(const YAML::Node& n, const std::string& field) { return scalar<double>(n, field, "a number"); }
int integer(const YAML::Node& n, const std::string& field) { return scalar<int>(n, field, "an integer"); }
std::string text(const YAML::Node& n, const std::string& field) { return scalar<std::string>(n, field, "a string"); }

void require_map(const YAML::Node& n, const std::string& field, const std::set<std::string>& allowed) {
    if (!n.IsMap()) parse_fail(n, field, "expected a mapping");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key))
            parse_fail(kv.first, field.empty() ? key : field + "." + key, "unknown key");
    }
}

// Converts library validation errors raised on a parsed value into parse
// errors that point at the value.
template <typename F>
auto at(const YAML::Node& n, const std::string& field, F&& f) {
    try {
        return f();
    } catch (const ParseError&) {
        throw;
    } catch (const ValidationError& e) {
        parse_fail(n, field, e.what());
    }
}

Theta theta_block(const YAML::Node& n, const std::string& field, const Theta& base) {
    require_map(n, field, {"name", "beta_i", "beta_u", "beta_h", "gamma", "x_u", "x_h"});
    Theta t = base;
    if (n["beta_i"]) t.beta_i = real(n["beta_i"], field + ".beta_i");
    if (n["beta_u"]) t.beta_u.fill(real(n["beta_u"], field + ".beta_u"));
    if (n["beta_h"]) t.beta_h.fill(real(n["beta_h"], field + ".beta_h"));
    if (n["gamma"]) t.gamma = real(n["gamma"], field + ".gamma");
    if (n["x_u"]) t.sem.x_u = real(n["x_u"], field + ".x_u");
    if (n["x_h"]) t.sem.x_h = real(n["x_h"], field + ".x_h");
    return t;
}

ModalityDistribution observed_block(const YAML::Node& n, const std::string& field) {
    require_map(n, field, {"redundant", "language_only", "complementary"});
    for (const char* k : {"redundant", "language_only", "complementary"})
        if (!n[k]) parse_fail(n, field + "." + k, "missing");
    return {real(n["redundant"], field + ".redundant"), real(n["language_only"], field + ".language_only"),
            real(n["complementary"], field + ".complementary")};
}

}  // namespace

SimConfig parse_config(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::ParserException& e) {
        throw ParseError(fmt::format("line {}: {}", e.mark.line + 1, e.msg), e.mark.line + 1, "");
    }
    if (!root || root.IsNull()) throw ParseError("line 0: empty configuration", 0, "");
    require_map(root, "", {"experiment", "seed", "n_runs", "threads", "output", "format", "program_choice", "gamma",
                           "x_u", "x_h", "conditions", "r1", "messages_per_repetition", "fit_targets", "n_init",
                           "n_iter", "beta_i"});
    if (!root["experiment"]) parse_fail(root, "experiment", "missing");
    const auto exp_node = root["experiment"];
    SimConfig c = default_config(at(exp_node, "experiment", [&] { return parse_experiment(text(exp_node, "experiment")); }));

    if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed", "an unsigned 64-bit integer");
    if (root["n_runs"]) c.n_runs = integer(root["n_runs"], "n_runs");
    if (root["threads"]) c.threads = integer(root["threads"], "threads");
    if (root["output"]) c.output_path = text(root["output"], "output");
    if (root["format"]) c.format = at(root["format"], "format", [&] { return parse_format(text(root["format"], "format")); });
    if (root["program_choice"])
        c.program_choice = at(root["program_choice"], "program_choice",
                              [&] { return parse_program_choice(text(root["program_choice"], "program_choice")); });
    if (root["messages_per_repetition"])
        c.messages_per_repetition = integer(root["messages_per_repetition"], "messages_per_repetition");
    if (root["n_init"]) c.n_init = integer(root["n_init"], "n_init");
    if (root["n_iter"]) c.n_iter = integer(root["n_iter"], "n_iter");

    // File-wide gamma and semantics; blocks may override them.
    Theta base = c.experiment == Experiment::SimModality ? c.theta_r1
                 : c.conditions.empty()                  ? Theta::constant(10.0, 0.0, 0.0, 0.5, kFittedSemantics)
                                                         : c.conditions.front().theta;
    if (root["gamma"]) base.gamma = real(root["gamma"], "gamma");
    if (root["x_u"]) base.sem.x_u = real(root["x_u"], "x_u");
    if (root["x_h"]) base.sem.x_h = real(root["x_h"], "x_h");
    if (root["beta_i"]) {
        if (c.experiment != Experiment::Fit) parse_fail(root["beta_i"], "beta_i", "only valid for fit; set it per condition");
        c.fit_beta_i = real(root["beta_i"], "beta_i");
    }
    for (auto& cond : c.conditions) {
        cond.theta.gamma = base.gamma;
        cond.theta.sem = base.sem;
    }
    c.theta_r1.gamma = base.gamma;
    c.theta_r1.sem = base.sem;

    if (root["r1"]) {
        if (c.experiment != Experiment::SimModality) parse_fail(root["r1"], "r1", "only valid for sim-modality");
        c.theta_r1 = theta_block(root["r1"], "r1", c.theta_r1);
        if (root["r1"]["name"]) parse_fail(root["r1"]["name"], "r1.name", "unknown key");
    }

    if (const auto conds = root["conditions"]) {
        if (c.experiment == Experiment::Fit) parse_fail(conds, "conditions", "not used by fit; use fit_targets");
        if (!conds.IsSequence() || conds.size() == 0) parse_fail(conds, "conditions", "expected a non-empty list");
        c.conditions.clear();
        for (std::size_t i = 0; i < conds.size(); ++i) {
            const auto field = fmt::format("conditions[{}]", i);
            const auto& n = conds[i];
            Theta t = theta_block(n, field, c.experiment == Experiment::SimModality ? c.theta_r1 : base);
            if (c.experiment == Experiment::SimModality) {
                for (const char* k : {"beta_i", "gamma", "x_u", "x_h"})
                    if (n[k]) parse_fail(n[k], field + "." + k, "R4 conditions take beta_u and beta_h only");
            }
            for (const char* k : {"beta_u", "beta_h"})
                if (!n[k] && !(c.experiment == Experiment::SimAbstraction && std::string_view(k) == "beta_h"))
                    parse_fail(n, field + "." + k, "missing");
            if (c.experiment == Experiment::SimAbstraction && !n["beta_h"]) t.beta_h.fill(0.0);
            std::string name = n["name"] ? text(n["name"], field + ".name") : fmt::format("condition_{}", i + 1);
            c.conditions.push_back({std::move(name), t});
        }
    }

    if (const auto targets = root["fit_targets"]) {
        if (c.experiment != Experiment::Fit) parse_fail(targets, "fit_targets", "only valid for fit");
        if (!targets.IsSequence() || targets.size() == 0) parse_fail(targets, "fit_targets", "expected a non-empty list");
        c.fit_targets.clear();
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto field = fmt::format("fit_targets[{}]", i);
            const auto& n = targets[i];
            require_map(n, field, {"label", "repetition", "observed"});
            if (!n["label"]) parse_fail(n, field + ".label", "missing");
            if (!n["observed"]) parse_fail(n, field + ".observed", "missing");
            FitSpec spec;
            spec.target.label = text(n["label"], field + ".label");
            if (n["repetition"]) spec.repetition = integer(n["repetition"], field + ".repetition");
            const auto raw = observed_block(n["observed"], field + ".observed");
            spec.target.observed = at(n["observed"], field + ".observed",
                                      [&] { return normalize_observed(raw, spec.target.label, c.warnings); });
            c.fit_targets.push_back(std::move(spec));
        }
    }

    c.validate();
    return c;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---- result files -------------------------------------------------------------

namespace {

std::string fixed6(double v) {
    if (!std::isfinite(v)) throw ValidationError(fmt::format("cannot write non-finite value {}", v));
    auto s = fmt::format("{:.6f}", v);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line, int line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (quoted) throw ParseError(fmt::format("line {}: unterminated quote", line_no), line_no, "");
    fields.push_back(std::move(cur));
    return fields;
}

template <typename T>
T number(const std::string& s, int line_no, const char* field) {
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError(fmt::format("line {}: {}: bad number '{}'", line_no, field, s), line_no, field);
    return v;
}

}  // namespace

std::string format_rows(const std::vector<OutputRow>& rows, OutputFormat format) {
    if (rows.empty()) throw EmptyInput("no result rows to write");
    std::string out;
    if (format == OutputFormat::Csv) {
        out += kCsvHeader;
        out += '\n';
        for (const auto& r : rows)
            out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(r.experiment), csv_field(r.condition), r.repetition,
                               csv_field(r.metric), fixed6(r.value), r.n, fixed6(r.sd));
        return out;
    }
    out += "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out += fmt::format(
            "  {{\"experiment\": {}, \"condition\": {}, \"repetition\": {}, \"metric\": {}, \"value\": {}, \"n\": {}, "
            "\"sd\": {}}}{}\n",
            nlohmann::json(r.experiment).dump(), nlohmann::json(r.condition).dump(), r.repetition,
            nlohmann::json(r.metric).dump(), fixed6(r.value), r.n, fixed6(r.sd), i + 1 < rows.size() ? "," : "");
    }
    out += "]\n";
    return out;
}

std::vector<OutputRow> parse_rows(std::string_view text, OutputFormat format) {
    std::vector<OutputRow> rows;
    if (format == OutputFormat::Json) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
            for (const auto& o : j)
                rows.push_back({o.at("experiment").get<std::string>(), o.at("condition").get<std::string>(),
                                o.at("repetition").get<int>(), o.at("metric").get<std::string>(),
                                o.at("value").get<double>(), o.at("n").get<std::size_t>(), o.at("sd").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(fmt::format("bad results JSON: {}", e.what()), 0, "");
        }
        return rows;
    }
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != kCsvHeader) throw ParseError("line 1: unexpected CSV header", 1, "header");
            continue;
        }
        if (line.empty()) continue;
        const auto f = split_csv_line(line, line_no);
        if (f.size() != 7)
            throw ParseError(fmt::format("line {}: expected 7 fields, got {}", line_no, f.size()), line_no, "");
        rows.push_back({f[0], f[1], number<int>(f[2], line_no, "repetition"), f[3], number<double>(f[4], line_no, "value"),
                        number<std::size_t>(f[5], line_no, "n"), number<double>(f[6], line_no, "sd")});
    }
    return rows;
}

void write_results(const std::vector<OutputRow>& rows, const std::filesystem::path& path, OutputFormat format) {
    const std::string body = format_rows(rows, format);
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", path.parent_path().string(), ec.message()));
    }
    fs::path tmp = path;
    tmp += fmt::format(".tmp{}", static_cast<long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot open '{}' for writing", tmp.string()));
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError(fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw IoError(fmt::format("cannot move results into '{}': {}", path.string(), ec.message()));
    }
}

std::vector<OutputRow> read_results(const std::filesystem::path& path, OutputFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rows(ss.str(), format);
}

// ---- orchestration ----------------------------------------------------------------

namespace {

std::vector<OutputRow> run_abstraction(const SimConfig& c, std::ostream& summary) {
    std::vector<OutputRow> rows;
    ConventionOptions opts;
    opts.program_choice = c.program_choice;
    opts.threads = c.threads;
    const std::string exp(experiment_name(c.experiment));
    for (const auto& cond : c.conditions) {
        const auto runs = run_simulation1(cond.theta, c.n_runs, c.seed, opts);
        const auto lengths = aggregate_lengths(runs);
        const auto success = aggregate_success(runs);
        std::string line = fmt::format("{}: program length", cond.name);
        for (int r = 0; r < kRepetitions; ++r) {
            rows.push_back({exp, cond.name, r + 1, "program_length", lengths[r].mean, lengths[r].n, lengths[r].sd});
            rows.push_back({exp, cond.name, r + 1, "success_rate", success[r].mean, success[r].n, success[r].sd});
            line += fmt::format(" R{}={:.3f}", r + 1, lengths[r].mean);
        }
        summary << line << fmt::format(", success R4={:.3f}\n", success[kRepetitions - 1].mean);
    }
    return rows;
}

std::vector<OutputRow> run_modality(const SimConfig& c, std::ostream& summary) {
    std::vector<OutputRow> rows;
    PreferenceOptions opts;
    opts.messages_per_repetition = c.messages_per_repetition;
    opts.threads = c.threads;
    const std::string exp(experiment_name(c.experiment));
    for (const auto& cond : c.conditions) {
        const auto traj = simulate_modality_preferences(c.theta_r1, cond.theta, c.n_runs, c.seed, opts);
        for (int r = 0; r < kRepetitions; ++r) {
            const auto n = static_cast<std::size_t>(traj.n_runs);
            rows.push_back({exp, cond.name, r + 1, "p_redundant", traj.mean[r].p_r, n, traj.sd[r].p_r});
            rows.push_back({exp, cond.name, r + 1, "p_language_only", traj.mean[r].p_u, n, traj.sd[r].p_u});
            rows.push_back({exp, cond.name, r + 1, "p_complementary", traj.mean[r].p_c, n, traj.sd[r].p_c});
        }
        const auto& a = traj.mean.front();
        const auto& b = traj.mean.back();
        summary << fmt::format("{}: language-only {:.3f} -> {:.3f}, complementary {:.3f} -> {:.3f}\n", cond.name, a.p_u,
                               b.p_u, a.p_c, b.p_c);
    }
    return rows;
}

std::vector<OutputRow> run_fit(const SimConfig& c, std::ostream& summary) {
    std::vector<OutputRow> rows;
    const std::string exp(experiment_name(c.experiment));
    std::optional<Semantics> r1_sem;

    // First-repetition targets are fitted first so later ones can reuse their semantics.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < c.fit_targets.size(); ++i)
        if (c.fit_targets[i].repetition == 1) order.push_back(i);
    for (std::size_t i = 0; i < c.fit_targets.size(); ++i)
        if (c.fit_targets[i].repetition != 1) order.push_back(i);

    const double gamma = c.theta_r1.gamma;  // file-wide gamma lands here for every experiment
    for (std::size_t i : order) {
        const auto& spec = c.fit_targets[i];
        Bounds bounds = modality_fit_bounds();
        bounds.ranges[kBetaI].lower = bounds.ranges[kBetaI].upper = c.fit_beta_i;
        if (spec.repetition != 1 && r1_sem)
            bounds = modality_fit_bounds_fixed_semantics(r1_sem->x_u, r1_sem->x_h, c.fit_beta_i);

        FitOptions opts;
        opts.n_init = c.n_init;
        opts.n_iter = c.n_iter;
        opts.seed = stream_seed(c.seed, i);
        opts.threads = c.threads;
        opts.gamma = gamma;
        const auto fit = fit_modality(spec.target, bounds, opts);
        if (spec.repetition == 1 && !r1_sem) r1_sem = fit.theta.sem;

        const auto n = fit.record.evaluations.size();
        const auto& p = fit.record.best_point;
        const auto& label = spec.target.label;
        for (const auto& [name, idx] : {std::pair{"beta_i", kBetaI}, std::pair{"beta_u", kBetaU},
                                        std::pair{"beta_h", kBetaH}, std::pair{"x_u", kXu}, std::pair{"x_h", kXh}})
            rows.push_back({exp, label, spec.repetition, fmt::format("best_theta.{}", name), p[idx], n, 0.0});
        rows.push_back({exp, label, spec.repetition, "best_loss", fit.best_loss, n, 0.0});
        rows.push_back({exp, label, spec.repetition, "target_entropy", fit.target_entropy, n, 0.0});
        const auto pred = predicted_modality_distribution(fit.theta);
        rows.push_back({exp, label, spec.repetition, "pred_redundant", pred.p_r, n, 0.0});
        rows.push_back({exp, label, spec.repetition, "pred_language_only", pred.p_u, n, 0.0});
        rows.push_back({exp, label, spec.repetition, "pred_complementary", pred.p_c, n, 0.0});
        summary << fmt::format(
            "{}: beta_u={:.3f} beta_h={:.3f} x_u={:.3f} x_h={:.3f} loss={:.4f} (target entropy {:.4f})\n", label,
            p[kBetaU], p[kBetaH], p[kXu], p[kXh], fit.best_loss, fit.target_entropy);
    }
    return rows;
}

}  // namespace

std::vector<OutputRow> run_experiment(const SimConfig& config, std::ostream& summary) {
    config.validate();
    switch (config.experiment) {
        case Experiment::SimAbstraction: return run_abstraction(config, summary);
        case Experiment::SimModality: return run_modality(config, summary);
        case Experiment::Fit: return run_fit(config, summary);
    }
    return {};
}

int run_command(const SimConfig& config, std::ostream& summary, std::ostream& err) {
    try {
        const auto rows = run_experiment(config, summary);
        write_results(rows, config.output_path, config.format);
        summary << fmt::format("wrote {} rows to {}\n", rows.size(), config.output_path.string());
        return 0;
    } catch (const ValidationError& e) {
        err << "error: validation: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: runtime: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace convsim
