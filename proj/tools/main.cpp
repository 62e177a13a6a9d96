// Experiment front end: run tracking experiments from flat key-value config
// files, generate synthetic sequences, solve weight subproblems from the
// command line, and sweep parameters with paired seeds.
//
// Exit codes: 0 success, 2 configuration/parse error, 3 data/IO error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jtrack/eval.hpp"
#include "jtrack/tracking.hpp"
#include "jtrack/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::optional<fs::path> script_path;
    std::optional<fs::path> sequence_dir;
    fs::path out = "runs/out";
    std::uint64_t seed = 1;
    int reps = 1;
    std::string strategy = "joint";
    std::string format = "csv";
    double gamma = 0.035;
    jtrack::TrackerConfig tracker;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': malformed number '" + v + "'");
    }
}

long to_long(const std::string& v, const std::string& key) {
    const double x = to_double(v, key);
    if (x != std::floor(x)) throw ConfigError("key '" + key + "': expected an integer");
    return static_cast<long>(x);
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean");
}

void apply_key(RunConfig& rc, const std::string& key, const std::string& value) {
    auto& tc = rc.tracker;
    if (key == "source.script")
        rc.script_path = value;
    else if (key == "source.directory")
        rc.sequence_dir = value;
    else if (key == "out")
        rc.out = value;
    else if (key == "seed")
        rc.seed = static_cast<std::uint64_t>(to_long(value, key));
    else if (key == "reps")
        rc.reps = static_cast<int>(to_long(value, key));
    else if (key == "strategy")
        rc.strategy = value;
    else if (key == "format")
        rc.format = value;
    else if (key == "gamma")
        rc.gamma = to_double(value, key);
    else if (key == "joint.mu")
        tc.joint.mu = to_double(value, key);
    else if (key == "joint.acs_iterations")
        tc.joint.acs_iterations = static_cast<int>(to_long(value, key));
    else if (key == "joint.capacity")
        tc.joint.capacity = static_cast<int>(to_long(value, key));
    else if (key == "joint.activation_frame")
        tc.joint.activation_frame = to_long(value, key);
    else if (key == "joint.lambda")
        tc.joint.lambda = to_double(value, key);
    else if (key == "schedule.window")
        tc.joint.schedule.window = static_cast<int>(to_long(value, key));
    else if (key == "schedule.decay")
        tc.joint.schedule.decay = to_double(value, key);
    else if (key == "psr.threshold")
        tc.psr.threshold = value == "-inf" ? -std::numeric_limits<double>::infinity()
                                           : to_double(value, key);
    else if (key == "psr.exclusion_radius")
        tc.psr.exclusion_radius = static_cast<int>(to_long(value, key));
    else if (key == "features.grid_size")
        tc.features.grid_size = static_cast<int>(to_long(value, key));
    else if (key == "features.search_factor")
        tc.features.search_factor = to_double(value, key);
    else if (key == "features.cosine_window")
        tc.features.cosine_window = to_bool(value, key);
    else if (key == "features.orientation_channels")
        tc.features.orientation_channels = to_bool(value, key);
    else if (key == "features.label_sigma_factor")
        tc.features.label_sigma_factor = to_double(value, key);
    else
        throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_run_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    RunConfig rc;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected key = value");
        apply_key(rc, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return rc;
}

void finalize(RunConfig& rc) {
    if (rc.script_path.has_value() == rc.sequence_dir.has_value())
        throw ConfigError("exactly one of source.script / source.directory is required");
    if (rc.reps < 1) throw ConfigError("key 'reps': must be >= 1");
    if (rc.format != "csv" && rc.format != "json")
        throw ConfigError("key 'format': expected csv or json");
    if (rc.strategy == "joint")
        rc.tracker.strategy = jtrack::Strategy::joint;
    else if (rc.strategy == "fixed")
        rc.tracker.strategy = jtrack::Strategy::fixed_decay;
    else if (rc.strategy == "psr")
        rc.tracker.strategy = jtrack::Strategy::psr_gated;
    else
        throw ConfigError("key 'strategy': expected joint, fixed or psr");
    rc.tracker.gamma = rc.gamma;
    try {
        rc.tracker.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::pair<std::string, std::string>> echo_pairs(const RunConfig& rc) {
    const auto& tc = rc.tracker;
    std::vector<std::pair<std::string, std::string>> kv;
    if (rc.script_path) kv.emplace_back("source.script", rc.script_path->string());
    if (rc.sequence_dir) kv.emplace_back("source.directory", rc.sequence_dir->string());
    kv.emplace_back("seed", std::to_string(rc.seed));
    kv.emplace_back("reps", std::to_string(rc.reps));
    kv.emplace_back("strategy", rc.strategy);
    kv.emplace_back("format", rc.format);
    kv.emplace_back("gamma", fmt_double(rc.gamma));
    kv.emplace_back("joint.mu", fmt_double(tc.joint.mu));
    kv.emplace_back("joint.acs_iterations", std::to_string(tc.joint.acs_iterations));
    kv.emplace_back("joint.capacity", std::to_string(tc.joint.capacity));
    kv.emplace_back("joint.activation_frame", std::to_string(tc.joint.activation_frame));
    kv.emplace_back("joint.lambda", fmt_double(tc.joint.lambda));
    kv.emplace_back("schedule.window", std::to_string(tc.joint.schedule.window));
    kv.emplace_back("schedule.decay", fmt_double(tc.joint.schedule.decay));
    kv.emplace_back("psr.threshold", fmt_double(tc.psr.threshold));
    kv.emplace_back("psr.exclusion_radius", std::to_string(tc.psr.exclusion_radius));
    kv.emplace_back("features.grid_size", std::to_string(tc.features.grid_size));
    kv.emplace_back("features.search_factor", fmt_double(tc.features.search_factor));
    kv.emplace_back("features.cosine_window", tc.features.cosine_window ? "true" : "false");
    kv.emplace_back("features.orientation_channels",
                    tc.features.orientation_channels ? "true" : "false");
    kv.emplace_back("features.label_sigma_factor", fmt_double(tc.features.label_sigma_factor));
    return kv;
}

void write_config_echo(const RunConfig& rc, const fs::path& dir) {
    std::ofstream os(dir / "config_echo.cfg");
    if (!os) throw DataError("cannot write " + (dir / "config_echo.cfg").string());
    for (const auto& [k, v] : echo_pairs(rc))
        if (k != "source.script" && k != "source.directory")
            os << k << " = " << v << '\n';
        else
            os << k << " = " << v << '\n';
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

struct RunSummary {
    std::vector<double> op50, auc, ms;
};

jtrack::Sequence load_source(const RunConfig& rc, std::uint64_t seed) {
    try {
        if (rc.script_path)
            return jtrack::generate_sequence(jtrack::parse_script(*rc.script_path), seed);
        return jtrack::load_sequence(*rc.sequence_dir);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

RunSummary run_all_reps(const RunConfig& rc, const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!fs::is_directory(out)) throw DataError("cannot create output directory " + out.string());
    write_config_echo(rc, out);

    const auto format = rc.format == "csv" ? jtrack::eval::ReportFormat::csv
                                           : jtrack::eval::ReportFormat::json;
    RunSummary summary;
    for (int rep = 0; rep < rc.reps; ++rep) {
        const std::uint64_t seed = rc.seed + static_cast<std::uint64_t>(rep);
        jtrack::Sequence seq = load_source(rc, seed);
        jtrack::TrackReport report = jtrack::track(seq, rc.tracker, seed);
        auto echo = echo_pairs(rc);
        echo.emplace_back("rep", std::to_string(rep));
        echo.emplace_back("rep_seed", std::to_string(seed));
        report.config_echo = std::move(echo);

        const fs::path rep_dir = rc.reps == 1 ? out : out / ("rep" + std::to_string(rep));
        try {
            jtrack::eval::export_report(report, format, rep_dir);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
        summary.op50.push_back(jtrack::eval::overlap_precision(report, 0.5));
        summary.auc.push_back(jtrack::eval::auc(jtrack::eval::success_curve(report)));
        summary.ms.push_back(jtrack::eval::mean_ms_per_frame(report));
    }

    ordered_json agg;
    agg["reps"] = rc.reps;
    agg["seed"] = rc.seed;
    agg["op_50"] = {{"median", median(summary.op50)}, {"mean", mean(summary.op50)}};
    agg["auc"] = {{"median", median(summary.auc)}, {"mean", mean(summary.auc)}};
    agg["mean_ms_per_frame"] = {{"median", median(summary.ms)}, {"mean", mean(summary.ms)}};
    std::ofstream os(out / "aggregate.json");
    if (!os) throw DataError("cannot write " + (out / "aggregate.json").string());
    os << agg.dump(2) << '\n';
    return summary;
}

struct Overrides {
    std::optional<std::string> strategy, format;
    std::optional<double> mu, gamma, psr_threshold;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<std::string> out;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--strategy", ov.strategy, "Override strategy (joint|fixed|psr)");
    cmd->add_option("--mu", ov.mu, "Override joint.mu");
    cmd->add_option("--gamma", ov.gamma, "Override decay rate gamma");
    cmd->add_option("--psr-threshold", ov.psr_threshold, "Override psr.threshold");
    cmd->add_option("--seed", ov.seed, "Override base seed");
    cmd->add_option("--reps", ov.reps, "Override repetition count");
    cmd->add_option("--out", ov.out, "Override output directory");
    cmd->add_option("--format", ov.format, "Override report format (csv|json)");
}

void apply_overrides(RunConfig& rc, const Overrides& ov) {
    if (ov.strategy) rc.strategy = *ov.strategy;
    if (ov.format) rc.format = *ov.format;
    if (ov.mu) rc.tracker.joint.mu = *ov.mu;
    if (ov.gamma) rc.gamma = *ov.gamma;
    if (ov.psr_threshold) rc.tracker.psr.threshold = *ov.psr_threshold;
    if (ov.seed) rc.seed = *ov.seed;
    if (ov.reps) rc.reps = *ov.reps;
    if (ov.out) rc.out = *ov.out;
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(what + ": empty entry in list");
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(what + ": malformed number '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

int cmd_track(const std::string& config_path, const Overrides& ov) {
    RunConfig rc = parse_run_config(config_path);
    apply_overrides(rc, ov);
    finalize(rc);
    const RunSummary s = run_all_reps(rc, rc.out);
    std::printf("%d run(s): median OP(0.5) = %.2f, median AUC = %.2f, out = %s\n", rc.reps,
                median(s.op50), median(s.auc), rc.out.string().c_str());
    return 0;
}

int cmd_synth(const std::string& script_path, std::uint64_t seed, const std::string& out) {
    jtrack::CorruptionScript script;
    try {
        script = jtrack::parse_script(script_path);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    const jtrack::Sequence seq = jtrack::generate_sequence(script, seed);
    try {
        jtrack::write_sequence(seq, out);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    std::printf("wrote %d frames to %s\n", seq.size(), out.c_str());
    return 0;
}

int cmd_qp(const std::string& losses_csv, const std::string& priors_csv, double mu) {
    jtrack::weights::AlphaSubproblem problem;
    problem.losses = parse_double_list(losses_csv, "--losses");
    problem.priors = parse_double_list(priors_csv, "--priors");
    problem.mu = mu;
    jtrack::weights::AlphaSolution sol;
    try {
        sol = jtrack::weights::solve_alpha(problem);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::printf("alpha =");
    for (double a : sol.alpha) std::printf(" %.12g", a);
    std::printf("\nnu = %.12g\nkkt_residual = %.3g\n", sol.nu, sol.kkt_residual);
    return 0;
}

int cmd_sweep(const std::string& config_path, const Overrides& ov, const std::string& param,
              const std::string& values_csv) {
    if (param != "mu" && param != "gamma" && param != "psr-threshold")
        throw ConfigError("--param: expected mu, gamma or psr-threshold");
    const std::vector<double> values = parse_double_list(values_csv, "--values");

    RunConfig base = parse_run_config(config_path);
    apply_overrides(base, ov);

    std::vector<std::string> rows;
    for (double value : values) {
        RunConfig rc = base;
        if (param == "mu")
            rc.tracker.joint.mu = value;
        else if (param == "gamma")
            rc.gamma = value;
        else
            rc.tracker.psr.threshold = value;
        finalize(rc);
        const fs::path out = base.out / (param + "_" + fmt_double(value));
        const RunSummary s = run_all_reps(rc, out);
        char row[256];
        std::snprintf(row, sizeof(row), "%s,%.17g,%llu,%d,%.6f,%.6f,%.6f,%.6f", param.c_str(),
                      value, static_cast<unsigned long long>(rc.seed), rc.reps, median(s.op50),
                      mean(s.op50), median(s.auc), mean(s.auc));
        rows.emplace_back(row);
    }

    std::error_code ec;
    fs::create_directories(base.out, ec);
    std::ofstream os(base.out / "sweep.csv");
    if (!os) throw DataError("cannot write " + (base.out / "sweep.csv").string());
    const std::string header =
        "param,value,seed,reps,median_op50,mean_op50,median_auc,mean_auc";
    os << header << '\n';
    std::printf("%s\n", header.c_str());
    for (const auto& row : rows) {
        os << row << '\n';
        std::printf("%s\n", row.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tracking experiments with jointly learned sample quality weights"};
    app.require_subcommand(1);

    std::string config_path, script_path, out_dir, losses_csv, priors_csv;
    std::string param = "mu", values_csv;
    std::uint64_t synth_seed = 1;
    double mu = 5.0;
    Overrides ov_track, ov_sweep;

    CLI::App* track = app.add_subcommand("track", "Run a tracking experiment from a config file");
    track->add_option("--config", config_path, "Flat key-value config file")->required();
    add_override_flags(track, ov_track);

    CLI::App* synth = app.add_subcommand("synth", "Materialize a synthetic sequence directory");
    synth->add_option("--script", script_path, "Corruption script")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--out", out_dir, "Output sequence directory")->required();

    CLI::App* qp = app.add_subcommand("qp", "Solve one weight subproblem and print the solution");
    qp->add_option("--losses", losses_csv, "Comma-separated per-frame losses")->required();
    qp->add_option("--priors", priors_csv, "Comma-separated prior weights")->required();
    qp->add_option("--mu", mu, "Flexibility parameter");

    CLI::App* sweep = app.add_subcommand("sweep", "Run the same experiment over parameter values");
    sweep->add_option("--config", config_path, "Flat key-value config file")->required();
    sweep->add_option("--param", param, "Parameter to sweep (mu|gamma|psr-threshold)");
    sweep->add_option("--values", values_csv, "Comma-separated values")->required();
    add_override_flags(sweep, ov_sweep);

    try {
        app.parse(argc, argv);
        if (track->parsed()) return cmd_track(config_path, ov_track);
        if (synth->parsed()) return cmd_synth(script_path, synth_seed, out_dir);
        if (qp->parsed()) return cmd_qp(losses_csv, priors_csv, mu);
        if (sweep->parsed()) return cmd_sweep(config_path, ov_sweep, param, values_csv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
