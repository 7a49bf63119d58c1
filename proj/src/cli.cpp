#include "desn/cli.hpp"

#include "desn/errors.hpp"
#include "desn/evaluation.hpp"
#include "desn/io.hpp"
#include "desn/memory_capacity.hpp"
#include "desn/narma.hpp"
#include "desn/svg.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace desn::cli {

namespace {

namespace fs = std::filesystem;

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Flat key=value record of one invocation; written next to its outputs.
class RunManifest {
public:
    RunManifest(std::string command, std::uint64_t seed) : started_{utc_now()} {
        kv_.set("command", std::move(command));
        kv_.set("seed", std::to_string(seed));
        kv_.set("tool_version", std::string{tool_version});
        kv_.set("rng", std::string{Rng::version});
    }

    void config(const std::string& key, const std::string& value) { kv_.set("config." + key, value); }
    void config(const std::string& key, double value) { kv_.set("config." + key, format_real(value)); }
    void config(const std::string& key, long long value) { kv_.set("config." + key, std::to_string(value)); }
    void output(const fs::path& p) { outputs_.push_back(p); }

    void write(const fs::path& path) {
        KeyValues kv = kv_;
        kv.set("started", started_);
        kv.set("finished", utc_now());
        for (std::size_t i = 0; i < outputs_.size(); ++i) kv.set(fmt::format("output.{}", i), outputs_[i].string());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw data_error(fmt::format("cannot open '{}' for writing", path.string()));
        write_key_values(out, kv);
    }

private:
    KeyValues kv_;
    std::string started_;
    std::vector<fs::path> outputs_;
};

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error(fmt::format("cannot open '{}' for writing", path.string()));
    return out;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) { return fs::path{p.string() + suffix}; }

const std::map<std::string, Architecture> architecture_names{
    {"shallow", Architecture::Shallow}, {"parallel", Architecture::Parallel}, {"series", Architecture::Series}};
const std::map<std::string, Topology> topology_names{{"dense", Topology::DenseRandom},
                                                     {"cycle", Topology::SimpleCycle}};
const std::map<std::string, Activation> activation_names{{"tanh", Activation::Tanh},
                                                         {"identity", Activation::Identity}};
const std::map<std::string, SeriesHandoff> handoff_names{{"prediction", SeriesHandoff::Prediction},
                                                         {"target", SeriesHandoff::Target}};

// ---------------------------------------------------------------- narma

struct NarmaOptions {
    long long length = 1200;
    long long tau = 5;
    std::uint64_t seed = 1;
    std::string out;
};

void cmd_narma(const NarmaOptions& o, std::ostream& out) {
    const NarmaConfig config{o.length, o.tau, o.seed};
    const NarmaSeries series = narma_generate(config);
    const fs::path path{o.out};
    {
        auto f = open_output(path);
        write_dataset_csv(f, series, config);
    }
    RunManifest manifest{"narma", o.seed};
    manifest.config("length", o.length);
    manifest.config("tau", o.tau);
    manifest.output(path);
    manifest.write(with_suffix(path, ".manifest"));
    out << fmt::format("wrote {} rows to {}\n", series.input.size(), path.string());
}

// ---------------------------------------------------------------- train / predict

struct TrainOptions {
    std::string arch = "shallow";
    std::size_t layers = 3;
    long long reservoir_size = 50;
    std::string topology = "dense";
    double alpha = 0.9;
    double r = 0.5;
    std::string activation = "tanh";
    double lambda = 1e-8;
    std::string data;
    long long tau = 5;
    std::uint64_t seed = 1;
    long long train_length = 0;
    long long test_length = 0;
    long long washout = 100;
    bool same_member_seeds = false;
    std::string handoff = "prediction";
    std::size_t jobs = 1;
    std::string out;
};

PointParams point_params(const TrainOptions& o) {
    PointParams p;
    p.architecture = parse_architecture(o.arch);
    p.layers = o.layers;
    p.reservoir_size = o.reservoir_size;
    p.topology = parse_topology(o.topology);
    p.spectral_radius = o.alpha;
    p.cycle_weight = o.r;
    p.activation = parse_activation(o.activation);
    p.ridge = o.lambda;
    p.tau = o.tau;
    p.train_length = o.train_length;
    p.test_length = o.test_length;
    p.washout = o.washout;
    p.handoff = handoff_names.at(o.handoff);
    p.same_member_seeds = o.same_member_seeds;
    p.jobs = o.jobs;
    return p;
}

void cmd_train(const TrainOptions& o, std::ostream& out) {
    const PointParams p = point_params(o);
    const Index train_length = p.resolved_train_length();
    const Index test_length = p.resolved_test_length();

    NarmaSeries series;
    if (!o.data.empty()) {
        std::ifstream in(o.data, std::ios::binary);
        if (!in) throw data_error(fmt::format("cannot open dataset '{}'", o.data));
        series = read_dataset_csv(in);
    } else {
        series = narma_generate({train_length + test_length, p.tau, stream_seed(o.seed, streams::data)});
    }
    const TimeSeriesDataset ds = split_dataset(series, train_length, test_length, p.washout);

    Model model = Model::build(p.architecture, p.layers, p.esn_config(stream_seed(o.seed, streams::reservoirs)),
                               p.same_member_seeds);
    model.train(ds.train_inputs, ds.train_targets, p.washout, p.handoff, p.jobs);
    const Index skip = model.evaluation_skip(p.washout);
    if (skip >= train_length || skip >= test_length) {
        throw data_error(fmt::format("washout shortfall: scoring skip {} leaves no rows", skip));
    }
    const double train_nrmse = nrmse(model.predict(ds.train_inputs, p.jobs), ds.train_targets, skip);
    const double test_nrmse = nrmse(model.predict(ds.test_inputs, p.jobs), ds.test_targets, skip);

    const fs::path dir{o.out};
    RunManifest manifest{"train", o.seed};
    for (const auto& [k, v] : std::initializer_list<std::pair<const char*, std::string>>{
             {"arch", o.arch}, {"L", std::to_string(model.layers())}, {"N", std::to_string(o.reservoir_size)},
             {"topology", o.topology}, {"alpha", format_real(o.alpha)}, {"r", format_real(o.r)},
             {"activation", o.activation}, {"lambda", format_real(o.lambda)},
             {"data", o.data.empty() ? std::string{"generated"} : o.data}, {"tau", std::to_string(o.tau)},
             {"train_length", std::to_string(train_length)}, {"test_length", std::to_string(test_length)},
             {"washout", std::to_string(p.washout)}, {"score_skip", std::to_string(skip)},
             {"handoff", o.handoff}, {"same_member_seeds", o.same_member_seeds ? "true" : "false"}}) {
        manifest.config(k, v);
    }
    manifest.output(dir / "model.manifest");
    save_model(dir, model);

    const fs::path metrics = dir / "metrics.csv";
    {
        auto f = open_output(metrics);
        f << "architecture,L,N,train_nrmse,test_nrmse\n";
        f << o.arch << ',' << model.layers() << ',' << o.reservoir_size << ',' << format_real(train_nrmse) << ','
          << format_real(test_nrmse) << '\n';
    }
    manifest.output(metrics);
    manifest.write(dir / "run.manifest");
    out << fmt::format("train_nrmse={:.6f} test_nrmse={:.6f}\n", train_nrmse, test_nrmse);
}

struct PredictOptions {
    std::string model;
    std::string data;
    long long washout = 100;
    std::string out;
};

void cmd_predict(const PredictOptions& o, std::ostream& out) {
    Model model = load_model(o.model);
    std::ifstream in(o.data, std::ios::binary);
    if (!in) throw data_error(fmt::format("cannot open dataset '{}'", o.data));
    const NarmaSeries series = read_dataset_csv(in);
    const Matrix predicted = model.predict(Matrix(series.input));
    const Index skip = model.evaluation_skip(o.washout);

    const fs::path path{o.out};
    {
        auto f = open_output(path);
        f << "y,y_hat\n";
        for (Index t = 0; t < predicted.rows(); ++t) {
            f << format_real(series.output(t)) << ',' << format_real(predicted(t, 0)) << '\n';
        }
    }
    RunManifest manifest{"predict", 0};
    manifest.config("model", o.model);
    manifest.config("data", o.data);
    manifest.config("washout", o.washout);
    manifest.output(path);
    manifest.write(with_suffix(path, ".manifest"));
    out << fmt::format("nrmse={:.6f}\n", nrmse(predicted, Matrix(series.output), skip));
}

// ---------------------------------------------------------------- mc

struct McOptions {
    std::string arch = "shallow";
    long long reservoir_size = 20;
    double r = 0.9;
    std::size_t layers = 3;
    long long length = 20000;
    long long kmax = 0;
    long long washout = 200;
    double lambda = 1e-8;
    double variance = 1.0;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::string out;
};

void cmd_mc(const McOptions& o, std::ostream& out) {
    McArchitecture arch;
    arch.kind = parse_architecture(o.arch);
    arch.layers = arch.kind == Architecture::Shallow ? 1 : o.layers;
    arch.reservoir_size = o.reservoir_size;
    arch.cycle_weight = o.r;
    arch.seed = stream_seed(o.seed, streams::reservoirs);
    if (!(o.r > 0.0 && o.r < 1.0)) throw config_error(fmt::format("--r must lie in (0, 1) (got {})", o.r));

    McProbeConfig probe;
    probe.length = o.length;
    probe.max_delay = o.kmax > 0 ? o.kmax : 2 * o.reservoir_size;
    probe.washout = o.washout;
    probe.ridge = o.lambda;
    probe.input_variance = o.variance;

    Rng input_rng{stream_seed(o.seed, streams::probe_input)};
    const McReport report = empirical_mc(arch, probe, input_rng, o.jobs);

    if (!o.out.empty()) {
        const fs::path path{o.out};
        {
            auto f = open_output(path);
            write_mc_report_csv(f, report);
        }
        RunManifest manifest{"mc", o.seed};
        manifest.config("arch", o.arch);
        manifest.config("L", static_cast<long long>(arch.layers));
        manifest.config("N", o.reservoir_size);
        manifest.config("r", o.r);
        manifest.config("length", o.length);
        manifest.config("kmax", static_cast<long long>(probe.max_delay));
        manifest.config("washout", o.washout);
        manifest.config("lambda", o.lambda);
        manifest.config("variance", o.variance);
        manifest.output(path);
        manifest.write(with_suffix(path, ".manifest"));
    }
    const std::size_t degenerate = static_cast<std::size_t>(std::count_if(
        report.per_delay.begin(), report.per_delay.end(), [](const DelayCapacity& d) { return d.degenerate; }));
    out << fmt::format("empirical={:.6f} theoretical={}\n", report.empirical,
                       report.theoretical ? fmt::format("{:.6f}", *report.theoretical) : std::string{"absent"});
    if (degenerate) out << fmt::format("warning: {} delays had zero output variance (C_k = 0)\n", degenerate);
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
    int figure = 0;
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::string topology;
    double alpha = 0.9;
    bool timing = false;
    std::string out;
};

void cmd_sweep(const SweepOptions& o, std::ostream& out) {
    SweepSpec spec = figure_preset(o.figure, o.trials, o.seed);
    spec.jobs = o.jobs;
    spec.base.spectral_radius = o.alpha;
    if (!o.topology.empty()) {
        if (o.figure == 7 && o.topology != "cycle") throw config_error("figure 7 sweeps r and needs --topology cycle");
        spec.base.topology = parse_topology(o.topology);
    }
    const SweepResult result = sweep(spec);
    const auto summary = summarize(result);

    const fs::path prefix{o.out};
    const fs::path results_path = with_suffix(prefix, ".csv");
    const fs::path summary_path = with_suffix(prefix, "_summary.csv");
    const fs::path svg_path = with_suffix(prefix, ".svg");
    {
        auto f = open_output(results_path);
        write_sweep_csv(f, result, spec.parameter, o.timing);
    }
    {
        auto f = open_output(summary_path);
        write_summary_csv(f, summary, spec.parameter);
    }

    std::vector<ChartSeries> lines;
    for (Architecture a : spec.architectures) {
        ChartSeries s{std::string{to_string(a)}, {}, {}, {}};
        for (const auto& row : summary) {
            if (row.architecture != a) continue;
            s.x.push_back(row.parameter);
            s.y.push_back(row.mean_test);
            if (o.trials > 1) s.error.push_back(row.std_test);
        }
        lines.push_back(std::move(s));
    }
    const std::map<SweptParameter, std::string> axis{{SweptParameter::ReservoirSize, "reservoir size N"},
                                                     {SweptParameter::Tau, "dependency length tau"},
                                                     {SweptParameter::ReservoirWeight, "reservoir weight r"}};
    ChartSpec chart{fmt::format("Test NRMSE vs {} ({} trial{})", axis.at(spec.parameter), o.trials,
                                o.trials == 1 ? "" : "s"),
                    axis.at(spec.parameter), "mean test NRMSE"};
    {
        auto f = open_output(svg_path);
        f << line_chart_svg(chart, lines);
    }

    RunManifest manifest{"sweep", o.seed};
    manifest.config("figure", static_cast<long long>(o.figure));
    manifest.config("parameter", std::string{to_string(spec.parameter)});
    manifest.config("trials", static_cast<long long>(o.trials));
    manifest.config("topology", std::string{to_string(spec.base.topology)});
    manifest.config("alpha", spec.base.spectral_radius);
    manifest.config("N", static_cast<long long>(spec.base.reservoir_size));
    manifest.config("tau", static_cast<long long>(spec.base.tau));
    manifest.config("L", static_cast<long long>(spec.base.layers));
    manifest.config("lambda", spec.base.ridge);
    manifest.config("washout", static_cast<long long>(spec.base.washout));
    manifest.output(results_path);
    manifest.output(summary_path);
    manifest.output(svg_path);
    manifest.write(with_suffix(prefix, ".manifest"));

    std::size_t failures = 0;
    for (const auto& row : summary) {
        out << fmt::format("{:<9} {}={:<5g} mean_test_nrmse={:.4f} std={:.4f} n={}\n", to_string(row.architecture),
                           to_string(spec.parameter), row.parameter, row.mean_test, row.std_test, row.succeeded);
        failures += row.failed;
    }
    if (failures) out << fmt::format("warning: {} points failed; see {}\n", failures, results_path.string());
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
    long long reservoir_size = 4;
    double r = 0.7;
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    long long mc_length = 200000;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
    if (!(o.r > 0.0 && o.r < 1.0)) throw config_error(fmt::format("--r must lie in (0, 1) (got {})", o.r));
    Rng rng{o.seed};
    IdentityOptions options;
    options.monte_carlo_length = o.mc_length;
    const IdentityReport report = verify_theorem_identities(o.reservoir_size, o.r, o.trials, rng, options);
    for (const auto& c : report.checks) {
        out << fmt::format("{} {:<30} worst={:.3e} tol={:.1e}\n", c.passed ? "PASS" : "FAIL", c.name, c.worst,
                           c.tolerance);
    }
    return report.all_passed() ? ExitCode::ok : ExitCode::numerical;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shallow, parallel and series echo state networks: training, memory capacity, NARMA sweeps",
                 "desn"};
    app.set_version_flag("--version", std::string{tool_version});
    app.set_config("--config", "", "key=value (INI) file; [subcommand] sections; flags override it");
    app.require_subcommand(1);

    NarmaOptions narma;
    auto* narma_cmd = app.add_subcommand("narma", "Generate a NARMA dataset CSV");
    narma_cmd->add_option("--length", narma.length, "Number of steps")->check(CLI::PositiveNumber)->capture_default_str();
    narma_cmd->add_option("--tau", narma.tau, "Dependency length (>= 1)")->check(CLI::PositiveNumber)->capture_default_str();
    narma_cmd->add_option("--seed", narma.seed, "Input stream seed")->capture_default_str();
    narma_cmd->add_option("--out", narma.out, "Output CSV path")->required();

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train a shallow/parallel/series network on NARMA data");
    train_cmd->add_option("--arch", train.arch)->check(CLI::IsMember(architecture_names))->capture_default_str();
    train_cmd->add_option("--L", train.layers, "Number of reservoirs")->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--N", train.reservoir_size, "Reservoir size")->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--topology", train.topology)->check(CLI::IsMember(topology_names))->capture_default_str();
    train_cmd->add_option("--alpha", train.alpha, "Spectral radius (dense)")->capture_default_str();
    train_cmd->add_option("--r", train.r, "Cycle weight (cycle)")->capture_default_str();
    train_cmd->add_option("--activation", train.activation)->check(CLI::IsMember(activation_names))->capture_default_str();
    train_cmd->add_option("--lambda", train.lambda, "Ridge factor (regularizer lambda^2)")->capture_default_str();
    train_cmd->add_option("--data", train.data, "Dataset CSV; generated from --seed/--tau when omitted");
    train_cmd->add_option("--tau", train.tau, "NARMA dependency length when generating")->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--seed", train.seed)->capture_default_str();
    train_cmd->add_option("--train-length", train.train_length, "L_tr (0: 500, or 700 for series)")->capture_default_str();
    train_cmd->add_option("--test-length", train.test_length, "L_te (0: 500, or 700 for series)")->capture_default_str();
    train_cmd->add_option("--washout", train.washout, "L_fo")->check(CLI::NonNegativeNumber)->capture_default_str();
    train_cmd->add_flag("--same-member-seeds", train.same_member_seeds, "Build every parallel member from one seed");
    train_cmd->add_option("--handoff", train.handoff, "Series stage input during training")->check(CLI::IsMember(handoff_names))->capture_default_str();
    train_cmd->add_option("--jobs", train.jobs)->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--out", train.out, "Model output directory")->required();

    PredictOptions predict;
    auto* predict_cmd = app.add_subcommand("predict", "Run a saved model over a dataset CSV");
    predict_cmd->add_option("--model", predict.model, "model.manifest path")->required();
    predict_cmd->add_option("--data", predict.data, "Dataset CSV")->required();
    predict_cmd->add_option("--washout", predict.washout)->check(CLI::NonNegativeNumber)->capture_default_str();
    predict_cmd->add_option("--out", predict.out, "Prediction CSV path")->required();

    McOptions mc;
    auto* mc_cmd = app.add_subcommand("mc", "Empirical short-term memory capacity of a linear cycle network");
    mc_cmd->add_option("--arch", mc.arch)->check(CLI::IsMember(architecture_names))->capture_default_str();
    mc_cmd->add_option("--N", mc.reservoir_size)->check(CLI::PositiveNumber)->capture_default_str();
    mc_cmd->add_option("--r", mc.r, "Cycle weight in (0, 1)")->capture_default_str();
    mc_cmd->add_option("--L", mc.layers)->check(CLI::PositiveNumber)->capture_default_str();
    mc_cmd->add_option("--length", mc.length)->check(CLI::PositiveNumber)->capture_default_str();
    mc_cmd->add_option("--kmax", mc.kmax, "Largest delay (0: 2N)")->check(CLI::NonNegativeNumber)->capture_default_str();
    mc_cmd->add_option("--washout", mc.washout)->check(CLI::NonNegativeNumber)->capture_default_str();
    mc_cmd->add_option("--lambda", mc.lambda)->capture_default_str();
    mc_cmd->add_option("--variance", mc.variance, "Input variance sigma^2")->capture_default_str();
    mc_cmd->add_option("--seed", mc.seed)->capture_default_str();
    mc_cmd->add_option("--jobs", mc.jobs)->check(CLI::PositiveNumber)->capture_default_str();
    mc_cmd->add_option("--out", mc.out, "Per-delay CSV path");

    SweepOptions sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Preset NRMSE sweeps (figure 5: N, 6: tau, 7: r)");
    sweep_cmd->add_option("--figure", sw.figure)->required()->check(CLI::IsMember({5, 6, 7}));
    sweep_cmd->add_option("--trials", sw.trials, "Seeds per point")->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("--seed", sw.seed, "First trial seed")->capture_default_str();
    sweep_cmd->add_option("--jobs", sw.jobs, "Work-pool size")->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("--topology", sw.topology, "Override topology for figures 5 and 6")->check(CLI::IsMember(topology_names));
    sweep_cmd->add_option("--alpha", sw.alpha, "Spectral radius (dense)")->capture_default_str();
    sweep_cmd->add_flag("--timing", sw.timing, "Add a wall_ms column to the results CSV");
    sweep_cmd->add_option("--out", sw.out, "Output prefix (.csv, _summary.csv, .svg, .manifest)")->required();

    VerifyOptions verify;
    auto* verify_cmd = app.add_subcommand("verify", "Check the cycle-reservoir rotation identities numerically");
    verify_cmd->add_option("--N", verify.reservoir_size)->check(CLI::Range(1, 32))->capture_default_str();
    verify_cmd->add_option("--r", verify.r, "Cycle weight in (0, 1)")->capture_default_str();
    verify_cmd->add_option("--trials", verify.trials)->check(CLI::PositiveNumber)->capture_default_str();
    verify_cmd->add_option("--seed", verify.seed)->capture_default_str();
    verify_cmd->add_option("--mc-length", verify.mc_length, "Monte-Carlo steps (0 skips)")->check(CLI::NonNegativeNumber)->capture_default_str();

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ExitCode::ok : ExitCode::usage;
    }

    try {
        if (*narma_cmd) cmd_narma(narma, out);
        else if (*train_cmd) cmd_train(train, out);
        else if (*predict_cmd) cmd_predict(predict, out);
        else if (*mc_cmd) cmd_mc(mc, out);
        else if (*sweep_cmd) cmd_sweep(sw, out);
        else if (*verify_cmd) return cmd_verify(verify, out);
        return ExitCode::ok;
    } catch (const config_error& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::usage;
    } catch (const data_error& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::data;
    } catch (const numerical_error& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::numerical;
    }
}

}  // namespace desn::cli
