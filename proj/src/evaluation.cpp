#include "desn/evaluation.hpp"

#include "desn/concurrency.hpp"
#include "desn/errors.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>

namespace desn {

Index default_window_length(Architecture architecture) noexcept {
    return architecture == Architecture::Series ? 700 : 500;
}

Index PointParams::resolved_train_length() const noexcept {
    return train_length > 0 ? train_length : default_window_length(architecture);
}

Index PointParams::resolved_test_length() const noexcept {
    return test_length > 0 ? test_length : default_window_length(architecture);
}

EsnConfig PointParams::esn_config(std::uint64_t seed) const {
    EsnConfig c;
    c.reservoir_size = reservoir_size;
    c.input_dim = 1;
    c.output_dim = 1;
    c.topology = topology;
    if (topology == Topology::DenseRandom) {
        c.spectral_radius = spectral_radius;
        c.cycle_weight.reset();
    } else {
        c.spectral_radius.reset();
        c.cycle_weight = cycle_weight;
    }
    c.activation = activation;
    c.ridge = ridge;
    c.seed = seed;
    c.validate();
    return c;
}

PointResult run_point(const PointParams& params, std::uint64_t seed) {
    const auto started = std::chrono::steady_clock::now();
    const Index train_length = params.resolved_train_length();
    const Index test_length = params.resolved_test_length();

    const NarmaSeries data =
        narma_generate({train_length + test_length, params.tau, stream_seed(seed, streams::data)});
    const TimeSeriesDataset ds = split_dataset(data, train_length, test_length, params.washout);

    Model model = Model::build(params.architecture, params.layers,
                               params.esn_config(stream_seed(seed, streams::reservoirs)), params.same_member_seeds);
    model.train(ds.train_inputs, ds.train_targets, params.washout, params.handoff, params.jobs);

    const Index skip = model.evaluation_skip(params.washout);
    if (skip >= test_length || skip >= train_length) {
        throw data_error(fmt::format("scoring skip {} leaves no rows in windows of {} / {}", skip, train_length,
                                     test_length));
    }
    PointResult result;
    result.architecture = params.architecture;
    result.seed = seed;
    result.train_nrmse = nrmse(model.predict(ds.train_inputs, params.jobs), ds.train_targets, skip);
    result.test_nrmse = nrmse(model.predict(ds.test_inputs, params.jobs), ds.test_targets, skip);
    result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::string_view to_string(SweptParameter p) noexcept {
    switch (p) {
    case SweptParameter::ReservoirSize: return "N";
    case SweptParameter::Tau: return "tau";
    case SweptParameter::ReservoirWeight: return "r";
    }
    return "?";
}

void SweepSpec::validate() const {
    if (values.empty()) throw config_error("a sweep needs at least one parameter value");
    if (architectures.empty()) throw config_error("a sweep needs at least one architecture");
    if (trials < 1) throw config_error("a sweep needs at least one trial per point");
    for (double v : values) {
        switch (parameter) {
        case SweptParameter::ReservoirSize:
        case SweptParameter::Tau:
            if (v < 1.0 || v != std::round(v)) {
                throw config_error(fmt::format("{} values must be positive integers (got {})", to_string(parameter), v));
            }
            break;
        case SweptParameter::ReservoirWeight:
            if (base.topology != Topology::SimpleCycle) {
                throw config_error("sweeping the reservoir weight r requires the cycle topology");
            }
            if (!(v > 0.0 && v < 1.0)) throw config_error(fmt::format("r values must lie in (0, 1) (got {})", v));
            break;
        }
    }
}

PointParams SweepSpec::point(Architecture architecture, double value) const {
    PointParams p = base;
    p.architecture = architecture;
    switch (parameter) {
    case SweptParameter::ReservoirSize: p.reservoir_size = static_cast<Index>(std::lround(value)); break;
    case SweptParameter::Tau: p.tau = static_cast<Index>(std::lround(value)); break;
    case SweptParameter::ReservoirWeight: p.cycle_weight = value; break;
    }
    return p;
}

SweepResult sweep(const SweepSpec& spec) {
    spec.validate();
    const std::size_t n_arch = spec.architectures.size();
    const std::size_t total = spec.values.size() * n_arch * spec.trials;
    SweepResult result;
    result.rows.resize(total);
    parallel_for(total, spec.jobs, [&](std::size_t i) {
        const std::size_t trial = i % spec.trials;
        const std::size_t a = (i / spec.trials) % n_arch;
        const std::size_t v = i / (spec.trials * n_arch);
        const Architecture arch = spec.architectures[a];
        const std::uint64_t seed = spec.base_seed + trial;
        PointResult& row = result.rows[i];
        try {
            row = run_point(spec.point(arch, spec.values[v]), seed);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        row.architecture = arch;
        row.seed = seed;
        row.parameter = spec.values[v];
    });
    return result;
}

std::vector<SummaryRow> summarize(const SweepResult& result) {
    std::vector<SummaryRow> out;
    for (const PointResult& row : result.rows) {
        if (out.empty() || out.back().architecture != row.architecture || out.back().parameter != row.parameter) {
            out.push_back({row.architecture, row.parameter});
        }
        SummaryRow& s = out.back();
        if (!row.ok()) {
            ++s.failed;
            continue;
        }
        // Welford accumulation; std_* hold the running M2 until finalized.
        ++s.succeeded;
        const double n = static_cast<double>(s.succeeded);
        const double dtr = row.train_nrmse - s.mean_train;
        s.mean_train += dtr / n;
        s.std_train += dtr * (row.train_nrmse - s.mean_train);
        const double dte = row.test_nrmse - s.mean_test;
        s.mean_test += dte / n;
        s.std_test += dte * (row.test_nrmse - s.mean_test);
    }
    for (SummaryRow& s : out) {
        const double denom = s.succeeded > 1 ? static_cast<double>(s.succeeded - 1) : 1.0;
        s.std_train = s.succeeded > 1 ? std::sqrt(s.std_train / denom) : 0.0;
        s.std_test = s.succeeded > 1 ? std::sqrt(s.std_test / denom) : 0.0;
        if (s.succeeded == 0) s.mean_train = s.mean_test = std::nan("");
    }
    return out;
}

SweepSpec figure_preset(int figure, std::size_t trials, std::uint64_t base_seed) {
    SweepSpec spec;
    spec.architectures = {Architecture::Shallow, Architecture::Parallel, Architecture::Series};
    spec.trials = trials;
    spec.base_seed = base_seed;
    switch (figure) {
    case 5:
        spec.parameter = SweptParameter::ReservoirSize;
        spec.values = {10, 20, 30, 40, 50};
        break;
    case 6:
        spec.parameter = SweptParameter::Tau;
        spec.values = {3, 5, 7, 9};
        break;
    case 7:
        spec.parameter = SweptParameter::ReservoirWeight;
        spec.values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
        spec.base.topology = Topology::SimpleCycle;
        break;
    default: throw config_error(fmt::format("unknown figure id {} (expected 5, 6 or 7)", figure));
    }
    return spec;
}

}  // namespace desn
