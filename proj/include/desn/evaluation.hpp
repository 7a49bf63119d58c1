#pragma once

// NARMA experiments: one (architecture, parameters, seed) point and seeded
// parameter sweeps over reservoir size, dependency length, or cycle weight.

#include "desn/deep.hpp"
#include "desn/metrics.hpp"
#include "desn/narma.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace desn {

/// Default window lengths: 500 for shallow and parallel, 700 for series.
Index default_window_length(Architecture architecture) noexcept;

struct PointParams {
    Architecture architecture = Architecture::Shallow;
    std::size_t layers = 3;
    Index reservoir_size = 50;
    Topology topology = Topology::DenseRandom;
    double spectral_radius = 0.9;
    double cycle_weight = 0.5;
    Activation activation = Activation::Tanh;
    double ridge = 1e-8;
    Index tau = 5;
    /// 0 selects default_window_length.
    Index train_length = 0;
    Index test_length = 0;
    Index washout = 100;
    SeriesHandoff handoff = SeriesHandoff::Prediction;
    bool same_member_seeds = false;
    std::size_t jobs = 1;

    Index resolved_train_length() const noexcept;
    Index resolved_test_length() const noexcept;
    /// Reservoir config with the given seed (validated).
    EsnConfig esn_config(std::uint64_t seed) const;
};

struct PointResult {
    Architecture architecture = Architecture::Shallow;
    double parameter = 0.0;
    std::uint64_t seed = 0;
    double train_nrmse = 0.0;
    double test_nrmse = 0.0;
    double wall_ms = 0.0;
    /// Non-empty when the point failed inside a sweep.
    std::string error;

    bool ok() const noexcept { return error.empty(); }
};

/// Generates NARMA data from stream_seed(seed, data), builds the
/// architecture from stream_seed(seed, reservoirs), trains on the train
/// window and scores both windows with Model::evaluation_skip(washout).
/// Errors propagate.
PointResult run_point(const PointParams& params, std::uint64_t seed);

enum class SweptParameter { ReservoirSize, Tau, ReservoirWeight };

std::string_view to_string(SweptParameter p) noexcept;

struct SweepSpec {
    std::vector<Architecture> architectures{Architecture::Shallow};
    SweptParameter parameter = SweptParameter::ReservoirSize;
    std::vector<double> values;
    std::size_t trials = 20;
    std::uint64_t base_seed = 1;
    PointParams base;
    /// Worker threads for the point pool; 0 = hardware concurrency.
    std::size_t jobs = 1;

    void validate() const;
    /// base with the swept parameter set to `value`.
    PointParams point(Architecture architecture, double value) const;
};

struct SweepResult {
    /// Ordered by (value index, architecture index, trial); trial i uses
    /// seed base_seed + i.
    std::vector<PointResult> rows;
};

/// Runs every point, concurrently up to spec.jobs. A failed point is
/// recorded in its row and the sweep continues.
SweepResult sweep(const SweepSpec& spec);

struct SummaryRow {
    Architecture architecture = Architecture::Shallow;
    double parameter = 0.0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    double mean_train = 0.0;
    double std_train = 0.0;
    double mean_test = 0.0;
    double std_test = 0.0;
};

/// Mean and sample standard deviation (0 for a single trial) of the
/// successful rows per (architecture, value), in sweep order.
std::vector<SummaryRow> summarize(const SweepResult& result);

/// The preset sweeps: 5 = reservoir size {10..50}, 6 = tau {3,5,7,9},
/// 7 = cycle weight {0.1..0.9} on the cycle topology; all three
/// architectures. Throws config_error for other ids.
SweepSpec figure_preset(int figure, std::size_t trials, std::uint64_t base_seed);

}  // namespace desn
