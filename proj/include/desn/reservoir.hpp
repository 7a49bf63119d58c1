#pragma once

// Echo state network reservoir: weight construction and the state/readout
// recurrences
//
//   x(t+1) = f(V s(t+1) + W x(t)),    y(t+1) = U x(t+1).

#include "desn/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string_view>

namespace desn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Topology { DenseRandom, SimpleCycle };
enum class Activation { Tanh, Identity };

std::string_view to_string(Topology t) noexcept;
std::string_view to_string(Activation a) noexcept;
Topology parse_topology(std::string_view s);
Activation parse_activation(std::string_view s);

/// Hyperparameters of a single reservoir.
struct EsnConfig {
    Index reservoir_size = 50;
    Index input_dim = 1;
    Index output_dim = 1;
    Topology topology = Topology::DenseRandom;
    /// Target spectral radius of W; required for DenseRandom.
    std::optional<double> spectral_radius = 0.9;
    /// Weight r of the single cycle; required for SimpleCycle.
    std::optional<double> cycle_weight;
    Activation activation = Activation::Tanh;
    /// Ridge factor; the readout fit regularizes by ridge².
    double ridge = 1e-8;
    std::uint64_t seed = 1;

    /// Throws config_error when an invariant is violated.
    void validate() const;
};

/// Reservoir states collected over a run, one row per time step.
struct StateTrajectory {
    Matrix states;
    Index washout = 0;

    auto post_washout() const { return states.bottomRows(states.rows() - washout); }
};

/// One reservoir with fixed V and W, an optionally trained readout U, and
/// the current state x. Stepping mutates x, so one instance must not be
/// driven from two threads at once; distinct instances are independent.
class Esn {
public:
    /// Takes ownership of the weights; shapes must match the config
    /// (V is N x K, W is N x N). The state starts at zero.
    Esn(EsnConfig config, Matrix input_weights, Matrix reservoir_weights);

    const EsnConfig& config() const noexcept { return config_; }
    const Matrix& input_weights() const noexcept { return input_weights_; }
    const Matrix& reservoir_weights() const noexcept { return reservoir_weights_; }
    const std::optional<Matrix>& readout_weights() const noexcept { return readout_; }
    bool trained() const noexcept { return readout_.has_value(); }

    /// Installs U (M x N).
    void set_readout(Matrix readout);
    void clear_readout() noexcept { readout_.reset(); }

    const Vector& state() const noexcept { return state_; }
    void reset_state() { state_.setZero(); }

    /// Advances one step with input s (length K) and returns the new state.
    const Vector& step(const Eigen::Ref<const Vector>& input);

    /// U x for the current state. Throws numerical_error when untrained.
    Vector readout() const;

    /// Zeroes the state and consumes inputs (T x K) row by row; row t of
    /// the result is the state after row t.
    StateTrajectory run_sequence(const Eigen::Ref<const Matrix>& inputs, Index washout = 0);

    /// Outputs (T x M) of the trained readout over run_sequence(inputs).
    Matrix predict(const Eigen::Ref<const Matrix>& inputs);

private:
    EsnConfig config_;
    Matrix input_weights_;
    Matrix reservoir_weights_;
    std::optional<Matrix> readout_;
    Vector state_;
    Vector scratch_;
};

/// V and W uniform on (-1, 1), drawn in that order, each row-major; W is
/// then rescaled to the configured spectral radius. A draw whose spectral
/// radius is below 1e-12 is discarded and W redrawn, at most 10 times.
Esn build_dense_random(const EsnConfig& config, Rng& rng);

/// W = r P with P the cyclic shift (W[i+1][i] = r, W[0][N-1] = r); V is
/// uniform on (-1, 1), drawn row-major.
Esn build_cycle(const EsnConfig& config, Rng& rng);

/// Dispatches on config.topology with a fresh Rng(config.seed).
Esn build_esn(const EsnConfig& config);

/// Largest eigenvalue modulus. Matrices with N <= 64 use a full
/// eigendecomposition; larger ones use power iteration (tolerance 1e-12,
/// at most 10000 iterations) and fall back to the eigendecomposition when
/// it does not settle on a real dominant eigenvalue.
double spectral_radius(const Eigen::Ref<const Matrix>& w);

/// Power iteration only. Returns nullopt when it fails to converge to a real
/// dominant eigenvalue (complex dominant pairs, ties).
std::optional<double> spectral_radius_power(const Eigen::Ref<const Matrix>& w,
                                            double tolerance = 1e-12,
                                            int max_iterations = 10000);

}  // namespace desn
