#include "desn/reservoir.hpp"

#include "desn/errors.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace desn {

std::string_view to_string(Topology t) noexcept {
    switch (t) {
    case Topology::DenseRandom: return "dense";
    case Topology::SimpleCycle: return "cycle";
    }
    return "?";
}

std::string_view to_string(Activation a) noexcept {
    switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
    }
    return "?";
}

Topology parse_topology(std::string_view s) {
    if (s == "dense") return Topology::DenseRandom;
    if (s == "cycle") return Topology::SimpleCycle;
    throw config_error(fmt::format("unknown topology '{}' (expected dense|cycle)", s));
}

Activation parse_activation(std::string_view s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    throw config_error(fmt::format("unknown activation '{}' (expected tanh|identity)", s));
}

void EsnConfig::validate() const {
    if (reservoir_size < 1 || input_dim < 1 || output_dim < 1) {
        throw config_error(fmt::format("reservoir/input/output sizes must be >= 1 (got N={}, K={}, M={})",
                                       reservoir_size, input_dim, output_dim));
    }
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        throw config_error(fmt::format("ridge factor must be a finite value >= 0 (got {})", ridge));
    }
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    switch (topology) {
    case Topology::DenseRandom:
        if (!spectral_radius) throw config_error("dense topology requires a spectral radius");
        if (!in_unit(*spectral_radius)) {
            throw config_error(fmt::format("spectral radius must lie in (0, 1) (got {})", *spectral_radius));
        }
        break;
    case Topology::SimpleCycle:
        if (!cycle_weight) throw config_error("cycle topology requires a cycle weight r");
        if (!in_unit(*cycle_weight)) {
            throw config_error(fmt::format("cycle weight must lie in (0, 1) (got {})", *cycle_weight));
        }
        break;
    }
}

Esn::Esn(EsnConfig config, Matrix input_weights, Matrix reservoir_weights)
    : config_{std::move(config)},
      input_weights_{std::move(input_weights)},
      reservoir_weights_{std::move(reservoir_weights)},
      state_{Vector::Zero(config_.reservoir_size)},
      scratch_{Vector::Zero(config_.reservoir_size)} {
    config_.validate();
    const Index n = config_.reservoir_size;
    if (input_weights_.rows() != n || input_weights_.cols() != config_.input_dim) {
        throw data_error(fmt::format("input weights must be {}x{} (got {}x{})", n, config_.input_dim,
                                     input_weights_.rows(), input_weights_.cols()));
    }
    if (reservoir_weights_.rows() != n || reservoir_weights_.cols() != n) {
        throw data_error(fmt::format("reservoir weights must be {}x{} (got {}x{})", n, n,
                                     reservoir_weights_.rows(), reservoir_weights_.cols()));
    }
}

void Esn::set_readout(Matrix readout) {
    if (readout.rows() != config_.output_dim || readout.cols() != config_.reservoir_size) {
        throw data_error(fmt::format("readout must be {}x{} (got {}x{})", config_.output_dim,
                                     config_.reservoir_size, readout.rows(), readout.cols()));
    }
    readout_ = std::move(readout);
}

const Vector& Esn::step(const Eigen::Ref<const Vector>& input) {
    if (input.size() != config_.input_dim) {
        throw data_error(fmt::format("input has length {}, expected {}", input.size(), config_.input_dim));
    }
    scratch_.noalias() = input_weights_ * input;
    scratch_.noalias() += reservoir_weights_ * state_;
    if (config_.activation == Activation::Tanh) {
        state_ = scratch_.array().tanh();
    } else {
        state_ = scratch_;
    }
    return state_;
}

Vector Esn::readout() const {
    if (!readout_) throw numerical_error("readout requested from an untrained reservoir");
    return *readout_ * state_;
}

StateTrajectory Esn::run_sequence(const Eigen::Ref<const Matrix>& inputs, Index washout) {
    if (inputs.rows() == 0) throw data_error("empty input sequence");
    if (inputs.cols() != config_.input_dim) {
        throw data_error(fmt::format("inputs have {} columns, expected {}", inputs.cols(), config_.input_dim));
    }
    if (washout < 0 || washout >= inputs.rows()) {
        throw data_error(fmt::format("washout {} must be in [0, {})", washout, inputs.rows()));
    }
    reset_state();
    StateTrajectory traj{Matrix(inputs.rows(), config_.reservoir_size), washout};
    for (Index t = 0; t < inputs.rows(); ++t) {
        traj.states.row(t) = step(inputs.row(t).transpose()).transpose();
    }
    return traj;
}

Matrix Esn::predict(const Eigen::Ref<const Matrix>& inputs) {
    if (!readout_) throw numerical_error("prediction requested from an untrained reservoir");
    const StateTrajectory traj = run_sequence(inputs);
    return traj.states * readout_->transpose();
}

namespace {

Matrix sample_uniform(Index rows, Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    }
    return m;
}

}  // namespace

Esn build_dense_random(const EsnConfig& config, Rng& rng) {
    config.validate();
    if (config.topology != Topology::DenseRandom) {
        throw config_error("build_dense_random requires the dense topology");
    }
    const Index n = config.reservoir_size;
    Matrix v = sample_uniform(n, config.input_dim, rng);
    constexpr int max_attempts = 10;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Matrix w = sample_uniform(n, n, rng);
        const double rho = spectral_radius(w);
        if (rho < 1e-12) continue;
        w *= *config.spectral_radius / rho;
        return Esn{config, std::move(v), std::move(w)};
    }
    throw numerical_error(fmt::format("sampled reservoir had spectral radius below 1e-12 in {} attempts",
                                      max_attempts));
}

Esn build_cycle(const EsnConfig& config, Rng& rng) {
    config.validate();
    if (config.topology != Topology::SimpleCycle) {
        throw config_error("build_cycle requires the cycle topology");
    }
    const Index n = config.reservoir_size;
    const double r = *config.cycle_weight;
    Matrix v = sample_uniform(n, config.input_dim, rng);
    Matrix w = Matrix::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) w(i + 1, i) = r;
    w(0, n - 1) = r;
    return Esn{config, std::move(v), std::move(w)};
}

Esn build_esn(const EsnConfig& config) {
    Rng rng{config.seed};
    return config.topology == Topology::DenseRandom ? build_dense_random(config, rng)
                                                    : build_cycle(config, rng);
}

std::optional<double> spectral_radius_power(const Eigen::Ref<const Matrix>& w, double tolerance,
                                            int max_iterations) {
    const Index n = w.rows();
    if (w.isZero(0.0)) return 0.0;
    Rng rng{0x9e3779b97f4a7c15ULL};
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
    v.normalize();
    Vector y(n);
    for (int it = 0; it < max_iterations; ++it) {
        y.noalias() = w * v;
        const double norm = y.norm();
        if (norm == 0.0) return std::nullopt;
        const double mu = v.dot(y);
        const double residual = (y - mu * v).norm();
        if (residual <= tolerance * std::max(std::abs(mu), 1e-300)) return std::abs(mu);
        v = y / norm;
    }
    return std::nullopt;
}

double spectral_radius(const Eigen::Ref<const Matrix>& w) {
    if (w.rows() != w.cols()) {
        throw data_error(fmt::format("spectral radius needs a square matrix (got {}x{})", w.rows(), w.cols()));
    }
    if (!w.allFinite()) throw numerical_error("spectral radius of a matrix with non-finite entries");
    if (w.rows() == 0) return 0.0;
    if (w.rows() > 64) {
        if (auto rho = spectral_radius_power(w)) return *rho;
    }
    Eigen::EigenSolver<Matrix> solver(w, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw numerical_error("eigendecomposition did not converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace desn
