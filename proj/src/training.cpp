#include "desn/training.hpp"

#include "desn/errors.hpp"
#include "desn/metrics.hpp"

#include <fmt/format.h>

#include <Eigen/QR>

namespace desn {

Matrix ridge_fit(const RidgeProblem& problem) {
    const auto& x = problem.states;
    const auto& y = problem.targets;
    if (x.rows() < 1) throw data_error("ridge fit needs at least one row");
    if (x.rows() != y.rows()) {
        throw data_error(fmt::format("ridge fit row mismatch: {} states vs {} targets", x.rows(), y.rows()));
    }
    if (!(problem.lambda >= 0.0)) throw config_error("ridge factor must be >= 0");
    if (!x.allFinite() || !y.allFinite()) throw numerical_error("ridge fit input contains non-finite values");

    const Index n = x.cols();
    Matrix coef;
    if (problem.lambda > 0.0) {
        Matrix stacked(x.rows() + n, n);
        stacked.topRows(x.rows()) = x;
        stacked.bottomRows(n) = problem.lambda * Matrix::Identity(n, n);
        Matrix rhs = Matrix::Zero(x.rows() + n, y.cols());
        rhs.topRows(y.rows()) = y;
        coef = stacked.householderQr().solve(rhs);
    } else {
        Eigen::ColPivHouseholderQR<Matrix> qr(x);
        if (qr.rank() < n) {
            throw numerical_error(fmt::format(
                "singular ridge system: lambda = 0 and the {}x{} state matrix has rank {} < {}", x.rows(), n,
                qr.rank(), n));
        }
        coef = qr.solve(Matrix(y));
    }
    if (!coef.allFinite()) throw numerical_error("ridge fit produced non-finite weights");
    return coef.transpose();
}

TrainReport fit_readout(Esn& esn, const StateTrajectory& trajectory, const Eigen::Ref<const Matrix>& targets) {
    if (targets.rows() != trajectory.states.rows()) {
        throw data_error(fmt::format("targets have {} rows, states have {}", targets.rows(),
                                     trajectory.states.rows()));
    }
    if (targets.cols() != esn.config().output_dim) {
        throw data_error(fmt::format("targets have {} columns, expected {}", targets.cols(),
                                     esn.config().output_dim));
    }
    const Index fitted = trajectory.states.rows() - trajectory.washout;
    const auto x = trajectory.post_washout();
    const auto y = targets.bottomRows(fitted);
    Matrix u = ridge_fit({x, y, esn.config().ridge});

    TrainReport report;
    report.fitted_rows = fitted;
    if (column_variance(y).mean() > 0.0) report.train_nrmse = nrmse(x * u.transpose(), y);
    esn.set_readout(std::move(u));
    return report;
}

TrainReport train_esn(Esn& esn, const Eigen::Ref<const Matrix>& inputs, const Eigen::Ref<const Matrix>& targets,
                      Index washout) {
    if (inputs.rows() <= washout) {
        throw data_error(fmt::format("sequence of length {} is too short for washout {}", inputs.rows(), washout));
    }
    const StateTrajectory trajectory = esn.run_sequence(inputs, washout);
    return fit_readout(esn, trajectory, targets);
}

}  // namespace desn
