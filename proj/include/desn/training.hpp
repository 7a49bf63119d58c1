#pragma once

// Ridge-regression readout fitting,
//
//   U^T = (X^T X + lambda^2 I)^{-1} X^T Y,
//
// and supervised training of a single reservoir. The readout has no bias
// term, and the regularizer is lambda squared.

#include "desn/reservoir.hpp"

#include <optional>

namespace desn {

/// Post-washout states X (T' x N) and targets Y (T' x M).
struct RidgeProblem {
    Eigen::Ref<const Matrix> states;
    Eigen::Ref<const Matrix> targets;
    double lambda = 0.0;
};

/// Returns U (M x N). lambda > 0 solves the regularized normal equations by
/// Householder QR of [X; lambda I], which never forms X^T X. lambda == 0 uses
/// column-pivoting QR of X and throws numerical_error if X is rank deficient.
Matrix ridge_fit(const RidgeProblem& problem);

struct TrainReport {
    /// NRMSE of the fitted readout on the rows it was fitted on; absent when
    /// those targets have zero variance.
    std::optional<double> train_nrmse;
    Index fitted_rows = 0;
};

/// Drives the reservoir from zero over `inputs`, drops the first `washout`
/// states and targets, fits U with the config's ridge factor, installs it.
TrainReport train_esn(Esn& esn, const Eigen::Ref<const Matrix>& inputs, const Eigen::Ref<const Matrix>& targets,
                      Index washout);

/// Same as train_esn on an already collected trajectory.
TrainReport fit_readout(Esn& esn, const StateTrajectory& trajectory, const Eigen::Ref<const Matrix>& targets);

}  // namespace desn
