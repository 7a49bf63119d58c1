#include "desn/metrics.hpp"

#include "desn/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace desn {

Vector column_variance(const Eigen::Ref<const Matrix>& m) {
    const Eigen::RowVectorXd mean = m.colwise().mean();
    Vector var = (m.rowwise() - mean).array().square().colwise().mean().transpose();
    for (Index c = 0; c < m.cols(); ++c) {
        if (m.rows() > 0 && m.col(c).maxCoeff() == m.col(c).minCoeff()) var(c) = 0.0;
    }
    return var;
}

double nrmse(const Eigen::Ref<const Matrix>& predicted, const Eigen::Ref<const Matrix>& target, Index skip) {
    if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
        throw data_error(fmt::format("nrmse shape mismatch: predicted {}x{}, target {}x{}", predicted.rows(),
                                     predicted.cols(), target.rows(), target.cols()));
    }
    if (skip < 0 || skip >= target.rows()) {
        throw data_error(fmt::format("nrmse skip {} must be in [0, {})", skip, target.rows()));
    }
    const Index n = target.rows() - skip;
    const auto y = target.bottomRows(n);
    const auto yhat = predicted.bottomRows(n);
    const double var = column_variance(y).mean();
    if (!(var > 0.0)) throw numerical_error("nrmse undefined: target has zero variance over the evaluated window");
    const double mse = (yhat - y).array().square().mean();
    const double e = std::sqrt(mse / var);
    if (!std::isfinite(e)) throw numerical_error("nrmse is not finite");
    return e;
}

}  // namespace desn
