#pragma once

#include "desn/reservoir.hpp"

namespace desn {

/// Normalized root mean square error over rows [skip, T):
///   sqrt( mean((predicted - target)^2) / Var(target) )
/// with Var the population variance of the target over the same rows. For
/// multi-column targets the squared error and the variance are both averaged
/// over columns. Throws numerical_error when the target window is constant.
double nrmse(const Eigen::Ref<const Matrix>& predicted, const Eigen::Ref<const Matrix>& target, Index skip = 0);

/// Population variance of each column; exactly 0 for a constant column.
Vector column_variance(const Eigen::Ref<const Matrix>& m);

}  // namespace desn
