#pragma once

// Fixed-order NARMA benchmark:
//   y(t) = 0.7 s(t - tau) + (1 - y(t-1)) y(t-1) + 0.1,   s(t) ~ U(0, 1).
// The series starts from y = 0 with s(t - tau) = 0 for t <= tau.

#include "desn/reservoir.hpp"

#include <cstdint>

namespace desn {

struct NarmaConfig {
    Index length = 1000;
    Index tau = 5;
    std::uint64_t seed = 1;

    void validate() const;
};

struct NarmaSeries {
    Vector input;   ///< s
    Vector output;  ///< y
};

/// Draws s from Rng(config.seed) and runs the recurrence.
NarmaSeries narma_generate(const NarmaConfig& config);

/// Runs the recurrence on a given input sequence. Throws numerical_error if
/// |y| exceeds 10.
NarmaSeries narma_from_input(const Eigen::Ref<const Vector>& input, Index tau);

/// Contiguous train window followed by a test window, each T x 1.
struct TimeSeriesDataset {
    Matrix train_inputs;
    Matrix train_targets;
    Matrix test_inputs;
    Matrix test_targets;
    Index train_length = 0;
    Index test_length = 0;
    /// Rows L_fo ignored at the start of each window.
    Index washout = 0;
};

/// Rows [0, L_tr) train, [L_tr, L_tr + L_te) test. Requires L_fo < L_tr,
/// L_fo < L_te and L_tr + L_te <= series length.
TimeSeriesDataset split_dataset(const NarmaSeries& series, Index train_length, Index test_length, Index washout);

}  // namespace desn
