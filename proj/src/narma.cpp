#include "desn/narma.hpp"

#include "desn/errors.hpp"
#include "desn/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace desn {

void NarmaConfig::validate() const {
    if (tau < 1) throw config_error(fmt::format("dependency length tau must be >= 1 (got {})", tau));
    if (length <= tau) throw config_error(fmt::format("length {} must exceed tau = {}", length, tau));
}

NarmaSeries narma_from_input(const Eigen::Ref<const Vector>& input, Index tau) {
    if (tau < 1) throw config_error(fmt::format("dependency length tau must be >= 1 (got {})", tau));
    NarmaSeries out{input, Vector(input.size())};
    double prev = 0.0;
    for (Index t = 0; t < input.size(); ++t) {
        const double delayed = t >= tau ? input(t - tau) : 0.0;
        const double y = 0.7 * delayed + (1.0 - prev) * prev + 0.1;
        if (!(std::abs(y) <= 10.0)) {
            throw numerical_error(fmt::format("NARMA recurrence diverged at t = {} (y = {})", t, y));
        }
        out.output(t) = y;
        prev = y;
    }
    return out;
}

NarmaSeries narma_generate(const NarmaConfig& config) {
    config.validate();
    Rng rng{config.seed};
    Vector s(config.length);
    for (Index t = 0; t < config.length; ++t) s(t) = rng.uniform(0.0, 1.0);
    return narma_from_input(s, config.tau);
}

TimeSeriesDataset split_dataset(const NarmaSeries& series, Index train_length, Index test_length, Index washout) {
    if (train_length < 1 || test_length < 1 || washout < 0) {
        throw config_error("train/test lengths must be >= 1 and washout >= 0");
    }
    if (washout >= train_length || washout >= test_length) {
        throw config_error(fmt::format("washout {} must be shorter than both windows ({}, {})", washout,
                                       train_length, test_length));
    }
    const Index available = series.input.size();
    if (train_length + test_length > available) {
        throw data_error(fmt::format("series of length {} is shorter than L_tr + L_te = {}", available,
                                     train_length + test_length));
    }
    TimeSeriesDataset d;
    d.train_inputs = series.input.head(train_length);
    d.train_targets = series.output.head(train_length);
    d.test_inputs = series.input.segment(train_length, test_length);
    d.test_targets = series.output.segment(train_length, test_length);
    d.train_length = train_length;
    d.test_length = test_length;
    d.washout = washout;
    return d;
}

}  // namespace desn
