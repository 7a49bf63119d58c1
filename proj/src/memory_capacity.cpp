#include "desn/memory_capacity.hpp"

#include "desn/errors.hpp"

#include <fmt/format.h>

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace desn {

Vector rotate(const Eigen::Ref<const Vector>& v, Index k) {
    const Index n = v.size();
    Vector out(n);
    if (n == 0) return out;
    const Index shift = ((k % n) + n) % n;
    for (Index i = 0; i < n; ++i) out((i + shift) % n) = v(i);
    return out;
}

RotationMachinery build_machinery(const Eigen::Ref<const Vector>& input, double r) {
    const Index n = input.size();
    if (n < 1) throw config_error("rotation machinery needs N >= 1");
    if (!(r > 0.0 && r < 1.0)) throw config_error(fmt::format("cycle weight must lie in (0, 1) (got {})", r));

    RotationMachinery m;
    m.input = input;
    const Vector reversed = input.reverse();
    m.extension.resize(n, n);
    for (Index c = 0; c < n; ++c) m.extension.col(c) = rotate(reversed, c + 1);
    m.gamma.resize(n);
    for (Index j = 0; j < n; ++j) m.gamma(j) = std::pow(r, static_cast<double>(j));
    m.gram = m.extension.transpose() * m.gamma.array().square().matrix().asDiagonal() * m.extension;

    Eigen::JacobiSVD<Matrix> svd(m.extension);
    const auto& sv = svd.singularValues();
    const double smin = sv(n - 1);
    m.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    m.regular = std::isfinite(m.condition) && m.condition <= 1e12;
    return m;
}

namespace {

/// Columns u_k with (Gamma Omega)^T u_k = rot_k(V), k = 0..N-1, so that
/// rot_i^T A^{-1} rot_j = u_i . u_j.
Matrix whitened_rotations(const RotationMachinery& m) {
    if (!m.regular) {
        throw numerical_error(fmt::format("extension matrix is singular (condition number {:.3g})", m.condition));
    }
    const Index n = m.input.size();
    Matrix rotations(n, n);
    for (Index k = 0; k < n; ++k) rotations.col(k) = rotate(m.input, k);
    const Matrix factor_t = (m.gamma.asDiagonal() * m.extension).transpose();
    return factor_t.partialPivLu().solve(rotations);
}

}  // namespace

double rotation_form(const RotationMachinery& m, Index i, Index j) {
    const Index n = m.input.size();
    if (i < 0 || i >= n || j < 0 || j >= n) {
        throw config_error(fmt::format("rotation indices must lie in [0, {}) (got {}, {})", n, i, j));
    }
    if (!m.regular) {
        throw numerical_error(fmt::format("extension matrix is singular (condition number {:.3g})", m.condition));
    }
    const Matrix factor_t = (m.gamma.asDiagonal() * m.extension).transpose();
    const auto lu = factor_t.partialPivLu();
    const Vector ui = lu.solve(rotate(m.input, i));
    const Vector uj = i == j ? ui : Vector(lu.solve(rotate(m.input, j)));
    return ui.dot(uj);
}

double zeta(const RotationMachinery& m, Index k) { return rotation_form(m, k, k); }

double theoretical_mc_parallel(Index reservoir_size, double r) {
    if (reservoir_size < 1) throw config_error("reservoir size must be >= 1");
    if (!(r > 0.0 && r < 1.0)) throw config_error(fmt::format("cycle weight must lie in (0, 1) (got {})", r));
    return static_cast<double>(reservoir_size) - 1.0 + std::pow(r, 2.0 * static_cast<double>(reservoir_size));
}

void McProbeConfig::validate() const {
    if (max_delay < 1) throw config_error("max delay k_max must be >= 1");
    if (washout < 0) throw config_error("washout must be >= 0");
    if (!(input_variance > 0.0)) throw config_error("input variance must be > 0");
    if (!(ridge >= 0.0)) throw config_error("ridge factor must be >= 0");
    if (length <= washout + max_delay) {
        throw config_error(fmt::format("sequence length {} must exceed washout + k_max = {}", length,
                                       washout + max_delay));
    }
}

std::optional<double> squared_correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    if (a.size() != b.size() || a.size() < 2) throw data_error("correlation needs two series of equal length >= 2");
    const Vector ac = a.array() - a.mean();
    const Vector bc = b.array() - b.mean();
    const double cov = ac.dot(bc);
    const double va = ac.squaredNorm();
    const double vb = bc.squaredNorm();
    if (!(va > 0.0) || !(vb > 0.0)) return std::nullopt;
    const double c = (cov / va) * (cov / vb);
    if (!std::isfinite(c)) return std::nullopt;
    return std::min(c, 1.0);
}

McReport empirical_mc(const McArchitecture& architecture, const McProbeConfig& probe, Rng& input_rng,
                      std::size_t jobs) {
    probe.validate();
    if (architecture.layers < 1) throw config_error("number of reservoirs L must be >= 1");
    if (architecture.kind == Architecture::Shallow && architecture.layers != 1) {
        throw config_error("a shallow network has exactly one reservoir");
    }

    const Index t_total = probe.length;
    const Index k_max = probe.max_delay;
    const double half_width = std::sqrt(3.0 * probe.input_variance);
    Matrix input(t_total, 1);
    for (Index t = 0; t < t_total; ++t) input(t, 0) = input_rng.uniform(-half_width, half_width);

    Matrix delayed = Matrix::Zero(t_total, k_max);
    for (Index k = 1; k <= k_max; ++k) {
        delayed.col(k - 1).tail(t_total - k) = input.col(0).head(t_total - k);
    }

    const Index start = std::max(probe.washout, k_max);
    const Index split = start + (t_total - start) / 2;
    const Index eval_rows = t_total - split;
    if (split - start < 1 || eval_rows < 2) throw config_error("sequence too short for a train/evaluation split");

    EsnConfig base;
    base.reservoir_size = architecture.reservoir_size;
    base.input_dim = 1;
    base.output_dim = k_max;
    base.topology = Topology::SimpleCycle;
    base.spectral_radius.reset();
    base.cycle_weight = architecture.cycle_weight;
    base.activation = Activation::Identity;
    base.ridge = probe.ridge;
    base.seed = architecture.seed;

    Matrix output;
    if (architecture.kind == Architecture::Series) {
        SeriesEsn net = make_series(base, architecture.layers);
        series_train(net, input.topRows(split), delayed.topRows(split), start);
        output = series_predict(net, input);
    } else {
        ParallelEsn net = make_parallel(base, architecture.layers);
        parallel_train(net, input.topRows(split), delayed.topRows(split), start, jobs);
        output = parallel_predict(net, input, jobs);
    }

    McReport report;
    report.architecture = architecture;
    report.probe = probe;
    report.train_rows = split - start;
    report.eval_rows = eval_rows;
    report.per_delay.reserve(static_cast<std::size_t>(k_max));
    for (Index k = 1; k <= k_max; ++k) {
        const auto c = squared_correlation(output.col(k - 1).tail(eval_rows), delayed.col(k - 1).tail(eval_rows));
        report.per_delay.push_back({k, c.value_or(0.0), !c.has_value()});
        report.empirical += c.value_or(0.0);
    }
    if (architecture.kind != Architecture::Series) {
        report.theoretical = theoretical_mc_parallel(architecture.reservoir_size, architecture.cycle_weight);
    }
    return report;
}

bool IdentityReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
}

namespace {

double max_relative_error_dominant(const Matrix& estimate, const Matrix& analytic, double dominance) {
    const double threshold = dominance * analytic.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (Index i = 0; i < analytic.rows(); ++i) {
        for (Index j = 0; j < analytic.cols(); ++j) {
            const double a = analytic(i, j);
            if (std::abs(a) < threshold || a == 0.0) continue;
            worst = std::max(worst, std::abs(estimate(i, j) - a) / std::abs(a));
        }
    }
    return worst;
}

struct MonteCarloMoments {
    Matrix covariance;     ///< E[x x^T]
    Matrix cross_moments;  ///< column k: E[x(t) s(t-k)], k = 0..N-1
};

MonteCarloMoments simulate_moments(const Vector& input_column, double r, Index length, double variance, Rng& rng) {
    const Index n = input_column.size();
    EsnConfig config;
    config.reservoir_size = n;
    config.topology = Topology::SimpleCycle;
    config.spectral_radius.reset();
    config.cycle_weight = r;
    config.activation = Activation::Identity;
    Matrix w = Matrix::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) w(i + 1, i) = r;
    w(0, n - 1) = r;
    Esn esn{config, Matrix(input_column), std::move(w)};

    const double half_width = std::sqrt(3.0 * variance);
    const auto washout = static_cast<Index>(std::ceil(20.0 / (1.0 - r)));
    std::vector<double> history(static_cast<std::size_t>(n), 0.0);  // ring buffer of s(t - k)
    std::size_t head = 0;
    Vector s(1);

    MonteCarloMoments mom{Matrix::Zero(n, n), Matrix::Zero(n, n)};
    for (Index t = 0; t < washout + length; ++t) {
        s(0) = rng.uniform(-half_width, half_width);
        head = (head + history.size() - 1) % history.size();
        history[head] = s(0);
        const Vector& x = esn.step(s);
        if (t < washout) continue;
        mom.covariance.selfadjointView<Eigen::Lower>().rankUpdate(x);
        for (Index k = 0; k < n; ++k) {
            mom.cross_moments.col(k) += history[(head + static_cast<std::size_t>(k)) % history.size()] * x;
        }
    }
    Matrix full = mom.covariance.selfadjointView<Eigen::Lower>();
    mom.covariance = full / static_cast<double>(length);
    mom.cross_moments /= static_cast<double>(length);
    return mom;
}

}  // namespace

IdentityReport verify_theorem_identities(Index reservoir_size, double r, std::size_t trials, Rng& rng,
                                         const IdentityOptions& options) {
    if (reservoir_size < 1 || reservoir_size > 32) {
        throw config_error(fmt::format("identity verification supports 1 <= N <= 32 (got {})", reservoir_size));
    }
    if (!(r > 0.0 && r < 1.0)) throw config_error(fmt::format("cycle weight must lie in (0, 1) (got {})", r));
    if (trials < 1) throw config_error("at least one trial is required");

    const Index n = reservoir_size;
    const double r2n = std::pow(r, 2.0 * static_cast<double>(n));
    IdentityReport report;
    report.reservoir_size = n;
    report.cycle_weight = r;

    for (std::size_t trial = 0; trial < trials; ++trial) {
        TrialIdentities row;
        row.trial = trial;
        RotationMachinery m;
        constexpr int max_resamples = 100;
        for (;;) {
            Vector v(n);
            for (Index i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
            m = build_machinery(v, r);
            if (m.regular || row.resamples == max_resamples) break;
            ++row.resamples;
        }
        row.condition = m.condition;
        if (!m.regular) {
            row.zeta_error = row.cross_error = std::numeric_limits<double>::infinity();
            report.trials.push_back(row);
            continue;
        }

        const Matrix u = whitened_rotations(m);
        const Matrix forms = u.transpose() * u;
        for (Index i = 0; i < n; ++i) {
            const double expected_inverse = std::pow(r, 2.0 * static_cast<double>(i));
            row.zeta_error = std::max(row.zeta_error, std::abs(forms(i, i) * expected_inverse - 1.0));
            for (Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double scale = std::sqrt(forms(i, i) * forms(j, j));
                row.cross_error = std::max(row.cross_error, std::abs(forms(i, j)) / scale);
            }
        }

        if (options.monte_carlo_length > 0) {
            const auto mom = simulate_moments(m.input, r, options.monte_carlo_length, options.input_variance, rng);
            const Matrix r_analytic = options.input_variance / (1.0 - r2n) * m.gram;
            Matrix p_analytic(n, n);
            for (Index k = 0; k < n; ++k) {
                p_analytic.col(k) = options.input_variance * std::pow(r, static_cast<double>(k)) * rotate(m.input, k);
            }
            row.covariance_error = max_relative_error_dominant(mom.covariance, r_analytic, options.dominance);
            row.cross_moment_error = max_relative_error_dominant(mom.cross_moments, p_analytic, options.dominance);
        }
        report.trials.push_back(row);
    }

    auto summarize = [&](std::string name, auto metric, double tol, bool optional_metric) {
        IdentityCheck check{std::move(name), 0.0, tol, true};
        bool any = false;
        for (const auto& t : report.trials) {
            const std::optional<double> v = metric(t);
            if (!v) continue;
            any = true;
            check.worst = std::max(check.worst, *v);
            if (!(*v <= tol)) check.passed = false;
        }
        if (!any && !optional_metric) check.passed = false;
        if (any || !optional_metric) report.checks.push_back(check);
    };
    summarize("zeta_k = r^-2k", [](const TrialIdentities& t) { return std::optional<double>{t.zeta_error}; },
              options.algebraic_tolerance, false);
    summarize("cross-rotation orthogonality",
              [](const TrialIdentities& t) { return std::optional<double>{t.cross_error}; },
              options.algebraic_tolerance, false);
    summarize("state covariance R", [](const TrialIdentities& t) { return t.covariance_error; },
              options.statistical_tolerance, true);
    summarize("delayed cross-moment p_k", [](const TrialIdentities& t) { return t.cross_moment_error; },
              options.statistical_tolerance, true);
    return report;
}

}  // namespace desn
