#pragma once

// Short-term memory capacity of linear simple-cycle reservoirs.
//
// Empirical side: C_k is the squared correlation between a trained output
// and the k-step delayed input, C = sum_{k>=1} C_k.
//
// Analytical side: for W = r P (P the cyclic shift) and a single input
// column V, define
//   rot_k(v)[i] = v[(i - k) mod N]               (right rotation by k)
//   Omega      = (rot_1(V_rev), ..., rot_N(V_rev)) with V_rev = (v_N..v_1)
//   Gamma      = diag(1, r, ..., r^{N-1})
//   A          = Omega^T Gamma^2 Omega
// so that zeta_k = rot_k(V)^T A^{-1} rot_k(V) = r^{-2k}, distinct rotations
// are A^{-1}-orthogonal, and for zero-mean i.i.d. input of variance sigma^2
//   E[x x^T]        = sigma^2 / (1 - r^{2N}) A
//   E[x(t) s(t-k)]  = sigma^2 r^k rot_k(V),
// which gives C = N - 1 + r^{2N} for shallow and parallel networks.

#include "desn/deep.hpp"
#include "desn/reservoir.hpp"
#include "desn/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace desn {

/// rot_k: output[i] = v[(i - k) mod N]; k may be negative or exceed N.
Vector rotate(const Eigen::Ref<const Vector>& v, Index k);

struct RotationMachinery {
    Vector input;       ///< V_{1..N}
    Matrix extension;   ///< Omega; row j equals rot_j(V)
    Vector gamma;       ///< diagonal of Gamma
    Matrix gram;        ///< A = Omega^T Gamma^2 Omega
    double condition = 0.0;  ///< 2-norm condition number of Omega
    bool regular = false;    ///< condition <= 1e12
};

RotationMachinery build_machinery(const Eigen::Ref<const Vector>& input, double r);

/// rot_i(V)^T A^{-1} rot_j(V), solved through the factor A = (Gamma Omega)^T
/// (Gamma Omega) rather than A itself. Throws numerical_error when Omega is
/// singular. Indices must lie in [0, N).
double rotation_form(const RotationMachinery& m, Index i, Index j);

/// zeta_k = rotation_form(m, k, k).
double zeta(const RotationMachinery& m, Index k);

/// N - 1 + r^{2N}.
double theoretical_mc_parallel(Index reservoir_size, double r);

/// A linear simple-cycle network to probe.
struct McArchitecture {
    Architecture kind = Architecture::Shallow;
    std::size_t layers = 1;
    Index reservoir_size = 20;
    double cycle_weight = 0.9;
    std::uint64_t seed = 1;
};

struct McProbeConfig {
    Index length = 20000;
    double input_variance = 1.0;
    Index max_delay = 40;
    Index washout = 200;
    double ridge = 1e-8;

    void validate() const;
};

struct DelayCapacity {
    Index delay = 0;
    double capacity = 0.0;
    /// Output variance vanished or the correlation was not finite; capacity
    /// was recorded as 0.
    bool degenerate = false;
};

struct McReport {
    McArchitecture architecture;
    McProbeConfig probe;
    std::vector<DelayCapacity> per_delay;
    double empirical = 0.0;
    std::optional<double> theoretical;
    Index train_rows = 0;
    Index eval_rows = 0;
};

/// Estimates C_1..C_{k_max} of a linear simple-cycle network. The input is
/// uniform on (-c, c), c = sqrt(3 sigma^2), drawn from `input_rng`; reservoir
/// weights come from architecture.seed.
///
/// Rows before max(washout, k_max) are dropped and the rest split in half:
/// readouts are fitted on the first half and C_k evaluated on the second.
/// Shallow and parallel networks fit one delay-k readout per member and
/// average member outputs. A series network is trained once as a cascade
/// with M = k_max outputs (stage l > 1 consumes all k_max outputs of stage
/// l - 1) on the delay-target matrix, and C_k is read from output column k.
McReport empirical_mc(const McArchitecture& architecture, const McProbeConfig& probe, Rng& input_rng,
                      std::size_t jobs = 1);

/// Squared correlation over two equal-length series; nullopt when either
/// variance vanishes or the result is not finite.
std::optional<double> squared_correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

struct IdentityCheck {
    std::string name;
    double worst = 0.0;      ///< worst observed error metric
    double tolerance = 0.0;
    bool passed = false;
};

struct TrialIdentities {
    std::size_t trial = 0;
    double condition = 0.0;
    int resamples = 0;
    double zeta_error = 0.0;        ///< max_k |zeta_k r^{2k} - 1|
    double cross_error = 0.0;       ///< max_{i!=j} |form(i,j)| / sqrt(zeta_i zeta_j)
    std::optional<double> covariance_error;   ///< max rel. error over dominant entries of R
    std::optional<double> cross_moment_error; ///< same for the stacked p_k
};

struct IdentityReport {
    Index reservoir_size = 0;
    double cycle_weight = 0.0;
    std::vector<TrialIdentities> trials;
    std::vector<IdentityCheck> checks;

    bool all_passed() const;
};

struct IdentityOptions {
    double algebraic_tolerance = 1e-8;
    /// Monte-Carlo run length; 0 skips the statistical checks.
    Index monte_carlo_length = 200000;
    double statistical_tolerance = 0.02;
    /// Entries with |analytic| >= dominance * max|analytic| are compared.
    double dominance = 0.5;
    double input_variance = 1.0;
};

/// Numerically checks the rotation identities and the covariance forms on
/// `trials` random regular input columns. Failures are reported, not thrown.
IdentityReport verify_theorem_identities(Index reservoir_size, double r, std::size_t trials, Rng& rng,
                                         const IdentityOptions& options = {});

}  // namespace desn
