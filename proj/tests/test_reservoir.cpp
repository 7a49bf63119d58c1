#include "desn/errors.hpp"
#include "desn/reservoir.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace desn;
using desn::testing::random_matrix;

TEST_CASE("dense 1x1 reservoir is rescaled to +-alpha") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        EsnConfig c = testing::small_config(1, seed);
        const Esn esn = build_esn(c);
        CHECK(std::abs(esn.reservoir_weights()(0, 0)) == doctest::Approx(0.9).epsilon(1e-15));
    }
}

TEST_CASE("dense reservoir hits the spectral radius for many seeds") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        EsnConfig c = testing::small_config(50, seed);
        c.spectral_radius = 0.3 + 0.025 * static_cast<double>(seed);
        const Esn esn = build_esn(c);
        CHECK(std::abs(spectral_radius(esn.reservoir_weights()) - *c.spectral_radius) / *c.spectral_radius < 1e-9);
    }
}

TEST_CASE("construction is deterministic per seed") {
    EsnConfig c = testing::small_config(50, 42);
    const Esn a = build_esn(c);
    const Esn b = build_esn(c);
    CHECK(a.input_weights() == b.input_weights());
    CHECK(a.reservoir_weights() == b.reservoir_weights());
    c.seed = 43;
    CHECK(build_esn(c).reservoir_weights() != a.reservoir_weights());
}

TEST_CASE("input weights lie strictly inside (-1, 1)") {
    for (Topology t : {Topology::DenseRandom, Topology::SimpleCycle}) {
        EsnConfig c = testing::small_config(40, 7);
        c.input_dim = 3;
        c.topology = t;
        c.cycle_weight = 0.5;
        const Esn esn = build_esn(c);
        const Matrix& v = esn.input_weights();
        CHECK(v.maxCoeff() < 1.0);
        CHECK(v.minCoeff() > -1.0);
    }
}

TEST_CASE("cycle reservoir structure") {
    EsnConfig c;
    c.topology = Topology::SimpleCycle;
    c.reservoir_size = 3;
    c.cycle_weight = 0.5;
    Matrix expected(3, 3);
    expected << 0, 0, 0.5, 0.5, 0, 0, 0, 0.5, 0;
    CHECK(build_esn(c).reservoir_weights() == expected);

    c.reservoir_size = 1;
    CHECK(build_esn(c).reservoir_weights() == Matrix::Constant(1, 1, 0.5));

    c.reservoir_size = 4;
    c.cycle_weight = 0.9;
    CHECK(spectral_radius(build_esn(c).reservoir_weights()) == doctest::Approx(0.9).epsilon(1e-12));

    for (Index n = 2; n <= 12; ++n) {
        c.reservoir_size = n;
        c.cycle_weight = 0.37;
        const Matrix w = build_esn(c).reservoir_weights();
        Matrix p = Matrix::Zero(n, n);
        for (Index i = 0; i + 1 < n; ++i) p(i + 1, i) = 1.0;
        p(0, n - 1) = 1.0;
        CHECK(w == 0.37 * p);
        CHECK((w.array() != 0.0).count() == n);
    }
}

TEST_CASE("spectral radius examples") {
    Matrix d(2, 2);
    d << 2, 0, 0, 1;
    CHECK(spectral_radius(d) == doctest::Approx(2.0));

    Matrix rot(2, 2);
    rot << 0, -0.7, 0.7, 0;
    // complex pair: |lambda|^2 = det for a 2x2 with negative discriminant
    const double det = rot(0, 0) * rot(1, 1) - rot(0, 1) * rot(1, 0);
    CHECK(spectral_radius(rot) == doctest::Approx(std::sqrt(det)).epsilon(1e-14));
    CHECK_FALSE(spectral_radius_power(rot).has_value());

    CHECK(spectral_radius(Matrix::Zero(5, 5)) == 0.0);

    Matrix bad = Matrix::Identity(3, 3);
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(spectral_radius(bad), numerical_error);
}

TEST_CASE("power iteration agrees with eigendecomposition on large matrices") {
    Rng rng{5};
    for (int trial = 0; trial < 5; ++trial) {
        // symmetric matrices have a real dominant eigenvalue
        const Matrix a = random_matrix(rng, 80, 80);
        const Matrix s = 0.5 * (a + a.transpose());
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
        const double oracle = eig.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(spectral_radius(s) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("step and readout") {
    EsnConfig c = testing::small_config(1, 1, Activation::Identity);
    Esn esn{c, Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.5)};
    CHECK(esn.step(Vector::Constant(1, 0.3))(0) == doctest::Approx(0.3));
    CHECK(esn.step(Vector::Constant(1, 0.0))(0) == doctest::Approx(0.15));

    c.activation = Activation::Tanh;
    Esn t{c, Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.5)};
    CHECK(t.step(Vector::Constant(1, 0.3))(0) == doctest::Approx(0.2913126124515909).epsilon(1e-15));
    CHECK_THROWS_AS(t.step(Vector::Zero(2)), data_error);
    CHECK_THROWS_AS(t.readout(), numerical_error);

    EsnConfig c2 = testing::small_config(2, 1, Activation::Identity);
    c2.output_dim = 2;
    Esn two{c2, Matrix::Constant(2, 1, 1.0), Matrix::Zero(2, 2)};
    two.step(Vector::Constant(1, 0.2));
    Matrix u(2, 2);
    u << 1, 0, 0, 1;
    two.set_readout(u);
    CHECK(two.readout().isApprox(Vector::Constant(2, 0.2)));

    c2.output_dim = 1;
    Esn one{c2, Matrix::Constant(2, 1, 1.0), Matrix::Zero(2, 2)};
    one.set_readout(Matrix::Zero(1, 2));
    one.step(Vector::Constant(1, 0.7));
    CHECK(one.readout()(0) == 0.0);
    Matrix u23(1, 2);
    u23 << 2, 3;
    one.set_readout(u23);
    one.reset_state();
    one.step(Vector::Constant(1, 1.0));
    CHECK(one.readout()(0) == doctest::Approx(5.0));
    const Vector before = one.state();
    one.readout();
    CHECK(one.state() == before);
}

TEST_CASE("run_sequence") {
    EsnConfig c = testing::small_config(4, 3, Activation::Identity);
    Esn esn = build_esn(c);
    CHECK(esn.run_sequence(Matrix::Zero(3, 1)).states.isZero(0.0));

    Rng rng{11};
    const Matrix in = random_matrix(rng, 2, 1);
    const StateTrajectory traj = esn.run_sequence(in, 1);
    CHECK(traj.washout == 1);
    CHECK(traj.post_washout().rows() == 1);
    esn.reset_state();
    const Vector x1 = esn.step(in.row(0).transpose());
    const Vector x2 = esn.step(in.row(1).transpose());
    CHECK(traj.states.row(0).transpose() == x1);
    CHECK(traj.states.row(1).transpose() == x2);

    CHECK_THROWS_AS(esn.run_sequence(Matrix::Zero(0, 1)), data_error);
    CHECK_THROWS_AS(esn.run_sequence(Matrix::Zero(3, 1), 3), data_error);
}

TEST_CASE("cycle hand iteration") {
    EsnConfig c;
    c.topology = Topology::SimpleCycle;
    c.reservoir_size = 2;
    c.cycle_weight = 0.5;
    c.activation = Activation::Identity;
    Matrix w(2, 2);
    w << 0, 0.5, 0.5, 0;
    Matrix v(2, 1);
    v << 1, 0;
    Esn esn{c, v, w};
    Matrix in(2, 1);
    in << 1, 0;
    const Matrix s = esn.run_sequence(in).states;
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 1) == 0.0);
    CHECK(s(1, 0) == 0.0);
    CHECK(s(1, 1) == 0.5);
}

TEST_CASE("identity activation equals the matrix-power convolution") {
    Rng rng{2024};
    for (int trial = 0; trial < 40; ++trial) {
        const Index n = testing::random_index(rng, 1, 8);
        const Index k = testing::random_index(rng, 1, 3);
        const Index t_len = testing::random_index(rng, 1, 20);
        EsnConfig c = testing::small_config(n, 100 + static_cast<std::uint64_t>(trial), Activation::Identity);
        c.input_dim = k;
        c.spectral_radius = rng.uniform(0.05, 0.95);
        Esn esn = build_esn(c);
        const Matrix in = random_matrix(rng, t_len, k);
        const Matrix states = esn.run_sequence(in).states;

        Vector brute = Vector::Zero(n);
        Matrix power = Matrix::Identity(n, n);
        for (Index i = 0; i < t_len; ++i) {
            brute += power * esn.input_weights() * in.row(t_len - 1 - i).transpose();
            power = power * esn.reservoir_weights();
        }
        CHECK((states.row(t_len - 1).transpose() - brute).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("tanh states stay inside (-1, 1)") {
    Rng rng{9};
    EsnConfig c = testing::small_config(30, 9);
    c.input_dim = 2;
    Esn esn = build_esn(c);
    const Matrix states = esn.run_sequence(random_matrix(rng, 400, 2, -50.0, 50.0)).states;
    CHECK(states.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(states.cwiseAbs().maxCoeff() > 0.5);
}

TEST_CASE("config validation") {
    EsnConfig c;
    c.spectral_radius = 1.0;
    CHECK_THROWS_AS(c.validate(), config_error);
    c.spectral_radius = 0.9;
    c.reservoir_size = 0;
    CHECK_THROWS_AS(c.validate(), config_error);
    c.reservoir_size = 5;
    c.ridge = -1.0;
    CHECK_THROWS_AS(c.validate(), config_error);
    c.ridge = 0.0;
    c.topology = Topology::SimpleCycle;
    c.cycle_weight.reset();
    CHECK_THROWS_AS(c.validate(), config_error);
    c.cycle_weight = 0.0;
    CHECK_THROWS_AS(c.validate(), config_error);
    c.cycle_weight = 0.5;
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(parse_topology("ring"), config_error);
    CHECK(parse_activation("identity") == Activation::Identity);
}
