#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "nsreduce/constraint_system.hpp"
#include "oracles.hpp"

using namespace nsreduce;

namespace {

/// Expected run-length patterns of the four momentum/continuity
/// coefficient vectors, one-based positions as published.
struct AlphaPattern {
    std::vector<std::pair<int, char>> entries;  // (one-based slot, kind: '1','t','m')
};

const std::array<AlphaPattern, 4> kAlphaPatterns = {{
    {{{5, '1'}, {10, '1'}}},
    {{{13, 't'}, {18, 'm'}, {19, 'm'}, {20, 'm'}, {47, '1'}, {48, '1'}, {49, '1'}}},
    {{{14, 't'}, {28, 'm'}, {29, 'm'}, {30, 'm'}, {50, '1'}, {51, '1'}, {52, '1'}}},
    {{{15, 't'}, {38, 'm'}, {39, 'm'}, {40, 'm'}, {53, '1'}, {54, '1'}, {55, '1'}}},
}};

/// Semantic reconstruction of the system matrices from component names:
/// each row of H is the Z-coefficient vector of a system row, and each
/// row of H_k is the Z-coefficient vector of its derivative along axis
/// k. Mixed second partials share a slot by name normalization, so this
/// asserts the full cross-reference table.
Eigen::VectorXd semantic_row(const ConstraintMatrices& m, const std::string& name) {
    const auto& L = StateLayout::instance();
    if (name == "du1/dx1") return -m.alpha[0];
    if (name == "du1/dt") return -m.alpha[1];
    if (name == "du2/dt") return -m.alpha[2];
    if (name == "du3/dt") return -m.alpha[3];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(StateLayout::z_dim);
    v[L.z_slot(name)] = 1.0;
    return v;
}

std::string derived_name(const std::string& row_name, int axis) {
    // Differentiating a base variable yields its first derivative;
    // differentiating a first derivative yields a normalized second
    // derivative of the underlying base variable.
    if (row_name.find('/') == std::string::npos) return first_derivative_name(row_name, axis);
    const auto slash = row_name.find('/');
    const std::string base = row_name.substr(1, slash - 1);
    const std::string ax = row_name.substr(slash + 2);
    const std::array<std::string, 4> axes = {"t", "x1", "x2", "x3"};
    int first_axis = -1;
    for (int a = 0; a < 4; ++a)
        if (axes[a] == ax) first_axis = a;
    REQUIRE(first_axis >= 0);
    return second_derivative_name(base, first_axis, axis);
}

oracles::FracMatrix to_frac(const Eigen::MatrixXd& m, double mu, double tau,
                            oracles::Frac mu_f, oracles::Frac tau_f) {
    oracles::FracMatrix out(m.rows(), std::vector<oracles::Frac>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (v == 0.0)
                out[i][j] = oracles::frac(0, 1);
            else if (v == 1.0)
                out[i][j] = oracles::frac(1, 1);
            else if (v == -1.0)
                out[i][j] = oracles::frac(-1, 1);
            else if (v == tau)
                out[i][j] = tau_f;
            else if (v == -tau)
                out[i][j] = oracles::frac(-tau_f.num, tau_f.den);
            else if (v == -mu)
                out[i][j] = oracles::frac(-mu_f.num, mu_f.den);
            else if (v == mu)
                out[i][j] = mu_f;
            else
                FAIL("unexpected entry in integer-structured matrix");
        }
    return out;
}

}  // namespace

TEST_CASE("build_system rejects non-positive parameters") {
    CHECK_THROWS_AS(build_system(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_system(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("alpha vectors match the published run-length patterns") {
    const double mu = 0.7, tau = 1.3;
    const ConstraintMatrices m = build_system(mu, tau);
    for (int a = 0; a < 4; ++a) {
        Eigen::VectorXd expect = Eigen::VectorXd::Zero(55);
        for (const auto& [pos, kind] : kAlphaPatterns[a].entries)
            expect[pos - 1] = kind == '1' ? 1.0 : (kind == 't' ? tau : -mu);
        CHECK((m.alpha[a] - expect).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("A is the identity next to the coefficient block and annihilates Aeta") {
    const ConstraintMatrices m = build_system(1.0, 1.0);
    CHECK((m.A.leftCols(4) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.A.rightCols(55) - m.A1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.A * m.Aeta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact rational annihilation and rank via elimination oracle") {
    // mu = 1/2, tau = 2/3: exact fraction arithmetic end to end.
    const oracles::Frac mu_f = oracles::frac(1, 2), tau_f = oracles::frac(2, 3);
    const ConstraintMatrices m = build_system(0.5, 2.0 / 3.0);
    const auto A = to_frac(m.A, 0.5, 2.0 / 3.0, mu_f, tau_f);
    const auto Aeta = to_frac(m.Aeta, 0.5, 2.0 / 3.0, mu_f, tau_f);
    const auto prod = oracles::matmul(A, Aeta);
    for (const auto& row : prod)
        for (const auto& v : row) CHECK(oracles::is_zero(v));

    for (long long p : {2147483647LL, 1000000007LL})
        CHECK(oracles::rank_mod_p(Aeta, p) == 55);
    CHECK(numerical_rank(m.Aeta) == 55);

    // Different parameters leave the structural rank unchanged.
    const ConstraintMatrices m2 = build_system(0.5, 2.0);
    const auto Aeta2 = to_frac(m2.Aeta, 0.5, 2.0, oracles::frac(1, 2), oracles::frac(2, 1));
    for (long long p : {2147483647LL, 1000000007LL})
        CHECK(oracles::rank_mod_p(Aeta2, p) == 55);
    CHECK(numerical_rank(m2.Aeta) == 55);
}

TEST_CASE("system matrices equal their semantic reconstruction") {
    const ConstraintMatrices m = build_system(0.9, 1.7);
    const auto& names = StateLayout::instance().system_row_names();
    for (int r = 0; r < 16; ++r) {
        CHECK((m.H.row(r).transpose() - semantic_row(m, names[r])).cwiseAbs().maxCoeff() == 0.0);
        for (int axis = 0; axis < 4; ++axis) {
            const Eigen::VectorXd expect = semantic_row(m, derived_name(names[r], axis));
            CHECK((m.Hk[axis].row(r).transpose() - expect).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("affine templates place the forcing in the published slots") {
    const ConstraintMatrices m = build_system(1.0, 1.0);
    const Eigen::Vector3d F(2.0, -3.0, 5.0);
    const Eigen::VectorXd h = m.h_template(F);
    const Eigen::VectorXd h0 = m.h0_template(F);
    Eigen::VectorXd h_expect = Eigen::VectorXd::Zero(16), h0_expect = Eigen::VectorXd::Zero(16);
    h_expect[1] = F[0];
    h_expect[2] = F[1];
    h_expect[3] = F[2];
    h0_expect[6] = F[0];
    h0_expect[10] = F[1];
    h0_expect[14] = F[2];
    CHECK((h - h_expect).cwiseAbs().maxCoeff() == 0.0);
    CHECK((h0 - h0_expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pointwise solvability") {
    Eigen::MatrixXd id2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK(pointwise_solvable(id2, Eigen::Vector2d(3.0, 4.0)));

    Eigen::MatrixXd degenerate(2, 2);
    degenerate << 1, 0, 1, 0;
    CHECK_FALSE(pointwise_solvable(degenerate, Eigen::Vector2d(1.0, 2.0)));

    const ConstraintMatrices m = build_system(1.0, 1.0);
    Eigen::VectorXd beta(4);
    beta << 0, 1, 2, 3;
    CHECK(pointwise_solvable(m.A, beta));
}

TEST_CASE("pointwise solvability is invariant under row scaling") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> scale_dist(0.1, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd A(3, 5);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 5; ++j) A(i, j) = unit(rng);
        Eigen::VectorXd beta(3);
        for (int i = 0; i < 3; ++i) beta[i] = unit(rng);
        if (trial % 2 == 0) beta = A.leftCols(3) * beta.head(3);  // mix solvable cases in
        const bool base = pointwise_solvable(A, beta);
        Eigen::MatrixXd As = A;
        Eigen::VectorXd bs = beta;
        for (int i = 0; i < 3; ++i) {
            const double s = scale_dist(rng) * (unit(rng) > 0 ? 1.0 : -1.0);
            As.row(i) *= s;
            bs[i] *= s;
        }
        CHECK(pointwise_solvable(As, bs) == base);
    }
}

TEST_CASE("quadratic residual examples") {
    const auto& L = StateLayout::instance();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(55);
    CHECK(quadratic_residual(z, L).cwiseAbs().maxCoeff() == 0.0);

    // u1 = 2, du2/dx2 = du3/dx3 = 1 (so the continuity factor is -2),
    // and the first product slot primed to match: residual vanishes.
    z.setZero();
    z[L.z_slot("u1")] = 2.0;
    z[L.z_slot("du2/dx2")] = 1.0;
    z[L.z_slot("du3/dx3")] = 1.0;
    z[L.z_slot("u1*du1/dx1")] = -4.0;
    Eigen::VectorXd r = quadratic_residual(z, L);
    CHECK(r[0] == 0.0);

    z.setZero();
    z[46] = 1.0;  // bare product component, factors zero
    r = quadratic_residual(z, L);
    CHECK(r[0] == 1.0);
    CHECK(r.tail(8).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reconstruction reproduces the constrained components") {
    const ConstraintMatrices m = build_system(1.0, 1.0);
    const Eigen::Vector3d F(1.0, 2.0, 3.0);

    Eigen::VectorXd x = reconstruct_X(Eigen::VectorXd::Zero(55), F, m);
    CHECK(x[0] == 0.0);
    CHECK(x[1] == 1.0);
    CHECK(x[2] == 2.0);
    CHECK(x[3] == 3.0);
    CHECK(x.tail(55).cwiseAbs().maxCoeff() == 0.0);

    // Unit Z in the first free slot: passthrough plus the (zero) first
    // column of the coefficient block.
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(55);
    e1[0] = 1.0;
    x = reconstruct_X(e1, Eigen::Vector3d::Zero(), m);
    CHECK((x.head(4) + m.A1.col(0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(x[4] == 1.0);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd z(55);
        for (int i = 0; i < 55; ++i) z[i] = gauss(rng);
        const Eigen::Vector3d f(gauss(rng), gauss(rng), gauss(rng));
        const Eigen::VectorXd rec = reconstruct_X(z, f, m);
        Eigen::VectorXd beta(4);
        beta << 0.0, f[0], f[1], f[2];
        CHECK((m.A * rec - beta).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("structure report matches the frozen golden file") {
    const ConstraintMatrices m = build_system(1.0, 1.0);
    const std::string js = structure_json(m);
    CHECK(js.find("\"x_names\"") != std::string::npos);
    CHECK(js.find("\"quad_pairs\"") != std::string::npos);
    CHECK(js.find("\"matrices\"") != std::string::npos);

    // Golden structure comparison (numeric, via parsed JSON). The file
    // is created on first use and frozen with the repository.
    const std::filesystem::path golden =
        std::filesystem::path(GOLDEN_DIR) / "constraint_structure.json";
    const nlohmann::json fresh = nlohmann::json::parse(js);
    if (!std::filesystem::exists(golden)) {
        std::ofstream os(golden);
        os << js << "\n";
        MESSAGE("golden structure file initialized");
    } else {
        std::ifstream is(golden);
        nlohmann::json frozen;
        is >> frozen;
        CHECK(frozen == fresh);
    }
}
