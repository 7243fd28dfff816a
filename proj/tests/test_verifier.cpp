#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nsreduce/verifier.hpp"

using namespace nsreduce;

namespace {

GridSpec unit_grid(int n, int nt) {
    GridSpec g;
    g.n_space = {n, n, n};
    g.n_time = nt;
    return g;
}

W1Fields zero_w1(const GridSpec& g) {
    W1Fields w;
    w.grid = g;
    for (auto& f : w.w) f = ScalarField(g);
    for (auto& f : w.f_v) f = ScalarField(g);
    for (auto& f : w.f_1) f = ScalarField(g);
    return w;
}

W2Fields zero_w2(const GridSpec& g) {
    W2Fields w;
    w.grid = g;
    for (auto& f : w.w) f = ScalarField(g);
    for (auto& f : w.h3) f = ScalarField(g);
    return w;
}

}  // namespace

TEST_CASE("assemble_solution: zeros, carriers, superposition, grid mismatch") {
    GridSpec g = unit_grid(9, 5);
    const SolutionFields zero = assemble_solution(zero_w1(g), zero_w2(g), 1.0);
    CHECK(zero.u1.sup_norm() == 0.0);
    CHECK(zero.p.sup_norm() == 0.0);

    W1Fields w1 = zero_w1(g);
    W2Fields w2 = zero_w2(g);
    w1.w[6] = ScalarField::sample(g, [](double, double x, double, double) { return x; });
    w2.w[6] = ScalarField::sample(g, [](double, double, double y, double) { return y; });
    w1.w[15] = ScalarField::sample(g, [](double t, double, double, double) { return t; });
    const SolutionFields s = assemble_solution(w1, w2, 1.0);
    const ScalarField expect_u1 = w1.w[6] + w2.w[6];
    CHECK((s.u1 - expect_u1).sup_norm() == 0.0);
    CHECK((s.p - w1.w[15]).sup_norm() == 0.0);
    CHECK(s.u2.sup_norm() == 0.0);

    // with the state branch zeroed, the velocity is the forcing carrier
    const SolutionFields only1 = assemble_solution(w1, zero_w2(g), 1.0);
    CHECK((only1.u1 - w1.w[6]).sup_norm() == 0.0);

    // fieldwise linearity of the assembly
    W1Fields w1b = zero_w1(g);
    w1b.w[6] = ScalarField::sample(g, [](double, double, double, double z) { return 2.0 * z; });
    const SolutionFields both = [&] {
        W1Fields w1_sum = zero_w1(g);
        w1_sum.w[6] = w1.w[6] + w1b.w[6];
        w1_sum.w[15] = w1.w[15];
        return assemble_solution(w1_sum, w2, 1.0);
    }();
    const SolutionFields extra = assemble_solution(w1b, zero_w2(g), 1.0);
    CHECK((both.u1 - (s.u1 + extra.u1)).sup_norm() <= 1e-15);

    GridSpec other = unit_grid(11, 5);
    CHECK_THROWS_AS(assemble_solution(zero_w1(g), zero_w2(other), 1.0), std::invalid_argument);
}

TEST_CASE("ns_residuals: zero solution and machine-exact quadratics") {
    GridSpec g = unit_grid(9, 5);
    const double mu = 0.7, tau = 1.3;

    std::array<ScalarField, 3> zero_f = {ScalarField(g), ScalarField(g), ScalarField(g)};
    SolutionFields zero;
    zero.u1 = ScalarField(g);
    zero.u2 = ScalarField(g);
    zero.u3 = ScalarField(g);
    zero.p = ScalarField(g);
    const ResidualReport r0 = ns_residuals(zero, zero_f, mu, tau);
    CHECK(r0.div_sup == 0.0);
    CHECK(r0.div_l2 == 0.0);
    for (int j = 0; j < 3; ++j) {
        CHECK(r0.momentum_sup[j] == 0.0);
        CHECK(r0.momentum_l2[j] == 0.0);
    }

    // divergence-free quadratic velocity with quadratic pressure and the
    // analytically matched forcing: stencils are exact, residuals are
    // machine zero on the interior
    SolutionFields s;
    s.u1 = ScalarField::sample(g, [](double, double, double y, double) { return y * y; });
    s.u2 = ScalarField::sample(g, [](double, double, double, double z) { return 2.0 * z * z; });
    s.u3 = ScalarField::sample(g, [](double, double x, double, double) { return x * x - 1.0; });
    s.p = ScalarField::sample(g, [](double, double x, double y, double z) {
        return 0.5 * x * x - y * z;
    });
    std::array<ScalarField, 3> forcing;
    // d u1/dt - mu lap u1 + sum u_k d u1/dx_k + tau dp/dx1
    forcing[0] = ScalarField::sample(g, [&](double, double x, double, double z) {
        return -2.0 * mu + (x * x - 1.0) * 0.0 + 2.0 * z * z * 2.0 * 0.0 + tau * x;
    });
    // u1 dy(u1)=y*y*0 ... compute each by hand:
    forcing[0] = ScalarField::sample(g, [&](double, double x, double y, double z) {
        const double u1 = y * y, u2 = 2.0 * z * z;
        (void)u1;
        return -2.0 * mu + u2 * 2.0 * y + tau * x;
    });
    forcing[1] = ScalarField::sample(g, [&](double, double x, double y, double z) {
        const double u3 = x * x - 1.0;
        (void)y;
        return -4.0 * mu + u3 * 4.0 * z + tau * (-z);
    });
    forcing[2] = ScalarField::sample(g, [&](double, double x, double y, double z) {
        const double u1 = y * y;
        (void)z;
        return -2.0 * mu + u1 * 2.0 * x + tau * (-y);
    });
    const ResidualReport r = ns_residuals(s, forcing, mu, tau);
    CHECK(r.div_sup <= 1e-12);
    for (int j = 0; j < 3; ++j) CHECK(r.momentum_sup[j] <= 1e-11);
    CHECK(r.boundary_jump > 0.0);
    CHECK(r.interior_margin == 2);
    CHECK(r.n_space[0] == 9);
}

double window_sup(const ScalarField& f) {
    // Fixed physical window, so refinement levels measure the same
    // region: |x - 1/2|_inf <= 0.2 and t in [0.3, 0.7].
    const GridSpec& g = f.grid;
    double m = 0.0;
    for (int it = 0; it < g.n_time; ++it) {
        const double t = g.time(it);
        if (t < 0.3 || t > 0.7) continue;
        for (int i = 0; i < g.n_space[0]; ++i)
            for (int j = 0; j < g.n_space[1]; ++j)
                for (int k = 0; k < g.n_space[2]; ++k) {
                    if (std::abs(g.coord(0, i) - 0.5) > 0.2 ||
                        std::abs(g.coord(1, j) - 0.5) > 0.2 ||
                        std::abs(g.coord(2, k) - 0.5) > 0.2)
                        continue;
                    m = std::max(m, std::abs(f.at(it, i, j, k)));
                }
    }
    return m;
}

TEST_CASE("ns_residuals: manufactured smooth fields converge") {
    const double mu = 0.4, tau = 1.0;
    std::array<double, 2> sup{};
    int level = 0;
    for (int n : {17, 33}) {
        GridSpec g = unit_grid(n, n == 17 ? 9 : 17);
        SolutionFields s;
        s.u1 = ScalarField::sample(g, [](double t, double, double y, double z) {
            return std::exp(-t) * std::sin(y) * std::cos(z);
        });
        s.u2 = ScalarField::sample(g, [](double t, double x, double, double z) {
            return std::exp(-t) * std::sin(z) * std::cos(x);
        });
        s.u3 = ScalarField::sample(g, [](double t, double x, double y, double) {
            return std::exp(-t) * std::sin(x) * std::cos(y);
        });
        s.p = ScalarField::sample(g, [](double, double x, double y, double z) {
            return std::cos(x + y + z);
        });
        std::array<ScalarField, 3> forcing;
        auto make_forcing = [&](int j) {
            return ScalarField::sample(g, [&, j](double t, double x, double y, double z) {
                const double e = std::exp(-t);
                const double u[3] = {e * std::sin(y) * std::cos(z), e * std::sin(z) * std::cos(x),
                                     e * std::sin(x) * std::cos(y)};
                double du[3];  // derivatives of u_j along the axes
                double lap, ut;
                if (j == 0) {
                    ut = -u[0];
                    lap = -2.0 * u[0];
                    du[0] = 0.0;
                    du[1] = e * std::cos(y) * std::cos(z);
                    du[2] = -e * std::sin(y) * std::sin(z);
                } else if (j == 1) {
                    ut = -u[1];
                    lap = -2.0 * u[1];
                    du[0] = -e * std::sin(z) * std::sin(x);
                    du[1] = 0.0;
                    du[2] = e * std::cos(z) * std::cos(x);
                } else {
                    ut = -u[2];
                    lap = -2.0 * u[2];
                    du[0] = e * std::cos(x) * std::cos(y);
                    du[1] = -e * std::sin(x) * std::sin(y);
                    du[2] = 0.0;
                }
                const double grad_p[3] = {-std::sin(x + y + z), -std::sin(x + y + z),
                                          -std::sin(x + y + z)};
                double adv = 0.0;
                for (int k = 0; k < 3; ++k) adv += u[k] * du[k];
                return ut - mu * lap + adv + tau * grad_p[j];
            });
        };
        for (int j = 0; j < 3; ++j) forcing[j] = make_forcing(j);
        const ResidualFields rf = ns_residual_fields(s, forcing, mu, tau);
        sup[level] = std::max(
            {window_sup(rf.momentum[0]), window_sup(rf.momentum[1]), window_sup(rf.momentum[2])});
        ++level;
    }
    CHECK(std::log2(sup[0] / sup[1]) >= 1.5);
}

TEST_CASE("axis permutation symmetry of the residual computer") {
    GridSpec g = unit_grid(9, 5);
    const double mu = 0.6, tau = 1.1;
    auto sample_u1 = [](double t, double x, double y, double z) {
        return std::sin(x) * std::cos(y) * (1.0 + 0.5 * z * z) * (1.0 + 0.2 * t);
    };
    auto sample_u2 = [](double t, double x, double y, double z) {
        return std::cos(x * y) + z + 0.1 * t;
    };
    auto sample_u3 = [](double t, double x, double y, double z) {
        return x * y * z * (1.0 - 0.3 * t);
    };
    auto sample_p = [](double t, double x, double y, double z) {
        return x * x + y * y - z + 0.4 * t;
    };
    auto sample_f = [](double t, double x, double y, double z) {
        return std::sin(x + 2.0 * y - z) * (1.0 + t);
    };

    SolutionFields a;
    a.u1 = ScalarField::sample(g, sample_u1);
    a.u2 = ScalarField::sample(g, sample_u2);
    a.u3 = ScalarField::sample(g, sample_u3);
    a.p = ScalarField::sample(g, sample_p);
    std::array<ScalarField, 3> fa;
    fa[0] = ScalarField::sample(g, sample_f);
    fa[1] = ScalarField::sample(g, [&](double t, double x, double y, double z) {
        return sample_f(t, y, x, z) + 1.0;
    });
    fa[2] = ScalarField(g);

    // swap axes 1 and 2, components 1 and 2, and forcing 1 and 2
    auto swap_args = [](auto fn) {
        return [fn](double t, double x, double y, double z) { return fn(t, y, x, z); };
    };
    SolutionFields b;
    b.u1 = ScalarField::sample(g, swap_args(sample_u2));
    b.u2 = ScalarField::sample(g, swap_args(sample_u1));
    b.u3 = ScalarField::sample(g, swap_args(sample_u3));
    b.p = ScalarField::sample(g, swap_args(sample_p));
    std::array<ScalarField, 3> fb;
    fb[0] = ScalarField::sample(g, [&](double t, double x, double y, double z) {
        return sample_f(t, x, y, z) + 1.0;
    });
    fb[1] = ScalarField::sample(g, [&](double t, double x, double y, double z) {
        return sample_f(t, y, x, z);
    });
    fb[2] = ScalarField(g);

    const ResidualReport ra = ns_residuals(a, fa, mu, tau);
    const ResidualReport rb = ns_residuals(b, fb, mu, tau);
    CHECK(ra.div_sup == doctest::Approx(rb.div_sup).epsilon(1e-12));
    CHECK(ra.momentum_sup[0] == doctest::Approx(rb.momentum_sup[1]).epsilon(1e-12));
    CHECK(ra.momentum_sup[1] == doctest::Approx(rb.momentum_sup[0]).epsilon(1e-12));
    CHECK(ra.momentum_sup[2] == doctest::Approx(rb.momentum_sup[2]).epsilon(1e-12));
}

TEST_CASE("fixed point defect") {
    GridSpec g = unit_grid(9, 5);
    H1State h(g), same(g);
    const auto zero = fixed_point_defect(h, same);
    for (double d : zero) CHECK(d == 0.0);

    H1State other(g);
    other.comp[3] = ScalarField::sample(
        g, [](double, double x, double, double) { return 0.25 * x; });
    const auto d = fixed_point_defect(h, other);
    CHECK(d[3] == doctest::Approx(0.25).epsilon(1e-12));
    for (int j = 0; j < 9; ++j)
        if (j != 3) CHECK(d[j] == 0.0);

    GridSpec g2 = unit_grid(11, 5);
    H1State mismatch(g2);
    CHECK_THROWS_AS(fixed_point_defect(h, mismatch), std::invalid_argument);
}
