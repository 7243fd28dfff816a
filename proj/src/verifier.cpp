#include "nsreduce/verifier.hpp"

#include <cmath>
#include <stdexcept>

namespace nsreduce {

namespace {

struct InteriorNorms {
    double sup = 0.0, l2 = 0.0;
};

InteriorNorms interior_norms(const ScalarField& f, int margin) {
    const GridSpec& g = f.grid;
    InteriorNorms n;
    double sumsq = 0.0;
    for (int it = margin; it < g.n_time - margin; ++it)
        for (int i = margin; i < g.n_space[0] - margin; ++i)
            for (int j = margin; j < g.n_space[1] - margin; ++j)
                for (int k = margin; k < g.n_space[2] - margin; ++k) {
                    const double v = f.at(it, i, j, k);
                    n.sup = std::max(n.sup, std::abs(v));
                    sumsq += v * v;
                }
    n.l2 = std::sqrt(sumsq * g.cell_volume() * g.dt());
    return n;
}

}  // namespace

SolutionFields assemble_solution(const W1Fields& w1, const W2Fields& w2, double tau) {
    (void)tau;
    if (!(w1.grid == w2.grid))
        throw std::invalid_argument("assemble_solution: W tables on different grids");
    const PairMap& pm = PairMap::instance();
    SolutionFields s;
    s.u1 = w1.w[pm.pairs[0].w1_left] + w2.w[pm.pairs[0].w2_left];
    s.u2 = w1.w[pm.pairs[1].w1_left] + w2.w[pm.pairs[1].w2_left];
    s.u3 = w1.w[pm.pairs[2].w1_left] + w2.w[pm.pairs[2].w2_left];
    s.p = w1.w[15] + w2.w[15];
    return s;
}

ResidualFields ns_residual_fields(const SolutionFields& sol,
                                  const std::array<ScalarField, 3>& forcing, double mu,
                                  double tau) {
    auto d1 = [](const ScalarField& f, int axis) {
        DerivSpec d;
        if (axis == 0)
            d.t = 1;
        else
            d.x[axis - 1] = 1;
        return derivative(f, d);
    };
    auto lap = [](const ScalarField& f) {
        DerivSpec a, b, c;
        a.x = {2, 0, 0};
        b.x = {0, 2, 0};
        c.x = {0, 0, 2};
        return derivative(f, a) + derivative(f, b) + derivative(f, c);
    };

    const std::array<const ScalarField*, 3> u = {&sol.u1, &sol.u2, &sol.u3};
    ResidualFields rf;
    rf.divergence = d1(sol.u1, 1) + d1(sol.u2, 2) + d1(sol.u3, 3);
    for (int j = 0; j < 3; ++j) {
        ScalarField r = d1(*u[j], 0) - mu * lap(*u[j]) + tau * d1(sol.p, j + 1) - forcing[j];
        for (int k = 0; k < 3; ++k) r += hadamard(*u[k], d1(*u[j], k + 1));
        rf.momentum[j] = std::move(r);
    }
    return rf;
}

ResidualReport ns_residuals(const SolutionFields& sol, const std::array<ScalarField, 3>& forcing,
                            double mu, double tau) {
    const GridSpec& g = sol.u1.grid;
    ResidualReport rep;
    rep.interior_margin = 2;
    rep.n_space = g.n_space;
    rep.n_time = g.n_time;
    rep.spacing = {g.dt(), g.dx(0), g.dx(1), g.dx(2)};

    const ResidualFields rf = ns_residual_fields(sol, forcing, mu, tau);
    const InteriorNorms dn = interior_norms(rf.divergence, rep.interior_margin);
    rep.div_sup = dn.sup;
    rep.div_l2 = dn.l2;
    for (int j = 0; j < 3; ++j) {
        const InteriorNorms n = interior_norms(rf.momentum[j], rep.interior_margin);
        rep.momentum_sup[j] = n.sup;
        rep.momentum_l2[j] = n.l2;
    }

    rep.boundary_jump = std::max({sol.u1.boundary_jump(), sol.u2.boundary_jump(),
                                  sol.u3.boundary_jump(), sol.p.boundary_jump()});
    return rep;
}

std::array<double, 9> fixed_point_defect(const H1State& h1, const H1State& g_of_h1) {
    if (!(h1.grid() == g_of_h1.grid()))
        throw std::invalid_argument("fixed_point_defect: grid mismatch");
    std::array<double, 9> d{};
    for (int j = 0; j < 9; ++j) d[j] = (h1.comp[j] - g_of_h1.comp[j]).sup_norm();
    return d;
}

}  // namespace nsreduce
