#pragma once

#include <array>

#include "nsreduce/fixed_point.hpp"
#include "nsreduce/grid.hpp"

namespace nsreduce {

struct SolutionFields {
    ScalarField u1, u2, u3, p;
};

struct ResidualReport {
    double div_sup = 0.0, div_l2 = 0.0;
    std::array<double, 3> momentum_sup{};
    std::array<double, 3> momentum_l2{};
    std::array<double, 9> fixed_point_defect{};
    double boundary_jump = 0.0;
    int interior_margin = 2;
    // grid metadata
    std::array<int, 3> n_space{};
    int n_time = 0;
    std::array<double, 4> spacing{};  // dt, dx1, dx2, dx3
};

/// Velocity and pressure from the two W tables:
/// u_j = carrier_j of W1 + carrier_j of W2, p = last entry of each.
/// Throws std::invalid_argument on grid mismatch.
SolutionFields assemble_solution(const W1Fields& w1, const W2Fields& w2, double tau);

struct ResidualFields {
    ScalarField divergence;
    std::array<ScalarField, 3> momentum;
};

/// Pointwise continuity and momentum residual fields of the assembled
/// solution against the given forcing.
ResidualFields ns_residual_fields(const SolutionFields& sol,
                                  const std::array<ScalarField, 3>& forcing, double mu,
                                  double tau);

/// Continuity and momentum residuals of the assembled fields against the
/// given forcing, measured on the stencil-shrunk interior. Purely
/// diagnostic; nothing here asserts smallness.
ResidualReport ns_residuals(const SolutionFields& sol, const std::array<ScalarField, 3>& forcing,
                            double mu, double tau);

/// Per-component interior sup of h1 - g(h1); zero exactly at a grid
/// fixed point.
std::array<double, 9> fixed_point_defect(const H1State& h1, const H1State& g_of_h1);

}  // namespace nsreduce
