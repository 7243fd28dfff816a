#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

#include "nsreduce/constraint_system.hpp"

namespace nsreduce {

using Complex = std::complex<double>;

/// A point in frequency space; component 0 is the time frequency.
struct FreqPoint {
    double xi0 = 0.0, xi1 = 0.0, xi2 = 0.0, xi3 = 0.0;

    double spatial_norm() const;
    double operator[](int k) const;
    FreqPoint negated() const { return {-xi0, -xi1, -xi2, -xi3}; }
};

/// Frequencies with spatial norm below this are treated as degenerate.
constexpr double kDegenerateFrequencyEps = 1e-8;

/// The two scalar symbols of the factorized operator. Throws
/// std::domain_error at degenerate frequencies.
struct ABScalars {
    Complex a{0.0, 0.0};
    Complex b{0.0, 0.0};
    static ABScalars at(const FreqPoint& xi, double mu, double tau);
};

/// 64x55 symbol matrix, stacked as four 16-row factors (time, x1, x2, x3).
Eigen::MatrixXcd assemble_symbol(const FreqPoint& xi, const ConstraintMatrices& mats);

/// Same matrix built from the independently transcribed 64-row listing
/// (which enumerates rows system-row-major); rows are placed at their
/// factor-stacked positions so the two constructions compare entrywise.
Eigen::MatrixXcd assemble_symbol_rowlist(const FreqPoint& xi, const ConstraintMatrices& mats);

/// Row r (0-based) of the transcribed listing, in listing order.
Eigen::VectorXcd symbol_listed_row(const FreqPoint& xi, const ConstraintMatrices& mats, int r);

/// Position in the factor-stacked matrix of listing row r.
int symbol_listed_row_position(int r);

/// Right-hand side built from the defining factor blocks
/// (h0_hat - i xi0 h_hat; -i xi_k h_hat).
Eigen::VectorXcd assemble_rhs(const FreqPoint& xi, const Eigen::Vector3cd& fhat,
                              const ConstraintMatrices& mats);

/// Right-hand side as expanded in the source listing. Differs from
/// assemble_rhs in the sign of the first-component entries of the three
/// spatial blocks; kept only so the discrepancy can be reported.
Eigen::VectorXcd assemble_rhs_listed(const FreqPoint& xi, const Eigen::Vector3cd& fhat,
                                     const ConstraintMatrices& mats);

struct RhsDiscrepancy {
    double max_abs = 0.0;
    std::array<int, 3> entries{};  // 0-based positions where the lists differ
};
RhsDiscrepancy rhs_discrepancy(const FreqPoint& xi, const Eigen::Vector3cd& fhat,
                               const ConstraintMatrices& mats);

/// Closed-form particular solution of B(xi) Y = G(xi). Throws
/// std::domain_error at degenerate frequencies.
Eigen::VectorXcd particular_solution(const FreqPoint& xi, const Eigen::Vector3cd& fhat,
                                     const ABScalars& ab, double tau);

/// Closed-form kernel vector j = 1..9; entries 46..54 equal e_j.
Eigen::VectorXcd null_basis(const FreqPoint& xi, int j, const ABScalars& ab, double tau);

struct SymbolRankReport {
    int rank = 0;
    double sigma_max = 0.0;
    double sigma_at_rank = 0.0;    // smallest singular value counted
    double sigma_after_rank = 0.0; // largest singular value discarded
    double gap_ratio = 0.0;        // sigma_at_rank / sigma_after_rank
    double cond = 0.0;             // sigma_max / sigma_at_rank
};

SymbolRankReport symbol_rank_report(const FreqPoint& xi, const ConstraintMatrices& mats);
int symbol_rank(const FreqPoint& xi, const ConstraintMatrices& mats);

}  // namespace nsreduce
