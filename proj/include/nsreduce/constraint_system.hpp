#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

#include "nsreduce/layout.hpp"

namespace nsreduce {

/// A signed basis row of one of the 16-row system matrices: either
/// sign*alpha_k (alpha = 1..4, unit = 0) or sign*e_unit (alpha = 0,
/// unit = 1-based Z slot).
struct SystemRow {
    int alpha = 0;
    int unit = 0;
    int sign = 1;
};

using SystemRowTable = std::array<SystemRow, StateLayout::system_rows>;

/// Constant matrices of the lifted first-order system. Immutable after
/// construction.
struct ConstraintMatrices {
    double mu = 1.0;
    double tau = 1.0;

    Eigen::MatrixXd A;     // 4 x 59, equals [I4 | A1]
    Eigen::MatrixXd A1;    // 4 x 55, rows alpha_1..alpha_4
    std::array<Eigen::VectorXd, 4> alpha;
    Eigen::MatrixXd Aeta;  // 59 x 55, [-A1; I55]

    Eigen::MatrixXd H;     // 16 x 55
    std::array<Eigen::MatrixXd, 4> Hk;  // time, x1, x2, x3 factors

    SystemRowTable H_rows;
    std::array<SystemRowTable, 4> Hk_rows;

    /// Particular solution of A X = (0, F1, F2, F3)^T.
    Eigen::VectorXd X0(const Eigen::Vector3d& forcing) const;
    /// Affine parts of the first-order system right-hand sides.
    Eigen::VectorXd h_template(const Eigen::Vector3d& forcing) const;   // 16
    Eigen::VectorXd h0_template(const Eigen::Vector3d& forcing) const;  // 16

    Eigen::VectorXd row_vector(const SystemRow& row) const;  // 55
};

/// Builds all constant matrices for given viscosity and specific volume.
/// Throws std::invalid_argument unless mu > 0 and tau > 0.
ConstraintMatrices build_system(double mu, double tau);

/// True iff rank(A | beta) == rank(A). Singular values below
/// 1e-10 * sigma_max count as zero.
bool pointwise_solvable(const Eigen::MatrixXd& A, const Eigen::VectorXd& beta);

/// Component j: (lhs_j . Z) - (left_j . Z)(right_j . Z). Zero exactly on
/// the constraint manifold.
Eigen::VectorXd quadratic_residual(const Eigen::VectorXd& z, const StateLayout& layout);

/// X0(F) + Aeta * Z; satisfies A X = (0, F1, F2, F3)^T identically.
Eigen::VectorXd reconstruct_X(const Eigen::VectorXd& z, const Eigen::Vector3d& forcing,
                              const ConstraintMatrices& mats);

/// Numerical rank with the shared relative tolerance.
int numerical_rank(const Eigen::MatrixXd& m);

/// Structure report (shapes, names, nonzero triplets) as a JSON string.
std::string structure_json(const ConstraintMatrices& mats);

}  // namespace nsreduce
