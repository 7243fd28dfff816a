#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nsreduce {

/// One quadratic constraint: component `lhs` of Z must equal
/// (left . Z) * (right . Z).
struct QuadPair {
    int lhs;                // 0-based Z slot of the product component
    Eigen::VectorXd left;   // 55-vector
    Eigen::VectorXd right;  // 55-vector
};

/// Index map for the lifted state. X stacks the four constrained slots
/// (du1/dx1 and the three time derivatives of velocity) in front of the
/// 55 free slots Z. All component lookups anywhere in the library go
/// through these names; no other module hard-codes slot numbers.
class StateLayout {
public:
    static const StateLayout& instance();

    const std::vector<std::string>& x_names() const { return x_names_; }
    const std::vector<std::string>& z_names() const { return z_names_; }
    const std::vector<QuadPair>& quad_pairs() const { return quad_pairs_; }

    /// 0-based slot of a named Z component; throws std::out_of_range on
    /// unknown names.
    int z_slot(std::string_view name) const;
    int x_slot(std::string_view name) const;

    /// Unit Z-coefficient vector for a named component.
    Eigen::VectorXd z_unit(std::string_view name) const;

    /// Names of the 16 rows of the first-order system (u, p and their
    /// unconstrained first derivatives), in system order.
    const std::vector<std::string>& system_row_names() const { return u_names_; }

    static constexpr int x_dim = 59;
    static constexpr int z_dim = 55;
    static constexpr int num_quadratic = 9;
    static constexpr int system_rows = 16;

private:
    StateLayout();
    std::vector<std::string> x_names_;
    std::vector<std::string> z_names_;
    std::vector<std::string> u_names_;
    std::vector<QuadPair> quad_pairs_;
    std::unordered_map<std::string, int> x_lookup_;
    std::unordered_map<std::string, int> z_lookup_;
};

/// Canonical component names: first derivative "du1/dx2", second
/// derivative "d2u1/dtdx1" (axes in t,x1,x2,x3 order), product
/// "u1*du1/dx1". Axis 0 is time.
std::string first_derivative_name(std::string_view base, int axis);
std::string second_derivative_name(std::string_view base, int axis_a, int axis_b);

}  // namespace nsreduce
