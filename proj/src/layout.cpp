#include "nsreduce/layout.hpp"

#include <array>
#include <stdexcept>

namespace nsreduce {

namespace {

constexpr std::array<const char*, 4> kAxis = {"t", "x1", "x2", "x3"};

}  // namespace

std::string first_derivative_name(std::string_view base, int axis) {
    return "d" + std::string(base) + "/d" + kAxis.at(axis);
}

std::string second_derivative_name(std::string_view base, int axis_a, int axis_b) {
    if (axis_a > axis_b) std::swap(axis_a, axis_b);
    return "d2" + std::string(base) + "/d" + kAxis.at(axis_a) + "d" + kAxis.at(axis_b);
}

const StateLayout& StateLayout::instance() {
    static const StateLayout layout;
    return layout;
}

StateLayout::StateLayout() {
    const std::array<std::string, 3> vel = {"u1", "u2", "u3"};

    // The four constrained slots, then the 55 free slots.
    x_names_.push_back(first_derivative_name("u1", 1));
    x_names_.push_back(first_derivative_name("u1", 0));
    x_names_.push_back(first_derivative_name("u2", 0));
    x_names_.push_back(first_derivative_name("u3", 0));
    for (const auto& u : vel) {
        if (u == "u1") {
            x_names_.push_back(first_derivative_name(u, 2));
            x_names_.push_back(first_derivative_name(u, 3));
        } else {
            x_names_.push_back(first_derivative_name(u, 1));
            x_names_.push_back(first_derivative_name(u, 2));
            x_names_.push_back(first_derivative_name(u, 3));
        }
        x_names_.push_back(std::string(u));
    }
    x_names_.push_back(first_derivative_name("p", 0));
    x_names_.push_back(first_derivative_name("p", 1));
    x_names_.push_back(first_derivative_name("p", 2));
    x_names_.push_back(first_derivative_name("p", 3));
    x_names_.push_back("p");
    for (const auto& u : vel) {
        x_names_.push_back(second_derivative_name(u, 0, 0));
        x_names_.push_back(second_derivative_name(u, 1, 1));
        x_names_.push_back(second_derivative_name(u, 2, 2));
        x_names_.push_back(second_derivative_name(u, 3, 3));
        x_names_.push_back(second_derivative_name(u, 0, 1));
        x_names_.push_back(second_derivative_name(u, 0, 2));
        x_names_.push_back(second_derivative_name(u, 0, 3));
        x_names_.push_back(second_derivative_name(u, 1, 2));
        x_names_.push_back(second_derivative_name(u, 1, 3));
        x_names_.push_back(second_derivative_name(u, 2, 3));
    }
    for (const auto& u : vel)
        for (int k = 1; k <= 3; ++k)
            x_names_.push_back(vel[k - 1] + "*" + first_derivative_name(u, k));

    if (static_cast<int>(x_names_.size()) != x_dim)
        throw std::logic_error("layout: X name count");

    z_names_.assign(x_names_.begin() + 4, x_names_.end());
    for (int i = 0; i < x_dim; ++i) x_lookup_[x_names_[i]] = i;
    for (int i = 0; i < z_dim; ++i) z_lookup_[z_names_[i]] = i;

    u_names_ = {first_derivative_name("u1", 1), first_derivative_name("u1", 0),
                first_derivative_name("u2", 0), first_derivative_name("u3", 0),
                first_derivative_name("u1", 2), first_derivative_name("u1", 3),
                "u1",
                first_derivative_name("u2", 1), first_derivative_name("u2", 2),
                first_derivative_name("u2", 3),
                "u2",
                first_derivative_name("u3", 1), first_derivative_name("u3", 2),
                first_derivative_name("u3", 3),
                "u3", "p"};

    // Nine product constraints: u_k * du_j/dx_k, with du1/dx1 eliminated
    // through the continuity relation.
    auto unit = [this](std::string_view n) { return z_unit(n); };
    Eigen::VectorXd cont = Eigen::VectorXd::Zero(z_dim);
    cont[z_slot(first_derivative_name("u2", 2))] = -1.0;
    cont[z_slot(first_derivative_name("u3", 3))] = -1.0;

    for (int j = 1; j <= 3; ++j) {
        for (int k = 1; k <= 3; ++k) {
            QuadPair qp;
            const std::string uj = vel[j - 1];
            qp.lhs = z_slot(vel[k - 1] + "*" + first_derivative_name(uj, k));
            qp.left = unit(vel[k - 1]);
            if (j == 1 && k == 1)
                qp.right = cont;
            else
                qp.right = unit(first_derivative_name(uj, k));
            quad_pairs_.push_back(std::move(qp));
        }
    }
    if (static_cast<int>(quad_pairs_.size()) != num_quadratic)
        throw std::logic_error("layout: quadratic pair count");
}

int StateLayout::z_slot(std::string_view name) const {
    auto it = z_lookup_.find(std::string(name));
    if (it == z_lookup_.end())
        throw std::out_of_range("unknown Z component: " + std::string(name));
    return it->second;
}

int StateLayout::x_slot(std::string_view name) const {
    auto it = x_lookup_.find(std::string(name));
    if (it == x_lookup_.end())
        throw std::out_of_range("unknown X component: " + std::string(name));
    return it->second;
}

Eigen::VectorXd StateLayout::z_unit(std::string_view name) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(z_dim);
    v[z_slot(name)] = 1.0;
    return v;
}

}  // namespace nsreduce
