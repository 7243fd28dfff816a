#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nsreduce {

/// Uniform node-centered grid on [0,T] x box. Nodes include both
/// endpoints along every axis.
struct GridSpec {
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    std::array<double, 3> extent{1.0, 1.0, 1.0};
    std::array<int, 3> n_space{9, 9, 9};  // each >= 9
    double time_horizon = 1.0;
    int n_time = 5;  // >= 5

    void validate() const;  // throws std::invalid_argument

    double dx(int axis) const { return extent[axis] / (n_space[axis] - 1); }
    double dt() const { return time_horizon / (n_time - 1); }
    /// Spacing along space-time axis 0..3 (0 is time).
    double spacing(int axis4) const { return axis4 == 0 ? dt() : dx(axis4 - 1); }
    int extent_nodes(int axis4) const { return axis4 == 0 ? n_time : n_space[axis4 - 1]; }

    double coord(int axis, int i) const { return origin[axis] + i * dx(axis); }
    double time(int it) const { return it * dt(); }

    std::int64_t space_nodes() const {
        return std::int64_t(n_space[0]) * n_space[1] * n_space[2];
    }
    std::int64_t total_nodes() const { return space_nodes() * n_time; }

    double cell_volume() const { return dx(0) * dx(1) * dx(2); }
    /// Largest node-to-node distance in [0,T] x box.
    double spacetime_diameter() const;

    bool operator==(const GridSpec&) const = default;
};

/// Real samples on a GridSpec, identically zero outside the domain by
/// convention. Storage is time-major, then x1, x2, x3.
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g) : grid(g), values(g.total_nodes(), 0.0) {}

    std::int64_t index(int it, int i, int j, int k) const {
        return ((std::int64_t(it) * grid.n_space[0] + i) * grid.n_space[1] + j) *
                   grid.n_space[2] + k;
    }
    double& at(int it, int i, int j, int k) { return values[index(it, i, j, k)]; }
    double at(int it, int i, int j, int k) const { return values[index(it, i, j, k)]; }

    double* slice(int it) { return values.data() + index(it, 0, 0, 0); }
    const double* slice(int it) const { return values.data() + index(it, 0, 0, 0); }

    double sup_norm() const;
    /// Max |value| over the outermost node shell (time faces included);
    /// measures the jump implied by the zero extension.
    double boundary_jump() const;

    /// Sample f(t, x1, x2, x3) at every node.
    static ScalarField sample(const GridSpec& g,
                              const std::function<double(double, double, double, double)>& f);

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);

/// Binary field file plus JSON sidecar (same path with ".json" added).
/// Layout: magic, version, dims, origin/extent/T and spacings, then
/// little-endian doubles in storage order.
void write_field(const ScalarField& f, const std::string& path, const std::string& name);
ScalarField read_field(const std::string& path);

}  // namespace nsreduce
