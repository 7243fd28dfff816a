#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nsreduce/field_kernels.hpp"
#include "nsreduce/grid.hpp"

namespace nsreduce {

/// Body-force specification. Bumps are supported strictly inside the box
/// (polynomial bumps exactly; Gaussian bumps up to their nominal support
/// radius of five widths, which validation keeps inside).
struct ForcingSpec {
    enum class Kind { zero, gaussian_bump, polynomial_bump, grid_file };
    struct Component {
        double amplitude = 0.0;
        std::array<double, 3> center{0.5, 0.5, 0.5};
        double width = 0.1;
        std::string file;  // grid_file only
    };
    Kind kind = Kind::zero;
    std::array<Component, 3> comp;

    void validate(const GridSpec& g) const;  // throws std::invalid_argument
    /// Sample component j (0..2) on the grid (constant in time).
    ScalarField sample(const GridSpec& g, int j) const;
};

/// The sixteen output fields of the forcing branch plus the two
/// precursor stages per component.
struct W1Fields {
    GridSpec grid;
    std::array<ScalarField, 16> w;   // w[0] is the first listed combination
    std::array<ScalarField, 3> f_v;  // potential stage of each forcing component
    std::array<ScalarField, 3> f_1;  // heat stage (factorized inverse)
};

/// The sixteen output fields of the state branch plus the three partial
/// sums of the nine-component input.
struct W2Fields {
    GridSpec grid;
    std::array<ScalarField, 16> w;
    std::array<ScalarField, 3> h3;
};

/// Factor table of the nine quadratic components: which W-fields multiply
/// in each of the four product terms. Indices are 0-based into the
/// 16-element W arrays.
struct PairMap {
    struct Entry {
        int w1_left, w1_right, w2_left, w2_right;
    };
    std::array<Entry, 9> pairs;
    static const PairMap& instance();
    /// Left carriers are the three velocity slots in both tables.
    bool carriers_valid() const;
};

/// Nine-component candidate state on a common grid.
struct H1State {
    std::array<ScalarField, 9> comp;

    H1State() = default;
    explicit H1State(const GridSpec& g);

    const GridSpec& grid() const { return comp[0].grid; }
    double sup_norm() const;
    /// Max over axis-adjacent node pairs of |difference| / spacing^alpha,
    /// over all four space-time axes (grid surrogate of the Hoelder
    /// quotient).
    double holder_quotient(double alpha) const;
};

double field_holder_quotient(const ScalarField& f, double alpha);

W1Fields build_w1(const ForcingSpec& forcing, const GridSpec& g, double mu, double tau);
W2Fields build_w2(const std::array<ScalarField, 9>& h2, double mu, double tau);

/// The sixteen forcing-branch combinations from already-computed factor
/// fields; exposed so an independently built factor stage can exercise
/// the same combination code.
std::array<ScalarField, 16> w1_combinations(const std::array<ScalarField, 3>& f1, double mu,
                                            double tau);

struct GMapResult {
    H1State g;
    W2Fields w2;
    H2Diagnostics diag;
};

/// One application of the quadratic map: solve the factorized system for
/// the state branch, build both W tables' products, and sum the four
/// terms per component.
GMapResult g_map(const H1State& h1, const W1Fields& w1, double mu, double tau,
                 const PairMap& pm = PairMap::instance(), bool with_diagnostics = false);

struct IterationConfig {
    int max_iters = 50;
    double damping = 0.5;  // in (0, 1]
    double tol = 1e-10;    // sup-norm change
    double M = 1.0;        // bounded-class radius
    double C = 1.0;        // Hoelder constant
    double alpha = 0.5;    // Hoelder exponent
    void validate() const;
};

struct IterationRow {
    int iter = 0;
    double sup_norm = 0.0;
    double holder_quotient = 0.0;
    double change = 0.0;
    bool admissible = false;
};

enum class IterationStatus { converged, max_iters, diverged };

struct IterationReport {
    std::vector<IterationRow> rows;
    IterationStatus status = IterationStatus::max_iters;
};

struct IterateResult {
    H1State h1;
    IterationReport report;
    // Map evaluation at the last pre-update iterate (what the final
    // damped step blended in); recompute at h1 for an exact defect.
    std::optional<GMapResult> last_map;
};

/// Damped successive substitution h <- (1-damping) h + damping g(h).
/// Stops on change < tol, sup-norm > 10 M, or max_iters.
IterateResult iterate(const H1State& h1_0, const IterationConfig& cfg, const W1Fields& w1,
                      double mu, double tau, const PairMap& pm = PairMap::instance());

struct AdmissibilityReport {
    double max_w1_sup = 0.0;    // max over pairs of |left|, |right|, |left*right|
    double threshold = 0.0;     // theta * closed-form M
    bool admissible = false;
    double critical_scale = 0.0;  // forcing scale factor at which the check flips
    double inequality_ratio = 0.0;
    double closed_form_M = 0.0;
    double measured_C1 = 0.0;   // Hoelder quotient of the forcing-branch factor fields
};

/// Forcing-smallness check plus the self-consistency identity of the
/// closed-form bound radius.
AdmissibilityReport check_assumption(const W1Fields& w1, const BoundConstants& bounds,
                                     const PairMap& pm = PairMap::instance());

}  // namespace nsreduce
