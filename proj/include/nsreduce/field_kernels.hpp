#pragma once

#include <array>
#include <string>
#include <vector>

#include "nsreduce/grid.hpp"

namespace nsreduce {

/// Worker threads used by the grid kernels (1 = fully deterministic).
void set_compute_threads(int n);
int compute_threads();

/// Volume potential with kernel -1/(4 pi r), per time slice. Quadrature:
/// cell volume over distance for distinct nodes, the equal-volume-sphere
/// closed form for the self cell. Output is zero-extended by convention.
ScalarField newtonian_potential(const ScalarField& h);

/// Potential at a single node (same quadrature).
double newtonian_potential_at(const ScalarField& h, int it, int i, int j, int k);

/// Potential of a single time slice, in x1-major storage order. Useful
/// for time-constant inputs where the full field would repeat work.
std::vector<double> newtonian_potential_slice(const ScalarField& h, int it);

/// Time integral of the Gaussian smoothing of v: trapezoid over the
/// earlier slices plus the delta-limit endpoint rule with its
/// second-order correction. Satisfies d/dt - mu Lap applied to the
/// result equals v, up to discretization error.
ScalarField heat_time_integral(const ScalarField& v, double mu);

struct HeatKernelInfo {
    std::array<int, 3> taps{};     // one-sided tap counts per axis
    double raw_mass = 0.0;         // sampled continuous kernel mass before normalization
    double normalized_mass = 0.0;  // always 1 after normalization
};
HeatKernelInfo heat_kernel_info(const GridSpec& g, double mu, double bandwidth_time);

/// Mixed space-time derivative: time order <= 1, total spatial order
/// <= 4. Order-2 stencils, central in the interior and one-sided at the
/// faces. Composition order is canonical (time first, then x1, x2, x3;
/// per axis the three-point second-difference blocks are applied before
/// a final first difference), so any two spellings of the same
/// multi-index produce bit-identical fields.
struct DerivSpec {
    int t = 0;
    std::array<int, 3> x{0, 0, 0};
    int spatial_total() const { return x[0] + x[1] + x[2]; }
};
ScalarField derivative(const ScalarField& f, const DerivSpec& spec);

/// Sup norm over the sub-box obtained by dropping `margin` nodes from
/// every face (time faces included).
double interior_sup(const ScalarField& f, int margin);
/// Same with independent time-face and space-face margins.
double interior_sup(const ScalarField& f, int margin_t, int margin_x);

/// Inhomogeneous solve of the factorized operator: the potential stage
/// followed by the heat stage, signed so that both factor equations hold:
///   Lap v = f,   mu Lap out - d(out)/dt = v.
ScalarField solve_factorized(const ScalarField& f, double mu);

struct H2Diagnostics {
    // Interior sup norms of the factor residuals and the composite
    // fourth-order residual, maxed over the nine components. The
    // composite uses a wider spatial margin for its radius-2 stencils;
    // its time margin stays at the factor value.
    double poisson_residual = 0.0;    // Lap v - h1
    double heat_residual = 0.0;       // mu Lap h2 - dh2/dt - v
    double composite_residual = 0.0;  // mu sum d4 h2 - sum d3 h2/dt dxj2 - h1
    int factor_margin = 2;
    int composite_margin_x = 3;
    double boundary_jump = 0.0;  // max boundary magnitude of the h2 fields
};

struct SolveH2Result {
    std::array<ScalarField, 9> h2;
    H2Diagnostics diag;
};

/// Componentwise solve_factorized over the nine-component state, with
/// optional residual diagnostics.
SolveH2Result solve_h2(const std::array<ScalarField, 9>& h1, double mu,
                       bool with_diagnostics = false);

/// max over nodes of (1/4pi) * integral of 1/r over the box, with the
/// same quadrature as newtonian_potential.
double estimate_MK1(const GridSpec& g);

struct PhiSample {
    double t = 0.0, tau1 = 0.0;
    double phi1 = 0.0, phi2 = 0.0;
};

/// Closed forms of the five Gaussian moment integrals appearing in the
/// kernel-derivative bounds. phi3..phi5 vanish identically (odd
/// integrand); phi1 and phi2 diverge like 1/(t - tau1), contradicting
/// the boundedness the derivation assumes, so the report raises a
/// discrepancy flag and carries pragmatic suprema restricted to
/// separations >= dt_min.
struct PhiReport {
    double phi1_coefficient = 0.0;  // phi1 = c1 / (t - tau1)
    double phi2_coefficient = 0.0;  // phi2 = c2 / (t - tau1)
    bool phi1_bounded = false;
    bool phi2_bounded = false;
    bool phi3_identically_zero = true;
    bool phi4_identically_zero = true;
    bool phi5_identically_zero = true;
    bool boundedness_discrepancy = true;
    double pragmatic_mprime = 0.0;   // sup of phi1, phi2 at separation >= dt_min
    double pragmatic_mdprime = 0.0;  // sup |phi3| = 0
    double pragmatic_mtprime = 0.0;  // sup |phi4|, |phi5| = 0
    double dt_min = 0.0;
    std::vector<PhiSample> samples;
};
PhiReport evaluate_phi_bounds(double T, double dt_min);
double phi1_closed(double t, double tau1);
double phi2_closed(double t, double tau1);

enum class Provenance { configured, estimated };

struct TaggedConstant {
    double value = 0.0;
    Provenance source = Provenance::configured;
};

struct BoundConstants {
    double theta = 0.5;  // in (0,1)
    double alpha = 0.5;  // in (0,1)
    TaggedConstant M, C, C1, MK1, MT1, MT2, MT3, MT4, Mp, Mpp, Mppp;

    static double closed_form_M(double theta, double mt3, double mk1);
    static double mt4_from(double mt3, double spacetime_diameter, double alpha);
    /// (theta M + 2 theta M^2 s + (M s)^2) / M with s = mt3 * mk1,
    /// evaluated in extended precision. Equals 1 up to rounding when M
    /// comes from closed_form_M.
    static double inequality_ratio(double theta, double M, double mt3, double mk1);
};

struct MTEstimates {
    double mt1 = 0.0, mt2 = 0.0, mt3 = 0.0;
    std::string provenance = "estimated (lower bound of true constant)";
};

/// Empirical derivative-family ratios over probe states known to lie in
/// the bounded Hoelder class. Throws std::invalid_argument on an empty
/// probe set.
MTEstimates estimate_MT(const std::vector<std::array<ScalarField, 9>>& probes, double mu,
                        double tau, double mk1);

}  // namespace nsreduce
