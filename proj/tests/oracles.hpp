#pragma once

// Test-only oracles, independent of the library code paths they check:
// exact rational arithmetic, modular-elimination rank, high-accuracy
// quadrature for the Gaussian moment integrals, and a dense 4D DFT for
// the spectral dual-path checks.

#include <complex>
#include <cstdint>
#include <vector>

namespace oracles {

struct Frac {
    long long num = 0;
    long long den = 1;
};

Frac frac(long long num, long long den);
Frac add(Frac a, Frac b);
Frac sub(Frac a, Frac b);
Frac mul(Frac a, Frac b);
bool is_zero(Frac a);

using FracMatrix = std::vector<std::vector<Frac>>;

FracMatrix matmul(const FracMatrix& a, const FracMatrix& b);

/// Rank by Gaussian elimination over GF(p) for a prime p; equals the
/// rational rank for all but finitely many primes, so agreement across
/// the supplied primes certifies the rank of these small integer-
/// structured matrices.
int rank_mod_p(const FracMatrix& m, long long p);

/// Composite-Simpson evaluation of the radial Gaussian moment integrals
///   which=1: (t-tau1)^5  * int exp(-(t-tau1)^4 rho^2) dtheta
///   which=2: (t-tau1)^14 * int rho^2 exp(-(t-tau1)^6 rho^2) dtheta
/// over R^3 in spherical coordinates.
double phi_quadrature(int which, double t, double tau1);

/// Antisymmetric-integrand checks: the theta_i-odd integrals evaluated by
/// symmetric quadrature; returns the absolute value (should be ~0).
double phi_odd_quadrature(int which, double t, double tau1);

/// Dense DFT on a periodic n0 x n1 x n2 x n3 lattice (time axis first).
/// Forward sign convention: exp(-i (k . x) 2 pi / n).
class Dft4 {
public:
    Dft4(int n0, int n1, int n2, int n3);
    std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& f) const;
    std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& f) const;
    std::int64_t size() const { return std::int64_t(n_[0]) * n_[1] * n_[2] * n_[3]; }
    int dim(int a) const { return n_[a]; }
    std::int64_t index(int k0, int k1, int k2, int k3) const;
    /// Signed integer frequency of index k along axis a (range (-n/2, n/2]).
    int signed_freq(int a, int k) const;

private:
    std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& f,
                                                double sign) const;
    int n_[4];
};

}  // namespace oracles
