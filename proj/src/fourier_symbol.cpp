#include "nsreduce/fourier_symbol.hpp"

#include <cmath>
#include <stdexcept>

namespace nsreduce {

namespace {

constexpr Complex kI{0.0, 1.0};

struct ListedRow {
    int k;          // frequency factor index
    SystemRow lead; // multiplied by i*xi_k
    SystemRow tail; // added as-is
};

SystemRow a(int k) { return {k, 0, 1}; }
SystemRow ma(int k) { return {k, 0, -1}; }
SystemRow e(int i) { return {0, i, 1}; }
SystemRow me(int i) { return {0, i, -1}; }

// The 64 rows as listed in source order: four frequency factors per
// system row. Transcribed independently of the factor-stacked assembly.
const std::array<ListedRow, 64> kListedRows = {{
    {0, ma(1), me(21)}, {1, ma(1), me(18)}, {2, ma(1), me(24)}, {3, ma(1), me(25)},
    {0, ma(2), me(17)}, {1, ma(2), me(21)}, {2, ma(2), me(22)}, {3, ma(2), me(23)},
    {0, ma(3), me(27)}, {1, ma(3), me(31)}, {2, ma(3), me(32)}, {3, ma(3), me(33)},
    {0, ma(4), me(37)}, {1, ma(4), me(41)}, {2, ma(4), me(42)}, {3, ma(4), me(43)},
    {0, e(1), me(22)},  {1, e(1), me(24)},  {2, e(1), me(19)},  {3, e(1), me(26)},
    {0, e(2), me(23)},  {1, e(2), me(25)},  {2, e(2), me(26)},  {3, e(2), me(20)},
    {0, e(3), a(2)},    {1, e(3), a(1)},    {2, e(3), me(1)},   {3, e(3), me(2)},
    {0, e(4), me(31)},  {1, e(4), me(28)},  {2, e(4), me(34)},  {3, e(4), me(35)},
    {0, e(5), me(32)},  {1, e(5), me(34)},  {2, e(5), me(29)},  {3, e(5), me(36)},
    {0, e(6), me(33)},  {1, e(6), me(35)},  {2, e(6), me(36)},  {3, e(6), me(30)},
    {0, e(7), a(3)},    {1, e(7), me(4)},   {2, e(7), me(5)},   {3, e(7), me(6)},
    {0, e(8), me(41)},  {1, e(8), me(38)},  {2, e(8), me(44)},  {3, e(8), me(45)},
    {0, e(9), me(42)},  {1, e(9), me(44)},  {2, e(9), me(39)},  {3, e(9), me(46)},
    {0, e(10), me(43)}, {1, e(10), me(45)}, {2, e(10), me(46)}, {3, e(10), me(40)},
    {0, e(11), a(4)},   {1, e(11), me(8)},  {2, e(11), me(9)},  {3, e(11), me(10)},
    {0, e(16), me(12)}, {1, e(16), me(13)}, {2, e(16), me(14)}, {3, e(16), me(15)},
}};

void require_resolvable(const FreqPoint& xi) {
    if (xi.spatial_norm() < kDegenerateFrequencyEps)
        throw std::domain_error("degenerate frequency: spatial norm below 1e-8");
}

/// The shared 46-entry solution pattern followed by a 9-entry tail.
Eigen::VectorXcd pattern_vector(const FreqPoint& xi, Complex y3, Complex y7, Complex y11,
                                Complex y16, const Eigen::Vector<Complex, 9>& tail) {
    const Complex i0 = kI * xi.xi0, i1 = kI * xi.xi1, i2 = kI * xi.xi2, i3 = kI * xi.xi3;
    Eigen::VectorXcd y(StateLayout::z_dim);
    y << i2 * y3, i3 * y3, y3, i1 * y7, i2 * y7, i3 * y7, y7, i1 * y11, i2 * y11, i3 * y11,
        y11, i0 * y16, i1 * y16, i2 * y16, i3 * y16, y16,
        i0 * i0 * y3, i1 * i1 * y3, i2 * i2 * y3, i3 * i3 * y3, i0 * i1 * y3, i0 * i2 * y3,
        i0 * i3 * y3, i1 * i2 * y3, i1 * i3 * y3, i2 * i3 * y3,
        i0 * i0 * y7, i1 * i1 * y7, i2 * i2 * y7, i3 * i3 * y7, i0 * i1 * y7, i0 * i2 * y7,
        i0 * i3 * y7, i1 * i2 * y7, i1 * i3 * y7, i2 * i3 * y7,
        i0 * i0 * y11, i1 * i1 * y11, i2 * i2 * y11, i3 * i3 * y11, i0 * i1 * y11,
        i0 * i2 * y11, i0 * i3 * y11, i1 * i2 * y11, i1 * i3 * y11, i2 * i3 * y11, tail;
    return y;
}

}  // namespace

double FreqPoint::spatial_norm() const {
    return std::sqrt(xi1 * xi1 + xi2 * xi2 + xi3 * xi3);
}

double FreqPoint::operator[](int k) const {
    switch (k) {
        case 0: return xi0;
        case 1: return xi1;
        case 2: return xi2;
        case 3: return xi3;
    }
    throw std::out_of_range("FreqPoint index");
}

ABScalars ABScalars::at(const FreqPoint& xi, double mu, double tau) {
    require_resolvable(xi);
    const Complex lap = Complex(-(xi.xi1 * xi.xi1 + xi.xi2 * xi.xi2 + xi.xi3 * xi.xi3), 0.0);
    ABScalars ab;
    ab.a = (mu * lap - kI * xi.xi0) / tau;
    ab.b = lap / ab.a;
    return ab;
}

Eigen::MatrixXcd assemble_symbol(const FreqPoint& xi, const ConstraintMatrices& mats) {
    Eigen::MatrixXcd B(4 * StateLayout::system_rows, StateLayout::z_dim);
    for (int k = 0; k < 4; ++k)
        B.middleRows(k * StateLayout::system_rows, StateLayout::system_rows) =
            kI * xi[k] * mats.H.cast<Complex>() - mats.Hk[k].cast<Complex>();
    return B;
}

Eigen::VectorXcd symbol_listed_row(const FreqPoint& xi, const ConstraintMatrices& mats, int r) {
    const ListedRow& row = kListedRows.at(static_cast<size_t>(r));
    return kI * xi[row.k] * mats.row_vector(row.lead).cast<Complex>() +
           mats.row_vector(row.tail).cast<Complex>();
}

int symbol_listed_row_position(int r) {
    const int group = r / 4;
    const int k = r % 4;
    return k * StateLayout::system_rows + group;
}

Eigen::MatrixXcd assemble_symbol_rowlist(const FreqPoint& xi, const ConstraintMatrices& mats) {
    Eigen::MatrixXcd B(4 * StateLayout::system_rows, StateLayout::z_dim);
    for (int r = 0; r < 64; ++r)
        B.row(symbol_listed_row_position(r)) = symbol_listed_row(xi, mats, r);
    return B;
}

Eigen::VectorXcd assemble_rhs(const FreqPoint& xi, const Eigen::Vector3cd& fhat,
                              const ConstraintMatrices& mats) {
    // Real templates evaluated per forcing component, combined with the
    // complex transform values.
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(StateLayout::system_rows);
    Eigen::VectorXcd h0 = Eigen::VectorXcd::Zero(StateLayout::system_rows);
    for (int j = 0; j < 3; ++j) {
        Eigen::Vector3d unit = Eigen::Vector3d::Zero();
        unit[j] = 1.0;
        h += fhat[j] * mats.h_template(unit).cast<Complex>();
        h0 += fhat[j] * mats.h0_template(unit).cast<Complex>();
    }
    Eigen::VectorXcd g(4 * StateLayout::system_rows);
    g << h0 - kI * xi.xi0 * h, -kI * xi.xi1 * h, -kI * xi.xi2 * h, -kI * xi.xi3 * h;
    return g;
}

Eigen::VectorXcd assemble_rhs_listed(const FreqPoint& xi, const Eigen::Vector3cd& fhat,
                                     const ConstraintMatrices& mats) {
    Eigen::VectorXcd g = assemble_rhs(xi, fhat, mats);
    // The expanded listing carries +i xi_k fhat_1 where the factor blocks
    // produce -i xi_k fhat_1 (second entry of each spatial block).
    for (int k = 1; k < 4; ++k) g[k * StateLayout::system_rows + 1] = kI * xi[k] * fhat[0];
    return g;
}

RhsDiscrepancy rhs_discrepancy(const FreqPoint& xi, const Eigen::Vector3cd& fhat,
                               const ConstraintMatrices& mats) {
    const Eigen::VectorXcd block = assemble_rhs(xi, fhat, mats);
    const Eigen::VectorXcd listed = assemble_rhs_listed(xi, fhat, mats);
    RhsDiscrepancy d;
    for (int k = 1; k < 4; ++k) {
        const int pos = k * StateLayout::system_rows + 1;
        d.entries[k - 1] = pos;
        d.max_abs = std::max(d.max_abs, std::abs(block[pos] - listed[pos]));
    }
    return d;
}

Eigen::VectorXcd particular_solution(const FreqPoint& xi, const Eigen::Vector3cd& fhat,
                                     const ABScalars& ab, double tau) {
    require_resolvable(xi);
    const Complex i1 = kI * xi.xi1, i2 = kI * xi.xi2, i3 = kI * xi.xi3;
    const Complex div = i1 * fhat[0] + i2 * fhat[1] + i3 * fhat[2];
    const Complex d = ab.a * ab.a * ab.b * tau;
    const Complex y16 = div / (ab.a * ab.b * tau);
    const Complex y3 = i1 * div / d - fhat[0] / (ab.a * tau);
    const Complex y7 = i2 * div / d - fhat[1] / (ab.a * tau);
    const Complex y11 = i3 * div / d - fhat[2] / (ab.a * tau);
    return pattern_vector(xi, y3, y7, y11, y16, Eigen::Vector<Complex, 9>::Zero());
}

Eigen::VectorXcd null_basis(const FreqPoint& xi, int j, const ABScalars& ab, double tau) {
    require_resolvable(xi);
    if (j < 1 || j > 9) throw std::invalid_argument("null_basis: j must be in 1..9");
    const Complex i1 = kI * xi.xi1, i2 = kI * xi.xi2, i3 = kI * xi.xi3;
    const Complex d = ab.a * ab.a * ab.b * tau;
    const Complex atau = ab.a * tau;
    Complex y3, y7, y11, y16;
    if (j <= 3) {
        y3 = xi.xi1 * xi.xi1 / d + 1.0 / atau;
        y7 = -i1 * i2 / d;
        y11 = -i1 * i3 / d;
        y16 = -i1 / (ab.a * ab.b * tau);
    } else if (j <= 6) {
        y7 = xi.xi2 * xi.xi2 / d + 1.0 / atau;
        y3 = -i1 * i2 / d;
        y11 = -i2 * i3 / d;
        y16 = -i2 / (ab.a * ab.b * tau);
    } else {
        y11 = xi.xi3 * xi.xi3 / d + 1.0 / atau;
        y3 = -i1 * i3 / d;
        y7 = -i2 * i3 / d;
        y16 = -i3 / (ab.a * ab.b * tau);
    }
    Eigen::Vector<Complex, 9> tail = Eigen::Vector<Complex, 9>::Zero();
    tail[j - 1] = 1.0;
    return pattern_vector(xi, y3, y7, y11, y16, tail);
}

SymbolRankReport symbol_rank_report(const FreqPoint& xi, const ConstraintMatrices& mats) {
    const Eigen::MatrixXcd B = assemble_symbol(xi, mats);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
    const auto& sv = svd.singularValues();
    SymbolRankReport rep;
    rep.sigma_max = sv.size() ? sv[0] : 0.0;
    constexpr double tol = 1e-10;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol * rep.sigma_max) ++rep.rank;
    if (rep.rank > 0) rep.sigma_at_rank = sv[rep.rank - 1];
    if (rep.rank < sv.size()) rep.sigma_after_rank = sv[rep.rank];
    rep.gap_ratio = rep.sigma_after_rank > 0.0
                        ? rep.sigma_at_rank / rep.sigma_after_rank
                        : std::numeric_limits<double>::infinity();
    rep.cond = rep.sigma_at_rank > 0.0 ? rep.sigma_max / rep.sigma_at_rank : 0.0;
    return rep;
}

int symbol_rank(const FreqPoint& xi, const ConstraintMatrices& mats) {
    return symbol_rank_report(xi, mats).rank;
}

}  // namespace nsreduce
