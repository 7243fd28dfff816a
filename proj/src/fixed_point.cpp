#include "nsreduce/fixed_point.hpp"

#include <cmath>
#include <stdexcept>

namespace nsreduce {

namespace {

using D = DerivSpec;

D dx(int a, int b = -1, int c = -1) {
    D d;
    d.x[a] += 1;
    if (b >= 0) d.x[b] += 1;
    if (c >= 0) d.x[c] += 1;
    return d;
}

D dt(D d) {
    d.t = 1;
    return d;
}

ScalarField lap(const ScalarField& f) {
    D a, b, c;
    a.x = {2, 0, 0};
    b.x = {0, 2, 0};
    c.x = {0, 0, 2};
    return derivative(f, a) + derivative(f, b) + derivative(f, c);
}

/// Laplacian of the first x-derivative along axis `a`.
ScalarField lap_dx(const ScalarField& f, int a) {
    D d1 = dx(a), d2 = dx(a), d3 = dx(a);
    d1.x[0] += 2;
    d2.x[1] += 2;
    d3.x[2] += 2;
    return derivative(f, d1) + derivative(f, d2) + derivative(f, d3);
}

}  // namespace

const PairMap& PairMap::instance() {
    static const PairMap pm = {{{
        {6, 0, 6, 0},
        {10, 4, 10, 4},
        {14, 5, 14, 5},
        {6, 7, 6, 7},
        {10, 8, 10, 8},
        {14, 9, 14, 9},
        {6, 11, 6, 11},
        {10, 12, 10, 12},
        {14, 13, 14, 13},
    }}};
    return pm;
}

bool PairMap::carriers_valid() const {
    for (const auto& p : pairs) {
        const bool left_ok = p.w1_left == 6 || p.w1_left == 10 || p.w1_left == 14;
        if (!left_ok || p.w2_left != p.w1_left) return false;
    }
    return true;
}

void ForcingSpec::validate(const GridSpec& g) const {
    if (kind == Kind::zero) return;
    for (int j = 0; j < 3; ++j) {
        const auto& c = comp[j];
        if (!std::isfinite(c.amplitude))
            throw std::invalid_argument("forcing: amplitude must be finite");
        if (kind == Kind::grid_file) {
            if (c.file.empty()) throw std::invalid_argument("forcing: grid_file needs a path");
            continue;
        }
        if (c.amplitude == 0.0) continue;
        if (!(c.width > 0.0)) throw std::invalid_argument("forcing: width must be positive");
        const double support = (kind == Kind::gaussian_bump) ? 5.0 * c.width : c.width;
        for (int a = 0; a < 3; ++a) {
            const double lo = g.origin[a], hi = g.origin[a] + g.extent[a];
            if (c.center[a] - support <= lo || c.center[a] + support >= hi)
                throw std::invalid_argument("forcing: bump support must lie strictly inside the box");
        }
    }
}

ScalarField ForcingSpec::sample(const GridSpec& g, int j) const {
    const auto& c = comp[j];
    switch (kind) {
        case Kind::zero:
            return ScalarField(g);
        case Kind::grid_file: {
            ScalarField f = read_field(c.file);
            if (!(f.grid == g))
                throw std::runtime_error("forcing: grid of " + c.file + " does not match config");
            return f;
        }
        case Kind::gaussian_bump:
            return ScalarField::sample(g, [&](double, double x, double y, double z) {
                const double r2 = (x - c.center[0]) * (x - c.center[0]) +
                                  (y - c.center[1]) * (y - c.center[1]) +
                                  (z - c.center[2]) * (z - c.center[2]);
                return c.amplitude * std::exp(-r2 / (2.0 * c.width * c.width));
            });
        case Kind::polynomial_bump:
            return ScalarField::sample(g, [&](double, double x, double y, double z) {
                const double r2 = ((x - c.center[0]) * (x - c.center[0]) +
                                   (y - c.center[1]) * (y - c.center[1]) +
                                   (z - c.center[2]) * (z - c.center[2])) /
                                  (c.width * c.width);
                const double t = 1.0 - r2;
                return t > 0.0 ? c.amplitude * t * t * t : 0.0;
            });
    }
    throw std::logic_error("forcing: unknown kind");
}

std::array<ScalarField, 16> w1_combinations(const std::array<ScalarField, 3>& f1, double mu,
                                            double tau) {
    const ScalarField &F11 = f1[0], &F21 = f1[1], &F31 = f1[2];

    // Base combinations shared by several outputs.
    const ScalarField P3 = derivative(F21, dx(0, 1)) + derivative(F31, dx(0, 2)) -
                           derivative(F11, dx(1, 1)) - derivative(F11, dx(2, 2));
    const ScalarField P7 = derivative(F11, dx(0, 1)) + derivative(F31, dx(1, 2)) -
                           derivative(F21, dx(0, 0)) - derivative(F21, dx(2, 2));
    const ScalarField P11 = derivative(F11, dx(0, 2)) + derivative(F21, dx(1, 2)) -
                            derivative(F31, dx(0, 0)) - derivative(F31, dx(1, 1));
    const ScalarField P16 =
        (1.0 / tau) * (mu * (lap_dx(F11, 0) + lap_dx(F21, 1) + lap_dx(F31, 2)) -
                       derivative(F11, dt(dx(0))) - derivative(F21, dt(dx(1))) -
                       derivative(F31, dt(dx(2))));

    std::array<ScalarField, 16> w;
    w[0] = derivative(F21, dx(0, 0, 1)) + derivative(F31, dx(0, 0, 2)) -
           derivative(F11, dx(0, 1, 1)) - derivative(F11, dx(0, 2, 2));
    w[1] = -tau * derivative(P16, dx(0)) + mu * lap(P3);
    w[2] = -tau * derivative(P16, dx(1)) + mu * lap(P7);
    w[3] = -tau * derivative(P16, dx(2)) + mu * lap(P11);
    w[4] = derivative(F21, dx(0, 1, 1)) + derivative(F31, dx(0, 1, 2)) -
           derivative(F11, dx(1, 1, 1)) - derivative(F11, dx(1, 2, 2));
    w[5] = derivative(F21, dx(0, 1, 2)) + derivative(F31, dx(0, 2, 2)) -
           derivative(F11, dx(1, 1, 2)) - derivative(F11, dx(2, 2, 2));
    w[6] = P3;
    w[7] = derivative(F11, dx(0, 0, 1)) + derivative(F31, dx(0, 1, 2)) -
           derivative(F21, dx(0, 0, 0)) - derivative(F21, dx(0, 2, 2));
    w[8] = derivative(F11, dx(0, 1, 1)) + derivative(F31, dx(1, 1, 2)) -
           derivative(F21, dx(0, 0, 1)) - derivative(F21, dx(1, 2, 2));
    w[9] = derivative(F11, dx(0, 1, 2)) + derivative(F31, dx(1, 2, 2)) -
           derivative(F21, dx(0, 0, 2)) - derivative(F21, dx(2, 2, 2));
    w[10] = P7;
    w[11] = derivative(F11, dx(0, 0, 2)) + derivative(F21, dx(0, 1, 2)) -
            derivative(F31, dx(0, 0, 0)) - derivative(F31, dx(0, 1, 1));
    w[12] = derivative(F11, dx(0, 1, 2)) + derivative(F21, dx(1, 1, 2)) -
            derivative(F31, dx(0, 0, 1)) - derivative(F31, dx(1, 1, 1));
    w[13] = derivative(F11, dx(0, 2, 2)) + derivative(F21, dx(1, 2, 2)) -
            derivative(F31, dx(0, 0, 2)) - derivative(F31, dx(1, 1, 2));
    w[14] = P11;
    w[15] = P16;
    return w;
}

W1Fields build_w1(const ForcingSpec& forcing, const GridSpec& g, double mu, double tau) {
    forcing.validate(g);
    W1Fields out;
    out.grid = g;
    for (int j = 0; j < 3; ++j) {
        const ScalarField fj = forcing.sample(g, j);
        out.f_v[j] = newtonian_potential(fj);
        ScalarField h = heat_time_integral(out.f_v[j], mu);
        h *= -1.0;
        out.f_1[j] = std::move(h);
    }
    out.w = w1_combinations(out.f_1, mu, tau);
    return out;
}

W2Fields build_w2(const std::array<ScalarField, 9>& h2, double mu, double tau) {
    W2Fields out;
    out.grid = h2[0].grid;
    out.h3[0] = h2[0] + h2[1] + h2[2];
    out.h3[1] = h2[3] + h2[4] + h2[5];
    out.h3[2] = h2[6] + h2[7] + h2[8];
    const ScalarField &h31 = out.h3[0], &h32 = out.h3[1], &h33 = out.h3[2];

    auto& w = out.w;
    w[0] = derivative(h31, dx(0, 1, 1)) + derivative(h31, dx(0, 2, 2)) -
           derivative(h32, dx(0, 0, 1)) - derivative(h33, dx(0, 0, 2));
    w[1] = derivative(h31, dt(dx(1, 1))) + derivative(h31, dt(dx(2, 2))) -
           derivative(h32, dt(dx(0, 1))) - derivative(h33, dt(dx(0, 2)));
    w[2] = derivative(h32, dt(dx(0, 0))) + derivative(h32, dt(dx(2, 2))) -
           derivative(h31, dt(dx(0, 1))) - derivative(h33, dt(dx(1, 2)));
    w[3] = derivative(h33, dt(dx(0, 0))) + derivative(h33, dt(dx(1, 1))) -
           derivative(h31, dt(dx(0, 2))) - derivative(h32, dt(dx(1, 2)));
    w[4] = derivative(h31, dx(1, 1, 1)) + derivative(h31, dx(1, 2, 2)) -
           derivative(h32, dx(0, 1, 1)) - derivative(h33, dx(0, 1, 2));
    w[5] = derivative(h31, dx(1, 1, 2)) + derivative(h31, dx(2, 2, 2)) -
           derivative(h32, dx(0, 1, 2)) - derivative(h33, dx(0, 2, 2));
    w[6] = derivative(h31, dx(1, 1)) + derivative(h31, dx(2, 2)) -
           derivative(h32, dx(0, 1)) - derivative(h33, dx(0, 2));
    w[7] = derivative(h32, dx(0, 0, 0)) + derivative(h32, dx(0, 2, 2)) -
           derivative(h31, dx(0, 0, 1)) - derivative(h33, dx(0, 1, 2));
    w[8] = derivative(h32, dx(0, 0, 1)) + derivative(h32, dx(1, 2, 2)) -
           derivative(h31, dx(0, 1, 1)) - derivative(h33, dx(1, 1, 2));
    w[9] = derivative(h32, dx(0, 0, 2)) + derivative(h32, dx(2, 2, 2)) -
           derivative(h31, dx(0, 1, 2)) - derivative(h33, dx(1, 2, 2));
    w[10] = derivative(h32, dx(0, 0)) + derivative(h32, dx(2, 2)) -
            derivative(h31, dx(0, 1)) - derivative(h33, dx(1, 2));
    w[11] = derivative(h33, dx(0, 0, 0)) + derivative(h33, dx(0, 1, 1)) -
            derivative(h31, dx(0, 0, 2)) - derivative(h32, dx(0, 1, 2));
    w[12] = derivative(h33, dx(0, 0, 1)) + derivative(h33, dx(1, 2, 2)) -
            derivative(h31, dx(0, 1, 2)) - derivative(h32, dx(1, 1, 2));
    w[13] = derivative(h33, dx(0, 0, 2)) + derivative(h33, dx(2, 2, 2)) -
            derivative(h31, dx(0, 2, 2)) - derivative(h32, dx(1, 2, 2));
    // Final term of the third velocity carrier evaluated at second order,
    // matching the other two carriers.
    w[14] = derivative(h33, dx(0, 0)) + derivative(h33, dx(1, 1)) -
            derivative(h31, dx(0, 2)) - derivative(h32, dx(1, 2));
    w[15] = (1.0 / tau) * (derivative(h31, dt(dx(0))) + derivative(h32, dt(dx(1))) +
                           derivative(h33, dt(dx(2)))) -
            (mu / tau) * (lap_dx(h31, 0) + lap_dx(h32, 1) + lap_dx(h33, 2));
    return out;
}

H1State::H1State(const GridSpec& g) {
    for (auto& c : comp) c = ScalarField(g);
}

double H1State::sup_norm() const {
    double m = 0.0;
    for (const auto& c : comp) m = std::max(m, c.sup_norm());
    return m;
}

double field_holder_quotient(const ScalarField& f, double alpha) {
    const GridSpec& g = f.grid;
    double q = 0.0;
    const std::array<int, 4> n = {g.n_time, g.n_space[0], g.n_space[1], g.n_space[2]};
    for (int axis = 0; axis < 4; ++axis) {
        const double denom = std::pow(g.spacing(axis), alpha);
        std::array<int, 4> idx{};
        for (idx[0] = 0; idx[0] < n[0]; ++idx[0])
            for (idx[1] = 0; idx[1] < n[1]; ++idx[1])
                for (idx[2] = 0; idx[2] < n[2]; ++idx[2])
                    for (idx[3] = 0; idx[3] < n[3]; ++idx[3]) {
                        if (idx[axis] + 1 >= n[axis]) continue;
                        auto nb = idx;
                        nb[axis] += 1;
                        const double d = std::abs(f.at(nb[0], nb[1], nb[2], nb[3]) -
                                                  f.at(idx[0], idx[1], idx[2], idx[3]));
                        q = std::max(q, d / denom);
                    }
    }
    return q;
}

double H1State::holder_quotient(double alpha) const {
    double q = 0.0;
    for (const auto& c : comp) q = std::max(q, field_holder_quotient(c, alpha));
    return q;
}

GMapResult g_map(const H1State& h1, const W1Fields& w1, double mu, double tau, const PairMap& pm,
                 bool with_diagnostics) {
    GMapResult out;
    SolveH2Result solved = solve_h2(h1.comp, mu, with_diagnostics);
    out.diag = solved.diag;
    out.w2 = build_w2(solved.h2, mu, tau);
    out.g = H1State(h1.grid());
    for (int j = 0; j < 9; ++j) {
        const auto& p = pm.pairs[j];
        const ScalarField& a = w1.w[p.w1_left];
        const ScalarField& b = w1.w[p.w1_right];
        const ScalarField& c = out.w2.w[p.w2_left];
        const ScalarField& d = out.w2.w[p.w2_right];
        out.g.comp[j] = hadamard(a, b) + hadamard(a, d) + hadamard(b, c) + hadamard(c, d);
    }
    return out;
}

void IterationConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("iterate: max_iters must be >= 1");
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("iterate: damping must be in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("iterate: tol must be positive");
    if (!(M > 0.0) || !(C > 0.0)) throw std::invalid_argument("iterate: M and C must be positive");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("iterate: alpha must be in (0, 1)");
}

IterateResult iterate(const H1State& h1_0, const IterationConfig& cfg, const W1Fields& w1,
                      double mu, double tau, const PairMap& pm) {
    cfg.validate();
    IterateResult res;
    res.h1 = h1_0;
    res.report.status = IterationStatus::max_iters;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        GMapResult gm = g_map(res.h1, w1, mu, tau, pm);
        double change = 0.0;
        for (int j = 0; j < 9; ++j) {
            ScalarField next = res.h1.comp[j];
            next *= (1.0 - cfg.damping);
            next += cfg.damping * gm.g.comp[j];
            change = std::max(change, (next - res.h1.comp[j]).sup_norm());
            res.h1.comp[j] = std::move(next);
        }
        IterationRow row;
        row.iter = it;
        row.sup_norm = res.h1.sup_norm();
        row.holder_quotient = res.h1.holder_quotient(cfg.alpha);
        row.change = change;
        row.admissible = row.sup_norm <= cfg.M && row.holder_quotient <= cfg.C;
        res.report.rows.push_back(row);
        res.last_map = std::move(gm);
        if (change < cfg.tol) {
            res.report.status = IterationStatus::converged;
            break;
        }
        if (row.sup_norm > 10.0 * cfg.M) {
            res.report.status = IterationStatus::diverged;
            break;
        }
    }
    return res;
}

AdmissibilityReport check_assumption(const W1Fields& w1, const BoundConstants& bounds,
                                     const PairMap& pm) {
    AdmissibilityReport rep;
    double max_linear = 0.0, max_product = 0.0;
    for (int j = 0; j < 9; ++j) {
        const ScalarField& a = w1.w[pm.pairs[j].w1_left];
        const ScalarField& b = w1.w[pm.pairs[j].w1_right];
        max_linear = std::max({max_linear, a.sup_norm(), b.sup_norm()});
        max_product = std::max(max_product, hadamard(a, b).sup_norm());
        rep.measured_C1 = std::max({rep.measured_C1,
                                    field_holder_quotient(a, bounds.alpha),
                                    field_holder_quotient(b, bounds.alpha)});
    }
    rep.max_w1_sup = std::max(max_linear, max_product);
    rep.closed_form_M =
        BoundConstants::closed_form_M(bounds.theta, bounds.MT3.value, bounds.MK1.value);
    rep.threshold = bounds.theta * rep.closed_form_M;
    rep.admissible = rep.max_w1_sup <= rep.threshold;
    rep.inequality_ratio = BoundConstants::inequality_ratio(bounds.theta, rep.closed_form_M,
                                                            bounds.MT3.value, bounds.MK1.value);
    double scale = std::numeric_limits<double>::infinity();
    if (max_linear > 0.0) scale = rep.threshold / max_linear;
    if (max_product > 0.0) scale = std::min(scale, std::sqrt(rep.threshold / max_product));
    rep.critical_scale = scale;
    return rep;
}

}  // namespace nsreduce
