#include "nsreduce/field_kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "nsreduce/fixed_point.hpp"

namespace nsreduce {

namespace {

int g_threads = 1;

void parallel_chunks(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    const int threads = std::min<std::int64_t>(g_threads, std::max<std::int64_t>(n, 1));
    if (threads <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t b = t * chunk;
        const std::int64_t e = std::min<std::int64_t>(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back(fn, b, e);
    }
    for (auto& th : pool) th.join();
}

/// Interaction weights indexed by node offset; the zero offset carries
/// the equal-volume-sphere value 2 pi Req^2.
std::vector<double> potential_weight_table(const GridSpec& g) {
    const auto& n = g.n_space;
    const double V = g.cell_volume();
    const double req = std::cbrt(3.0 * V / (4.0 * std::numbers::pi));
    const double self_weight = 2.0 * std::numbers::pi * req * req;
    const int w0 = 2 * n[0] - 1, w1 = 2 * n[1] - 1, w2 = 2 * n[2] - 1;
    std::vector<double> w(std::size_t(w0) * w1 * w2);
    parallel_chunks(w0, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t a = b; a < e; ++a) {
            const double ox = (double(a) - (n[0] - 1)) * g.dx(0);
            for (int bj = 0; bj < w1; ++bj) {
                const double oy = (double(bj) - (n[1] - 1)) * g.dx(1);
                double* row = w.data() + (std::size_t(a) * w1 + bj) * w2;
                for (int ck = 0; ck < w2; ++ck) {
                    const double oz = (double(ck) - (n[2] - 1)) * g.dx(2);
                    const double r = std::sqrt(ox * ox + oy * oy + oz * oz);
                    row[ck] = r > 0.0 ? V / r : self_weight;
                }
            }
        }
    });
    return w;
}

double potential_at_node(const double* h_slice, const std::vector<double>& w, const GridSpec& g,
                         int i, int j, int k) {
    const auto& n = g.n_space;
    const int w1 = 2 * n[1] - 1, w2 = 2 * n[2] - 1;
    double acc = 0.0;
    for (int a = 0; a < n[0]; ++a) {
        const std::size_t wa = std::size_t(a - i + n[0] - 1);
        for (int b = 0; b < n[1]; ++b) {
            const double* wrow = w.data() + (wa * w1 + (b - j + n[1] - 1)) * w2 + (n[2] - 1 - k);
            const double* hrow = h_slice + (std::size_t(a) * n[1] + b) * n[2];
            double s = 0.0;
            for (int c = 0; c < n[2]; ++c) s += hrow[c] * wrow[c];
            acc += s;
        }
    }
    return -acc / (4.0 * std::numbers::pi);
}

struct AxisView {
    std::int64_t lines = 0;
    int len = 0;
    std::int64_t stride = 0;
};

AxisView axis_view(const GridSpec& g, int axis4) {
    const std::array<std::int64_t, 4> dims = {g.n_time, g.n_space[0], g.n_space[1], g.n_space[2]};
    AxisView v;
    v.len = static_cast<int>(dims[axis4]);
    v.stride = 1;
    for (int a = axis4 + 1; a < 4; ++a) v.stride *= dims[a];
    v.lines = 1;
    for (int a = 0; a < 4; ++a)
        if (a != axis4) v.lines *= dims[a];
    return v;
}

/// Base offset of line `line` along `axis4` (lines enumerate the other
/// three axes in storage order).
std::int64_t line_base(const GridSpec& g, int axis4, std::int64_t line) {
    const std::array<std::int64_t, 4> dims = {g.n_time, g.n_space[0], g.n_space[1], g.n_space[2]};
    std::array<std::int64_t, 4> strides;
    strides[3] = 1;
    for (int a = 2; a >= 0; --a) strides[a] = strides[a + 1] * dims[a + 1];
    std::int64_t base = 0;
    for (int a = 3; a >= 0; --a) {
        if (a == axis4) continue;
        base += (line % dims[a]) * strides[a];
        line /= dims[a];
    }
    return base;
}

ScalarField apply_first_difference(const ScalarField& f, int axis4) {
    const AxisView v = axis_view(f.grid, axis4);
    if (v.len < 3) throw std::runtime_error("derivative: stencil exceeds grid");
    const double h = f.grid.spacing(axis4);
    ScalarField out(f.grid);
    parallel_chunks(v.lines, [&](std::int64_t lb, std::int64_t le) {
        std::vector<double> line(v.len);
        for (std::int64_t l = lb; l < le; ++l) {
            const std::int64_t base = line_base(f.grid, axis4, l);
            for (int i = 0; i < v.len; ++i) line[i] = f.values[base + i * v.stride];
            double* o = out.values.data() + base;
            o[0] = (-3.0 * line[0] + 4.0 * line[1] - line[2]) / (2.0 * h);
            for (int i = 1; i + 1 < v.len; ++i)
                o[std::int64_t(i) * v.stride] = (line[i + 1] - line[i - 1]) / (2.0 * h);
            o[std::int64_t(v.len - 1) * v.stride] =
                (3.0 * line[v.len - 1] - 4.0 * line[v.len - 2] + line[v.len - 3]) / (2.0 * h);
        }
    });
    return out;
}

ScalarField apply_second_difference(const ScalarField& f, int axis4) {
    const AxisView v = axis_view(f.grid, axis4);
    if (v.len < 4) throw std::runtime_error("derivative: stencil exceeds grid");
    const double h2 = f.grid.spacing(axis4) * f.grid.spacing(axis4);
    ScalarField out(f.grid);
    parallel_chunks(v.lines, [&](std::int64_t lb, std::int64_t le) {
        std::vector<double> line(v.len);
        for (std::int64_t l = lb; l < le; ++l) {
            const std::int64_t base = line_base(f.grid, axis4, l);
            for (int i = 0; i < v.len; ++i) line[i] = f.values[base + i * v.stride];
            double* o = out.values.data() + base;
            o[0] = (2.0 * line[0] - 5.0 * line[1] + 4.0 * line[2] - line[3]) / h2;
            for (int i = 1; i + 1 < v.len; ++i)
                o[std::int64_t(i) * v.stride] = (line[i + 1] - 2.0 * line[i] + line[i - 1]) / h2;
            o[std::int64_t(v.len - 1) * v.stride] = (2.0 * line[v.len - 1] - 5.0 * line[v.len - 2] +
                                                     4.0 * line[v.len - 3] - line[v.len - 4]) / h2;
        }
    });
    return out;
}

/// Axis tap weights of the sampled Gaussian at bandwidth 4 mu s,
/// truncated at six standard deviations and normalized to unit sum. The
/// full tap range participates in the normalization even when it is
/// wider than the grid; out-of-range sources are zero by extension.
std::vector<double> gaussian_taps(double dx, double mu, double s, double* raw_mass) {
    const double sigma = std::sqrt(2.0 * mu * s);
    const int K = static_cast<int>(std::ceil(6.0 * sigma / dx));
    std::vector<double> w(2 * K + 1);
    double sum = 0.0;
    for (int j = -K; j <= K; ++j) {
        const double v = std::exp(-(j * dx) * (j * dx) / (4.0 * mu * s));
        w[j + K] = v;
        sum += v;
    }
    if (raw_mass) *raw_mass = sum * dx / std::sqrt(4.0 * std::numbers::pi * mu * s);
    for (double& v : w) v /= sum;
    return w;
}

/// One separable pass along spatial axis `ax` of a single time slice.
void conv_axis(const GridSpec& g, int ax, const std::vector<double>& taps,
               const std::vector<double>& in, std::vector<double>& out) {
    const auto& n = g.n_space;
    const int K = (static_cast<int>(taps.size()) - 1) / 2;
    const std::array<std::int64_t, 3> strides = {std::int64_t(n[1]) * n[2], n[2], 1};
    const std::int64_t lines = (std::int64_t(n[0]) * n[1] * n[2]) / n[ax];
    parallel_chunks(lines, [&](std::int64_t lb, std::int64_t le) {
        for (std::int64_t l = lb; l < le; ++l) {
            // decode the two fixed axes in storage order
            std::int64_t rem = l, base = 0;
            for (int a = 2; a >= 0; --a) {
                if (a == ax) continue;
                base += (rem % n[a]) * strides[a];
                rem /= n[a];
            }
            for (int i = 0; i < n[ax]; ++i) {
                const int jlo = std::max(-K, -i), jhi = std::min(K, n[ax] - 1 - i);
                double acc = 0.0;
                const double* src = in.data() + base + std::int64_t(i) * strides[ax];
                for (int j = jlo; j <= jhi; ++j)
                    acc += taps[j + K] * src[std::int64_t(j) * strides[ax]];
                out[base + std::int64_t(i) * strides[ax]] = acc;
            }
        }
    });
}

void gaussian_smooth_slice(const GridSpec& g, double mu, double s, const double* src,
                           std::vector<double>& dst, std::vector<double>& scratch) {
    const std::int64_t nn = g.space_nodes();
    dst.assign(src, src + nn);
    for (int ax = 0; ax < 3; ++ax) {
        auto taps = gaussian_taps(g.dx(ax), mu, s, nullptr);
        scratch.resize(nn);
        conv_axis(g, ax, taps, dst, scratch);
        dst.swap(scratch);
    }
}

ScalarField laplacian(const ScalarField& f) {
    ScalarField out = apply_second_difference(f, 1);
    out += apply_second_difference(f, 2);
    out += apply_second_difference(f, 3);
    return out;
}

}  // namespace

void set_compute_threads(int n) { g_threads = std::max(1, n); }
int compute_threads() { return g_threads; }

ScalarField newtonian_potential(const ScalarField& h) {
    const GridSpec& g = h.grid;
    const auto w = potential_weight_table(g);
    ScalarField out(g);
    const auto& n = g.n_space;
    for (int it = 0; it < g.n_time; ++it) {
        const double* src = h.slice(it);
        double* dst = out.slice(it);
        parallel_chunks(n[0], [&](std::int64_t ib, std::int64_t ie) {
            for (int i = static_cast<int>(ib); i < ie; ++i)
                for (int j = 0; j < n[1]; ++j)
                    for (int k = 0; k < n[2]; ++k)
                        dst[(std::int64_t(i) * n[1] + j) * n[2] + k] =
                            potential_at_node(src, w, g, i, j, k);
        });
    }
    return out;
}

double newtonian_potential_at(const ScalarField& h, int it, int i, int j, int k) {
    const auto w = potential_weight_table(h.grid);
    return potential_at_node(h.slice(it), w, h.grid, i, j, k);
}

std::vector<double> newtonian_potential_slice(const ScalarField& h, int it) {
    const GridSpec& g = h.grid;
    const auto w = potential_weight_table(g);
    const auto& n = g.n_space;
    std::vector<double> out(g.space_nodes());
    const double* src = h.slice(it);
    parallel_chunks(n[0], [&](std::int64_t ib, std::int64_t ie) {
        for (int i = static_cast<int>(ib); i < ie; ++i)
            for (int j = 0; j < n[1]; ++j)
                for (int k = 0; k < n[2]; ++k)
                    out[(std::int64_t(i) * n[1] + j) * n[2] + k] =
                        potential_at_node(src, w, g, i, j, k);
    });
    return out;
}

HeatKernelInfo heat_kernel_info(const GridSpec& g, double mu, double bandwidth_time) {
    HeatKernelInfo info;
    info.normalized_mass = 1.0;
    info.raw_mass = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        double raw = 0.0;
        auto taps = gaussian_taps(g.dx(ax), mu, bandwidth_time, &raw);
        info.taps[ax] = (static_cast<int>(taps.size()) - 1) / 2;
        info.raw_mass *= raw;
        double s = 0.0;
        for (double v : taps) s += v;
        info.normalized_mass *= s;
    }
    return info;
}

ScalarField heat_time_integral(const ScalarField& v, double mu) {
    const GridSpec& g = v.grid;
    const double dt = g.dt();
    // Endpoint correction terms, shared across target slices.
    const ScalarField lap_v = laplacian(v);
    const ScalarField dv_dt = apply_first_difference(v, 0);

    ScalarField out(g);
    const std::int64_t nn = g.space_nodes();
    std::vector<double> smoothed(nn), scratch(nn), acc(nn);
    for (int ni = 1; ni < g.n_time; ++ni) {
        std::fill(acc.begin(), acc.end(), 0.0);
        // Trapezoid over the slices strictly before the target time.
        for (int m = 0; m < ni; ++m) {
            if (ni == 1) break;
            const double weight = (m == 0 || m == ni - 1) ? 0.5 * dt : dt;
            gaussian_smooth_slice(g, mu, (ni - m) * dt, v.slice(m), smoothed, scratch);
            for (std::int64_t p = 0; p < nn; ++p) acc[p] += weight * smoothed[p];
        }
        // Delta-limit endpoint rule with its second-order correction.
        const double* vt = v.slice(ni);
        const double* lv = lap_v.slice(ni);
        const double* dv = dv_dt.slice(ni);
        double* dst = out.slice(ni);
        for (std::int64_t p = 0; p < nn; ++p)
            dst[p] = acc[p] + dt * vt[p] + 0.5 * dt * dt * (mu * lv[p] - dv[p]);
    }
    return out;
}

ScalarField derivative(const ScalarField& f, const DerivSpec& spec) {
    if (spec.t < 0 || spec.t > 1)
        throw std::invalid_argument("derivative: time order must be 0 or 1");
    if (spec.x[0] < 0 || spec.x[1] < 0 || spec.x[2] < 0 || spec.spatial_total() > 4)
        throw std::invalid_argument("derivative: spatial order must be 0..4 in total");
    ScalarField out = f;
    if (spec.t == 1) out = apply_first_difference(out, 0);
    for (int ax = 0; ax < 3; ++ax) {
        int m = spec.x[ax];
        for (; m >= 2; m -= 2) out = apply_second_difference(out, ax + 1);
        if (m == 1) out = apply_first_difference(out, ax + 1);
    }
    return out;
}

double interior_sup(const ScalarField& f, int margin) {
    return interior_sup(f, margin, margin);
}

double interior_sup(const ScalarField& f, int margin_t, int margin_x) {
    const GridSpec& g = f.grid;
    double m = 0.0;
    for (int it = margin_t; it < g.n_time - margin_t; ++it)
        for (int i = margin_x; i < g.n_space[0] - margin_x; ++i)
            for (int j = margin_x; j < g.n_space[1] - margin_x; ++j)
                for (int k = margin_x; k < g.n_space[2] - margin_x; ++k)
                    m = std::max(m, std::abs(f.at(it, i, j, k)));
    return m;
}

ScalarField solve_factorized(const ScalarField& f, double mu) {
    ScalarField h2 = heat_time_integral(newtonian_potential(f), mu);
    h2 *= -1.0;
    return h2;
}

SolveH2Result solve_h2(const std::array<ScalarField, 9>& h1, double mu, bool with_diagnostics) {
    SolveH2Result res;
    for (int m = 0; m < 9; ++m) {
        ScalarField v = newtonian_potential(h1[m]);
        res.h2[m] = heat_time_integral(v, mu);
        res.h2[m] *= -1.0;
        if (with_diagnostics) {
            const auto& d = res.diag;
            ScalarField r1 = laplacian(v) - h1[m];
            res.diag.poisson_residual =
                std::max(res.diag.poisson_residual, interior_sup(r1, d.factor_margin));
            ScalarField r2 = mu * laplacian(res.h2[m]) - apply_first_difference(res.h2[m], 0) - v;
            res.diag.heat_residual =
                std::max(res.diag.heat_residual, interior_sup(r2, d.factor_margin));
            ScalarField r3(res.h2[m].grid);
            for (int a = 1; a <= 3; ++a)
                for (int b = 1; b <= 3; ++b) {
                    DerivSpec ds;
                    ds.x[a - 1] += 2;
                    ds.x[b - 1] += 2;
                    r3 += mu * derivative(res.h2[m], ds);
                }
            for (int a = 1; a <= 3; ++a) {
                DerivSpec ds;
                ds.t = 1;
                ds.x[a - 1] = 2;
                r3 -= derivative(res.h2[m], ds);
            }
            r3 -= h1[m];
            res.diag.composite_residual = std::max(
                res.diag.composite_residual, interior_sup(r3, d.factor_margin, d.composite_margin_x));
            res.diag.boundary_jump =
                std::max(res.diag.boundary_jump, res.h2[m].boundary_jump());
        }
    }
    return res;
}

double estimate_MK1(const GridSpec& g) {
    const auto w = potential_weight_table(g);
    const auto& n = g.n_space;
    std::vector<double> maxima(n[0], 0.0);
    parallel_chunks(n[0], [&](std::int64_t ib, std::int64_t ie) {
        const int w1 = 2 * n[1] - 1, w2 = 2 * n[2] - 1;
        for (int i = static_cast<int>(ib); i < ie; ++i) {
            double m = 0.0;
            for (int j = 0; j < n[1]; ++j)
                for (int k = 0; k < n[2]; ++k) {
                    double acc = 0.0;
                    for (int a = 0; a < n[0]; ++a) {
                        const std::size_t wa = std::size_t(a - i + n[0] - 1);
                        for (int b = 0; b < n[1]; ++b) {
                            const double* row =
                                w.data() + (wa * w1 + (b - j + n[1] - 1)) * w2 + (n[2] - 1 - k);
                            for (int c = 0; c < n[2]; ++c) acc += row[c];
                        }
                    }
                    m = std::max(m, acc);
                }
            maxima[i] = m;
        }
    });
    double m = 0.0;
    for (double v : maxima) m = std::max(m, v);
    return m / (4.0 * std::numbers::pi);
}

double phi1_closed(double t, double tau1) {
    return std::pow(std::numbers::pi, 1.5) / (t - tau1);
}

double phi2_closed(double t, double tau1) {
    return 1.5 * std::pow(std::numbers::pi, 1.5) / (t - tau1);
}

PhiReport evaluate_phi_bounds(double T, double dt_min) {
    if (!(T > 0.0)) throw std::invalid_argument("evaluate_phi_bounds: T must be positive");
    if (!(dt_min > 0.0) || dt_min > T) dt_min = T / 8.0;
    PhiReport rep;
    rep.phi1_coefficient = std::pow(std::numbers::pi, 1.5);
    rep.phi2_coefficient = 1.5 * std::pow(std::numbers::pi, 1.5);
    rep.dt_min = dt_min;
    rep.pragmatic_mprime = rep.phi2_coefficient / dt_min;
    const std::array<double, 5> fractions = {0.9, 0.7, 0.5, 0.3, 0.1};
    for (double frac : fractions) {
        PhiSample s;
        s.t = T;
        s.tau1 = T * (1.0 - frac);
        s.phi1 = phi1_closed(s.t, s.tau1);
        s.phi2 = phi2_closed(s.t, s.tau1);
        rep.samples.push_back(s);
    }
    return rep;
}

double BoundConstants::closed_form_M(double theta, double mt3, double mk1) {
    // Largest representable value not exceeding the closed form, so the
    // self-consistency inequality holds non-strictly in exact arithmetic
    // for the returned radius as well.
    const long double s = static_cast<long double>(mt3) * mk1;
    const long double exact = (1.0L - theta) / (s * (2.0L * theta + s));
    double v = static_cast<double>(exact);
    if (static_cast<long double>(v) > exact) v = std::nextafter(v, 0.0);
    return v;
}

double BoundConstants::mt4_from(double mt3, double spacetime_diameter, double alpha) {
    return 4.0 * mt3 * std::pow(spacetime_diameter, 1.0 - alpha);
}

double BoundConstants::inequality_ratio(double theta, double M, double mt3, double mk1) {
    const long double th = theta, m = M, s = static_cast<long double>(mt3) * mk1;
    const long double lhs = th * m + 2.0L * th * m * m * s + (m * s) * (m * s);
    return static_cast<double>(lhs / m);
}

MTEstimates estimate_MT(const std::vector<std::array<ScalarField, 9>>& probes, double mu,
                        double tau, double mk1) {
    if (probes.empty()) throw std::invalid_argument("estimate_MT: empty probe set");
    MTEstimates est;
    for (const auto& probe : probes) {
        double M = 0.0;
        for (const auto& c : probe) M = std::max(M, c.sup_norm());
        if (M == 0.0) continue;
        const double scale = M * mk1;
        auto h2 = solve_h2(probe, mu).h2;

        double fam1 = 0.0, fam2 = 0.0;
        for (const auto& f : h2) {
            fam1 = std::max(fam1, f.sup_norm());
            fam1 = std::max(fam1, derivative(f, {1, {0, 0, 0}}).sup_norm());
            for (int a = 0; a < 3; ++a) {
                DerivSpec d1;
                d1.x[a] = 1;
                fam1 = std::max(fam1, derivative(f, d1).sup_norm());
                d1.t = 1;
                fam1 = std::max(fam1, derivative(f, d1).sup_norm());
            }
            // spatial orders two to four, and single time derivatives of
            // the second- and third-order families
            for (int a = 0; a < 3; ++a)
                for (int b = a; b < 3; ++b) {
                    DerivSpec d2;
                    d2.x[a] += 1;
                    d2.x[b] += 1;
                    fam2 = std::max(fam2, derivative(f, d2).sup_norm());
                    DerivSpec d2t = d2;
                    d2t.t = 1;
                    fam2 = std::max(fam2, derivative(f, d2t).sup_norm());
                    for (int c = b; c < 3; ++c) {
                        DerivSpec d3 = d2;
                        d3.x[c] += 1;
                        fam2 = std::max(fam2, derivative(f, d3).sup_norm());
                        DerivSpec d3t = d3;
                        d3t.t = 1;
                        fam2 = std::max(fam2, derivative(f, d3t).sup_norm());
                        for (int d = c; d < 3; ++d) {
                            DerivSpec d4 = d3;
                            d4.x[d] += 1;
                            fam2 = std::max(fam2, derivative(f, d4).sup_norm());
                        }
                    }
                }
        }
        est.mt1 = std::max(est.mt1, fam1 / scale);
        est.mt2 = std::max(est.mt2, fam2 / scale);

        const W2Fields w2 = build_w2(h2, mu, tau);
        const PairMap& pm = PairMap::instance();
        double fam3 = 0.0;
        for (int j = 0; j < 9; ++j) {
            for (int idx : {pm.pairs[j].w2_left, pm.pairs[j].w2_right}) {
                const ScalarField& f = w2.w[idx];
                fam3 = std::max(fam3, f.sup_norm());
                fam3 = std::max(fam3, derivative(f, {1, {0, 0, 0}}).sup_norm());
                for (int a = 0; a < 3; ++a) {
                    DerivSpec d1;
                    d1.x[a] = 1;
                    fam3 = std::max(fam3, derivative(f, d1).sup_norm());
                }
            }
        }
        est.mt3 = std::max(est.mt3, fam3 / scale);
    }
    return est;
}

}  // namespace nsreduce
