#include "frontlab/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "frontlab/errors.hpp"
#include "frontlab/numerics.hpp"

namespace frontlab {

Field moving_field(const Trajectory& traj, std::size_t snapshot, double c2) {
    const Snapshot& s = traj.snapshots.at(snapshot);
    Field f;
    f.h = traj.grid.h;
    f.z_min = traj.grid.x_min + (c2 - traj.frame.node_speed()) * s.t;
    f.w = s.u;
    return f;
}

Field cutoff(const Field& u, double t, double m) {
    if (std::isinf(m)) return u;
    Field w = u;
    const double a = m * t;
    for (std::size_t i = 0; i < w.w.size(); ++i) {
        const double z = w.z(i);
        if (z > a) {
            const double g = smoothstep5(z - a);
            w.w[i] = u.w[i] + (1.0 - u.w[i]) * g;
        } else if (z < -a) {
            const double g = smoothstep5(-a - z);
            w.w[i] = (1.0 - g) * u.w[i];
        }
    }
    return w;
}

namespace {

double trapezoid(std::vector<double>& terms, double h) {
    if (terms.empty()) return 0.0;
    terms.front() *= 0.5;
    terms.back() *= 0.5;
    return h * pairwise_sum(terms);
}

double slope(const Field& w, std::size_t i) {
    const std::size_t n = w.w.size();
    const auto& v = w.w;
    if (i == 0) return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * w.h);
    if (i == n - 1) return (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * w.h);
    return (v[i + 1] - v[i - 1]) / (2.0 * w.h);
}

// Second derivative and first derivative with Neumann ghosts at the ends.
void stencils(const Field& w, std::size_t i, double& wz, double& wzz) {
    const std::size_t n = w.w.size();
    const auto& v = w.w;
    const double h2 = w.h * w.h;
    if (i == 0) {
        wz = 0.0;
        wzz = 2.0 * (v[1] - v[0]) / h2;
    } else if (i == n - 1) {
        wz = 0.0;
        wzz = 2.0 * (v[n - 2] - v[n - 1]) / h2;
    } else {
        wz = (v[i + 1] - v[i - 1]) / (2.0 * w.h);
        wzz = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
}

bool end_check(const std::vector<double>& terms) {
    return std::abs(terms.front()) > 1e-10 || std::abs(terms.back()) > 1e-10;
}

}  // namespace

Quadrature eval_L(const Field& w, double c2, const BistableNonlinearity& f2) {
    const std::size_t n = w.w.size();
    if (n < 3) throw ConfigError("eval_L: field needs at least 3 nodes");
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = w.z(i);
        const double wz = slope(w, i);
        terms[i] = std::exp(-c2 * z) * (0.5 * wz * wz - f2.potential(w.w[i]));
    }
    Quadrature q;
    q.truncated = end_check(terms);
    // The step counterterm H(z) F(1) is integrated in closed form so that L stays
    // smooth as the origin moves between nodes.
    const double z_lo = std::max(0.0, w.z_min), z_hi = w.z(n - 1);
    const double step = z_hi > z_lo ? f2.potential_at_1() * (std::exp(-c2 * z_lo) - std::exp(-c2 * z_hi)) / c2 : 0.0;
    q.value = trapezoid(terms, w.h) + step;
    return q;
}

Quadrature eval_Q(const Field& w, double c2, const BistableNonlinearity& f2) {
    const std::size_t n = w.w.size();
    if (n < 3) throw ConfigError("eval_Q: field needs at least 3 nodes");
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        double wz, wzz;
        stencils(w, i, wz, wzz);
        const double r = wzz - c2 * wz + f2.value(w.w[i]);
        terms[i] = std::exp(-c2 * w.z(i)) * r * r;
    }
    Quadrature q;
    q.truncated = end_check(terms);
    q.value = trapezoid(terms, w.h);
    return q;
}

double max_cutoff_slope(double c2, double eta) { return 0.5 * std::min(2.0 * eta / c2, c2); }

nlohmann::json LyapunovSeries::to_json() const {
    return {{"m", std::isinf(m) ? nlohmann::json("inf") : nlohmann::json(m)},
            {"c2", c2},
            {"samples", times.size()},
            {"supL", sup_abs_L},
            {"threshold_time", threshold_time},
            {"check_from", check_from},
            {"tail_max_dLdt_plus_Q", tail_max},
            {"settle_time", settled ? nlohmann::json(settle_time) : nlohmann::json(nullptr)},
            {"min_Q_final_quarter", min_Q_final_quarter},
            {"max_identity_residual", max_identity_residual},
            {"truncation_warnings", truncation_warnings}};
}

LyapunovSeries lyapunov_series(const Trajectory& traj, double m, const BistableNonlinearity& f2, double c2,
                               const LyapunovOptions& opt) {
    if (!(m > 0.0)) throw ConfigError("lyapunov_series: m must be positive");
    if (!std::isinf(m) && !(m < max_cutoff_slope(c2, opt.eta)))
        throw ConfigError("lyapunov_series: m violates m < min(2 eta/c2, c2)/2");

    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
        if (std::isinf(m) || traj.snapshots[k].t > 0.0) idx.push_back(k);
    if (idx.size() < 3) throw ConfigError("lyapunov_series: need at least three snapshots with t > 0");

    const std::size_t n = idx.size();
    const double s = traj.frame.node_speed();
    LyapunovSeries out;
    out.m = m;
    out.c2 = c2;
    out.times.resize(n);
    out.L_values.resize(n);
    out.Q_values.resize(n);
    out.cross_term.resize(n);
    std::vector<char> trunc(n, 0);

    auto field = [&](std::size_t j) { return cutoff(moving_field(traj, idx[j], c2), traj.snapshots[idx[j]].t, m); };

    parallel_for(n, opt.threads, [&](std::size_t j) {
        const double t = traj.snapshots[idx[j]].t;
        const Field w = field(j);
        const std::size_t a = j == 0 ? 0 : j - 1, b = j + 1 == n ? j : j + 1;
        const Field wa = field(a), wb = field(b);
        const double ta = traj.snapshots[idx[a]].t, tb = traj.snapshots[idx[b]].t;
        const Quadrature L = eval_L(w, c2, f2), Q = eval_Q(w, c2, f2);
        std::vector<double> terms(w.w.size());
        for (std::size_t i = 0; i < w.w.size(); ++i) {
            double wz, wzz;
            stencils(w, i, wz, wzz);
            const double fw = f2.value(w.w[i]);
            const double r1 = wzz - c2 * wz + fw;
            const double wt = (wb.w[i] - wa.w[i]) / (tb - ta);
            const double r2 = wt + s * wz - wzz - fw;
            terms[i] = -std::exp(-c2 * w.z(i)) * r1 * r2;
        }
        out.times[j] = t;
        out.L_values[j] = L.value;
        out.Q_values[j] = Q.value;
        out.cross_term[j] = trapezoid(terms, w.h);
        trunc[j] = L.truncated || Q.truncated;
    });

    out.dL_dt.resize(n);
    out.identity_residual.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t a = j == 0 ? 0 : j - 1, b = j + 1 == n ? j : j + 1;
        out.dL_dt[j] = (out.L_values[b] - out.L_values[a]) / (out.times[b] - out.times[a]);
        out.identity_residual[j] = std::abs(out.dL_dt[j] + out.Q_values[j] - out.cross_term[j]);
        out.truncation_warnings += trunc[j] ? 1 : 0;
        out.sup_abs_L = std::max(out.sup_abs_L, std::abs(out.L_values[j]));
        out.max_identity_residual = std::max(out.max_identity_residual, out.identity_residual[j]);
    }

    out.threshold_time = std::isinf(m) ? 0.0 : (1.0 + opt.x0) / (c2 - m);
    out.check_from = opt.threshold_factor * out.threshold_time;
    out.tail_max = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        if (out.times[j] >= out.check_from - 1e-9)
            out.tail_max = std::max(out.tail_max, std::abs(out.dL_dt[j] + out.Q_values[j]));

    out.settled = std::abs(out.dL_dt[n - 1] + out.Q_values[n - 1]) <= opt.tol;
    out.settle_time = out.times[n - 1];
    for (std::size_t j = n; j-- > 0;) {
        if (std::abs(out.dL_dt[j] + out.Q_values[j]) > opt.tol) break;
        out.settle_time = out.times[j];
    }

    const double quarter = out.times.back() - 0.25 * (out.times.back() - out.times.front());
    out.min_Q_final_quarter = HUGE_VAL;
    for (std::size_t j = 0; j < n; ++j)
        if (out.times[j] >= quarter - 1e-9) out.min_Q_final_quarter = std::min(out.min_Q_final_quarter, out.Q_values[j]);
    return out;
}

}  // namespace frontlab
