#include "frontlab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "frontlab/artifacts.hpp"
#include "frontlab/envelopes.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/numerics.hpp"

namespace frontlab {

SimGrid SimGrid::make(double x_min, double x_max, double h) {
    if (!(h > 0.0) || !(x_max > x_min)) throw ConfigError("grid: need h > 0 and x_max > x_min");
    const double cells = (x_max - x_min) / h;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, rounded))
        throw ConfigError("grid: (x_max - x_min)/h is not an integer");
    SimGrid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.h = h;
    g.n = static_cast<std::size_t>(rounded) + 1;
    return g;
}

nlohmann::json SimGrid::to_json() const {
    return {{"x_min", x_min}, {"x_max", x_max}, {"h", h}, {"n", n}};
}

nlohmann::json Frame::to_json() const {
    return {{"kind", kind == Kind::lab ? "lab" : "moving"}, {"speed", speed}};
}

long Trajectory::find(double t) const {
    auto it = std::lower_bound(snapshots.begin(), snapshots.end(), t - 1e-9,
                               [](const Snapshot& s, double v) { return s.t < v; });
    if (it == snapshots.end() || std::abs(it->t - t) > 1e-9) return -1;
    return static_cast<long>(it - snapshots.begin());
}

std::vector<double> Trajectory::at_time(double t) const {
    if (snapshots.empty()) throw DomainError("at_time: empty trajectory");
    if (t < t_begin() - 1e-9 || t > t_end() + 1e-9) throw DomainError("at_time: t outside the stored range");
    auto it = std::lower_bound(snapshots.begin(), snapshots.end(), t,
                               [](const Snapshot& s, double v) { return s.t < v; });
    if (it == snapshots.end()) return snapshots.back().u;
    if (std::abs(it->t - t) <= 1e-12 || it == snapshots.begin()) return it->u;
    const Snapshot& b = *it;
    const Snapshot& a = *(it - 1);
    const double w = (t - a.t) / (b.t - a.t);
    std::vector<double> u(a.u.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = (1.0 - w) * a.u[i] + w * b.u[i];
    return u;
}

namespace {

// Constant tridiagonal system factored once (Thomas algorithm).
struct Tridiagonal {
    std::vector<double> lower, diag, upper;  // matrix entries
    std::vector<double> cprime, inv;         // factorization

    void factor() {
        const std::size_t n = diag.size();
        cprime.assign(n, 0.0);
        inv.assign(n, 0.0);
        inv[0] = 1.0 / diag[0];
        cprime[0] = upper[0] * inv[0];
        for (std::size_t i = 1; i < n; ++i) {
            inv[i] = 1.0 / (diag[i] - lower[i] * cprime[i - 1]);
            cprime[i] = upper[i] * inv[i];
        }
    }

    void solve(std::vector<double>& d) const {
        const std::size_t n = diag.size();
        d[0] *= inv[0];
        for (std::size_t i = 1; i < n; ++i) d[i] = (d[i] - lower[i] * d[i - 1]) * inv[i];
        for (std::size_t i = n - 1; i-- > 0;) d[i] -= cprime[i] * d[i + 1];
    }
};

}  // namespace

Trajectory simulate(std::shared_ptr<const SpatialReaction> r, const SimGrid& grid, const std::vector<double>& u0,
                    double t0, double t_end, double dt, Frame frame, double snapshot_every, const SimOptions& opt) {
    if (!r) throw ConfigError("simulate: no reaction");
    const std::size_t n = grid.n;
    if (n < 3 || u0.size() != n) throw ConfigError("simulate: initial field does not match the grid");
    for (double v : u0)
        if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("simulate: initial values must lie in [0,1]");
    if (!(dt > 0.0) || !(t_end > t0)) throw ConfigError("simulate: need dt > 0 and t_end > t0");
    if (dt > 0.5 / r->lipschitz_bound())
        throw ConfigError("simulate: dt exceeds the explicit reaction bound 0.5/L_f");
    const double s = frame.node_speed();
    if (std::abs(s) * dt / grid.h > 1.0) throw ConfigError("simulate: advection CFL c*dt/h exceeds 1");
    if (!(snapshot_every > 0.0)) throw ConfigError("simulate: snapshot_every must be positive");

    const double h = grid.h;
    const double d2 = 1.0 / (h * h);
    const double ad = s / (2.0 * h);
    const double half = 0.5 * dt;

    // Operator A = D2 - s D1 with Neumann ghost nodes (u_{-1} = u_1).
    std::vector<double> al(n, 0.0), ad_(n, -2.0 * d2), au(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        al[i] = d2 + ad;
        au[i] = d2 - ad;
    }
    au[0] = 2.0 * d2;
    al[n - 1] = 2.0 * d2;

    Tridiagonal lhs;
    lhs.lower.resize(n);
    lhs.diag.resize(n);
    lhs.upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        lhs.lower[i] = -half * al[i];
        lhs.diag[i] = 1.0 - half * ad_[i];
        lhs.upper[i] = -half * au[i];
    }
    lhs.factor();

    const std::int64_t steps = std::llround((t_end - t0) / dt);
    const std::int64_t stride = std::max<std::int64_t>(1, std::llround(snapshot_every / dt));

    Trajectory traj;
    traj.grid = grid;
    traj.frame = frame;
    traj.dt = dt;
    traj.reaction = r;
    traj.steps = steps;
    traj.boundary.threshold = opt.boundary_threshold;
    traj.boundary.left_asymptote = std::round(u0.front());
    traj.boundary.right_asymptote = std::round(u0.back());

    std::vector<double> u = u0, k1(n), rhs(n), chi(n);
    const bool lab = frame.kind == Frame::Kind::lab || s == 0.0;
    auto fill_chi = [&](double t) {
        for (std::size_t i = 0; i < n; ++i) chi[i] = r->chi(grid.x(i) - s * t);
    };
    if (lab) fill_chi(0.0);

    // Heun step of length tau for u' = f(x,u) starting at time t.
    auto reaction = [&](double t, double tau) {
        if (!lab) fill_chi(t);
        for (std::size_t i = 0; i < n; ++i) {
            k1[i] = r->value_with_chi(chi[i], u[i]);
            rhs[i] = u[i] + tau * k1[i];
        }
        if (!lab) fill_chi(t + tau);
        for (std::size_t i = 0; i < n; ++i) u[i] += 0.5 * tau * (k1[i] + r->value_with_chi(chi[i], rhs[i]));
    };

    auto monitor = [&]() {
        traj.boundary.max_left = std::max(traj.boundary.max_left, std::abs(u.front() - traj.boundary.left_asymptote));
        traj.boundary.max_right = std::max(traj.boundary.max_right, std::abs(u.back() - traj.boundary.right_asymptote));
    };

    traj.snapshots.push_back({t0, u});
    monitor();
    for (std::int64_t step = 1; step <= steps; ++step) {
        const double t = t0 + static_cast<double>(step - 1) * dt;
        reaction(t, half);
        rhs[0] = u[0] + half * (ad_[0] * u[0] + au[0] * u[1]);
        for (std::size_t i = 1; i + 1 < n; ++i)
            rhs[i] = u[i] + half * (al[i] * u[i - 1] + ad_[i] * u[i] + au[i] * u[i + 1]);
        rhs[n - 1] = u[n - 1] + half * (al[n - 1] * u[n - 2] + ad_[n - 1] * u[n - 1]);
        lhs.solve(rhs);
        u.swap(rhs);
        reaction(t + half, half);
        for (double& v : u) {
            if (v < 0.0 || v > 1.0) {
                const double c = v < 0.0 ? 0.0 : 1.0;
                if (std::abs(v - c) > opt.clamp_count_tolerance) ++traj.clamp_events;
                v = c;
            }
            if (!std::isfinite(v)) throw NumericalError("simulate: non-finite value");
        }
        monitor();
        if (step % stride == 0 || step == steps) traj.snapshots.push_back({t0 + static_cast<double>(step) * dt, u});
    }
    return traj;
}

Trajectory to_moving_frame(const Trajectory& traj, double c, std::optional<SimGrid> z_grid) {
    Trajectory out = traj;
    const SimGrid zg = z_grid.value_or(traj.grid);
    out.grid = zg;
    out.frame = Frame::moving(traj.frame.node_speed() + c);
    if (c == 0.0 && !z_grid) {
        out.frame = traj.frame;
        return out;
    }
    for (auto& snap : out.snapshots) {
        const MonotoneCubic interp(traj.grid.x_min, traj.grid.h, snap.u);
        std::vector<double> v(zg.n);
        for (std::size_t j = 0; j < zg.n; ++j) v[j] = std::clamp(interp(zg.x(j) - c * snap.t), 0.0, 1.0);
        snap.u = std::move(v);
    }
    return out;
}

std::vector<double> entire_initial_data(const SpatialReaction& r, const WaveProfile& wave1, double t0,
                                        const SimGrid& grid) {
    const EarlyParams p = derive_early(wave1, r.f1());
    if (t0 > p.T1) throw PreconditionError("entire_initial_data: start time is later than the early threshold T1");
    std::vector<double> u(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) u[i] = eval_early(p, wave1, t0, grid.x(i)).w_minus;
    return u;
}

double transition_time(const Trajectory& traj, double eta) {
    double last = traj.t_begin();
    bool any = false;
    for (const auto& snap : traj.snapshots) {
        bool inside = true;
        for (std::size_t i = 0; i < snap.u.size(); ++i) {
            if (snap.u[i] >= eta && snap.u[i] <= 1.0 - eta && traj.grid.x(i) < 1.0) {
                inside = false;
                break;
            }
        }
        if (!inside) break;
        last = snap.t;
        any = true;
    }
    if (!any) throw ExtractionError("transition_time: the transition zone already meets x < 1 at the first snapshot");
    return last;
}

nlohmann::json EntireReport::to_json() const {
    nlohmann::json p = nlohmann::json::array();
    for (const auto& q : pairs)
        p.push_back({{"n_small", q.n_small},
                     {"n_large", q.n_large},
                     {"min_difference", q.min_difference},
                     {"at_t", q.at_t},
                     {"at_x", q.at_x}});
    return {{"n_list", n_list},
            {"pairs", p},
            {"min_dt_all_nodes", min_dt_all_nodes},
            {"delta", delta},
            {"t_eta", t_eta},
            {"eta", eta},
            {"early_T1", early_T1},
            {"initial_mismatch", initial_mismatch}};
}

EntireResult construct_entire(std::shared_ptr<const SpatialReaction> r, const WaveProfile& wave1,
                              const std::vector<int>& n_list, const SimGrid& grid, double dt,
                              const EntireOptions& opt) {
    if (n_list.size() < 2) throw ConfigError("construct_entire: n_list needs at least two entries");
    for (std::size_t k = 1; k < n_list.size(); ++k)
        if (n_list[k] <= n_list[k - 1]) throw ConfigError("construct_entire: n_list must be increasing");
    const EarlyParams ap = derive_early(wave1, r->f1());
    for (int n : n_list)
        if (-static_cast<double>(n) > ap.T1)
            throw PreconditionError("construct_entire: -n must precede the early threshold T1");

    EntireResult res;
    res.runs.resize(n_list.size());
    std::vector<double> mismatch(n_list.size(), 0.0);
    parallel_for(n_list.size(), opt.threads, [&](std::size_t k) {
        const double t0 = -static_cast<double>(n_list[k]);
        std::vector<double> u0(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) u0[i] = eval_early(ap, wave1, t0, grid.x(i)).w_minus;
        res.runs[k] = simulate(r, grid, u0, t0, opt.t_end, dt, Frame::lab(), opt.snapshot_every);
        double m = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) m = std::max(m, std::abs(res.runs[k].snapshots.front().u[i] - u0[i]));
        mismatch[k] = m;
    });

    EntireReport& rep = res.report;
    rep.n_list = n_list;
    rep.eta = opt.eta;
    rep.early_T1 = ap.T1;
    rep.initial_mismatch = *std::max_element(mismatch.begin(), mismatch.end());

    for (std::size_t k = 1; k < n_list.size(); ++k) {
        const Trajectory& small = res.runs[k - 1];
        const Trajectory& large = res.runs[k];
        PairOrdering po{n_list[k - 1], n_list[k], HUGE_VAL, 0, 0};
        for (const auto& snap : small.snapshots) {
            const long j = large.find(snap.t);
            if (j < 0) continue;
            const auto& ul = large.snapshots[static_cast<std::size_t>(j)].u;
            for (std::size_t i = 0; i < grid.n; ++i) {
                const double d = ul[i] - snap.u[i];
                if (d < po.min_difference) {
                    po.min_difference = d;
                    po.at_t = snap.t;
                    po.at_x = grid.x(i);
                }
            }
        }
        rep.pairs.push_back(po);
    }

    const Trajectory& big = res.runs.back();
    const auto& snaps = big.snapshots;
    double min_dt = HUGE_VAL;
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        if (snaps[k - 1].t < big.t_begin() + opt.transient - 1e-9) continue;
        const double tau = snaps[k].t - snaps[k - 1].t;
        for (std::size_t i = 0; i < grid.n; ++i) min_dt = std::min(min_dt, (snaps[k].u[i] - snaps[k - 1].u[i]) / tau);
    }
    rep.min_dt_all_nodes = min_dt;

    rep.t_eta = transition_time(big, opt.eta);
    double delta = HUGE_VAL;
    for (std::size_t k = 1; k + 1 < snaps.size() && snaps[k].t <= rep.t_eta + 1e-9; ++k) {
        const double tau = snaps[k + 1].t - snaps[k - 1].t;
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double v = snaps[k].u[i];
            if (v < opt.eta || v > 1.0 - opt.eta) continue;
            delta = std::min(delta, (snaps[k + 1].u[i] - snaps[k - 1].u[i]) / tau);
        }
    }
    if (!std::isfinite(delta)) throw ExtractionError("construct_entire: no transition-zone samples before T_eta");
    rep.delta = delta;
    return res;
}

OrbitDistance orbit_distance(const Trajectory& a, const Trajectory& b, double t_from, double t_to, double max_shift) {
    if (a.grid.n != b.grid.n) throw ConfigError("orbit_distance: grids differ");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k)
        if (a.snapshots[k].t >= t_from - 1e-9 && a.snapshots[k].t <= t_to + 1e-9) idx.push_back(k);
    if (idx.empty()) throw ConfigError("orbit_distance: empty time window");

    auto dist = [&](double shift) {
        double m = 0.0;
        for (std::size_t k : idx) {
            const double t = a.snapshots[k].t;
            const double tb = t + shift;
            if (tb < b.t_begin() - 1e-9 || tb > b.t_end() + 1e-9) continue;
            const std::vector<double> ub = b.at_time(std::clamp(tb, b.t_begin(), b.t_end()));
            const auto& ua = a.snapshots[k].u;
            for (std::size_t i = 0; i < ua.size(); ++i) m = std::max(m, std::abs(ua[i] - ub[i]));
        }
        return m;
    };

    OrbitDistance od;
    od.raw = dist(0.0);
    // Keep the shifted window inside b's range for every candidate.
    const double lo = std::max(-max_shift, b.t_begin() - a.snapshots[idx.front()].t);
    const double hi = std::min(max_shift, b.t_end() - a.snapshots[idx.back()].t);
    double best = 0.0, best_val = od.raw;
    if (hi > lo) {
        for (double sft = lo; sft <= hi + 1e-12; sft += 0.05) {
            const double v = dist(sft);
            if (v < best_val) {
                best_val = v;
                best = sft;
            }
        }
        const double a0 = std::max(lo, best - 0.05), b0 = std::min(hi, best + 0.05);
        const double refined = golden_section_min(dist, a0, b0, 1e-6);
        const double rv = dist(refined);
        if (rv < best_val) {
            best_val = rv;
            best = refined;
        }
    }
    od.aligned = best_val;
    od.shift = best;
    return od;
}

nlohmann::json UniquenessResult::to_json() const {
    nlohmann::json p = nlohmann::json::array();
    for (const auto& q : perturbations)
        p.push_back({{"amplitude", q.amplitude},
                     {"center", q.center},
                     {"sign", q.sign},
                     {"raw", q.distance.raw},
                     {"aligned", q.distance.aligned},
                     {"shift", q.distance.shift}});
    return {{"base_n", base_n}, {"perturbations", p}, {"max_raw", max_raw}, {"max_aligned", max_aligned}};
}

UniquenessResult uniqueness_probe(std::shared_ptr<const SpatialReaction> r, const WaveProfile& wave1, int base_n,
                                  const std::vector<double>& amplitudes, const SimGrid& grid, double dt,
                                  const UniquenessOptions& opt, const Trajectory* base) {
    const double eta = max_damping_level(*r);
    for (double a : amplitudes)
        if (std::abs(a) > 0.5 * eta)
            throw PreconditionError("uniqueness_probe: perturbation amplitude exceeds eta/2");

    const double t0 = -static_cast<double>(base_n);
    const std::vector<double> u0 = entire_initial_data(*r, wave1, t0, grid);
    Trajectory own;
    if (!base) {
        own = simulate(r, grid, u0, t0, opt.t_end, dt, Frame::lab(), opt.snapshot_every);
        base = &own;
    }

    // Centre of the bump: the 0.5-crossing of the initial data plus a seeded offset.
    double crossing = grid.x_min;
    for (std::size_t i = 1; i < grid.n; ++i) {
        if (u0[i - 1] < 0.5 && u0[i] >= 0.5) {
            crossing = grid.x(i - 1) + grid.h * (0.5 - u0[i - 1]) / (u0[i] - u0[i - 1]);
            break;
        }
    }

    UniquenessResult res;
    res.base_n = base_n;
    res.perturbations.resize(amplitudes.size());
    std::vector<std::vector<double>> starts(amplitudes.size());
    for (std::size_t k = 0; k < amplitudes.size(); ++k) {
        std::mt19937_64 rng(opt.seed + k);
        std::uniform_real_distribution<double> offset(-3.0, 3.0);
        std::bernoulli_distribution coin(0.5);
        auto& out = res.perturbations[k];
        out.amplitude = amplitudes[k];
        out.center = crossing + offset(rng);
        out.sign = coin(rng) ? 1.0 : -1.0;
        std::vector<double> v(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double g = (grid.x(i) - out.center) / 2.0;
            v[i] = u0[i] + out.sign * out.amplitude * 4.0 * u0[i] * (1.0 - u0[i]) * std::exp(-g * g);
            if (!(v[i] >= 0.0 && v[i] <= 1.0)) throw ConfigError("uniqueness_probe: perturbed data leaves [0,1]");
        }
        starts[k] = std::move(v);
    }

    parallel_for(amplitudes.size(), opt.threads, [&](std::size_t k) {
        const Trajectory pert = simulate(r, grid, starts[k], t0, opt.t_end, dt, Frame::lab(), opt.snapshot_every);
        res.perturbations[k].distance = orbit_distance(*base, pert, opt.late_from, opt.t_end);
    });
    for (const auto& p : res.perturbations) {
        res.max_raw = std::max(res.max_raw, p.distance.raw);
        res.max_aligned = std::max(res.max_aligned, p.distance.aligned);
    }
    return res;
}

namespace {

bool damped(const SpatialReaction& r, double s) {
    return r.f1().derivative(s) < 0.0 && r.f2().derivative(s) < 0.0;
}

}  // namespace

double max_damping_level(const SpatialReaction& r) {
    // Largest s0 with f_i' < 0 on [0, s0] and s1 with f_i' < 0 on [1 - s1, 1].
    auto extent = [&](bool from_zero) {
        auto at = [&](double d) { return from_zero ? d : 1.0 - d; };
        double lo = 0.0, hi = 0.5;
        const int samples = 5000;
        for (int k = 1; k <= samples; ++k) {
            const double d = 0.5 * k / samples;
            if (!damped(r, at(d))) {
                hi = d;
                break;
            }
            lo = d;
        }
        if (lo == 0.5) return 0.5;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (damped(r, at(mid)) ? lo : hi) = mid;
        }
        return lo;
    };
    return 0.5 * std::min(extent(true), extent(false));
}

double damping_rate(const SpatialReaction& r, double eta) {
    double beta = HUGE_VAL;
    const int samples = 2000;
    for (int k = 0; k <= samples; ++k) {
        const double d = 2.0 * eta * k / samples;
        for (double s : {d, 1.0 - d}) {
            beta = std::min(beta, -r.f1().derivative(s));
            beta = std::min(beta, -r.f2().derivative(s));
        }
    }
    return beta;
}

namespace {

std::string snapshot_name(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_%.6f.csv", t);
    return buf;
}

std::string reaction_hash(const SpatialReaction& r) { return sha256_hex(r.to_json().dump()); }

}  // namespace

void write_trajectory(const Trajectory& traj, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json idx = nlohmann::json::array();
    std::vector<double> x(traj.grid.n);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = traj.grid.x(i);
    for (const auto& s : traj.snapshots) {
        const std::string name = snapshot_name(s.t);
        write_csv(dir / name, {"x", "u"}, {x, s.u});
        idx.push_back({{"t", s.t}, {"file", name}});
    }
    nlohmann::json m = {{"grid", traj.grid.to_json()},
                        {"dt", traj.dt},
                        {"frame", traj.frame.to_json()},
                        {"reaction_hash", traj.reaction ? reaction_hash(*traj.reaction) : ""},
                        {"steps", traj.steps},
                        {"clamp_events", traj.clamp_events},
                        {"boundary",
                         {{"left_asymptote", traj.boundary.left_asymptote},
                          {"right_asymptote", traj.boundary.right_asymptote},
                          {"max_left", traj.boundary.max_left},
                          {"max_right", traj.boundary.max_right},
                          {"threshold", traj.boundary.threshold},
                          {"flagged", traj.boundary.flagged()}}},
                        {"snapshots", idx}};
    write_json(dir / "manifest.json", m);
}

Trajectory read_trajectory(const std::filesystem::path& dir, std::shared_ptr<const SpatialReaction> r) {
    const nlohmann::json m = read_json(dir / "manifest.json");
    if (r && m.at("reaction_hash").get<std::string>() != reaction_hash(*r))
        throw DependencyError("trajectory at " + dir.string() + " was produced with a different reaction");
    Trajectory traj;
    const auto& g = m.at("grid");
    traj.grid = SimGrid::make(g.at("x_min"), g.at("x_max"), g.at("h"));
    const auto& fr = m.at("frame");
    traj.frame = fr.at("kind") == "lab" ? Frame::lab() : Frame::moving(fr.at("speed"));
    traj.dt = m.at("dt");
    traj.steps = m.at("steps");
    traj.clamp_events = m.at("clamp_events");
    const auto& b = m.at("boundary");
    traj.boundary.left_asymptote = b.at("left_asymptote");
    traj.boundary.right_asymptote = b.at("right_asymptote");
    traj.boundary.max_left = b.at("max_left");
    traj.boundary.max_right = b.at("max_right");
    traj.boundary.threshold = b.at("threshold");
    traj.reaction = std::move(r);
    for (const auto& e : m.at("snapshots")) {
        const auto path = dir / e.at("file").get<std::string>();
        std::ifstream in(path);
        if (!in) throw DependencyError("missing snapshot file " + path.string());
        std::string line;
        std::getline(in, line);
        Snapshot s;
        s.t = e.at("t");
        s.u.reserve(traj.grid.n);
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            s.u.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
        }
        if (s.u.size() != traj.grid.n) throw DependencyError("snapshot " + path.string() + " has the wrong length");
        traj.snapshots.push_back(std::move(s));
    }
    if (traj.snapshots.empty()) throw DependencyError("trajectory at " + dir.string() + " has no snapshots");
    return traj;
}

}  // namespace frontlab
