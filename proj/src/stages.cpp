#include "frontlab/stages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "frontlab/artifacts.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/frontmetrics.hpp"

namespace frontlab {

namespace fs = std::filesystem;
using nlohmann::json;

json Check::to_json() const {
    json j = {{"name", name}, {"pass", pass}, {"relation", relation}};
    j["value"] = std::isfinite(value) ? json(value) : json(nullptr);
    j["threshold"] = threshold;
    if (!note.empty()) j["note"] = note;
    return j;
}

Check check_le(std::string name, double value, double threshold, std::string note) {
    return {std::move(name), value <= threshold, value, threshold, "<=", std::move(note)};
}

Check check_ge(std::string name, double value, double threshold, std::string note) {
    return {std::move(name), value >= threshold, value, threshold, ">=", std::move(note)};
}

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"validate",  "wave",     "simulate", "entire",
                                                   "envelopes", "lyapunov", "metrics",  "report"};
    return names;
}

namespace {

json stage_json(const std::string& name, const std::vector<Check>& checks) {
    json arr = json::array();
    bool pass = true;
    for (const auto& c : checks) {
        arr.push_back(c.to_json());
        pass = pass && c.pass;
    }
    return {{"stage", name}, {"checks", arr}, {"pass", pass}};
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::shared_ptr<const SpatialReaction> make_reaction(const RunConfig& c) {
    return std::make_shared<const SpatialReaction>(BistableNonlinearity::from_json(c.reaction.f1, c.base_dir),
                                                   BistableNonlinearity::from_json(c.reaction.f2, c.base_dir),
                                                   c.reaction.x0, blend_from_string(c.reaction.blend));
}

// Node probes every `every` in time, preceded by a band of `dense` spacing over the first
// `dense_span` time units where envelopes change fastest.
std::vector<ProbePoint> probes(double t_from, double t_to, double every, const SimGrid& grid, double dense = 0.0,
                               double dense_span = 0.0) {
    std::vector<double> times;
    if (dense > 0.0)
        for (int k = 0; t_from + k * dense < std::min(t_to, t_from + dense_span); ++k) times.push_back(t_from + k * dense);
    const double start = times.empty() ? t_from : std::min(t_to, t_from + dense_span);
    for (int k = 0; start + k * every <= t_to + 1e-9; ++k) times.push_back(start + k * every);
    std::vector<ProbePoint> p;
    for (double t : times)
        for (std::size_t i = 0; i < grid.n; ++i) p.push_back({t, grid.x(i)});
    return p;
}

}  // namespace

Pipeline::Pipeline(RunConfig cfg, fs::path out, unsigned threads)
    : cfg_(std::move(cfg)), out_(std::move(out)), threads_(std::max(1u, threads)) {
    reaction_ = make_reaction(cfg_);
}

SimGrid Pipeline::grid() const { return SimGrid::make(cfg_.grid.x_min, cfg_.grid.x_max, cfg_.grid.h); }

void Pipeline::require(const fs::path& p, const std::string& stage, const std::string& needed) const {
    if (!fs::exists(p))
        throw DependencyError("stage '" + stage + "' requires the output of stage '" + needed + "' (missing " +
                              p.string() + "); run '" + needed + "' first");
}

const WaveProfile& Pipeline::wave1() {
    if (!wave1_) {
        require(out_ / "wave" / "phi1.csv", "current", "wave");
        wave1_ = read_profile(reaction_->f1(), out_ / "wave" / "phi1.csv", out_ / "wave" / "phi1.json");
    }
    return *wave1_;
}

const WaveProfile& Pipeline::wave2() {
    if (!wave2_) {
        require(out_ / "wave" / "phi2.csv", "current", "wave");
        wave2_ = read_profile(reaction_->f2(), out_ / "wave" / "phi2.csv", out_ / "wave" / "phi2.json");
    }
    return *wave2_;
}

const Trajectory& Pipeline::main_trajectory() {
    if (!main_) {
        require(out_ / "simulate" / "trajectory" / "manifest.json", "current", "simulate");
        main_ = read_trajectory(out_ / "simulate" / "trajectory", reaction_);
    }
    return *main_;
}

const Trajectory& Pipeline::entire_run(int n) {
    for (const auto& [k, t] : entire_runs_)
        if (k == n) return t;
    const fs::path dir = out_ / "entire" / ("run_n" + std::to_string(n));
    require(dir / "manifest.json", "current", "entire");
    entire_runs_.emplace_back(n, read_trajectory(dir, reaction_));
    return entire_runs_.back().second;
}

double Pipeline::entire_delta() {
    if (!delta_) {
        require(out_ / "entire" / "summary.json", "current", "entire");
        delta_ = read_json(out_ / "entire" / "summary.json").at("report").at("delta").get<double>();
    }
    return *delta_;
}

const json& Pipeline::stage_result(const std::string& name) const {
    for (const auto& [k, v] : results_)
        if (k == name) return v;
    throw ConfigError("stage '" + name + "' has not been run in this pipeline");
}

json Pipeline::run_stage(const std::string& name) {
    json r;
    try {
        if (name == "validate") r = validate();
        else if (name == "wave") r = wave();
        else if (name == "simulate") r = simulate_stage();
        else if (name == "entire") r = entire();
        else if (name == "envelopes") r = envelopes();
        else if (name == "lyapunov") r = lyapunov();
        else if (name == "metrics") r = metrics();
        else if (name == "report") r = report();
        else throw ConfigError("unknown stage '" + name + "'");
    } catch (const DependencyError& e) {
        std::string msg = e.what();
        const std::string tag = "stage 'current'";
        if (auto pos = msg.find(tag); pos != std::string::npos) msg.replace(pos, tag.size(), "stage '" + name + "'");
        throw DependencyError(msg);
    }
    if (name != "report") write_json(out_ / name / "summary.json", r);
    results_.emplace_back(name, r);
    return r;
}

json Pipeline::validate() {
    std::vector<Check> checks;
    json reports;
    for (int i = 1; i <= 2; ++i) {
        const auto& f = i == 1 ? reaction_->f1() : reaction_->f2();
        const ValidationReport rep = validate_bistable(f);
        reports["f" + std::to_string(i)] = rep.to_json();
        for (const auto& c : rep.conditions) {
            if (!c.evaluated) continue;
            checks.push_back({"f" + std::to_string(i) + "_" + c.name, c.pass, c.witness_value, 0.0, "condition",
                              c.detail});
        }
    }
    checks.push_back(check_le("theta1_le_theta2", reaction_->f1().theta(), reaction_->f2().theta()));
    json j = stage_json("validate", checks);
    j["reports"] = reports;
    j["reaction"] = reaction_->to_json();
    return j;
}

json Pipeline::wave() {
    std::vector<Check> checks;
    json waves;
    for (int i = 1; i <= 2; ++i) {
        const auto& f = i == 1 ? reaction_->f1() : reaction_->f2();
        const std::string tag = "phi" + std::to_string(i);
        WaveProfile p = solve_wave(f, cfg_.wave.z_min, cfg_.wave.z_max, cfg_.wave.h, cfg_.wave.tol);
        write_profile(p, out_ / "wave" / (tag + ".csv"), out_ / "wave" / (tag + ".json"));
        const double lam_res = std::abs(p.lambda * p.lambda - p.speed * p.lambda + f.derivative_at_0());
        const double mu_res = std::abs(p.mu * p.mu + p.speed * p.mu + f.derivative_at_1());
        checks.push_back(check_le(tag + "_newton_residual", p.newton_residual, cfg_.wave.tol));
        checks.push_back(check_le(tag + "_lambda_identity", lam_res, 1e-12));
        checks.push_back(check_le(tag + "_mu_identity", mu_res, 1e-12));
        json w = {{"speed", p.speed},
                  {"lambda", p.lambda},
                  {"mu", p.mu},
                  {"residual_norm", p.residual_norm},
                  {"newton_residual", p.newton_residual},
                  {"c_phi", p.c_phi},
                  {"used_fallback", p.used_fallback}};
        if (f.kind() == NonlinearityKind::cubic) {
            const double k = std::sqrt(f.scale() / 2.0);
            const double c_exact = (1.0 - 2.0 * f.theta()) * k;
            const double z0 = std::log((1.0 - f.theta()) / f.theta()) / k;
            double err = 0.0;
            for (std::size_t n = 0; n < p.size(); ++n)
                err = std::max(err, std::abs(p.phi[n] - 1.0 / (1.0 + std::exp(-k * (p.z(n) - z0)))));
            checks.push_back(check_le(tag + "_speed_vs_closed_form", std::abs(p.speed - c_exact), 1e-6));
            checks.push_back(check_le(tag + "_profile_vs_logistic", err, 1e-4));
            checks.push_back(check_le(tag + "_lambda_closed_form", std::abs(p.lambda - k), 1e-6));
            checks.push_back(check_le(tag + "_mu_closed_form", std::abs(p.mu - k), 1e-6));
            w["closed_form_speed"] = c_exact;
        }
        waves[tag] = w;
        (i == 1 ? wave1_ : wave2_) = std::move(p);
    }
    json j = stage_json("wave", checks);
    j["waves"] = waves;
    return j;
}

json Pipeline::simulate_stage() {
    const WaveProfile& w1 = wave1();
    const SimGrid g = grid();
    const auto& tc = cfg_.time;
    const std::vector<double> u0 = entire_initial_data(*reaction_, w1, tc.t0, g);
    main_ = simulate(reaction_, g, u0, tc.t0, tc.t_end, tc.dt, Frame::lab(), tc.snapshot_every);
    write_trajectory(*main_, out_ / "simulate" / "trajectory");
    const auto& b = main_->boundary;
    std::vector<Check> checks = {check_le("clamp_events", static_cast<double>(main_->clamp_events), 0.0)};
    json j = stage_json("simulate", checks);
    j["steps"] = main_->steps;
    j["snapshots"] = main_->snapshots.size();
    j["boundary"] = {{"max_left", b.max_left},
                     {"max_right", b.max_right},
                     {"threshold", b.threshold},
                     {"flagged", b.flagged()}};
    if (b.flagged()) j["warnings"] = json::array({"boundary contamination above threshold"});
    return j;
}

json Pipeline::entire() {
    const WaveProfile& w1 = wave1();
    const Trajectory& base = main_trajectory();
    const SimGrid g = grid();
    const double dt = cfg_.time.dt;

    EntireOptions eo;
    eo.t_end = cfg_.entire.t_end;
    eo.snapshot_every = cfg_.entire.snapshot_every;
    eo.eta = cfg_.entire.eta;
    eo.threads = threads_;
    EntireResult res = construct_entire(reaction_, w1, cfg_.entire.n_list, g, dt, eo);
    std::vector<Check> checks;
    for (const auto& p : res.report.pairs)
        checks.push_back(check_ge("ordering_u" + std::to_string(p.n_large) + "_minus_u" + std::to_string(p.n_small),
                                  p.min_difference, -1e-4));
    checks.push_back(check_ge("delta_positive", res.report.delta, 1e-12, "min d/dt u on D_eta(t), t <= T_eta"));
    checks.push_back(check_le("initial_data_mismatch", res.report.initial_mismatch, 0.0));
    entire_runs_.clear();
    for (std::size_t k = 0; k < res.runs.size(); ++k) {
        const int n = cfg_.entire.n_list[k];
        write_trajectory(res.runs[k], out_ / "entire" / ("run_n" + std::to_string(n)));
        entire_runs_.emplace_back(n, std::move(res.runs[k]));
    }
    delta_ = res.report.delta;

    const int base_n = static_cast<int>(std::lround(-base.t_begin()));
    UniquenessOptions uo;
    uo.t_end = cfg_.uniqueness.t_end;
    uo.late_from = cfg_.uniqueness.late_from;
    uo.snapshot_every = cfg_.time.snapshot_every;
    uo.seed = cfg_.seed;
    uo.threads = threads_;
    const UniquenessResult ur = uniqueness_probe(reaction_, w1, base_n, cfg_.uniqueness.amplitudes, g, dt, uo, &base);
    for (std::size_t k = 0; k < ur.perturbations.size(); ++k) {
        const auto& p = ur.perturbations[k];
        checks.push_back(check_le("perturbation_" + std::to_string(k) + "_aligned_distance", p.distance.aligned, 1e-3));
    }

    const int alt = cfg_.uniqueness.alt_n;
    const std::vector<double> ua = entire_initial_data(*reaction_, w1, -static_cast<double>(alt), g);
    const Trajectory alt_run =
        simulate(reaction_, g, ua, -static_cast<double>(alt), uo.t_end, dt, Frame::lab(), uo.snapshot_every);
    const OrbitDistance od = orbit_distance(base, alt_run, uo.late_from, uo.t_end);
    checks.push_back(check_le("base_n" + std::to_string(base_n) + "_vs_n" + std::to_string(alt) + "_aligned_distance",
                              od.aligned, 1e-3));

    json j = stage_json("entire", checks);
    j["report"] = res.report.to_json();
    j["uniqueness"] = ur.to_json();
    j["alt_orbit"] = {{"base_n", base_n}, {"alt_n", alt}, {"raw", od.raw}, {"aligned", od.aligned}, {"shift", od.shift}};
    return j;
}

json Pipeline::envelopes() {
    const WaveProfile& w1 = wave1();
    const WaveProfile& w2 = wave2();
    const Trajectory& traj = main_trajectory();
    const double delta = entire_delta();
    const auto& ec = cfg_.envelopes;
    const SimGrid g = grid();

    const LowerEnvelopeParams lower = derive_lower(*reaction_, w1, w2, traj);
    const Upper1EnvelopeParams upper1 = derive_upper1(*reaction_, w1, traj, lower);
    const Upper2EnvelopeParams upper2 = derive_upper2(*reaction_, w1, w2, traj, lower, upper1);
    const EarlyParams app = derive_early(w1, reaction_->f1());
    write_json(out_ / "envelopes" / "ledger.json",
               {{"lower", lower.to_json()},
                {"upper1", upper1.to_json()},
                {"upper2", upper2.to_json()},
                {"early", app.to_json()}});

    const EnvelopeEvaluator lo = lower_evaluator(lower, w2);
    const EnvelopeEvaluator u1 = upper1_evaluator(upper1, w1);
    const EnvelopeEvaluator u2 = upper2_evaluator(upper2, w2);
    const EnvelopeEvaluator am = early_lower_evaluator(app, w1, traj.t_begin());
    const EnvelopeEvaluator ap = early_upper_evaluator(app, w1, traj.t_begin());

    std::vector<Check> checks;
    json details;
    auto order = [&](const EnvelopeEvaluator& e, Side side) {
        const ViolationReport v = check_ordering(traj, e, side, ec.ordering_tol);
        checks.push_back(check_le("ordering_" + e.name, v.worst, ec.ordering_tol));
        details["ordering_" + e.name] = v.to_json();
    };
    order(lo, Side::lower);
    order(u1, Side::upper);
    order(u2, Side::upper);
    order(am, Side::lower);
    order(ap, Side::upper);

    const double dx = g.h / 4.0, dtp = cfg_.time.dt / 4.0;
    auto resid = [&](const EnvelopeEvaluator& e, Side side, double t_from, double t_to) {
        const auto pts = probes(t_from, t_to, ec.probe_every, g, 0.02, 2.0);
        const ResidualReport r = residual_sign_check(e, *reaction_, pts, side, dx, dtp, ec.residual_tol);
        checks.push_back({"residual_sign_" + e.name, r.pass, r.max_wrong_sign, ec.residual_tol, "<=",
                          std::to_string(r.evaluated) + " probes evaluated"});
        details["residual_" + e.name] = r.to_json();
    };
    resid(lo, Side::lower, lower.t_lambda + 0.02, traj.t_end());
    resid(u2, Side::upper, upper2.T + 0.02, traj.t_end());
    resid(am, Side::lower, traj.t_begin() + 0.02, app.T1 - dtp);
    resid(ap, Side::upper, traj.t_begin() + 0.02, app.T1 - dtp);

    // v_2^+ range on a dense time grid and the lower/upper sandwich.
    double vmin = HUGE_VAL, vmax = -HUGE_VAL;
    for (double t = upper2.T; t <= upper2.T + 400.0; t += 0.01) {
        const double v = upper2_v(upper2, t);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    checks.push_back(check_ge("upper2_v_nonnegative", vmin, 0.0));
    checks.push_back(check_le("upper2_v_below_rho_half", vmax, upper2.rho / 2.0));
    double sandwich = -HUGE_VAL;
    for (double t = upper2.T; t <= traj.t_end() + 1e-9; t += ec.probe_every)
        for (std::size_t i = 0; i < g.n; ++i)
            sandwich = std::max(sandwich, lo.eval(t, g.x(i)).value - u2.eval(t, g.x(i)).value);
    checks.push_back(check_le("sandwich_lower_le_upper2", sandwich, 0.0));

    // Sliding sub/supersolutions between the base orbit and the next-largest entire run.
    const double eta = cfg_.entire.eta;
    const double eta_max = max_damping_level(*reaction_);
    const double beta = damping_rate(*reaction_, eta);
    const double sigma = (beta + reaction_->lipschitz_bound()) / (beta * delta);
    const auto& nl = cfg_.entire.n_list;
    const Trajectory& other = entire_run(nl[nl.size() - 2]);
    const double t0 = ec.sliding_t0;
    double gap = 0.0;
    {
        const auto a = traj.at_time(t0), b = other.at_time(t0);
        for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
    }
    const SlidingReport sl = sliding_check(traj, ec.sliding_epsilon, sigma, beta, eta, t0, &other, ec.sliding_tol);
    checks.push_back(check_le("sliding_eta_admissible", eta, eta_max));
    checks.push_back(check_le("sliding_initial_gap", gap, ec.sliding_epsilon));
    checks.push_back(check_ge("sliding_damping_margin", sl.damping_margin, 0.0));
    checks.push_back(check_le("sliding_lower", sl.worst_lower, ec.sliding_tol));
    checks.push_back(check_le("sliding_upper", sl.worst_upper, ec.sliding_tol));
    details["sliding"] = sl.to_json();
    details["sliding"]["initial_gap"] = gap;
    details["sliding"]["eta_max"] = eta_max;
    details["sliding"]["delta"] = delta;

    // Stability of the phi_2 front: doubling t0 at fixed epsilon must not increase delta.
    const double eps_stab = lower.rho / 8.0;
    json stab = json::array();
    double prev = HUGE_VAL;
    for (double ts : {60.0, 120.0}) {
        if (ts > traj.t_end()) continue;
        const long k = traj.find(ts);
        if (k < 0) continue;
        const ShiftFit fit = fit_shift(traj.snapshots[static_cast<std::size_t>(k)].u, traj.grid, ts, traj.frame, w2);
        double d = HUGE_VAL;
        try {
            d = stability_delta(traj, w2, fit.beta, ts, eps_stab);
        } catch (const PreconditionError&) {
            // initial distance already above epsilon; the check below records the failure
        }
        stab.push_back({{"t0", ts}, {"epsilon", eps_stab}, {"beta", fit.beta}, {"delta", d}});
        if (std::isfinite(prev))
            checks.push_back(check_le("stability_delta_nonincreasing_t0_" + short_num(ts), d - prev, 1e-4));
        checks.push_back(check_le("stability_delta_t0_" + short_num(ts), d, eps_stab));
        prev = d;
    }
    details["stability"] = stab;

    json j = stage_json("envelopes", checks);
    j["details"] = details;
    j["summary"] = {{"omega", lower.omega},     {"rho", lower.rho},       {"t_lambda", lower.t_lambda},
                    {"beta_minus", lower.beta_minus}, {"T_plus", upper1.t_lambda}, {"beta1_plus", upper1.beta1_plus},
                    {"T", upper2.T},            {"beta", upper2.beta},    {"eta", upper2.eta},
                    {"M", app.M},               {"T1", app.T1}};
    return j;
}

json Pipeline::lyapunov() {
    const WaveProfile& w2 = wave2();
    const WaveProfile& w1 = wave1();
    const Trajectory& traj = main_trajectory();
    const double c2 = w2.speed;
    const ModulusConstants mc = modulus_constants(*reaction_);
    LyapunovOptions lo;
    lo.eta = std::min(mc.omega, w2.mu * c2);
    lo.x0 = reaction_->x0();
    lo.tol = cfg_.lyapunov.tol;
    lo.threads = threads_;
    const double bound = max_cutoff_slope(c2, lo.eta);
    const double m = cfg_.lyapunov.m.value_or(std::floor(100.0 * bound / 2.0) / 100.0);

    const LyapunovSeries s = lyapunov_series(traj, m, reaction_->f2(), c2, lo);
    write_csv(out_ / "lyapunov" / "series.csv", {"t", "L", "Q", "dLdt", "cross", "identity_residual"},
              {s.times, s.L_values, s.Q_values, s.dL_dt, s.cross_term, s.identity_residual});

    // Second resolution for the grid-stability check of sup |L|.
    const SimGrid gc = SimGrid::make(cfg_.grid.x_min, cfg_.grid.x_max, cfg_.lyapunov.compare_h);
    const auto& tc = cfg_.time;
    const Trajectory second = simulate(reaction_, gc, entire_initial_data(*reaction_, w1, tc.t0, gc), tc.t0, tc.t_end,
                                       tc.dt, Frame::lab(), tc.snapshot_every);
    const LyapunovSeries sc = lyapunov_series(second, m, reaction_->f2(), c2, lo);
    const double rel = std::abs(s.sup_abs_L - sc.sup_abs_L) / std::max(s.sup_abs_L, 1e-300);

    std::vector<Check> checks;
    checks.push_back(check_le("supL_finite", std::isfinite(s.sup_abs_L) ? 0.0 : 1.0, 0.0));
    checks.push_back(check_le("supL_grid_relative_change", rel, 0.01));
    checks.push_back(check_le("dLdt_plus_Q_tail", s.tail_max, cfg_.lyapunov.tol,
                              "for t >= " + format_double(s.check_from)));
    checks.push_back(check_le("min_Q_final_quarter", s.min_Q_final_quarter, 1e-4));
    const SimGrid g = grid();
    json qwave = json::object();
    for (double beta : {-2.0, 0.0, 3.0}) {
        Field f;
        f.z_min = g.x_min;
        f.h = g.h;
        f.w.resize(g.n);
        for (std::size_t i = 0; i < g.n; ++i) f.w[i] = eval_profile(w2, g.x(i) + beta);
        const double q = eval_Q(f, c2, reaction_->f2()).value;
        qwave[format_double(beta)] = q;
        checks.push_back(check_le("Q_of_shifted_wave_beta_" + format_double(beta), q, 1e-6));
    }
    json j = stage_json("lyapunov", checks);
    j["series"] = s.to_json();
    j["compare_series"] = sc.to_json();
    j["m"] = m;
    j["m_bound"] = bound;
    j["Q_shifted_wave"] = qwave;
    return j;
}

json Pipeline::metrics() {
    const WaveProfile& w2 = wave2();
    const Trajectory& traj = main_trajectory();
    const auto stride = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(cfg_.metrics.fit_every / cfg_.time.snapshot_every)));
    const FrontSeries fsr = speed_series(traj, cfg_.metrics.level, &w2, stride, threads_);

    std::vector<double> speed_col(fsr.times.size(), std::nan(""));
    for (std::size_t k = 0; k < fsr.speeds.size(); ++k) speed_col[k + 1] = fsr.speeds[k];
    write_csv(out_ / "metrics" / "front_series.csv", {"t", "position", "speed", "beta", "dist_inf"},
              {fsr.times, fsr.positions, speed_col, fsr.shifts, fsr.distances});

    const double c2 = w2.speed;
    const double t_last = traj.t_end();
    const double quarter = t_last - 0.25 * (t_last - traj.t_begin());
    double bmin = HUGE_VAL, bmax = -HUGE_VAL, beta_final = std::nan(""), dist_final = std::nan("");
    for (std::size_t k = 0; k < fsr.times.size(); ++k) {
        if (!std::isfinite(fsr.shifts[k])) continue;
        beta_final = fsr.shifts[k];
        dist_final = fsr.distances[k];
        if (fsr.times[k] < quarter - 1e-9) continue;
        bmin = std::min(bmin, fsr.shifts[k]);
        bmax = std::max(bmax, fsr.shifts[k]);
    }
    const double beta_spread = std::max(bmax - beta_final, beta_final - bmin);
    const DecayReport dr = decay_check(traj, c2, t_last - cfg_.metrics.decay_window, t_last);

    std::vector<Check> checks;
    checks.push_back(check_le("terminal_speed_relative_error", std::abs(fsr.terminal_speed + c2) / c2, 0.01));
    checks.push_back(check_le("terminal_dist_inf", dist_final, 1e-2));
    checks.push_back(check_le("beta_stability_last_quarter", beta_spread, 1e-2));
    double min_rate = HUGE_VAL;
    for (const auto& f : dr.fits)
        if (!f.skipped) min_rate = std::min(min_rate, f.rate);
    checks.push_back({"decay_rates", dr.pass, min_rate, 0.5 * c2, ">=", "minimum fitted rate over all tails"});
    json j = stage_json("metrics", checks);
    j["series"] = fsr.to_json();
    j["terminal_speed"] = fsr.terminal_speed;
    j["expected_speed"] = -c2;
    j["beta_final"] = beta_final;
    j["dist_final"] = dist_final;
    j["decay"] = dr.to_json();
    return j;
}

json Pipeline::report() {
    json stages = json::object();
    bool pass = true;
    std::ostringstream txt;
    for (const auto& name : stage_names()) {
        if (name == "report") continue;
        const fs::path p = out_ / name / "summary.json";
        if (!fs::exists(p)) continue;
        const json s = read_json(p);
        stages[name] = {{"pass", s.at("pass")}, {"checks", s.at("checks")}};
        pass = pass && s.at("pass").get<bool>();
        txt << "[" << name << "]\n";
        for (const auto& c : s.at("checks")) {
            txt << (c.at("pass").get<bool>() ? "  PASS " : "  FAIL ") << c.at("name").get<std::string>();
            if (!c.at("value").is_null()) txt << "  value=" << short_num(c.at("value").get<double>());
            txt << "  " << c.at("relation").get<std::string>() << " " << short_num(c.at("threshold").get<double>())
                << "\n";
        }
    }
    if (stages.empty()) throw DependencyError("stage 'report' found no stage outputs in " + out_.string());
    json j = {{"stage", "report"}, {"config_hash", config_hash(cfg_)}, {"stages", stages}, {"pass", pass}};
    if (fs::exists(out_ / "wave" / "summary.json")) {
        const json w = read_json(out_ / "wave" / "summary.json").at("waves");
        j["speeds"] = {{"c1", w.at("phi1").at("speed")}, {"c2", w.at("phi2").at("speed")}};
        txt << "speeds: c1=" << short_num(w.at("phi1").at("speed").get<double>())
            << " c2=" << short_num(w.at("phi2").at("speed").get<double>()) << "\n";
    }
    txt << (pass ? "ALL CHECKS PASS\n" : "SOME CHECKS FAIL\n");
    write_json(out_ / "report" / "report.json", j);
    write_text(out_ / "report" / "report.txt", txt.str());
    return j;
}

void Pipeline::write_manifest() const {
    json arts = json::object();
    std::vector<fs::path> files;
    if (fs::exists(out_))
        for (const auto& e : fs::recursive_directory_iterator(out_))
            if (e.is_regular_file() && e.path().filename() != "manifest.json" &&
                e.path().parent_path() != out_)
                files.push_back(e.path());
    // Trajectory manifests are artifacts too; only the root manifest is excluded.
    if (fs::exists(out_))
        for (const auto& e : fs::recursive_directory_iterator(out_))
            if (e.is_regular_file() && e.path().filename() == "manifest.json" && e.path().parent_path() != out_)
                files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) arts[fs::relative(f, out_).generic_string()] = sha256_file(f);
    write_json(out_ / "config.json", cfg_.to_json());
    write_json(out_ / "manifest.json",
               {{"config_hash", config_hash(cfg_)}, {"config_sha256_file", sha256_file(out_ / "config.json")},
                {"artifacts", arts}});
}

int run_command(const std::string& command, const RunConfig& cfg, const fs::path& out, unsigned threads,
                std::ostream& log) {
    std::vector<std::string> stages;
    if (command == "all") {
        stages = stage_names();
    } else if (std::find(stage_names().begin(), stage_names().end(), command) != stage_names().end()) {
        stages = {command};
    } else {
        log << "error: unknown command '" << command << "'\n";
        return 2;
    }
    int code = 0;
    try {
        Pipeline p(cfg, out, threads);
        for (const auto& s : stages) {
            const json r = p.run_stage(s);
            const bool pass = r.at("pass").get<bool>();
            log << s << ": " << (pass ? "pass" : "FAIL") << "\n";
            for (const auto& c : r.value("checks", json::array()))
                if (!c.at("pass").get<bool>()) log << "  failed check " << c.at("name").get<std::string>() << "\n";
            if (r.contains("warnings"))
                for (const auto& w : r.at("warnings")) log << "  warning: " << w.get<std::string>() << "\n";
            if (!pass) code = 1;
        }
        p.write_manifest();
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        log << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        log << "error: malformed artifact or config: " << e.what() << "\n";
        return 2;
    }
    return code;
}

}  // namespace frontlab
