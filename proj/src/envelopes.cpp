#include "frontlab/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frontlab/errors.hpp"

namespace frontlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lab_x(const Trajectory& traj, std::size_t i, double t) {
    return traj.grid.x(i) - traj.frame.node_speed() * t;
}

// Smallest wave-grid multiple A with phi <= level on (-inf,-A] and phi >= 1-level on [A,inf).
double plateau_half_width(const WaveProfile& p, double level) {
    const double a = std::max(profile_inverse(p, 1.0 - level), -profile_inverse(p, level));
    return std::ceil(a / p.h - 1e-9) * p.h;
}

double min_slope(const WaveProfile& p, double a) {
    double m = kInf;
    const int n = static_cast<int>(std::ceil(2.0 * a / (0.25 * p.h)));
    for (int k = 0; k <= n; ++k) {
        const double z = -a + 2.0 * a * k / n;
        m = std::min(m, eval_profile_derivative(p, z, 1));
    }
    return m;
}

// Smallest beta >= 0 with ok(beta); ok must be monotone (false ... true).
double smallest_shift(const std::function<bool(double)>& ok, const char* what) {
    if (ok(0.0)) return 0.0;
    double lo = 0.0, hi = 1e-3;
    while (!ok(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e4) throw DerivationError(std::string(what) + ": no admissible shift found");
    }
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

std::string corner_name(int i, bool at0) {
    return std::string("f") + std::to_string(i) + (at0 ? " at 0" : " at 1");
}

}  // namespace

double derivative_modulus(const BistableNonlinearity& f, double rho, bool at0) {
    const int n = 2000;
    const double ref = at0 ? f.derivative_at_0() : f.derivative_at_1();
    double sup = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double d = rho * k / n;
        sup = std::max(sup, std::abs(f.derivative(at0 ? d : 1.0 - d) - ref));
    }
    return sup;
}

ModulusConstants modulus_constants(const SpatialReaction& r) {
    ModulusConstants mc;
    mc.omega = 1.0;
    mc.omega_binding = "cap 1";
    const BistableNonlinearity* fs[2] = {&r.f1(), &r.f2()};
    for (int i = 0; i < 2; ++i) {
        for (bool at0 : {true, false}) {
            const double v = std::abs(at0 ? fs[i]->derivative_at_0() : fs[i]->derivative_at_1()) / 4.0;
            if (v < mc.omega) {
                mc.omega = v;
                mc.omega_binding = "|" + corner_name(i + 1, at0) + " derivative|/4";
            }
        }
    }
    mc.rho = 0.5;
    mc.rho_binding = "cap 1/2";
    for (int i = 0; i < 2; ++i) {
        for (bool at0 : {true, false}) {
            if (derivative_modulus(*fs[i], mc.rho, at0) <= mc.omega) continue;
            double lo = 0.0, hi = mc.rho;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (derivative_modulus(*fs[i], mid, at0) <= mc.omega ? lo : hi) = mid;
            }
            mc.rho = lo;
            mc.rho_binding = "derivative modulus of " + corner_name(i + 1, at0);
        }
    }
    return mc;
}

nlohmann::json LowerEnvelopeParams::to_json() const {
    return {{"omega", omega},           {"rho", rho},
            {"A_minus", A_minus},       {"delta2_minus", delta2_minus},
            {"mu2_minus", mu2_minus},   {"f2_sup_derivative", f2_sup_derivative},
            {"V0", V0},                 {"t_lambda", t_lambda},
            {"beta_shift", beta_shift}, {"beta_minus", beta_minus},
            {"C_minus", C_minus},       {"zeta_minus", zeta_minus},
            {"zeta_plus", zeta_plus},   {"closeness", closeness},
            {"c2", c2},                 {"binding", binding}};
}

nlohmann::json Upper1EnvelopeParams::to_json() const {
    return {{"omega", omega},           {"rho", rho},
            {"A1", A1},                 {"delta1", delta1},
            {"mu1_plus", mu1_plus},     {"f1_sup_derivative", f1_sup_derivative},
            {"V0", V0},                 {"T_plus", t_lambda},
            {"beta_shift", beta_shift}, {"beta1_plus", beta1_plus},
            {"C1_plus", C1_plus},       {"zeta_minus", zeta_minus},
            {"zeta_plus", zeta_plus},   {"closeness", closeness},
            {"c1", c1},                 {"binding", binding}};
}

nlohmann::json Upper2EnvelopeParams::to_json() const {
    return {{"T", T},
            {"gamma", gamma},
            {"C_f", C_f},
            {"C_phi2", C_phi2},
            {"lambda", lambda},
            {"delta2_plus", delta2_plus},
            {"beta", beta},
            {"eta", eta},
            {"omega", omega},
            {"omega_reduced", omega_reduced},
            {"rho", rho},
            {"A_minus", A_minus},
            {"K", K},
            {"K_prime", K_prime},
            {"f2_sup_derivative", f2_sup_derivative},
            {"zeta_tilde_minus", zeta_tilde_minus},
            {"zeta_tilde_plus", zeta_tilde_plus},
            {"c2", c2},
            {"x0", x0},
            {"binding", binding}};
}

nlohmann::json EarlyParams::to_json() const {
    return {{"M", M},
            {"T", T},
            {"T1", T1},
            {"L", L},
            {"L_sampled", L_sampled},
            {"L1", L1},
            {"L2", L2},
            {"C_tilde", C_tilde},
            {"lambda_ge_mu", lambda_ge_mu},
            {"lambda", lambda},
            {"mu", mu},
            {"c1", c1},
            {"theta1", theta1},
            {"envelope", envelope.to_json()},
            {"binding", binding}};
}

// ---------------------------------------------------------------- lower (phi_2 subsolution)

double lower_v(const LowerEnvelopeParams& p, double t) { return p.mu2_minus * std::exp(-p.omega * t); }

double lower_V(const LowerEnvelopeParams& p, double t) {
    return 4.0 * p.f2_sup_derivative * p.mu2_minus / (p.delta2_minus * p.omega) * std::exp(-p.omega * t);
}

double eval_lower(const LowerEnvelopeParams& p, const WaveProfile& wave2, double t, double x1) {
    const double xi = x1 + p.c2 * (t + p.t_lambda) - p.beta_shift + lower_V(p, t) - p.V0;
    return std::max(eval_profile(wave2, xi) - lower_v(p, t), 0.0);
}

EnvelopeEvaluator lower_evaluator(const LowerEnvelopeParams& p, const WaveProfile& wave2) {
    EnvelopeEvaluator e;
    e.name = "lower";
    e.t_begin = p.t_lambda;
    e.t_end = kInf;
    e.eval = [p, &wave2](double t, double x1) {
        const double s = t - p.t_lambda;
        const double xi = x1 + p.c2 * t - p.beta_shift + lower_V(p, s) - p.V0;
        const double v = eval_profile(wave2, xi) - lower_v(p, s);
        return v > 0.0 ? EnvelopeSample{v, 0} : EnvelopeSample{0.0, -1};
    };
    return e;
}

LowerEnvelopeParams derive_lower(const SpatialReaction& r, const WaveProfile& wave1, const WaveProfile& wave2,
                                 const Trajectory& traj) {
    const ModulusConstants mc = modulus_constants(r);
    LowerEnvelopeParams p;
    p.omega = mc.omega;
    p.rho = mc.rho;
    p.c2 = wave2.speed;
    p.A_minus = plateau_half_width(wave2, p.rho / 2.0);
    p.delta2_minus = min_slope(wave2, p.A_minus);
    p.mu2_minus = std::min(p.rho / 2.0, 0.5);
    p.f2_sup_derivative = r.f2().lipschitz_bound();
    p.V0 = lower_V(p, 0.0);
    if (!(p.delta2_minus > 0.0)) throw DerivationError("derive_lower: phi_2' is not positive on [-A,A]");

    const double mu = p.mu2_minus;
    const double z2_left = profile_inverse(wave2, mu / 2.0);
    const double z1_right = profile_inverse(wave1, 1.0 - mu / 2.0);
    const double c1 = wave1.speed;

    for (const auto& snap : traj.snapshots) {
        const double t = snap.t;
        const double zm = z2_left - p.c2 * t, zp = z1_right - c1 * t;
        double close = 0.0;
        for (std::size_t i = 0; i < snap.u.size(); ++i) {
            const double x = lab_x(traj, i, t);
            if (x >= zm && x <= zp) continue;
            close = std::max(close, std::abs(snap.u[i] - eval_profile(wave1, x + c1 * t)));
        }
        if (close > mu / 2.0) continue;

        p.t_lambda = t;
        p.zeta_minus = zm;
        p.zeta_plus = zp;
        p.closeness = close;
        auto ok = [&](double beta) {
            for (std::size_t i = 0; i < snap.u.size(); ++i) {
                const double x = lab_x(traj, i, t);
                if (x < zm || x > zp) continue;
                if (eval_profile(wave2, x + p.c2 * t - beta) > snap.u[i]) return false;
            }
            return true;
        };
        p.beta_shift = smallest_shift(ok, "derive_lower");
        p.beta_minus = p.beta_shift + p.V0;
        p.C_minus = mu * std::exp(p.omega * t);
        p.binding = {{"omega", mc.omega_binding},
                     {"rho", mc.rho_binding},
                     {"A_minus", "phi_2 <= rho/2 left of -A and >= 1-rho/2 right of A"},
                     {"mu2_minus", p.rho / 2.0 <= 0.5 ? "rho/2" : "1/2"},
                     {"t_lambda", "earliest snapshot with |u - phi_1(x+c1 t)| <= mu2/2 off the compact set"},
                     {"beta_minus", "smallest shift with phi_2 below u on the compact set, plus V(0)"}};
        return p;
    }
    throw DerivationError("derive_lower: no snapshot is close enough to the phi_1 front (trajectory starts too late)");
}

// ---------------------------------------------------------------- upper (phi_1 supersolution)

double eval_upper1(const WaveProfile& wave1, double beta1_plus, double C1_plus, double omega, double t, double x1) {
    return std::min(eval_profile(wave1, x1 + wave1.speed * t + beta1_plus) + C1_plus * std::exp(-omega * t), 1.0);
}

EnvelopeEvaluator upper1_evaluator(const Upper1EnvelopeParams& p, const WaveProfile& wave1) {
    EnvelopeEvaluator e;
    e.name = "upper1";
    e.t_begin = p.t_lambda;
    e.t_end = kInf;
    e.eval = [p, &wave1](double t, double x1) {
        const double v = eval_profile(wave1, x1 + p.c1 * t + p.beta1_plus) + p.C1_plus * std::exp(-p.omega * t);
        return v < 1.0 ? EnvelopeSample{v, 0} : EnvelopeSample{1.0, -1};
    };
    return e;
}

Upper1EnvelopeParams derive_upper1(const SpatialReaction& r, const WaveProfile& wave1, const Trajectory& traj,
                                   const LowerEnvelopeParams& lower) {
    Upper1EnvelopeParams p;
    p.omega = lower.omega;
    p.rho = lower.rho;
    p.c1 = wave1.speed;
    p.A1 = plateau_half_width(wave1, p.rho / 2.0);
    p.delta1 = min_slope(wave1, p.A1);
    p.mu1_plus = std::min(p.rho / 2.0, 0.5);
    p.f1_sup_derivative = r.f1().lipschitz_bound();
    p.V0 = 4.0 * p.f1_sup_derivative * p.mu1_plus / (p.delta1 * p.omega);
    if (!(p.delta1 > 0.0)) throw DerivationError("derive_upper1: phi_1' is not positive on [-A,A]");

    const double mu = p.mu1_plus;
    const double z_left = profile_inverse(wave1, mu / 2.0);
    const double z_right = profile_inverse(wave1, 1.0 - mu / 2.0);
    for (const auto& snap : traj.snapshots) {
        const double t = snap.t;
        const double zm = z_left - p.c1 * t, zp = z_right - p.c1 * t;
        double close = 0.0;
        for (std::size_t i = 0; i < snap.u.size(); ++i) {
            const double x = lab_x(traj, i, t);
            if (x >= zm && x <= zp) continue;
            close = std::max(close, std::abs(snap.u[i] - eval_profile(wave1, x + p.c1 * t)));
        }
        if (close > mu / 2.0) continue;

        p.t_lambda = t;
        p.zeta_minus = zm;
        p.zeta_plus = zp;
        p.closeness = close;
        auto ok = [&](double beta) {
            for (std::size_t i = 0; i < snap.u.size(); ++i) {
                const double x = lab_x(traj, i, t);
                if (x < zm || x > zp) continue;
                if (eval_profile(wave1, x + p.c1 * t + beta) < snap.u[i]) return false;
            }
            return true;
        };
        p.beta_shift = smallest_shift(ok, "derive_upper1");
        p.beta1_plus = p.beta_shift + p.V0;
        p.C1_plus = mu * std::exp(p.omega * t);
        p.binding = {{"A1", "phi_1 <= rho/2 left of -A and >= 1-rho/2 right of A"},
                     {"T_plus", "earliest snapshot with |u - phi_1(x+c1 t)| <= mu1/2 off the compact set"},
                     {"beta1_plus", "smallest shift with phi_1 above u on the compact set, plus V(0)"}};
        return p;
    }
    throw DerivationError("derive_upper1: no snapshot is close enough to the phi_1 front (trajectory starts too late)");
}

// ---------------------------------------------------------------- upper (phi_2 supersolution)

double upper2_v(const Upper2EnvelopeParams& p, double t) {
    const double s = t - p.T;
    const double lc = p.lambda * p.c2;
    return (p.gamma + p.K_prime) * std::exp(-p.omega * s) - p.K_prime * std::exp(-lc * s);
}

double upper2_V(const Upper2EnvelopeParams& p, double t) {
    const double s = t - p.T;
    const double lc = p.lambda * p.c2;
    const double integral = (p.gamma + p.K_prime) * -std::expm1(-p.omega * s) / p.omega -
                            p.K_prime * -std::expm1(-lc * s) / lc;
    return (p.f2_sup_derivative + p.omega) / p.delta2_plus * integral;
}

double eval_upper2(const Upper2EnvelopeParams& p, const WaveProfile& wave2, double t, double x1) {
    if (t < p.T) throw DomainError("eval_upper2: t precedes T");
    return std::min(eval_profile(wave2, x1 + p.c2 * t + p.beta + upper2_V(p, t)) + upper2_v(p, t), 1.0);
}

EnvelopeEvaluator upper2_evaluator(const Upper2EnvelopeParams& p, const WaveProfile& wave2) {
    EnvelopeEvaluator e;
    e.name = "upper2";
    e.t_begin = p.T;
    e.t_end = kInf;
    e.eval = [p, &wave2](double t, double x1) {
        const double v = eval_profile(wave2, x1 + p.c2 * t + p.beta + upper2_V(p, t)) + upper2_v(p, t);
        return v < 1.0 ? EnvelopeSample{v, 0} : EnvelopeSample{1.0, -1};
    };
    return e;
}

Upper2EnvelopeParams derive_upper2(const SpatialReaction& r, const WaveProfile& wave1, const WaveProfile& wave2,
                                   const Trajectory& traj, const LowerEnvelopeParams& lower,
                                   const Upper1EnvelopeParams& upper1) {
    Upper2EnvelopeParams p;
    p.rho = lower.rho;
    p.gamma = p.rho / 8.0;
    p.C_f = r.c_f();
    p.C_phi2 = wave2.c_phi;
    p.lambda = wave2.mu;
    p.c2 = wave2.speed;
    p.x0 = r.x0();
    p.A_minus = lower.A_minus;
    p.delta2_plus = lower.delta2_minus;
    p.f2_sup_derivative = r.f2().lipschitz_bound();
    const double lc = p.lambda * p.c2;
    p.omega = lower.omega;
    if (!(p.omega < lc)) {
        p.omega = lc / 2.0;
        p.omega_reduced = true;
    }
    p.eta = std::min(p.omega, lc);

    const double Cmax = std::max(lower.C_minus, upper1.C1_plus);
    const double base = p.C_f * p.C_phi2;
    // Each condition gives a lower bound on T.
    const double T_c = std::log(2.0 * Cmax / p.gamma) / p.omega;
    const double T_a = (p.A_minus + p.x0) / p.c2;
    const double T_k = (p.x0 - std::log(p.rho / 4.0 * lc / base) / p.lambda) / p.c2;
    // gamma + K/(lc - omega) <= rho/2 keeps v inside [0, rho/2].
    const double T_v = (p.x0 - std::log((p.rho / 2.0 - p.gamma) * (lc - p.omega) / base) / p.lambda) / p.c2;
    const double T_prev = std::max(lower.t_lambda, upper1.t_lambda);
    struct Cand {
        double t;
        const char* name;
    };
    Cand cands[] = {{T_c, "max(C-,C1+) e^{-omega T} <= gamma/2"},
                    {T_a, "A- - c2 T <= -x0"},
                    {T_k, "C_f C_phi2 e^{lambda(x0 - c2 T)}/(lambda c2) <= rho/4"},
                    {T_v, "gamma + K/(lambda c2 - omega) <= rho/2"}};
    const Cand* bind = &cands[0];
    for (const auto& c : cands)
        if (c.t > bind->t) bind = &c;
    const double T_min = bind->t;

    const Snapshot* snap = nullptr;
    for (const auto& s : traj.snapshots) {
        if (s.t >= T_min - 1e-12 && s.t > T_prev) {
            snap = &s;
            break;
        }
    }
    if (!snap) throw DerivationError("derive_upper2: trajectory ends before any admissible T");
    p.T = snap->t;
    p.K = base * std::exp(p.lambda * (p.x0 - p.c2 * p.T));
    p.K_prime = p.K / (lc - p.omega);

    const double beta1 = upper1.beta1_plus;
    p.zeta_tilde_minus = std::min(profile_inverse(wave1, p.gamma / 2.0) - wave1.speed * p.T - beta1,
                                  profile_inverse(wave2, p.gamma) - p.c2 * p.T);
    p.zeta_tilde_plus = profile_inverse(wave2, 1.0 - p.gamma) - p.c2 * p.T;
    auto ok = [&](double beta) {
        for (std::size_t i = 0; i < snap->u.size(); ++i) {
            const double x = lab_x(traj, i, p.T);
            if (x < p.zeta_tilde_minus || x > p.zeta_tilde_plus) continue;
            if (eval_profile(wave2, x + p.c2 * p.T + beta) < snap->u[i]) return false;
        }
        return true;
    };
    p.beta = smallest_shift(ok, "derive_upper2");
    p.binding = {{"gamma", "rho/8"},
                 {"T", bind->name},
                 {"T_min", T_min},
                 {"omega", p.omega_reduced ? "reduced to lambda c2 / 2" : "unchanged (omega < lambda c2)"},
                 {"eta", p.omega <= lc ? "omega" : "lambda c2"},
                 {"beta", "smallest shift with phi_2 above u on the compact set"}};
    return p;
}

// ---------------------------------------------------------------- early pair w+-

double early_xi(const EarlyParams& p, double t) {
    const double q = (p.M / p.c1) * std::exp(p.lambda * p.c1 * t);
    if (!(q < 1.0)) throw DomainError("early_xi: 1 - M/c1 e^{lambda c1 t} <= 0");
    return -std::log1p(-q) / p.lambda;
}

double early_xi_dot(const EarlyParams& p, double t) {
    return p.M * std::exp(p.lambda * (p.c1 * t + early_xi(p, t)));
}

EarlyValue eval_early(const EarlyParams& p, const WaveProfile& wave1, double t, double x1) {
    const double xi = early_xi(p, t);
    const double s = p.c1 * t;
    EarlyValue v;
    if (x1 < 0.0) {
        v.w_plus = std::min(2.0 * eval_profile(wave1, s + xi), 1.0);
        v.w_minus = 0.0;
        return v;
    }
    v.w_plus = std::min(eval_profile(wave1, x1 + s + xi) + eval_profile(wave1, -x1 + s + xi), 1.0);
    v.w_minus = std::max(eval_profile(wave1, x1 + s - xi) - eval_profile(wave1, -x1 + s - xi), 0.0);
    return v;
}

EnvelopeEvaluator early_lower_evaluator(const EarlyParams& p, const WaveProfile& wave1, double t_from) {
    EnvelopeEvaluator e;
    e.name = "early_w_minus";
    e.t_begin = t_from;
    e.t_end = p.T1;
    e.eval = [p, &wave1](double t, double x1) {
        if (x1 <= 0.0) return EnvelopeSample{0.0, -1};
        const double v = eval_early(p, wave1, t, x1).w_minus;
        return v > 0.0 ? EnvelopeSample{v, 1} : EnvelopeSample{0.0, -1};
    };
    return e;
}

EnvelopeEvaluator early_upper_evaluator(const EarlyParams& p, const WaveProfile& wave1, double t_from) {
    EnvelopeEvaluator e;
    e.name = "early_w_plus";
    e.t_begin = t_from;
    e.t_end = p.T1;
    e.eval = [p, &wave1](double t, double x1) {
        const double v = eval_early(p, wave1, t, x1).w_plus;
        if (v >= 1.0) return EnvelopeSample{1.0, -1};
        return EnvelopeSample{v, x1 < 0.0 ? 0 : 1};
    };
    return e;
}

EarlyParams derive_early(const WaveProfile& wave1, const BistableNonlinearity& f1) {
    EarlyParams p;
    p.envelope = wave1.envelope;
    p.lambda = wave1.lambda;
    p.mu = wave1.mu;
    p.c1 = wave1.speed;
    p.theta1 = f1.theta();
    p.L = f1.curvature_bound();
    const auto& e = p.envelope;
    if (!(p.c1 > 0.0) || !(e.gamma0 > 0.0) || !(e.gamma1 > 0.0))
        throw DerivationError("derive_early: wave1 needs c1 > 0 and fitted envelope constants");

    const bool tabulated = f1.kind() == NonlinearityKind::tabulated;
    {
        const int n = 100;
        double sup = 0.0;
        for (int a = 1; a <= n; ++a) {
            for (int b = 1; b <= n; ++b) {
                const double u = static_cast<double>(a) / n, v = static_cast<double>(b) / n;
                if (tabulated && u + v > 1.0) continue;
                sup = std::max(sup, std::abs(f1.value(u + v) - f1.value(u) - f1.value(v)) / (u * v));
            }
        }
        p.L_sampled = sup;
    }

    p.lambda_ge_mu = p.lambda >= p.mu - 1e-8;
    const double Lb = p.L * e.beta0;
    struct Term {
        double v;
        const char* name;
    };
    std::vector<Term> terms = {{Lb * e.beta0 / e.gamma0, "M gamma0 > L beta0^2"},
                               {Lb / e.gamma1, "M gamma1 > L beta0"},
                               {Lb / p.c1, "c1 M > L beta0"}};

    if (!p.lambda_ge_mu) {
        auto phi = [&](double z) { return eval_profile(wave1, z); };
        // Points (a, b) with a >= L and b <= -L are covered by threshold L; each
        // violation forces L above min(a, -b).
        const double step = 0.1, span = 40.0;
        const int n = static_cast<int>(span / step);
        double l1 = 0.0, l2 = 0.0;
        p.C_tilde = (f1.derivative_at_0() - f1.derivative_at_1()) * e.alpha0 / (2.0 * e.beta0);
        for (int i = 0; i <= n; ++i) {
            const double a = i * step;
            const double pa = phi(a);
            for (int j = 0; j <= n; ++j) {
                const double b = -j * step;
                const double pb = phi(b);
                const bool in_support = !tabulated || pa + pb <= 1.0;
                const double G = in_support ? f1.value(pa) + f1.value(pb) - f1.value(pa + pb) : 0.0;
                if (G < 0.0) l1 = std::max(l1, std::min(a, -b) + step);
                const double H = f1.value(pa) - f1.value(pb) - f1.value(pa - pb);
                if (H > -p.C_tilde * e.beta0 * std::exp(p.lambda * b)) l2 = std::max(l2, std::min(a, -b) + step);
            }
        }
        p.L1 = l1;
        p.L2 = l2;
        terms.push_back({Lb * std::exp(p.mu * p.L1) / e.gamma1, "M gamma1 e^{-mu L1} > L beta0"});
    }
    const Term* bind = &terms[0];
    for (const auto& t : terms)
        if (t.v > bind->v) bind = &t;
    p.M = 2.0 * bind->v;
    p.T = std::log(p.c1 / (p.c1 + p.M)) / (p.lambda * p.c1);

    auto conditions = [&](double t) -> const char* {
        const double xi = early_xi(p, t);
        if (eval_profile(wave1, p.c1 * t + xi) > p.theta1 / 2.0) return "phi1(c1 t + xi) <= theta1/2";
        const double ym = p.c1 * t - xi;
        if (p.lambda_ge_mu) {
            if (!(e.gamma1 * std::exp(-p.mu * ym) - e.delta0 * std::exp(p.lambda * ym) - Lb / p.M > 0.0))
                return "gamma1 e^{-mu(c1 t - xi)} - delta0 e^{lambda(c1 t - xi)} > L beta0 / M";
        } else {
            if (!(p.M * e.delta0 * std::exp(p.lambda * (p.c1 * t + xi)) < p.C_tilde * e.beta0))
                return "M delta0 e^{lambda(c1 t + xi)} < C_tilde beta0";
            if (!(e.gamma1 * std::exp(-p.lambda * ym - (p.mu - p.lambda) * p.L2) - e.delta0 * std::exp(p.lambda * ym) -
                      Lb / p.M >
                  0.0))
                return "gamma1 e^{-lambda(c1 t - xi) - (mu - lambda) L2} - delta0 e^{lambda(c1 t - xi)} > L beta0 / M";
        }
        return nullptr;
    };

    // Largest T1 <= T with every condition holding on the sampled past.
    const double dt = 0.05;
    const int J = 8000;
    int first_ok = J + 1;
    for (int j = J; j >= 0; --j) {
        if (conditions(p.T - j * dt)) break;
        first_ok = j;
    }
    if (first_ok > J) throw DerivationError("derive_early: conditions fail far in the past");
    const char* t1_binding = "T";
    if (first_ok == 0) {
        p.T1 = p.T;
    } else {
        double lo = p.T - first_ok * dt, hi = lo + dt;
        t1_binding = conditions(hi);
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (conditions(mid) ? hi : lo) = mid;
        }
        p.T1 = lo;
    }
    p.binding = {{"M", bind->name},
                 {"T", "(1/(lambda c1)) log(c1/(c1+M))"},
                 {"T1", t1_binding},
                 {"L", "sup |f1''| on [0,1]"},
                 {"case", p.lambda_ge_mu ? "lambda >= mu" : "lambda < mu"}};
    return p;
}

// ---------------------------------------------------------------- checks

nlohmann::json ViolationReport::to_json() const {
    return {{"name", name}, {"worst", worst}, {"at_t", at_t},   {"at_x", at_x},
            {"tol", tol},   {"checked", checked}, {"pass", pass}};
}

ViolationReport check_ordering(const Trajectory& traj, const EnvelopeEvaluator& env, Side side, double tol) {
    ViolationReport rep;
    rep.name = env.name;
    rep.tol = tol;
    rep.worst = -kInf;
    for (const auto& snap : traj.snapshots) {
        if (snap.t < env.t_begin - 1e-9 || snap.t > env.t_end + 1e-9) continue;
        for (std::size_t i = 0; i < snap.u.size(); ++i) {
            const double x = lab_x(traj, i, snap.t);
            const double e = env.eval(snap.t, x).value;
            const double v = side == Side::lower ? e - snap.u[i] : snap.u[i] - e;
            ++rep.checked;
            if (v > rep.worst) {
                rep.worst = v;
                rep.at_t = snap.t;
                rep.at_x = x;
            }
        }
    }
    if (rep.checked == 0) throw ConfigError("check_ordering: envelope window does not overlap the trajectory");
    rep.pass = rep.worst <= tol;
    return rep;
}

nlohmann::json ResidualReport::to_json() const {
    return {{"name", name},           {"max_wrong_sign", max_wrong_sign}, {"at_t", at_t},
            {"at_x", at_x},           {"evaluated", evaluated},           {"skipped", skipped},
            {"tol", tol},             {"pass", pass}};
}

ResidualReport residual_sign_check(const EnvelopeEvaluator& env, const SpatialReaction& r,
                                   const std::vector<ProbePoint>& samples, Side side, double dx, double dt,
                                   double tol) {
    ResidualReport rep;
    rep.name = env.name;
    rep.tol = tol;
    rep.max_wrong_sign = -kInf;
    for (const auto& q : samples) {
        if (q.t - dt < env.t_begin || q.t + dt > env.t_end) {
            ++rep.skipped;
            continue;
        }
        const EnvelopeSample c = env.eval(q.t, q.x);
        const EnvelopeSample xm = env.eval(q.t, q.x - dx), xp = env.eval(q.t, q.x + dx);
        const EnvelopeSample tm = env.eval(q.t - dt, q.x), tp = env.eval(q.t + dt, q.x);
        const int b = c.branch;
        if (b < 0 || xm.branch != b || xp.branch != b || tm.branch != b || tp.branch != b) {
            ++rep.skipped;
            continue;
        }
        const double L = (tp.value - tm.value) / (2.0 * dt) - (xp.value - 2.0 * c.value + xm.value) / (dx * dx) -
                         r.value(q.x, c.value);
        const double wrong = side == Side::lower ? L : -L;
        ++rep.evaluated;
        if (wrong > rep.max_wrong_sign) {
            rep.max_wrong_sign = wrong;
            rep.at_t = q.t;
            rep.at_x = q.x;
        }
    }
    if (rep.evaluated == 0) rep.max_wrong_sign = 0.0;
    rep.pass = rep.evaluated > 0 && rep.max_wrong_sign <= tol;
    return rep;
}

nlohmann::json SlidingReport::to_json() const {
    return {{"epsilon", epsilon},
            {"sigma", sigma},
            {"beta_rate", beta_rate},
            {"eta_level", eta_level},
            {"t0", t0},
            {"window_end", window_end},
            {"worst_lower", worst_lower},
            {"worst_upper", worst_upper},
            {"damping_margin", damping_margin},
            {"damping_ok", damping_ok},
            {"tol", tol},
            {"pass", pass}};
}

SlidingReport sliding_check(const Trajectory& traj, double epsilon, double sigma, double beta_rate, double eta_level,
                            double t0, const Trajectory* other, double tol) {
    if (!(epsilon >= 0.0) || epsilon >= eta_level) throw PreconditionError("sliding_check: need 0 <= epsilon < eta");
    if (!traj.reaction) throw ConfigError("sliding_check: trajectory carries no reaction");
    const Trajectory& v = other ? *other : traj;
    if (v.grid.n != traj.grid.n) throw ConfigError("sliding_check: grids differ");

    SlidingReport rep;
    rep.epsilon = epsilon;
    rep.sigma = sigma;
    rep.beta_rate = beta_rate;
    rep.eta_level = eta_level;
    rep.t0 = t0;
    rep.tol = tol;

    const SpatialReaction& r = *traj.reaction;
    double margin = kInf;
    const int samples = 2000;
    for (int k = 0; k <= samples; ++k) {
        const double d = 2.0 * eta_level * k / samples;
        for (double s : {d, 1.0 - d}) {
            margin = std::min(margin, -r.f1().derivative(s) - beta_rate);
            margin = std::min(margin, -r.f2().derivative(s) - beta_rate);
        }
    }
    rep.damping_margin = margin;
    rep.damping_ok = margin >= 0.0;

    const double lead = sigma * epsilon;
    rep.window_end = std::min(traj.t_end() - t0 - lead, v.t_end() - t0);
    if (t0 < traj.t_begin() || t0 < v.t_begin() || !(rep.window_end > 0.0))
        throw ConfigError("sliding_check: empty validity window");

    rep.worst_lower = rep.worst_upper = -kInf;
    for (const auto& snap : v.snapshots) {
        const double t = snap.t - t0;
        if (t < -1e-9 || t > rep.window_end + 1e-9) continue;
        const double decay = std::exp(-beta_rate * std::max(t, 0.0));
        const double slide = lead * (1.0 - decay);
        const std::vector<double> up = traj.at_time(std::min(t0 + t + slide, traj.t_end()));
        const std::vector<double> dn = traj.at_time(std::max(t0 + t - slide, traj.t_begin()));
        for (std::size_t i = 0; i < snap.u.size(); ++i) {
            const double Wp = std::min(1.0, up[i] + epsilon * decay);
            const double Wm = std::max(0.0, dn[i] - epsilon * decay);
            rep.worst_upper = std::max(rep.worst_upper, snap.u[i] - Wp);
            rep.worst_lower = std::max(rep.worst_lower, Wm - snap.u[i]);
        }
    }
    rep.pass = rep.damping_ok && rep.worst_lower <= tol && rep.worst_upper <= tol;
    return rep;
}

double stability_delta(const Trajectory& traj, const WaveProfile& wave2, double beta, double t0, double epsilon) {
    auto distance = [&](double t, const std::vector<double>& u) {
        double m = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            m = std::max(m, std::abs(u[i] - eval_profile(wave2, lab_x(traj, i, t) + wave2.speed * t + beta)));
        return m;
    };
    if (distance(t0, traj.at_time(t0)) > epsilon + 1e-12)
        throw PreconditionError("stability_delta: |u(t0) - phi_2| exceeds epsilon");
    double sup = 0.0;
    for (const auto& snap : traj.snapshots)
        if (snap.t >= t0 - 1e-9) sup = std::max(sup, distance(snap.t, snap.u));
    return sup;
}

}  // namespace frontlab
