#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frontlab/pde.hpp"
#include "frontlab/reaction.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

// branch < 0 marks points outside the smooth set (clamp active); residual probes skip them
// and also skip stencils that mix branches.
struct EnvelopeSample {
    double value = 0;
    int branch = 0;
};

struct EnvelopeEvaluator {
    std::string name;
    double t_begin = 0;  // validity window in absolute time
    double t_end = 0;
    std::function<EnvelopeSample(double t, double x1)> eval;
};

enum class Side { lower, upper };

struct ModulusConstants {
    double omega = 0;
    std::string omega_binding;
    double rho = 0;
    std::string rho_binding;
};

// omega = min(|f_i'(0)|/4, |f_i'(1)|/4, 1); rho = largest value with the four derivative
// modulus conditions, by bisection.
ModulusConstants modulus_constants(const SpatialReaction& r);
// sup over s in [0,rho] of |f'(s) - f'(0)| (at0) or over [1-rho,1] of |f'(s) - f'(1)|.
double derivative_modulus(const BistableNonlinearity& f, double rho, bool at0);

struct LowerEnvelopeParams {
    double omega = 0, rho = 0;
    double A_minus = 0;
    double delta2_minus = 0;
    double mu2_minus = 0;
    double f2_sup_derivative = 0;
    double V0 = 0;  // V_2^-(0)
    double t_lambda = 0;
    double beta_shift = 0;  // shift on the compact set at t_lambda (proof form)
    double beta_minus = 0;  // final value beta_shift + V_2^-(0)
    double C_minus = 0;     // mu2_minus e^{omega t_lambda}
    double zeta_minus = 0, zeta_plus = 0;
    double closeness = 0;   // achieved sup |u - phi_1| outside the compact set
    double c2 = 0;
    nlohmann::json binding;
    nlohmann::json to_json() const;
};

struct Upper1EnvelopeParams {
    double omega = 0, rho = 0;
    double A1 = 0;
    double delta1 = 0;
    double mu1_plus = 0;
    double f1_sup_derivative = 0;
    double V0 = 0;
    double t_lambda = 0;  // T^+
    double beta_shift = 0;
    double beta1_plus = 0;  // beta_shift + V_1^+(0)
    double C1_plus = 0;     // mu1_plus e^{omega t_lambda}
    double zeta_minus = 0, zeta_plus = 0;
    double closeness = 0;
    double c1 = 0;
    nlohmann::json binding;
    nlohmann::json to_json() const;
};

struct Upper2EnvelopeParams {
    double T = 0;
    double gamma = 0;
    double C_f = 0;
    double C_phi2 = 0;
    double lambda = 0;  // right decay rate of phi_2
    double delta2_plus = 0;
    double beta = 0;
    double eta = 0;
    double omega = 0;
    bool omega_reduced = false;
    double rho = 0;
    double A_minus = 0;
    double K = 0;        // C_f C_phi2 e^{lambda (x0 - c2 T)}
    double K_prime = 0;  // K / (lambda c2 - omega)
    double f2_sup_derivative = 0;
    double zeta_tilde_minus = 0, zeta_tilde_plus = 0;
    double c2 = 0, x0 = 0;
    nlohmann::json binding;
    nlohmann::json to_json() const;
};

struct EarlyParams {
    double M = 0;
    double T = 0;
    double T1 = 0;
    double L = 0;          // curvature certificate sup |f1''|
    double L_sampled = 0;  // sampled sup of |f(u+v)-f(u)-f(v)|/(uv)
    double L1 = 0, L2 = 0, C_tilde = 0;
    bool lambda_ge_mu = true;
    double lambda = 0, mu = 0, c1 = 0, theta1 = 0;
    EnvelopeConstants envelope;
    nlohmann::json binding;
    nlohmann::json to_json() const;
};

LowerEnvelopeParams derive_lower(const SpatialReaction& r, const WaveProfile& wave1, const WaveProfile& wave2,
                                 const Trajectory& traj);
double lower_v(const LowerEnvelopeParams& p, double t);
double lower_V(const LowerEnvelopeParams& p, double t);
// t measured from t_lambda.
double eval_lower(const LowerEnvelopeParams& p, const WaveProfile& wave2, double t, double x1);
EnvelopeEvaluator lower_evaluator(const LowerEnvelopeParams& p, const WaveProfile& wave2);

Upper1EnvelopeParams derive_upper1(const SpatialReaction& r, const WaveProfile& wave1, const Trajectory& traj,
                                   const LowerEnvelopeParams& lower);
double eval_upper1(const WaveProfile& wave1, double beta1_plus, double C1_plus, double omega, double t, double x1);
EnvelopeEvaluator upper1_evaluator(const Upper1EnvelopeParams& p, const WaveProfile& wave1);

Upper2EnvelopeParams derive_upper2(const SpatialReaction& r, const WaveProfile& wave1, const WaveProfile& wave2,
                                   const Trajectory& traj, const LowerEnvelopeParams& lower,
                                   const Upper1EnvelopeParams& upper1);
double upper2_v(const Upper2EnvelopeParams& p, double t);
double upper2_V(const Upper2EnvelopeParams& p, double t);
// Absolute time t >= T.
double eval_upper2(const Upper2EnvelopeParams& p, const WaveProfile& wave2, double t, double x1);
EnvelopeEvaluator upper2_evaluator(const Upper2EnvelopeParams& p, const WaveProfile& wave2);

EarlyParams derive_early(const WaveProfile& wave1, const BistableNonlinearity& f1);
double early_xi(const EarlyParams& p, double t);
double early_xi_dot(const EarlyParams& p, double t);
struct EarlyValue {
    double w_minus = 0, w_plus = 0;
};
EarlyValue eval_early(const EarlyParams& p, const WaveProfile& wave1, double t, double x1);
// Evaluators valid on (-inf, T1].
EnvelopeEvaluator early_lower_evaluator(const EarlyParams& p, const WaveProfile& wave1, double t_from);
EnvelopeEvaluator early_upper_evaluator(const EarlyParams& p, const WaveProfile& wave1, double t_from);

struct ViolationReport {
    std::string name;
    double worst = 0;  // signed: > 0 means the envelope is on the wrong side
    double at_t = 0, at_x = 0;
    double tol = 0;
    std::size_t checked = 0;
    bool pass = false;
    nlohmann::json to_json() const;
};

ViolationReport check_ordering(const Trajectory& traj, const EnvelopeEvaluator& env, Side side, double tol);

struct ProbePoint {
    double t, x;
};

struct ResidualReport {
    std::string name;
    double max_wrong_sign = 0;  // max L for sub, -min L for super
    double at_t = 0, at_x = 0;
    std::size_t evaluated = 0, skipped = 0;
    double tol = 0;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Centered differences with steps dx, dt of L w = w_t - w_xx - f(x,w).
ResidualReport residual_sign_check(const EnvelopeEvaluator& env, const SpatialReaction& r,
                                   const std::vector<ProbePoint>& samples, Side side, double dx, double dt,
                                   double tol = 1e-3);

struct SlidingReport {
    double epsilon = 0, sigma = 0, beta_rate = 0, eta_level = 0, t0 = 0;
    double window_end = 0;  // validity window is [0, window_end] in shifted time
    double worst_lower = 0;  // max W^- - v
    double worst_upper = 0;  // max v - W^+
    double damping_margin = 0;  // min over the damping sets of (-d_u f - beta_rate)
    bool damping_ok = false;
    double tol = 0;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Sliding sub/supersolutions W^+/- built from traj; the ordering is checked for `other`
// (defaults to traj itself).
SlidingReport sliding_check(const Trajectory& traj, double epsilon, double sigma, double beta_rate, double eta_level,
                            double t0, const Trajectory* other = nullptr, double tol = 1e-4);

// Lab or moving frame; requires closeness at t0 within epsilon.
double stability_delta(const Trajectory& traj, const WaveProfile& wave2, double beta, double t0, double epsilon);

}  // namespace frontlab
