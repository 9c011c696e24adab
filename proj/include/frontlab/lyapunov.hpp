#pragma once

#include <limits>
#include <vector>

#include <json.hpp>

#include "frontlab/pde.hpp"
#include "frontlab/reaction.hpp"

namespace frontlab {

// Field on the uniform moving-frame grid z_i = z_min + i h.
struct Field {
    double z_min = 0, h = 0;
    std::vector<double> w;
    double z(std::size_t i) const { return z_min + static_cast<double>(i) * h; }
};

// Moving-frame field of a trajectory snapshot: z = x1 + c2 t.
Field moving_field(const Trajectory& traj, std::size_t snapshot, double c2);

// u on |z| <= mt, 0 below -mt-1, 1 above mt+1, quintic smoothstep blends on the unit strips.
// m = +infinity disables the cutoff.
Field cutoff(const Field& u, double t, double m);

struct Quadrature {
    double value = 0;
    bool truncated = false;  // integrand above 1e-10 at a grid end
};

Quadrature eval_L(const Field& w, double c2, const BistableNonlinearity& f2);
Quadrature eval_Q(const Field& w, double c2, const BistableNonlinearity& f2);

struct LyapunovOptions {
    double eta = 0.05;  // decay rate entering the admissible-m bound
    double x0 = 2.0;
    double tol = 1e-3;
    double threshold_factor = 1.5;  // |dL/dt + Q| is checked for t >= factor (1+x0)/(c2-m)
    unsigned threads = 1;
};

struct LyapunovSeries {
    double m = 0;
    double c2 = 0;
    std::vector<double> times, L_values, Q_values, dL_dt, cross_term, identity_residual;
    std::size_t truncation_warnings = 0;

    double sup_abs_L = 0;
    double threshold_time = 0;       // (1+x0)/(c2-m)
    double check_from = 0;           // threshold_factor * threshold_time
    double tail_max = 0;             // max |dL/dt + Q| for t >= check_from
    double settle_time = 0;          // earliest t after which |dL/dt + Q| <= tol holds throughout
    bool settled = false;
    double min_Q_final_quarter = 0;
    double max_identity_residual = 0;
    nlohmann::json to_json() const;
};

// Largest admissible cutoff slope: m < min(2 eta/c2, c2)/2.
double max_cutoff_slope(double c2, double eta);

LyapunovSeries lyapunov_series(const Trajectory& traj, double m, const BistableNonlinearity& f2, double c2,
                               const LyapunovOptions& opt = {});

}  // namespace frontlab
