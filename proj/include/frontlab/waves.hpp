#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include <json.hpp>

#include "frontlab/errors.hpp"
#include "frontlab/reaction.hpp"

namespace frontlab {

struct EnvelopeConstants {
    double alpha0 = 0, beta0 = 0;    // alpha0 e^{lz} <= phi <= beta0 e^{lz}, z <= 0
    double alpha1 = 0, beta1 = 0;    // alpha1 e^{-mz} <= 1 - phi <= beta1 e^{-mz}, z > 0
    double gamma0 = 0, delta0 = 0;   // same for phi', z <= 0
    double gamma1 = 0, delta1 = 0;   // same for phi', z > 0
    double left_min = 0, left_max = 0;    // fitted z-range on the left
    double right_min = 0, right_max = 0;  // fitted z-range on the right
    nlohmann::json to_json() const;
    static EnvelopeConstants from_json(const nlohmann::json& j);
};

// Traveling wave (c, phi) on z in [z_min, z_min + (n-1) h]. Nodes carry phi, phi'
// and phi'' = c phi' - f(phi); interpolation between nodes is quintic Hermite.
struct WaveProfile {
    double speed = 0;
    double z_min = 0;
    double h = 0;
    std::vector<double> phi, dphi, d2phi;
    double theta = 0;
    double lambda = 0;
    double mu = 0;
    double residual_norm = 0;   // max interior |phi'' - c phi' + f(phi)|, second-order stencils
    double newton_residual = 0; // max residual of the solved (fourth-order) system
    int newton_iterations = 0;
    bool used_fallback = false;
    double c_phi = 0;
    EnvelopeConstants envelope;

    std::size_t size() const { return phi.size(); }
    double z(std::size_t i) const { return z_min + static_cast<double>(i) * h; }
    double z_max() const { return z(phi.size() - 1); }
    bool converged() const { return !phi.empty(); }
};

class NonconvergenceError : public NumericalError {
public:
    NonconvergenceError(const std::string& what, WaveProfile last) : NumericalError(what), last_iterate(std::move(last)) {}
    WaveProfile last_iterate;
};

WaveProfile solve_wave(const BistableNonlinearity& f, double z_min, double z_max, double h, double tol);

std::pair<double, double> decay_rates(const BistableNonlinearity& f, double c);
std::pair<double, double> decay_rates(double df0, double df1, double c);

// Fills p.envelope and p.c_phi.
EnvelopeConstants fit_envelope_constants(WaveProfile& p);

double eval_profile(const WaveProfile& p, double z);
// order 0, 1 or 2.
double eval_profile_derivative(const WaveProfile& p, double z, int order);
// Smallest z with phi(z) = level, by bisection on the monotone profile (tails included).
double profile_inverse(const WaveProfile& p, double level);

// Second-order residual of a profile given on an arbitrary grid.
double profile_residual_norm(const BistableNonlinearity& f, double c, double h, const std::vector<double>& phi);

void write_profile(const WaveProfile& p, const std::filesystem::path& csv, const std::filesystem::path& sidecar);
WaveProfile read_profile(const BistableNonlinearity& f, const std::filesystem::path& csv, const std::filesystem::path& sidecar);

}  // namespace frontlab
