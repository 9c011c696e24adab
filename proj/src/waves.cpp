#include "frontlab/waves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace frontlab {

namespace {

// Phase row: phi(0) from a cubic Lagrange stencil (a single node when z = 0 is a node).
struct PhaseStencil {
    std::vector<std::size_t> idx;
    std::vector<double> w;
};

PhaseStencil phase_stencil(double z_min, double h, std::size_t n) {
    const double s = -z_min / h;
    const double r = std::round(s);
    PhaseStencil ps;
    if (std::abs(s - r) < 1e-9) {
        ps.idx = {static_cast<std::size_t>(r)};
        ps.w = {1.0};
        return ps;
    }
    const auto i = static_cast<std::size_t>(std::floor(s));
    if (i < 1 || i + 2 >= n) throw PreconditionError("solve_wave: z = 0 must lie inside the grid");
    const double t = s - static_cast<double>(i);
    const double nodes[4] = {-1.0, 0.0, 1.0, 2.0};
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) w *= (t - nodes[b]) / (nodes[a] - nodes[b]);
        ps.idx.push_back(i - 1 + a);
        ps.w.push_back(w);
    }
    return ps;
}

double lambda_dc(double df0, double c) {
    return 0.5 * (1.0 + c / std::sqrt(c * c - 4.0 * df0));
}

double mu_dc(double df1, double c) {
    return 0.5 * (-1.0 + c / std::sqrt(c * c - 4.0 * df1));
}

class Collocation {
public:
    Collocation(const BistableNonlinearity& f, double z_min, double h, std::size_t n)
        : f_(f), h_(h), n_(n), phase_(phase_stencil(z_min, h, n)) {}

    std::size_t unknowns() const { return n_ + 1; }

    void residual(const Eigen::VectorXd& x, Eigen::VectorXd& F) const {
        const std::size_t n = n_;
        const double c = x[n];
        const auto [lam, mu] = decay_rates(f_, c);
        F.resize(n + 1);
        const double h = h_, h2 = h * h;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double d1, d2;
            if (i >= 2 && i + 2 < n) {
                d2 = (-x[i + 2] + 16 * x[i + 1] - 30 * x[i] + 16 * x[i - 1] - x[i - 2]) / (12 * h2);
                d1 = (-x[i + 2] + 8 * x[i + 1] - 8 * x[i - 1] + x[i - 2]) / (12 * h);
            } else {
                d2 = (x[i + 1] - 2 * x[i] + x[i - 1]) / h2;
                d1 = (x[i + 1] - x[i - 1]) / (2 * h);
            }
            F[i] = d2 - c * d1 + f_.value(x[i]);
        }
        F[0] = (x[1] - x[0]) / h - lam * 0.5 * (x[0] + x[1]);
        F[n - 1] = (x[n - 1] - x[n - 2]) / h - mu * (1.0 - 0.5 * (x[n - 1] + x[n - 2]));
        double ph = 0.0;
        for (std::size_t k = 0; k < phase_.idx.size(); ++k) ph += phase_.w[k] * x[phase_.idx[k]];
        F[n] = ph - f_.theta();
    }

    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) const {
        const std::size_t n = n_;
        const double c = x[n];
        const auto [lam, mu] = decay_rates(f_, c);
        const double h = h_, h2 = h * h;
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(7 * (n + 1));
        const int N = static_cast<int>(n);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const int r = static_cast<int>(i);
            double d1;
            if (i >= 2 && i + 2 < n) {
                const int off[5] = {-2, -1, 0, 1, 2};
                const double a2[5] = {-1, 16, -30, 16, -1};
                const double a1[5] = {1, -8, 0, 8, -1};
                for (int k = 0; k < 5; ++k) t.emplace_back(r, r + off[k], a2[k] / (12 * h2) - c * a1[k] / (12 * h));
                d1 = (-x[i + 2] + 8 * x[i + 1] - 8 * x[i - 1] + x[i - 2]) / (12 * h);
            } else {
                t.emplace_back(r, r - 1, 1 / h2 + c / (2 * h));
                t.emplace_back(r, r, -2 / h2);
                t.emplace_back(r, r + 1, 1 / h2 - c / (2 * h));
                d1 = (x[i + 1] - x[i - 1]) / (2 * h);
            }
            t.emplace_back(r, r, f_.derivative(x[i]));
            t.emplace_back(r, N, -d1);
        }
        t.emplace_back(0, 0, -1 / h - 0.5 * lam);
        t.emplace_back(0, 1, 1 / h - 0.5 * lam);
        t.emplace_back(0, N, -lambda_dc(f_.derivative_at_0(), c) * 0.5 * (x[0] + x[1]));
        t.emplace_back(N - 1, N - 1, 1 / h + 0.5 * mu);
        t.emplace_back(N - 1, N - 2, -1 / h + 0.5 * mu);
        t.emplace_back(N - 1, N, -mu_dc(f_.derivative_at_1(), c) * (1.0 - 0.5 * (x[n - 1] + x[n - 2])));
        for (std::size_t k = 0; k < phase_.idx.size(); ++k) t.emplace_back(N, static_cast<int>(phase_.idx[k]), phase_.w[k]);
        Eigen::SparseMatrix<double> J(N + 1, N + 1);
        J.setFromTriplets(t.begin(), t.end());
        J.makeCompressed();
        return J;
    }

private:
    const BistableNonlinearity& f_;
    double h_;
    std::size_t n_;
    PhaseStencil phase_;
};

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
};

NewtonOutcome damped_newton(const Collocation& sys, Eigen::VectorXd& x, double tol, int max_iter) {
    NewtonOutcome out;
    Eigen::VectorXd F, Fn, xn;
    sys.residual(x, F);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int it = 0; it < max_iter; ++it) {
        out.residual = F.lpNorm<Eigen::Infinity>();
        if (out.residual <= tol && it > 0) {
            out.converged = true;
            return out;
        }
        const auto J = sys.jacobian(x);
        lu.compute(J);
        if (lu.info() != Eigen::Success) return out;
        Eigen::VectorXd d = lu.solve(-F);
        if (lu.info() != Eigen::Success || !d.allFinite()) return out;
        const double merit = F.squaredNorm();
        double alpha = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k) {
            xn = x + alpha * d;
            sys.residual(xn, Fn);
            if (Fn.allFinite() && Fn.squaredNorm() <= (1.0 - 2e-4 * alpha) * merit) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        out.iterations = it + 1;
        if (!accepted) {
            // Roundoff floor: accept when the full step is already below tolerance.
            if (merit > 0 && std::sqrt(merit) <= tol) out.converged = true;
            out.residual = F.lpNorm<Eigen::Infinity>();
            return out;
        }
        x = xn;
        F = Fn;
        if (alpha == 1.0 && d.lpNorm<Eigen::Infinity>() < 1e-14) {
            out.residual = F.lpNorm<Eigen::Infinity>();
            out.converged = out.residual <= tol;
            return out;
        }
    }
    out.residual = F.lpNorm<Eigen::Infinity>();
    out.converged = out.residual <= tol;
    return out;
}

// Shooting from the left tail along the unstable direction. Returns +1 when the
// orbit overshoots phi = 1 (speed too large), -1 when phi' vanishes first (too small).
int shoot(const BistableNonlinearity& f, double c, double h, std::vector<double>* path) {
    const double lam = decay_rates(f, c).first;
    double u = 1e-8, v = lam * u;
    auto rhs = [&](double a, double b, double& da, double& db) {
        da = b;
        db = c * b - f.value(a);
    };
    if (path) path->assign(1, u);
    for (int step = 0; step < 2000000; ++step) {
        double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        rhs(u, v, k1u, k1v);
        rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
        rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
        rhs(u + h * k3u, v + h * k3v, k4u, k4v);
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (u >= 1.0) return +1;
        if (v <= 0.0) return -1;
        if (path) path->push_back(u);
    }
    return -1;
}

Eigen::VectorXd shooting_guess(const BistableNonlinearity& f, double z_min, double h, std::size_t n) {
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 20 && shoot(f, hi, h, nullptr) < 0; ++k) hi *= 2.0;
    for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        (shoot(f, mid, h, nullptr) > 0 ? hi : lo) = mid;
    }
    const double c = 0.5 * (lo + hi);
    std::vector<double> path;
    shoot(f, c, h, &path);
    const auto [lam, mu] = decay_rates(f, c);
    std::size_t j = 0;
    while (j + 1 < path.size() && path[j + 1] < f.theta()) ++j;
    // path index j sits at z = 0 (nearest from below)
    Eigen::VectorXd x(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = z_min + static_cast<double>(i) * h;
        const double s = z / h + static_cast<double>(j);
        double val;
        if (s < 0.0) {
            val = path.front() * std::exp(lam * s * h);
        } else if (s >= static_cast<double>(path.size() - 1)) {
            const double last = std::min(path.back(), 1.0 - 1e-12);
            val = 1.0 - (1.0 - last) * std::exp(-mu * (s - static_cast<double>(path.size() - 1)) * h);
        } else {
            const auto k = static_cast<std::size_t>(s);
            const double t = s - static_cast<double>(k);
            val = (1 - t) * path[k] + t * path[std::min(k + 1, path.size() - 1)];
        }
        x[i] = std::clamp(val, 1e-300, 1.0 - 1e-16);
    }
    x[n] = c;
    return x;
}

void node_derivatives(const BistableNonlinearity& f, WaveProfile& p) {
    const std::size_t n = p.phi.size();
    const double h = p.h;
    const auto& y = p.phi;
    p.dphi.assign(n, 0.0);
    p.d2phi.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (i >= 2 && i + 2 < n)
            p.dphi[i] = (-y[i + 2] + 8 * y[i + 1] - 8 * y[i - 1] + y[i - 2]) / (12 * h);
        else
            p.dphi[i] = (y[i + 1] - y[i - 1]) / (2 * h);
    }
    p.dphi[0] = p.lambda * y[0];
    p.dphi[n - 1] = p.mu * (1.0 - y[n - 1]);
    for (std::size_t i = 0; i < n; ++i) p.d2phi[i] = p.speed * p.dphi[i] - f.value(y[i]);
}

double tail_left(const WaveProfile& p, double z, int order) {
    const double a = p.phi.front() * std::exp(-p.lambda * p.z_min);
    return std::pow(p.lambda, order) * a * std::exp(p.lambda * z);
}

double tail_right(const WaveProfile& p, double z, int order) {
    const double zm = p.z_max();
    const double a = (1.0 - p.phi.back()) * std::exp(p.mu * zm);
    const double e = a * std::exp(-p.mu * z);
    if (order == 0) return 1.0 - e;
    if (order == 1) return p.mu * e;
    return -p.mu * p.mu * e;
}

}  // namespace

std::pair<double, double> decay_rates(double df0, double df1, double c) {
    if (!(df0 < 0.0) || !(df1 < 0.0)) throw PreconditionError("decay_rates: endpoint derivatives must be negative");
    const double lam = 0.5 * (c + std::sqrt(c * c - 4.0 * df0));
    const double mu = 0.5 * (-c + std::sqrt(c * c - 4.0 * df1));
    return {lam, mu};
}

std::pair<double, double> decay_rates(const BistableNonlinearity& f, double c) {
    return decay_rates(f.derivative_at_0(), f.derivative_at_1(), c);
}

double profile_residual_norm(const BistableNonlinearity& f, double c, double h, const std::vector<double>& phi) {
    double r = 0.0;
    for (std::size_t i = 1; i + 1 < phi.size(); ++i) {
        const double d2 = (phi[i + 1] - 2 * phi[i] + phi[i - 1]) / (h * h);
        const double d1 = (phi[i + 1] - phi[i - 1]) / (2 * h);
        r = std::max(r, std::abs(d2 - c * d1 + f.value(phi[i])));
    }
    return r;
}

WaveProfile solve_wave(const BistableNonlinearity& f, double z_min, double z_max, double h, double tol) {
    if (!(f.potential_at_1() > 0.0))
        throw PreconditionError("solve_wave: integral of f over [0,1] must be positive (speed would be <= 0)");
    if (!(f.derivative_at_0() < 0.0 && f.derivative_at_1() < 0.0))
        throw PreconditionError("solve_wave: f'(0) and f'(1) must be negative");
    if (!(h > 0.0 && h <= 0.1)) throw PreconditionError("solve_wave: need 0 < h <= 0.1");
    if (!(z_min < 0.0 && z_max > 0.0)) throw PreconditionError("solve_wave: grid must contain z = 0");
    // A-priori decay lengths from the c = 0 rates, counted per side.
    const double lam0 = std::sqrt(-f.derivative_at_0()), mu0 = std::sqrt(-f.derivative_at_1());
    const double lengths = -z_min * lam0 + z_max * mu0;
    if (lengths < 40.0) throw PreconditionError("solve_wave: domain shorter than 40 decay lengths");
    const double cells = (z_max - z_min) / h;
    const double rc = std::round(cells);
    if (std::abs(cells - rc) > 1e-6 * std::max(1.0, rc)) throw PreconditionError("solve_wave: (z_max - z_min)/h must be an integer");
    const auto n = static_cast<std::size_t>(rc) + 1;

    Collocation sys(f, z_min, h, n);
    Eigen::VectorXd x(n + 1);
    const double z0 = std::log((1.0 - f.theta()) / f.theta());
    for (std::size_t i = 0; i < n; ++i) {
        const double z = z_min + static_cast<double>(i) * h;
        x[i] = 1.0 / (1.0 + std::exp(-(z - z0)));
    }
    x[n] = 0.0;

    auto valid = [&](const Eigen::VectorXd& v) {
        if (!(v[n] > 0.0)) return false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(v[i] > 0.0 && v[i] <= 1.0)) return false;
            if (i > 0 && !(v[i] >= v[i - 1]) ) return false;
            if (i > 0 && v[i] == v[i - 1] && v[i] < 1.0 - 1e-10) return false;
        }
        return true;
    };

    // Where 1 - phi is below 1e-10 the Newton iterate is dominated by roundoff (it can
    // sit a few ulps above 1); those nodes are replaced by the matched right tail.
    auto project_tail = [&](Eigen::VectorXd& v) {
        if (!(v[n] > 0.0)) return;
        std::size_t k = n;
        while (k > 0 && 1.0 - v[k - 1] < 1e-10) --k;
        if (k == 0 || k == n) return;
        const double mu = decay_rates(f, v[n]).second;
        const double gap = 1.0 - v[k - 1];
        for (std::size_t i = k; i < n; ++i) v[i] = 1.0 - gap * std::exp(-mu * static_cast<double>(i - k + 1) * h);
    };

    NewtonOutcome res = damped_newton(sys, x, tol, 60);
    project_tail(x);
    bool fallback = false;
    if (!res.converged || !valid(x)) {
        fallback = true;
        x = shooting_guess(f, z_min, h, n);
        const int prior = res.iterations;
        res = damped_newton(sys, x, tol, 60);
        res.iterations += prior;
        project_tail(x);
    }

    WaveProfile p;
    p.z_min = z_min;
    p.h = h;
    p.theta = f.theta();
    p.speed = x[n];
    p.phi.assign(x.data(), x.data() + n);
    p.newton_iterations = res.iterations;
    p.newton_residual = res.residual;
    p.used_fallback = fallback;
    if (!res.converged || !valid(x)) {
        throw NonconvergenceError("solve_wave: Newton stagnated after speed-bisection fallback (residual " +
                                      std::to_string(res.residual) + ")",
                                  p);
    }
    const auto [lam, mu] = decay_rates(f, p.speed);
    p.lambda = lam;
    p.mu = mu;
    p.residual_norm = profile_residual_norm(f, p.speed, h, p.phi);
    node_derivatives(f, p);
    fit_envelope_constants(p);
    return p;
}

EnvelopeConstants fit_envelope_constants(WaveProfile& p) {
    EnvelopeConstants e;
    const double inf = std::numeric_limits<double>::infinity();
    e.alpha0 = e.gamma0 = e.alpha1 = e.gamma1 = inf;
    e.beta0 = e.delta0 = e.beta1 = e.delta1 = 0.0;
    double cphi = 0.0;
    e.left_min = e.right_min = inf;
    e.left_max = e.right_max = -inf;
    // Right-side ratios are fitted only where 1 - phi is resolved; beyond that the
    // profile is the matched exponential tail and the ratios are constant.
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double z = p.z(i);
        if (z > 0.0 && 1.0 - p.phi[i] < 1e-10) break;
        const double r1 = (1.0 - p.phi[i]) * std::exp(p.mu * z);
        cphi = std::max(cphi, r1);
        if (z <= 0.0) {
            const double w = std::exp(-p.lambda * z);
            const double a = p.phi[i] * w, g = p.dphi[i] * w;
            e.alpha0 = std::min(e.alpha0, a);
            e.beta0 = std::max(e.beta0, a);
            e.gamma0 = std::min(e.gamma0, g);
            e.delta0 = std::max(e.delta0, g);
            e.left_min = std::min(e.left_min, z);
            e.left_max = std::max(e.left_max, z);
        } else {
            const double g = p.dphi[i] * std::exp(p.mu * z);
            e.alpha1 = std::min(e.alpha1, r1);
            e.beta1 = std::max(e.beta1, r1);
            e.gamma1 = std::min(e.gamma1, g);
            e.delta1 = std::max(e.delta1, g);
            e.right_min = std::min(e.right_min, z);
            e.right_max = std::max(e.right_max, z);
        }
    }
    p.envelope = e;
    p.c_phi = cphi;
    return e;
}

double eval_profile_derivative(const WaveProfile& p, double z, int order) {
    const std::size_t n = p.size();
    if (z < p.z_min) return tail_left(p, z, order);
    if (z > p.z_max()) return tail_right(p, z, order);
    const double s = (z - p.z_min) / p.h;
    const double r = std::round(s);
    if (std::abs(s - r) < 1e-9) {
        const auto i = static_cast<std::size_t>(r);
        return order == 0 ? p.phi[i] : order == 1 ? p.dphi[i] : p.d2phi[i];
    }
    auto i = static_cast<std::size_t>(std::floor(s));
    if (i >= n - 1) i = n - 2;
    const double t = s - static_cast<double>(i);
    const double h = p.h;
    const double p0 = p.phi[i], p1 = p.phi[i + 1];
    const double d0 = p.dphi[i] * h, d1 = p.dphi[i + 1] * h;
    const double s0 = p.d2phi[i] * h * h, s1 = p.d2phi[i + 1] * h * h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    if (order == 0) {
        return (1 - 10 * t3 + 15 * t4 - 6 * t5) * p0 + (t - 6 * t3 + 8 * t4 - 3 * t5) * d0 +
               0.5 * (t2 - 3 * t3 + 3 * t4 - t5) * s0 + 0.5 * (t3 - 2 * t4 + t5) * s1 +
               (-4 * t3 + 7 * t4 - 3 * t5) * d1 + (10 * t3 - 15 * t4 + 6 * t5) * p1;
    }
    if (order == 1) {
        return ((-30 * t2 + 60 * t3 - 30 * t4) * p0 + (1 - 18 * t2 + 32 * t3 - 15 * t4) * d0 +
                0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4) * s0 + 0.5 * (3 * t2 - 8 * t3 + 5 * t4) * s1 +
                (-12 * t2 + 28 * t3 - 15 * t4) * d1 + (30 * t2 - 60 * t3 + 30 * t4) * p1) /
               h;
    }
    return ((-60 * t + 180 * t2 - 120 * t3) * p0 + (-36 * t + 96 * t2 - 60 * t3) * d0 +
            0.5 * (2 - 18 * t + 36 * t2 - 20 * t3) * s0 + 0.5 * (6 * t - 24 * t2 + 20 * t3) * s1 +
            (-24 * t + 84 * t2 - 60 * t3) * d1 + (60 * t - 180 * t2 + 120 * t3) * p1) /
           (h * h);
}

double eval_profile(const WaveProfile& p, double z) {
    const double v = eval_profile_derivative(p, z, 0);
    return std::clamp(v, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

double profile_inverse(const WaveProfile& p, double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("profile_inverse: level must lie in (0,1)");
    if (level <= p.phi.front()) {
        const double a = p.phi.front() * std::exp(-p.lambda * p.z_min);
        return std::log(level / a) / p.lambda;
    }
    if (level >= p.phi.back()) {
        const double a = (1.0 - p.phi.back()) * std::exp(p.mu * p.z_max());
        return -std::log((1.0 - level) / a) / p.mu;
    }
    auto it = std::upper_bound(p.phi.begin(), p.phi.end(), level);
    const auto k = static_cast<std::size_t>(it - p.phi.begin());
    double lo = p.z(k - 1), hi = p.z(k);
    for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (eval_profile_derivative(p, mid, 0) < level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

nlohmann::json EnvelopeConstants::to_json() const {
    return {{"alpha0", alpha0}, {"beta0", beta0},   {"alpha1", alpha1},       {"beta1", beta1},
            {"gamma0", gamma0}, {"delta0", delta0}, {"gamma1", gamma1},       {"delta1", delta1},
            {"fitted_left", {left_min, left_max}},  {"fitted_right", {right_min, right_max}}};
}

EnvelopeConstants EnvelopeConstants::from_json(const nlohmann::json& j) {
    EnvelopeConstants e;
    e.alpha0 = j.at("alpha0");
    e.beta0 = j.at("beta0");
    e.alpha1 = j.at("alpha1");
    e.beta1 = j.at("beta1");
    e.gamma0 = j.at("gamma0");
    e.delta0 = j.at("delta0");
    e.gamma1 = j.at("gamma1");
    e.delta1 = j.at("delta1");
    e.left_min = j.at("fitted_left")[0];
    e.left_max = j.at("fitted_left")[1];
    e.right_min = j.at("fitted_right")[0];
    e.right_max = j.at("fitted_right")[1];
    return e;
}

void write_profile(const WaveProfile& p, const std::filesystem::path& csv, const std::filesystem::path& sidecar) {
    for (const auto& f : {csv, sidecar})
        if (f.has_parent_path()) std::filesystem::create_directories(f.parent_path());
    std::ofstream out(csv);
    if (!out) throw ConfigError("cannot write " + csv.string());
    out << "z,phi,dphi\n";
    char buf[128];
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.z(i), p.phi[i], p.dphi[i]);
        out << buf;
    }
    nlohmann::json j;
    j["c"] = p.speed;
    j["lambda"] = p.lambda;
    j["mu"] = p.mu;
    j["theta"] = p.theta;
    j["residual_norm"] = p.residual_norm;
    j["newton_residual"] = p.newton_residual;
    j["newton_iterations"] = p.newton_iterations;
    j["used_fallback"] = p.used_fallback;
    j["z_min"] = p.z_min;
    j["z_max"] = p.z_max();
    j["h"] = p.h;
    j["nodes"] = p.size();
    j["C_phi"] = p.c_phi;
    j["envelope_constants"] = p.envelope.to_json();
    std::ofstream js(sidecar);
    if (!js) throw ConfigError("cannot write " + sidecar.string());
    js << j.dump(2) << "\n";
}

WaveProfile read_profile(const BistableNonlinearity& f, const std::filesystem::path& csv, const std::filesystem::path& sidecar) {
    std::ifstream js(sidecar);
    if (!js) throw DependencyError("missing wave artifact " + sidecar.string() + " (run the 'wave' stage first)");
    const auto j = nlohmann::json::parse(js);
    std::ifstream in(csv);
    if (!in) throw DependencyError("missing wave artifact " + csv.string() + " (run the 'wave' stage first)");
    WaveProfile p;
    p.speed = j.at("c");
    p.lambda = j.at("lambda");
    p.mu = j.at("mu");
    p.theta = j.at("theta");
    p.residual_norm = j.at("residual_norm");
    p.newton_residual = j.at("newton_residual");
    p.newton_iterations = j.at("newton_iterations");
    p.used_fallback = j.at("used_fallback");
    p.z_min = j.at("z_min");
    p.h = j.at("h");
    p.c_phi = j.at("C_phi");
    p.envelope = EnvelopeConstants::from_json(j.at("envelope_constants"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        p.phi.push_back(std::stod(b));
        p.dphi.push_back(std::stod(c));
    }
    if (p.phi.size() != j.at("nodes").get<std::size_t>()) throw ConfigError("profile CSV and sidecar disagree: " + csv.string());
    p.d2phi.resize(p.phi.size());
    for (std::size_t i = 0; i < p.size(); ++i) p.d2phi[i] = p.speed * p.dphi[i] - f.value(p.phi[i]);
    return p;
}

}  // namespace frontlab
