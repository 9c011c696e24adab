#include "frontlab/frontmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "frontlab/errors.hpp"
#include "frontlab/numerics.hpp"

namespace frontlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string at_time(double t) {
    std::ostringstream os;
    os << " (snapshot t=" << t << ")";
    return os.str();
}

nlohmann::json nullable(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

double front_position(const std::vector<double>& u, const SimGrid& grid, double level, double t) {
    int count = 0;
    double pos = 0.0;
    for (std::size_t i = 1; i < u.size(); ++i) {
        const double a = u[i - 1] - level, b = u[i] - level;
        if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
            ++count;
            pos = grid.x(i - 1) + grid.h * a / (a - b);
        }
    }
    if (count == 0) throw ExtractionError("front_position: no crossing of level" + at_time(t));
    if (count > 1) throw ExtractionError("front_position: multiple crossings of level" + at_time(t));
    return pos;
}

ShiftFit fit_shift(const std::vector<double>& u, const SimGrid& grid, double t, const Frame& frame,
                   const WaveProfile& profile) {
    const double offset = (profile.speed - frame.node_speed()) * t;
    double crossing;
    try {
        crossing = front_position(u, grid, 0.5, t) + offset;
    } catch (const ExtractionError& e) {
        throw FitError(std::string("fit_shift: ") + e.what());
    }
    const double beta0 = profile_inverse(profile, 0.5) - crossing;
    const std::size_t n = u.size();
    std::vector<double> terms(n);

    auto objective = [&](double beta) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = u[i] - eval_profile(profile, grid.x(i) + offset + beta);
            terms[i] = d * d;
        }
        return pairwise_sum(terms);
    };
    const double a = beta0 - 10.0, b = beta0 + 10.0;
    double beta = golden_section_min(objective, a, b, 1e-7);
    if (beta - a < 1e-3 || b - beta < 1e-3) throw FitError("fit_shift: optimum at the bracket edge" + at_time(t));

    // Newton polish on the stationarity condition sum (u - phi) phi' = 0.
    std::vector<double> t2(n);
    for (int it = 0; it < 8; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const double z = grid.x(i) + offset + beta;
            const double p = eval_profile(profile, z);
            const double dp = eval_profile_derivative(profile, z, 1);
            const double d2p = eval_profile_derivative(profile, z, 2);
            terms[i] = (u[i] - p) * dp;
            t2[i] = dp * dp - (u[i] - p) * d2p;
        }
        const double g = pairwise_sum(terms), hss = pairwise_sum(t2);
        if (!(hss > 0.0)) break;
        const double step = g / hss;
        beta += step;
        if (std::abs(step) < 1e-14) break;
    }

    ShiftFit fit;
    fit.beta = beta;
    for (std::size_t i = 0; i < n; ++i)
        fit.dist_inf = std::max(fit.dist_inf, std::abs(u[i] - eval_profile(profile, grid.x(i) + offset + beta)));
    if (fit.dist_inf > 0.4) throw FitError("fit_shift: snapshot is outside the 0.4 basin of the profile" + at_time(t));
    return fit;
}

nlohmann::json FrontSeries::to_json() const {
    nlohmann::json j;
    j["terminal_speed"] = terminal_speed;
    j["samples"] = times.size();
    double last_beta = kNaN, last_dist = kNaN;
    for (std::size_t k = shifts.size(); k-- > 0;) {
        if (std::isfinite(shifts[k])) {
            last_beta = shifts[k];
            last_dist = distances[k];
            break;
        }
    }
    j["final_beta"] = nullable(last_beta);
    j["final_dist_inf"] = nullable(last_dist);
    return j;
}

FrontSeries speed_series(const Trajectory& traj, double level, const WaveProfile* profile, std::size_t stride,
                         unsigned threads) {
    if (traj.frame.kind != Frame::Kind::lab) throw ConfigError("speed_series: needs a lab-frame trajectory");
    FrontSeries fs;
    const std::size_t n = traj.snapshots.size();
    fs.times.resize(n);
    fs.positions.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& s = traj.snapshots[k];
        fs.times[k] = s.t;
        fs.positions[k] = front_position(s.u, traj.grid, level, s.t);
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        fs.speed_times.push_back(fs.times[k]);
        fs.speeds.push_back((fs.positions[k + 1] - fs.positions[k - 1]) / (fs.times[k + 1] - fs.times[k - 1]));
    }
    if (!fs.speeds.empty()) {
        const std::size_t q = std::max<std::size_t>(1, fs.speeds.size() / 4);
        double sum = 0.0;
        for (std::size_t k = fs.speeds.size() - q; k < fs.speeds.size(); ++k) sum += fs.speeds[k];
        fs.terminal_speed = sum / static_cast<double>(q);
    }
    if (profile) {
        fs.shifts.assign(n, kNaN);
        fs.distances.assign(n, kNaN);
        stride = std::max<std::size_t>(1, stride);
        parallel_for(n, threads, [&](std::size_t k) {
            if (k % stride != 0 && k + 1 != n) return;
            const auto& s = traj.snapshots[k];
            const ShiftFit f = fit_shift(s.u, traj.grid, s.t, traj.frame, *profile);
            fs.shifts[k] = f.beta;
            fs.distances[k] = f.dist_inf;
        });
    }
    return fs;
}

nlohmann::json DecayReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : fits)
        arr.push_back({{"quantity", f.quantity},
                       {"side", f.side},
                       {"skipped", f.skipped},
                       {"note", f.note},
                       {"rate", f.rate},
                       {"C", f.C},
                       {"sigma", f.sigma},
                       {"points", f.points},
                       {"pass", f.pass}});
    return {{"t", t}, {"c2", c2}, {"fits", arr}, {"pass", pass}};
}

DecayReport decay_check(const Trajectory& traj, double c2, double t_from, double t_to) {
    const auto& snaps = traj.snapshots;
    long k = -1;
    for (std::size_t j = 1; j + 1 < snaps.size(); ++j)
        if (snaps[j].t >= t_from - 1e-9 && snaps[j].t <= t_to + 1e-9) k = static_cast<long>(j);
    if (k < 0) throw ConfigError("decay_check: no interior snapshot in the window");
    const auto& cur = snaps[static_cast<std::size_t>(k)];
    const auto& prv = snaps[static_cast<std::size_t>(k) - 1];
    const auto& nxt = snaps[static_cast<std::size_t>(k) + 1];
    const std::size_t n = cur.u.size();
    const double h = traj.grid.h;
    const double s = traj.frame.node_speed();
    const double z_shift = (c2 - s) * cur.t;

    std::vector<double> z(n), uz(n, 0.0), uzz(n, 0.0), ut(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i] = traj.grid.x(i) + z_shift;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        uz[i] = (cur.u[i + 1] - cur.u[i - 1]) / (2.0 * h);
        uzz[i] = (cur.u[i + 1] - 2.0 * cur.u[i] + cur.u[i - 1]) / (h * h);
        // Time derivative at fixed z from the node-following difference.
        ut[i] = (nxt.u[i] - prv.u[i]) / (nxt.t - prv.t) - (c2 - s) * uz[i];
    }
    const double zf = front_position(cur.u, traj.grid, 0.5, cur.t) + z_shift;
    const std::size_t margin = n / 10;

    DecayReport rep;
    rep.t = cur.t;
    rep.c2 = c2;
    auto fit = [&](const std::string& name, const std::string& side, auto&& q) {
        DecayFit f;
        f.quantity = name;
        f.side = side;
        const bool right = side == "right";
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t m = 0;
        for (std::size_t i = std::max<std::size_t>(margin, 1); i + std::max<std::size_t>(margin, 1) < n; ++i) {
            if (right ? z[i] <= zf : z[i] >= zf) continue;
            const double v = std::abs(q(i));
            if (v < 1e-12 || v > 1e-2) continue;
            const double y = std::log(v);
            sx += z[i];
            sy += y;
            sxx += z[i] * z[i];
            sxy += z[i] * y;
            ++m;
        }
        f.points = m;
        if (m < 10) {
            f.skipped = true;
            f.note = "insufficient dynamic range";
            rep.fits.push_back(f);
            return;
        }
        const double md = static_cast<double>(m);
        const double slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / md;
        f.rate = right ? -slope : slope;
        f.C = std::exp(icpt);
        f.sigma = right ? f.rate + 0.5 * c2 : f.rate - 0.5 * c2;
        f.pass = f.rate >= 0.5 * c2;
        rep.fits.push_back(f);
    };
    fit("one_minus_u", "right", [&](std::size_t i) { return 1.0 - cur.u[i]; });
    fit("u_z", "right", [&](std::size_t i) { return uz[i]; });
    fit("u_zz", "right", [&](std::size_t i) { return uzz[i]; });
    fit("u_t", "right", [&](std::size_t i) { return ut[i]; });
    fit("u", "left", [&](std::size_t i) { return cur.u[i]; });
    fit("u_z", "left", [&](std::size_t i) { return uz[i]; });
    fit("u_zz", "left", [&](std::size_t i) { return uzz[i]; });
    fit("u_t", "left", [&](std::size_t i) { return ut[i]; });

    rep.pass = false;
    bool all = true;
    for (const auto& f : rep.fits) {
        if (f.skipped) continue;
        rep.pass = true;
        all = all && f.pass;
    }
    rep.pass = rep.pass && all;
    return rep;
}

ZoneResult transition_zone(const std::vector<double>& u, const SimGrid& grid, double eta_level, const Snapshot* prev,
                           const Snapshot* next) {
    if (!(eta_level > 0.0 && eta_level <= 0.5)) throw DomainError("transition_zone: eta must lie in (0, 1/2]");
    ZoneResult z;
    z.min_dt = kNaN;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < eta_level || u[i] > 1.0 - eta_level) continue;
        const double x = grid.x(i);
        if (z.empty) {
            z.lo = z.hi = x;
            z.empty = false;
        } else {
            z.lo = std::min(z.lo, x);
            z.hi = std::max(z.hi, x);
        }
        if (prev && next) {
            const double d = (next->u[i] - prev->u[i]) / (next->t - prev->t);
            z.min_dt = std::isnan(z.min_dt) ? d : std::min(z.min_dt, d);
        }
    }
    return z;
}

}  // namespace frontlab
