// One PASS/FAIL line per acceptance criterion. Criteria 1-3 and 9 run directly;
// the rest read the checks of a full pipeline run on the given config.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "frontlab/stages.hpp"

using namespace frontlab;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Line {
    bool pass = true;
    std::ostringstream detail;
    void add(bool ok, const std::string& what) {
        pass = pass && ok;
        if (detail.tellp() > 0) detail << "; ";
        detail << (ok ? "" : "FAILED ") << what;
    }
};

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

// Adds every check of `stage` whose name starts with one of `prefixes`.
void add_checks(Line& line, const json& stage, std::initializer_list<const char*> prefixes) {
    for (const auto& c : stage.at("checks")) {
        const std::string name = c.at("name");
        bool match = false;
        for (const char* p : prefixes) match = match || name.rfind(p, 0) == 0;
        if (!match) continue;
        const std::string value = c.at("value").is_null() ? "null" : num(c.at("value").get<double>());
        line.add(c.at("pass").get<bool>(), name + "=" + value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string config_path, out_dir;
    unsigned threads = 1;
    app.add_option("--config", config_path)->required();
    app.add_option("--out", out_dir)->required();
    app.add_option("--threads", threads);
    CLI11_PARSE(app, argc, argv);

    std::map<int, Line> lines;

    // 1-3: closed-form cubic fronts.
    {
        const auto t0 = Clock::now();
        double speed_err = 0, prof_err = 0, ident = 0, rate_err = 0;
        for (double th : {0.1, 0.2, 0.25, 0.3, 0.4}) {
            const auto f = BistableNonlinearity::cubic(th);
            const WaveProfile p = solve_wave(f, -60, 60, 0.05, 1e-10);
            speed_err = std::max(speed_err, std::abs(p.speed - (1 - 2 * th) / std::sqrt(2.0)));
            const double z0 = std::sqrt(2.0) * std::log((1 - th) / th);
            for (std::size_t i = 0; i < p.size(); ++i)
                prof_err = std::max(prof_err, std::abs(p.phi[i] - 1 / (1 + std::exp(-(p.z(i) - z0) / std::sqrt(2.0)))));
            ident = std::max({ident, std::abs(p.lambda * p.lambda - p.speed * p.lambda + f.derivative_at_0()),
                              std::abs(p.mu * p.mu + p.speed * p.mu + f.derivative_at_1())});
            rate_err = std::max({rate_err, std::abs(p.lambda - 1 / std::sqrt(2.0)), std::abs(p.mu - 1 / std::sqrt(2.0))});
        }
        const double secs = seconds_since(t0);
        lines[1].add(speed_err <= 1e-6, "max speed error " + num(speed_err));
        lines[1].add(secs <= 10.0, "runtime " + num(secs) + " s");
        lines[2].add(prof_err <= 1e-4, "max profile error " + num(prof_err));
        lines[3].add(ident <= 1e-12, "identity residual " + num(ident));
        lines[3].add(rate_err <= 1e-6, "rate error vs 1/sqrt2 " + num(rate_err));
    }

    // 9: discrete comparison principle.
    {
        const auto t0 = Clock::now();
        auto r = std::make_shared<const SpatialReaction>(BistableNonlinearity::cubic(0.2),
                                                         BistableNonlinearity::cubic(0.3), 2.0);
        const SimGrid g = SimGrid::make(-10.0, 9.9, 0.1);
        const double dt = 2e-3;
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double worst = HUGE_VAL;
        for (int pair = 0; pair < 10; ++pair) {
            std::vector<double> a(g.n), b(g.n);
            for (std::size_t i = 0; i < g.n; ++i) {
                a[i] = U(rng);
                b[i] = a[i] + (1 - a[i]) * U(rng);
            }
            const Trajectory ta = simulate(r, g, a, 0.0, 1e4 * dt, dt, Frame::lab(), dt);
            const Trajectory tb = simulate(r, g, b, 0.0, 1e4 * dt, dt, Frame::lab(), dt);
            for (std::size_t k = 0; k < ta.snapshots.size(); ++k)
                for (std::size_t i = 0; i < g.n; ++i)
                    worst = std::min(worst, tb.snapshots[k].u[i] - ta.snapshots[k].u[i]);
        }
        const double secs = seconds_since(t0);
        lines[9].add(worst >= -1e-10, "min (v - u) over 10 pairs x 1e4 steps " + num(worst));
        lines[9].add(secs <= 30.0, "runtime " + num(secs) + " s");
    }

    // 4-8, 10: full pipeline.
    const RunConfig cfg = RunConfig::load(config_path);
    std::map<std::string, json> res;
    std::map<std::string, double> secs;
    try {
        Pipeline p(cfg, out_dir, threads);
        for (const auto& s : stage_names()) {
            const auto t0 = Clock::now();
            res[s] = p.run_stage(s);
            secs[s] = seconds_since(t0);
        }
        p.write_manifest();
    } catch (const std::exception& e) {
        std::cout << "pipeline aborted: " << e.what() << "\n";
        for (int k : {4, 5, 6, 7, 8, 10}) lines[k].add(false, "pipeline aborted");
    }
    if (res.count("report")) {
        add_checks(lines[4], res["metrics"],
                   {"terminal_speed_relative_error", "terminal_dist_inf", "beta_stability_last_quarter"});
        lines[4].add(secs["simulate"] <= 300.0, "simulation runtime " + num(secs["simulate"]) + " s");
        add_checks(lines[5], res["envelopes"], {"ordering_lower", "ordering_upper1", "ordering_upper2"});
        add_checks(lines[6], res["envelopes"], {"residual_sign_"});
        add_checks(lines[7], res["lyapunov"], {"supL_", "dLdt_plus_Q_tail", "min_Q_final_quarter", "Q_of_shifted_wave"});
        add_checks(lines[8], res["entire"], {"ordering_u", "delta_positive"});
        lines[8].add(true, "delta " + num(res["entire"]["report"]["delta"].get<double>()));
        add_checks(lines[10], res["entire"], {"perturbation_", "base_n"});
    }

    bool all = true;
    for (auto& [k, line] : lines) {
        all = all && line.pass;
        std::cout << "CRITERION " << k << ": " << (line.pass ? "PASS" : "FAIL") << " (" << line.detail.str() << ")\n";
    }
    return all ? 0 : 1;
}
