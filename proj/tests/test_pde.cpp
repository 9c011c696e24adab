#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "frontlab/errors.hpp"
#include "frontlab/frontmetrics.hpp"
#include "frontlab/pde.hpp"

using namespace frontlab;

namespace {

std::shared_ptr<const SpatialReaction> homogeneous(double th) {
    return std::make_shared<const SpatialReaction>(BistableNonlinearity::cubic(th), BistableNonlinearity::cubic(th), 2.0);
}

std::shared_ptr<const SpatialReaction> blended() {
    return std::make_shared<const SpatialReaction>(BistableNonlinearity::cubic(0.2), BistableNonlinearity::cubic(0.3),
                                                   2.0);
}

}  // namespace

TEST_CASE("grid construction") {
    const SimGrid g = SimGrid::make(-10, 10, 0.05);
    CHECK(g.n == 401);
    CHECK(g.x(400) == doctest::Approx(10.0));
    CHECK_THROWS_AS(SimGrid::make(0, 1, 0.3), ConfigError);
}

TEST_CASE("equilibria are preserved") {
    const SimGrid g = SimGrid::make(-20, 20, 0.1);
    for (double c : {0.0, 1.0}) {
        const Trajectory tr = simulate(blended(), g, std::vector<double>(g.n, c), 0.0, 5.0, 0.01, Frame::lab(), 1.0);
        for (const auto& s : tr.snapshots)
            for (double v : s.u) CHECK(std::abs(v - c) <= 1e-13);  // roundoff of the tridiagonal solves
        CHECK(tr.clamp_events == 0);
    }
}

TEST_CASE("precondition and stability errors") {
    const SimGrid g = SimGrid::make(-5, 5, 0.1);
    std::vector<double> u(g.n, 0.5);
    u[3] = 1.2;
    CHECK_THROWS_AS(simulate(blended(), g, u, 0, 1, 0.01, Frame::lab(), 0.5), PreconditionError);
    CHECK_THROWS_AS(simulate(blended(), g, std::vector<double>(g.n, 0.5), 0, 10, 5.0, Frame::lab(), 5.0), ConfigError);
}

TEST_CASE("homogeneous front travels at the wave speed") {
    const double th = 0.3;
    const SimGrid g = SimGrid::make(-40, 40, 0.05);
    std::vector<double> u0(g.n);
    for (std::size_t i = 0; i < g.n; ++i) u0[i] = 1.0 / (1.0 + std::exp(-g.x(i) / std::sqrt(2.0)));
    const Trajectory tr = simulate(homogeneous(th), g, u0, 0.0, 40.0, 0.01, Frame::lab(), 1.0);
    const double p1 = front_position(tr.snapshots[20].u, g, 0.5);
    const double p2 = front_position(tr.snapshots[40].u, g, 0.5);
    const double speed = (p2 - p1) / 20.0;
    // fronts with 1 on the right move left at speed c
    CHECK(speed == doctest::Approx(-(1.0 - 2.0 * th) / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("moving frame with advection matches the resampled lab run") {
    const double th = 0.3, c = (1.0 - 2.0 * th) / std::sqrt(2.0);
    const SimGrid g = SimGrid::make(-30, 30, 0.05);
    std::vector<double> u0(g.n);
    for (std::size_t i = 0; i < g.n; ++i) u0[i] = 1.0 / (1.0 + std::exp(-g.x(i) / std::sqrt(2.0)));
    const Trajectory lab = simulate(homogeneous(th), g, u0, 0.0, 10.0, 0.005, Frame::lab(), 1.0);
    const Trajectory mov = simulate(homogeneous(th), g, u0, 0.0, 10.0, 0.005, Frame::moving(c), 1.0);
    const Trajectory res = to_moving_frame(lab, c);
    double err = 0;
    for (std::size_t i = 200; i + 200 < g.n; ++i)
        err = std::max(err, std::abs(res.snapshots.back().u[i] - mov.snapshots.back().u[i]));
    CHECK(err < 1e-3);
    // the wave is nearly stationary in its own frame
    double drift = 0;
    for (std::size_t i = 0; i < g.n; ++i)
        drift = std::max(drift, std::abs(mov.snapshots.back().u[i] - mov.snapshots[5].u[i]));
    CHECK(drift < 2e-3);
    const Trajectory same = to_moving_frame(lab, 0.0);
    CHECK(same.snapshots.back().u == lab.snapshots.back().u);
}

TEST_CASE("ordered data stay ordered") {
    const SimGrid g = SimGrid::make(-10, 9.9, 0.1);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> a(g.n), b(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        a[i] = U(rng);
        b[i] = a[i] + (1.0 - a[i]) * U(rng);
    }
    const Trajectory ta = simulate(blended(), g, a, 0.0, 4.0, 2e-3, Frame::lab(), 2e-3);
    const Trajectory tb = simulate(blended(), g, b, 0.0, 4.0, 2e-3, Frame::lab(), 2e-3);
    double worst = HUGE_VAL;
    for (std::size_t k = 0; k < ta.snapshots.size(); ++k)
        for (std::size_t i = 0; i < g.n; ++i) worst = std::min(worst, tb.snapshots[k].u[i] - ta.snapshots[k].u[i]);
    CHECK(worst >= -1e-10);
}

TEST_CASE("snapshot lookup and interpolation") {
    const SimGrid g = SimGrid::make(-5, 5, 0.1);
    const Trajectory tr = simulate(blended(), g, std::vector<double>(g.n, 0.5), 0.0, 2.0, 0.01, Frame::lab(), 0.5);
    CHECK(tr.snapshots.size() == 5);
    CHECK(tr.find(1.0) == 2);
    CHECK(tr.find(0.7) == -1);
    const auto mid = tr.at_time(0.75);
    CHECK(mid[10] == doctest::Approx(0.5 * (tr.snapshots[1].u[10] + tr.snapshots[2].u[10])));
    CHECK_THROWS_AS(tr.at_time(3.0), DomainError);
}

TEST_CASE("trajectory storage round-trip and reaction hash") {
    const auto dir = std::filesystem::temp_directory_path() / "frontlab_traj_test";
    std::filesystem::remove_all(dir);
    const SimGrid g = SimGrid::make(-5, 5, 0.1);
    std::vector<double> u0(g.n);
    for (std::size_t i = 0; i < g.n; ++i) u0[i] = 0.5 + 0.4 * std::tanh(g.x(i));
    const Trajectory tr = simulate(blended(), g, u0, -1.0, 1.0, 0.01, Frame::lab(), 0.5);
    write_trajectory(tr, dir);
    const Trajectory back = read_trajectory(dir, blended());
    REQUIRE(back.snapshots.size() == tr.snapshots.size());
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        CHECK(back.snapshots[k].t == tr.snapshots[k].t);
        CHECK(back.snapshots[k].u == tr.snapshots[k].u);
    }
    CHECK_THROWS_AS(read_trajectory(dir, homogeneous(0.3)), DependencyError);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(read_trajectory(dir, blended()), DependencyError);
}

TEST_CASE("damping level and rate for the default pair") {
    const auto r = blended();
    // f1' vanishes at ((1+theta) - sqrt((1+theta)^2 - 3 theta))/3; eta is half of it
    const double s = (1.2 - std::sqrt(1.44 - 0.6)) / 3.0;
    CHECK(max_damping_level(*r) == doctest::Approx(0.5 * s).epsilon(1e-6));
    // -f1'(0.05) = 0.0875 binds at eta = 0.025
    CHECK(damping_rate(*r, 0.025) == doctest::Approx(0.0875).epsilon(1e-6));
}

TEST_CASE("entire initial data lies in [0,1] and needs t0 <= T1") {
    const auto r = blended();
    const WaveProfile w1 = solve_wave(r->f1(), -60, 60, 0.05, 1e-10);
    const SimGrid g = SimGrid::make(-60, 40, 0.1);
    const auto u = entire_initial_data(*r, w1, -40.0, g);
    for (double v : u) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(entire_initial_data(*r, w1, 10.0, g), PreconditionError);
}

TEST_CASE("orbit distance recovers a time shift") {
    const double th = 0.3;
    const SimGrid g = SimGrid::make(-40, 40, 0.1);
    std::vector<double> u0(g.n), v0(g.n);
    const double c = (1.0 - 2.0 * th) / std::sqrt(2.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        u0[i] = 1.0 / (1.0 + std::exp(-g.x(i) / std::sqrt(2.0)));
        v0[i] = 1.0 / (1.0 + std::exp(-(g.x(i) - 0.5) / std::sqrt(2.0)));
    }
    const Trajectory a = simulate(homogeneous(th), g, u0, 0.0, 30.0, 0.01, Frame::lab(), 0.25);
    const Trajectory b = simulate(homogeneous(th), g, v0, 0.0, 30.0, 0.01, Frame::lab(), 0.25);
    const OrbitDistance d = orbit_distance(a, b, 10.0, 20.0);
    CHECK(d.raw > 0.05);
    CHECK(d.aligned < 1e-3);
    CHECK(std::abs(d.shift) == doctest::Approx(0.5 / c).epsilon(0.02));
}
