#include <doctest.h>

#include <cmath>
#include <limits>

#include "frontlab/errors.hpp"
#include "frontlab/lyapunov.hpp"

using namespace frontlab;

namespace {

const BistableNonlinearity f2 = BistableNonlinearity::cubic(0.3);
const double c2 = 0.4 / std::sqrt(2.0);
// F2(1)/c2 with F2(1) = 1/12 - 0.3/6
const double L_rest = (1.0 / 12.0 - 0.05) / c2;

Field sample(const std::function<double(double)>& g, double z_min, double z_max, double h) {
    Field f;
    f.z_min = z_min;
    f.h = h;
    for (std::size_t i = 0; z_min + i * h <= z_max + 1e-12; ++i) f.w.push_back(g(z_min + i * h));
    return f;
}

const WaveProfile& wave2() {
    static const WaveProfile w = solve_wave(f2, -60, 60, 0.05, 1e-10);
    return w;
}

}  // namespace

TEST_CASE("L of the zero state is the step counterterm") {
    const Field zero = sample([](double) { return 0.0; }, -50, 80, 0.05);
    CHECK(eval_L(zero, c2, f2).value == doctest::Approx(L_rest * (1 - std::exp(-c2 * 80.0))).epsilon(1e-12));
    CHECK(L_rest == doctest::Approx(0.117851).epsilon(1e-5));
}

TEST_CASE("the wave is a critical point of L and a zero of Q") {
    for (double beta : {-2.0, 0.0, 3.0}) {
        const Field w = sample([&](double z) { return eval_profile(wave2(), z + beta); }, -80, 80, 0.01);
        CHECK(eval_L(w, c2, f2).value == doctest::Approx(L_rest).epsilon(1e-6));
        CHECK(eval_Q(w, wave2().speed, f2).value <= 1e-6);
    }
}

TEST_CASE("L transforms under shifts by the counterterm identity") {
    auto g = [](double z) { return 0.5 * (1.0 + std::tanh(0.9 * z)); };
    const double beta = 1.7;
    const Field a = sample(g, -60, 90, 0.01);
    const Field b = sample([&](double z) { return g(z + beta); }, -60, 90, 0.01);
    const double La = eval_L(a, c2, f2).value, Lb = eval_L(b, c2, f2).value;
    const double F1 = f2.potential_at_1();
    const double expect = std::exp(c2 * beta) * (La - F1 * (1.0 - std::exp(-c2 * beta)) / c2);
    CHECK(Lb == doctest::Approx(expect).epsilon(1e-6));
    CHECK(eval_Q(a, c2, f2).value > 1e-3);
}

TEST_CASE("cutoff") {
    const Field u = sample([](double z) { return 0.3 + 0.01 * z; }, -20, 20, 0.1);
    const Field same = cutoff(u, 5.0, std::numeric_limits<double>::infinity());
    CHECK(same.w == u.w);
    const double m = 0.5, t = 4.0;  // strips at |z| in [2, 3]
    const Field w = cutoff(u, t, m);
    for (std::size_t i = 0; i < u.w.size(); ++i) {
        const double z = u.z(i);
        if (std::abs(z) <= 2.0 - 1e-9) CHECK(w.w[i] == u.w[i]);
        if (z >= 3.0 + 1e-9) CHECK(w.w[i] == 1.0);
        if (z <= -3.0 - 1e-9) CHECK(w.w[i] == 0.0);
    }
}

TEST_CASE("admissible cutoff slope") {
    CHECK(max_cutoff_slope(c2, 0.05) == doctest::Approx(0.5 * std::min(0.1 / c2, c2)));
    CHECK(max_cutoff_slope(c2, 0.05) == doctest::Approx(0.141421).epsilon(1e-5));
    Trajectory tr;
    tr.grid = SimGrid::make(-5, 5, 0.5);
    for (double t : {1.0, 2.0, 3.0}) tr.snapshots.push_back({t, std::vector<double>(tr.grid.n, 0.5)});
    LyapunovOptions opt;
    CHECK_THROWS_AS(lyapunov_series(tr, 0.2, f2, c2, opt), ConfigError);
    CHECK_THROWS_AS(lyapunov_series(tr, -1.0, f2, c2, opt), ConfigError);
}

TEST_CASE("L decreases at rate Q along a pure f2 evolution") {
    auto r = std::make_shared<const SpatialReaction>(f2, f2, 2.0);
    const SimGrid g = SimGrid::make(-60, 60, 0.05);
    std::vector<double> u0(g.n);
    for (std::size_t i = 0; i < g.n; ++i) u0[i] = 0.5 * (1.0 + std::tanh(0.5 * g.x(i)));
    const Trajectory tr = simulate(r, g, u0, 0.0, 20.0, 2e-3, Frame::lab(), 0.25);
    const double c = wave2().speed;
    LyapunovOptions opt;
    const LyapunovSeries s = lyapunov_series(tr, std::numeric_limits<double>::infinity(), f2, c, opt);
    for (std::size_t j = 4; j + 4 < s.times.size(); ++j) {
        CHECK(std::abs(s.dL_dt[j] + s.Q_values[j]) < 2e-3 * std::max(1.0, s.Q_values[j]));
        CHECK(s.L_values[j + 1] <= s.L_values[j] + 1e-12);
    }
}
