#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "frontlab/waves.hpp"

using namespace frontlab;

namespace {

// Closed-form cubic front: speed (1-2 theta)/sqrt(2), logistic profile with rate 1/sqrt(2).
double exact_speed(double th) { return (1.0 - 2.0 * th) / std::sqrt(2.0); }
double exact_phi(double th, double z) {
    const double z0 = std::sqrt(2.0) * std::log((1.0 - th) / th);
    return 1.0 / (1.0 + std::exp(-(z - z0) / std::sqrt(2.0)));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("speed and profile match the closed form") {
    for (double th : {0.1, 0.25, 0.4}) {
        const auto f = BistableNonlinearity::cubic(th);
        const WaveProfile p = solve_wave(f, -60, 60, 0.05, 1e-10);
        CHECK(std::abs(p.speed - exact_speed(th)) <= 1e-6);
        double err = 0;
        for (std::size_t i = 0; i < p.size(); ++i) err = std::max(err, std::abs(p.phi[i] - exact_phi(th, p.z(i))));
        CHECK(err <= 1e-4);
        // off-node interpolation
        for (double z : {-3.217, 0.031, 5.55}) CHECK(std::abs(eval_profile(p, z) - exact_phi(th, z)) <= 1e-4);
    }
}

TEST_CASE("decay rates satisfy the characteristic equations") {
    const auto f = BistableNonlinearity::cubic(0.2);
    const WaveProfile p = solve_wave(f, -60, 60, 0.05, 1e-10);
    CHECK(std::abs(p.lambda * p.lambda - p.speed * p.lambda + f.derivative_at_0()) <= 1e-12);
    CHECK(std::abs(p.mu * p.mu + p.speed * p.mu + f.derivative_at_1()) <= 1e-12);
    CHECK(std::abs(p.lambda - 1.0 / std::sqrt(2.0)) <= 1e-6);
    CHECK(std::abs(p.mu - 1.0 / std::sqrt(2.0)) <= 1e-6);
    const auto [l, m] = decay_rates(-0.2, -0.8, exact_speed(0.2));
    CHECK(l == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(m == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("profile is monotone with correct limits and phase") {
    const WaveProfile p = solve_wave(BistableNonlinearity::cubic(0.3), -60, 60, 0.05, 1e-10);
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p.phi[i] >= p.phi[i - 1]);
    CHECK(p.phi.front() < 1e-15);
    CHECK(1.0 - p.phi.back() < 1e-15);
    const double z_half = std::sqrt(2.0) * std::log(0.7 / 0.3);
    CHECK(profile_inverse(p, 0.5) == doctest::Approx(z_half).epsilon(1e-6));
    // exponential tails beyond the computational domain
    CHECK(eval_profile(p, -80.0) == doctest::Approx(exact_phi(0.3, -80.0)).epsilon(1e-4));
    CHECK(eval_profile_derivative(p, 0.7, 1) > 0.0);
}

TEST_CASE("envelope constants bound the tails") {
    const WaveProfile p = solve_wave(BistableNonlinearity::cubic(0.2), -60, 60, 0.05, 1e-10);
    const auto& e = p.envelope;
    for (double z = -30.0; z <= 0.0; z += 0.5) {
        const double x = std::exp(p.lambda * z);
        CHECK(eval_profile(p, z) >= e.alpha0 * x * (1 - 1e-9));
        CHECK(eval_profile(p, z) <= e.beta0 * x * (1 + 1e-9));
    }
    for (double z = 0.5; z <= 30.0; z += 0.5) {
        const double x = std::exp(-p.mu * z);
        CHECK(1.0 - eval_profile(p, z) >= e.alpha1 * x * (1 - 1e-6));
        CHECK(1.0 - eval_profile(p, z) <= e.beta1 * x * (1 + 1e-6));
    }
}

TEST_CASE("profile files round-trip and are deterministic") {
    const auto f = BistableNonlinearity::cubic(0.2);
    const auto dir = std::filesystem::temp_directory_path() / "frontlab_wave_test";
    const WaveProfile a = solve_wave(f, -40, 40, 0.1, 1e-10);
    const WaveProfile b = solve_wave(f, -40, 40, 0.1, 1e-10);
    write_profile(a, dir / "a.csv", dir / "a.json");
    write_profile(b, dir / "b.csv", dir / "b.json");
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    const WaveProfile r = read_profile(f, dir / "a.csv", dir / "a.json");
    CHECK(r.speed == a.speed);
    CHECK(r.phi == a.phi);
    CHECK(eval_profile(r, 1.2345) == eval_profile(a, 1.2345));
    std::filesystem::remove_all(dir);
}

TEST_CASE("residual norm of the closed-form profile is second order") {
    const auto f = BistableNonlinearity::cubic(0.2);
    const double c = exact_speed(0.2);
    auto res = [&](double h) {
        std::vector<double> phi;
        for (double z = -30; z <= 30 + 1e-12; z += h) phi.push_back(exact_phi(0.2, z));
        return profile_residual_norm(f, c, h, phi);
    };
    const double r1 = res(0.1), r2 = res(0.05);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
}
