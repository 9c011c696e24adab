#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "frontlab/errors.hpp"
#include "frontlab/reaction.hpp"

using namespace frontlab;

TEST_CASE("cubic values against hand-expanded polynomial") {
    const auto f = BistableNonlinearity::cubic(0.2);
    CHECK(f.value(0.5) == doctest::Approx(0.075).epsilon(1e-15));
    CHECK(f.derivative_at_0() == doctest::Approx(-0.2));
    CHECK(f.derivative_at_1() == doctest::Approx(-0.8));
    // F(1) = 1/12 - theta/6
    CHECK(f.potential_at_1() == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(f.lipschitz_bound() == doctest::Approx(0.8));
    CHECK(f.curvature_bound() == doctest::Approx(3.6));
    for (double u : {0.0, 0.2, 1.0}) CHECK(std::abs(f.value(u)) < 1e-16);
}

TEST_CASE("scaled cubic") {
    const auto f = BistableNonlinearity::cubic(0.3, 2.5);
    CHECK(f.value(0.6) == doctest::Approx(2.5 * 0.6 * 0.4 * 0.3));
    CHECK(f.potential_at_1() == doctest::Approx(2.5 * (1.0 / 12.0 - 0.05)));
}

TEST_CASE("potential is the antiderivative") {
    const auto f = BistableNonlinearity::cubic(0.25);
    const double h = 1e-5;
    for (double u : {0.1, 0.4, 0.77}) {
        const double d = (f.potential(u + h) - f.potential(u - h)) / (2 * h);
        CHECK(d == doctest::Approx(f.value(u)).epsilon(1e-8));
    }
}

TEST_CASE("validation accepts the bistable cubic family") {
    for (double th : {0.1, 0.2, 0.3, 0.45}) {
        const auto rep = validate_bistable(BistableNonlinearity::cubic(th));
        CHECK(rep.pass());
    }
}

TEST_CASE("invalid cubic parameters") {
    CHECK_THROWS_AS(BistableNonlinearity::cubic(0.0), PreconditionError);
    CHECK_THROWS_AS(BistableNonlinearity::cubic(1.2), PreconditionError);
}

TEST_CASE("tabulated fit of a cubic") {
    const auto c = BistableNonlinearity::cubic(0.2);
    std::vector<double> u, fv, df;
    for (int i = 0; i <= 400; ++i) {
        const double x = i / 400.0;
        u.push_back(x);
        fv.push_back(c.value(x));
        df.push_back(c.derivative(x));
    }
    const auto t = BistableNonlinearity::tabulated(u, fv, df);
    CHECK(t.kind() == NonlinearityKind::tabulated);
    CHECK(t.theta() == doctest::Approx(0.2).epsilon(1e-9));
    for (double x : {0.013, 0.37, 0.91}) CHECK(t.value(x) == doctest::Approx(c.value(x)).epsilon(1e-10));
    CHECK(t.potential_at_1() == doctest::Approx(0.05).epsilon(1e-9));
    CHECK_THROWS_AS(t.value(1.5), DomainError);
}

TEST_CASE("tabulated table needs enough samples and full support") {
    std::vector<double> u = {0.0, 0.5, 1.0}, f = {0, 0, 0}, d = {0, 0, 0};
    CHECK_THROWS_AS(BistableNonlinearity::tabulated(u, f, d), PreconditionError);
}

TEST_CASE("tabulated nonlinearity from csv") {
    const auto dir = std::filesystem::temp_directory_path() / "frontlab_reaction_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "table.csv");
        out << "u,f,df\n";
        const auto c = BistableNonlinearity::cubic(0.3);
        for (int i = 0; i <= 300; ++i) {
            const double x = i / 300.0;
            out << x << "," << c.value(x) << "," << c.derivative(x) << "\n";
        }
    }
    const auto f = BistableNonlinearity::from_json({{"kind", "tabulated"}, {"table", "table.csv"}}, dir);
    CHECK(f.theta() == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(validate_bistable(f).pass());
    std::filesystem::remove_all(dir);
}

TEST_CASE("spatial blend") {
    const SpatialReaction r(BistableNonlinearity::cubic(0.2), BistableNonlinearity::cubic(0.3), 2.0);
    CHECK(r.chi(0.0) == 1.0);
    CHECK(r.chi(3.0) == 1.0);
    CHECK(r.chi(-2.0) == 0.0);
    CHECK(r.chi(-5.0) == 0.0);
    CHECK(r.chi(-1.0) == doctest::Approx(0.5));
    CHECK(r.value(4.0, 0.6) == r.f1().value(0.6));
    CHECK(r.value(-4.0, 0.6) == r.f2().value(0.6));
    for (double x = -2.0; x <= 0.0; x += 0.1) {
        const double c = r.chi(x);
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
        CHECK(c <= r.chi(x + 0.1));
    }
}

TEST_CASE("blend requires ordered interior zeros") {
    CHECK_THROWS_AS(SpatialReaction(BistableNonlinearity::cubic(0.3), BistableNonlinearity::cubic(0.2), 2.0),
                    PreconditionError);
}
