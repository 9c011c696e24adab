#include <doctest.h>

#include <string>

#include "frontlab/config.hpp"
#include "frontlab/errors.hpp"

using namespace frontlab;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
    try {
        RunConfig::from_json(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("defaults round-trip bit-identically") {
    const RunConfig c;
    const std::string a = c.to_json().dump();
    const RunConfig back = RunConfig::from_json(json::parse(a));
    CHECK(back.to_json().dump() == a);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 64);
}

TEST_CASE("awkward doubles survive the round trip") {
    json j = RunConfig{}.to_json();
    j["grid"]["h"] = 0.1 + 0.2;
    j["reaction"]["x0"] = 1.0 / 3.0;
    j["lyapunov"]["m"] = 0.07;
    const RunConfig c = RunConfig::from_json(j);
    CHECK(c.grid.h == 0.1 + 0.2);
    CHECK(*c.lyapunov.m == 0.07);
    CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("shipped default config") {
    const RunConfig c = RunConfig::load(std::string(FRONTLAB_SOURCE_DIR) + "/configs/default.json");
    CHECK(c.grid.x_min == -110.0);
    CHECK(c.grid.x_max == 45.0);
    CHECK(c.time.t0 == -80.0);
    CHECK(c.time.t_end == 250.0);
    CHECK(c.reaction.x0 == 2.0);
    CHECK(c.entire.n_list == std::vector<int>{40, 60, 80});
    REQUIRE(c.lyapunov.m);
    CHECK(*c.lyapunov.m == 0.07);
}

TEST_CASE("errors name the key path") {
    CHECK(error_of({{"grid", {{"h", -1.0}}}}) == "config /grid/h: must be positive");
    CHECK(error_of({{"grid", {{"h", "fine"}}}}) == "config /grid/h: expected a number");
    CHECK(error_of({{"time", {{"dt", 0.0}}}}) == "config /time/dt: must be positive");
    CHECK(error_of({{"bogus", 1}}) == "config /bogus: unknown key");
    CHECK(error_of({{"reaction", {{"f1", {{"kind", "cubic"}, {"theta", 0.7}}}}}}) ==
          "config /reaction/f1/theta: must lie in (0, 1/2)");
    CHECK(error_of({{"reaction", {{"f2", {{"kind", "quartic"}}}}}}) ==
          "config /reaction/f2/kind: expected \"cubic\" or \"tabulated\"");
    CHECK(error_of({{"entire", {{"n_list", {40, -3}}}}}) == "config /entire/n_list/1: expected a positive integer");
    CHECK(error_of({{"lyapunov", {{"m", "big"}}}}) == "config /lyapunov/m: expected a number or \"auto\"");
    CHECK(error_of({{"seed", -4}}) == "config /seed: expected a nonnegative integer");
    CHECK(error_of({{"metrics", {{"level", 1.5}}}}) == "config /metrics/level: must lie in (0,1)");
    CHECK(error_of(json::array()) == "config: must be an object");
}

TEST_CASE("auto cutoff slope and schema pointer") {
    const RunConfig c = RunConfig::from_json({{"$schema", "x"}, {"lyapunov", {{"m", "auto"}}}});
    CHECK_FALSE(c.lyapunov.m);
    CHECK(c.to_json()["lyapunov"]["m"] == "auto");
}

TEST_CASE("missing or malformed files") {
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.json"), ConfigError);
}
