#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "frontlab/config.hpp"
#include "frontlab/stages.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path root = fs::temp_directory_path() / "frontlab_cli_test";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_config(const std::string& name, const json& j) {
    fs::create_directories(root);
    const fs::path p = root / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

json smoke() {
    return {{"grid", {{"x_min", -60.0}, {"x_max", 30.0}, {"h", 0.1}}},
            {"time", {{"t0", -30.0}, {"t_end", 5.0}, {"dt", 0.01}, {"snapshot_every", 0.5}}},
            {"wave", {{"z_min", -40.0}, {"z_max", 40.0}, {"h", 0.1}, {"tol", 1e-10}}}};
}

struct Result {
    int code;
    std::string log;
};

Result run(const std::string& args) {
    const fs::path log = root / "log.txt";
    const std::string cmd = std::string(FRONTLAB_CLI) + " " + args + " 2> " + log.string();
    const int st = std::system(cmd.c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(log)};
}

}  // namespace

TEST_CASE("wave stage is deterministic and validate passes") {
    fs::remove_all(root);
    const fs::path cfg = write_config("smoke.json", smoke());
    const fs::path a = root / "a", b = root / "b";
    CHECK(run("validate --config " + cfg.string() + " --out " + a.string()).code == 0);
    CHECK(run("wave --config " + cfg.string() + " --out " + a.string()).code == 0);
    CHECK(run("wave --config " + cfg.string() + " --out " + b.string()).code == 0);
    for (const char* f : {"wave/phi1.csv", "wave/phi2.csv", "wave/phi1.json", "wave/summary.json"})
        CHECK(slurp(a / f) == slurp(b / f));
    const json man = json::parse(slurp(a / "manifest.json"));
    CHECK(man.at("config_hash") == frontlab::config_hash(frontlab::RunConfig::load(cfg)));
    CHECK(man.at("artifacts").contains("wave/phi1.csv"));
}

TEST_CASE("stages name their missing prerequisite") {
    const fs::path cfg = write_config("smoke.json", smoke());
    const fs::path out = root / "dep";
    fs::remove_all(out);
    Result r = run("envelopes --config " + cfg.string() + " --out " + out.string());
    CHECK(r.code == 2);
    CHECK(r.log.find("'wave'") != std::string::npos);
    REQUIRE(run("wave --config " + cfg.string() + " --out " + out.string()).code == 0);
    r = run("envelopes --config " + cfg.string() + " --out " + out.string());
    CHECK(r.code == 2);
    CHECK(r.log.find("stage 'envelopes' requires the output of stage 'simulate'") != std::string::npos);
    r = run("lyapunov --config " + cfg.string() + " --out " + out.string());
    CHECK(r.code == 2);
    CHECK(r.log.find("'simulate'") != std::string::npos);
}

TEST_CASE("simulate stage writes a readable trajectory") {
    const fs::path cfg = write_config("smoke.json", smoke());
    const fs::path out = root / "sim";
    REQUIRE(run("wave --config " + cfg.string() + " --out " + out.string()).code == 0);
    CHECK(run("simulate --config " + cfg.string() + " --out " + out.string() + " --threads 2").code == 0);
    const json m = json::parse(slurp(out / "simulate/trajectory/manifest.json"));
    CHECK(m.at("snapshots").size() == 71);
    CHECK(fs::exists(out / "simulate/summary.json"));
}

TEST_CASE("configuration errors exit with code 2") {
    json bad = smoke();
    bad["grid"]["h"] = -0.1;
    const fs::path cfg = write_config("bad.json", bad);
    Result r = run("wave --config " + cfg.string() + " --out " + (root / "bad").string());
    CHECK(r.code == 2);
    CHECK(r.log.find("/grid/h") != std::string::npos);
    const fs::path ok = write_config("smoke.json", smoke());
    CHECK(run("frobnicate --config " + ok.string()).code == 2);
    CHECK(run("wave").code == 2);
    CHECK(run("report --config " + ok.string() + " --out " + (root / "empty").string()).code == 2);
}

TEST_CASE("report aggregates stage summaries") {
    const fs::path cfg = write_config("smoke.json", smoke());
    const fs::path out = root / "rep";
    REQUIRE(run("wave --config " + cfg.string() + " --out " + out.string()).code == 0);
    CHECK(run("report --config " + cfg.string() + " --out " + out.string()).code == 0);
    const json rep = json::parse(slurp(out / "report/report.json"));
    CHECK(rep.at("pass") == true);
    CHECK(rep.at("speeds").at("c1").get<double>() == doctest::Approx(0.6 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(slurp(out / "report/report.txt").find("PASS phi2_speed_vs_closed_form") != std::string::npos);
}
