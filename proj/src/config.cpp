#include "frontlab/config.hpp"

#include <cmath>
#include <fstream>

#include "frontlab/artifacts.hpp"
#include "frontlab/errors.hpp"

namespace frontlab {

namespace {

using nlohmann::json;

// Reads optional keys from one JSON object, reporting errors with the full key path.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const std::string where = path_ + (key.empty() ? "" : "/" + key);
        throw ConfigError("config" + (where.empty() ? "" : " " + where) + ": " + what);
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    Reader child(const std::string& key) const {
        static const json empty = json::object();
        return Reader(has(key) ? j_.at(key) : empty, path_ + "/" + key);
    }

    void number(const std::string& key, double& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) fail(key, "must be finite");
    }

    void positive(const std::string& key, double& out) const {
        number(key, out);
        if (!(out > 0.0)) fail(key, "must be positive");
    }

    void integer(const std::string& key, int& out) const {
        if (!has(key)) return;
        if (!j_.at(key).is_number_integer()) fail(key, "expected an integer");
        out = j_.at(key).get<int>();
    }

    void text(const std::string& key, std::string& out) const {
        if (!has(key)) return;
        if (!j_.at(key).is_string()) fail(key, "expected a string");
        out = j_.at(key).get<std::string>();
    }

    const json& raw(const std::string& key) const { return j_.at(key); }

    void reject_unknown(std::initializer_list<const char*> known) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = false;
            for (const char* k : known) ok = ok || it.key() == k;
            if (!ok) fail(it.key(), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
};

void check_nonlinearity(const Reader& parent, const std::string& key, json& out) {
    if (!parent.has(key)) return;
    const Reader r = parent.child(key);
    std::string kind;
    if (!r.has("kind")) r.fail("kind", "missing");
    r.text("kind", kind);
    if (kind == "cubic") {
        r.reject_unknown({"kind", "theta", "scale"});
        double theta = -1, scale = 1.0;
        if (!r.has("theta")) r.fail("theta", "missing");
        r.number("theta", theta);
        if (!(theta > 0.0 && theta < 0.5)) r.fail("theta", "must lie in (0, 1/2)");
        r.positive("scale", scale);
    } else if (kind == "tabulated") {
        r.reject_unknown({"kind", "table"});
        std::string table;
        if (!r.has("table")) r.fail("table", "missing");
        r.text("table", table);
    } else {
        r.fail("kind", "expected \"cubic\" or \"tabulated\"");
    }
    out = parent.raw(key);
}

}  // namespace

json RunConfig::to_json() const {
    return {{"reaction", {{"f1", reaction.f1}, {"f2", reaction.f2}, {"x0", reaction.x0}, {"blend", reaction.blend}}},
            {"grid", {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"h", grid.h}}},
            {"time", {{"t0", time.t0}, {"t_end", time.t_end}, {"dt", time.dt}, {"snapshot_every", time.snapshot_every}}},
            {"wave", {{"z_min", wave.z_min}, {"z_max", wave.z_max}, {"h", wave.h}, {"tol", wave.tol}}},
            {"entire",
             {{"n_list", entire.n_list},
              {"t_end", entire.t_end},
              {"snapshot_every", entire.snapshot_every},
              {"eta", entire.eta}}},
            {"uniqueness",
             {{"amplitudes", uniqueness.amplitudes},
              {"alt_n", uniqueness.alt_n},
              {"t_end", uniqueness.t_end},
              {"late_from", uniqueness.late_from}}},
            {"envelopes",
             {{"ordering_tol", envelopes.ordering_tol},
              {"residual_tol", envelopes.residual_tol},
              {"probe_every", envelopes.probe_every},
              {"sliding_epsilon", envelopes.sliding_epsilon},
              {"sliding_tol", envelopes.sliding_tol},
              {"sliding_t0", envelopes.sliding_t0}}},
            {"lyapunov",
             {{"m", lyapunov.m ? json(*lyapunov.m) : json("auto")},
              {"tol", lyapunov.tol},
              {"compare_h", lyapunov.compare_h}}},
            {"metrics",
             {{"level", metrics.level}, {"fit_every", metrics.fit_every}, {"decay_window", metrics.decay_window}}},
            {"output_dir", output_dir},
            {"seed", seed}};
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    const Reader root(j, "");
    root.reject_unknown({"reaction", "grid", "time", "wave", "entire", "uniqueness", "envelopes", "lyapunov", "metrics",
                         "output_dir", "seed", "$schema"});

    const Reader re = root.child("reaction");
    re.reject_unknown({"f1", "f2", "x0", "blend"});
    check_nonlinearity(re, "f1", c.reaction.f1);
    check_nonlinearity(re, "f2", c.reaction.f2);
    re.positive("x0", c.reaction.x0);
    re.text("blend", c.reaction.blend);
    if (c.reaction.blend != "quintic" && c.reaction.blend != "cubic" && c.reaction.blend != "linear")
        re.fail("blend", "expected quintic, cubic or linear");

    const Reader g = root.child("grid");
    g.reject_unknown({"x_min", "x_max", "h"});
    g.number("x_min", c.grid.x_min);
    g.number("x_max", c.grid.x_max);
    g.positive("h", c.grid.h);
    if (!(c.grid.x_max > c.grid.x_min)) g.fail("x_max", "must exceed x_min");

    const Reader t = root.child("time");
    t.reject_unknown({"t0", "t_end", "dt", "snapshot_every"});
    t.number("t0", c.time.t0);
    t.number("t_end", c.time.t_end);
    t.positive("dt", c.time.dt);
    t.positive("snapshot_every", c.time.snapshot_every);
    if (!(c.time.t_end > c.time.t0)) t.fail("t_end", "must exceed t0");

    const Reader w = root.child("wave");
    w.reject_unknown({"z_min", "z_max", "h", "tol"});
    w.number("z_min", c.wave.z_min);
    w.number("z_max", c.wave.z_max);
    w.positive("h", c.wave.h);
    w.positive("tol", c.wave.tol);
    if (!(c.wave.z_max > c.wave.z_min)) w.fail("z_max", "must exceed z_min");

    const Reader e = root.child("entire");
    e.reject_unknown({"n_list", "t_end", "snapshot_every", "eta"});
    if (e.has("n_list")) {
        const json& nl = e.raw("n_list");
        if (!nl.is_array()) e.fail("n_list", "expected an array of integers");
        c.entire.n_list.clear();
        for (std::size_t k = 0; k < nl.size(); ++k) {
            if (!nl[k].is_number_integer() || nl[k].get<int>() <= 0)
                e.fail("n_list/" + std::to_string(k), "expected a positive integer");
            c.entire.n_list.push_back(nl[k].get<int>());
        }
    }
    e.number("t_end", c.entire.t_end);
    e.positive("snapshot_every", c.entire.snapshot_every);
    e.positive("eta", c.entire.eta);
    if (c.entire.eta > 0.5) e.fail("eta", "must not exceed 1/2");

    const Reader u = root.child("uniqueness");
    u.reject_unknown({"amplitudes", "alt_n", "t_end", "late_from"});
    if (u.has("amplitudes")) {
        const json& a = u.raw("amplitudes");
        if (!a.is_array()) u.fail("amplitudes", "expected an array of numbers");
        c.uniqueness.amplitudes.clear();
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (!a[k].is_number() || !(a[k].get<double>() >= 0.0))
                u.fail("amplitudes/" + std::to_string(k), "expected a nonnegative number");
            c.uniqueness.amplitudes.push_back(a[k].get<double>());
        }
    }
    u.integer("alt_n", c.uniqueness.alt_n);
    u.number("t_end", c.uniqueness.t_end);
    u.number("late_from", c.uniqueness.late_from);
    if (!(c.uniqueness.late_from < c.uniqueness.t_end)) u.fail("late_from", "must precede t_end");

    const Reader en = root.child("envelopes");
    en.reject_unknown({"ordering_tol", "residual_tol", "probe_every", "sliding_epsilon", "sliding_tol", "sliding_t0"});
    en.positive("ordering_tol", c.envelopes.ordering_tol);
    en.positive("residual_tol", c.envelopes.residual_tol);
    en.positive("probe_every", c.envelopes.probe_every);
    en.number("sliding_epsilon", c.envelopes.sliding_epsilon);
    if (c.envelopes.sliding_epsilon < 0.0) en.fail("sliding_epsilon", "must be nonnegative");
    en.positive("sliding_tol", c.envelopes.sliding_tol);
    en.number("sliding_t0", c.envelopes.sliding_t0);

    const Reader l = root.child("lyapunov");
    l.reject_unknown({"m", "tol", "compare_h"});
    if (l.has("m")) {
        const json& m = l.raw("m");
        if (m.is_string()) {
            if (m.get<std::string>() != "auto") l.fail("m", "expected a number or \"auto\"");
        } else if (m.is_number()) {
            if (!(m.get<double>() > 0.0)) l.fail("m", "must be positive");
            c.lyapunov.m = m.get<double>();
        } else {
            l.fail("m", "expected a number or \"auto\"");
        }
    }
    l.positive("tol", c.lyapunov.tol);
    l.positive("compare_h", c.lyapunov.compare_h);

    const Reader me = root.child("metrics");
    me.reject_unknown({"level", "fit_every", "decay_window"});
    me.number("level", c.metrics.level);
    if (!(c.metrics.level > 0.0 && c.metrics.level < 1.0)) me.fail("level", "must lie in (0,1)");
    me.positive("fit_every", c.metrics.fit_every);
    me.positive("decay_window", c.metrics.decay_window);

    root.text("output_dir", c.output_dir);
    if (root.has("seed")) {
        if (!j.at("seed").is_number_unsigned()) root.fail("seed", "expected a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    RunConfig c = from_json(j);
    c.base_dir = path.parent_path();
    return c;
}

std::string config_hash(const RunConfig& c) { return sha256_hex(c.to_json().dump()); }

}  // namespace frontlab
