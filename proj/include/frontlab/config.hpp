#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace frontlab {

struct RunConfig {
    struct Reaction {
        nlohmann::json f1 = {{"kind", "cubic"}, {"theta", 0.2}, {"scale", 1.0}};
        nlohmann::json f2 = {{"kind", "cubic"}, {"theta", 0.3}, {"scale", 1.0}};
        double x0 = 2.0;
        std::string blend = "quintic";
    } reaction;
    struct Grid {
        double x_min = -110.0, x_max = 45.0, h = 0.05;
    } grid;
    struct Time {
        double t0 = -80.0, t_end = 250.0, dt = 2e-3, snapshot_every = 0.25;
    } time;
    struct Wave {
        double z_min = -60.0, z_max = 60.0, h = 0.05, tol = 1e-10;
    } wave;
    struct Entire {
        std::vector<int> n_list = {40, 60, 80};
        double t_end = 20.0;
        double snapshot_every = 1.0;
        double eta = 0.025;  // transition-zone level; must admit the damping bound
    } entire;
    struct Uniqueness {
        std::vector<double> amplitudes = {1e-3, 1e-3, 1e-3};
        int alt_n = 60;
        double t_end = 100.0;
        double late_from = 75.0;
    } uniqueness;
    struct Envelopes {
        double ordering_tol = 1e-3;
        double residual_tol = 1e-3;
        double probe_every = 1.0;  // time spacing of residual probes
        double sliding_epsilon = 1e-3;
        double sliding_tol = 1e-4;
        double sliding_t0 = -40.0;
    } envelopes;
    struct Lyapunov {
        std::optional<double> m;  // empty: automatic choice
        double tol = 1e-3;
        double compare_h = 0.025;  // second resolution for the grid-stability check
    } lyapunov;
    struct Metrics {
        double level = 0.5;
        double fit_every = 1.0;
        double decay_window = 10.0;
    } metrics;
    std::string output_dir = "out";
    std::uint64_t seed = 12345;

    nlohmann::json to_json() const;
    // Missing keys take defaults; wrong types and invalid values raise ConfigError naming the key path.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    // Relative table paths in nonlinearity specs resolve against this directory.
    std::filesystem::path base_dir;
};

// sha256 of the canonical serialization.
std::string config_hash(const RunConfig& c);

}  // namespace frontlab
