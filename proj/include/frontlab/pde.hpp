#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frontlab/reaction.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

struct SimGrid {
    double x_min = 0, x_max = 0, h = 0;
    std::size_t n = 0;

    static SimGrid make(double x_min, double x_max, double h);
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * h; }
    nlohmann::json to_json() const;
};

struct Frame {
    enum class Kind { lab, moving };
    Kind kind = Kind::lab;
    double speed = 0.0;

    static Frame lab() { return {}; }
    static Frame moving(double c) { return {Kind::moving, c}; }
    double node_speed() const { return kind == Kind::moving ? speed : 0.0; }
    nlohmann::json to_json() const;
};

struct Snapshot {
    double t = 0;
    std::vector<double> u;
};

struct BoundaryReport {
    double left_asymptote = 0, right_asymptote = 1;
    double max_left = 0, max_right = 0;
    double threshold = 1e-6;
    bool flagged() const { return max_left > threshold || max_right > threshold; }
};

struct Trajectory {
    SimGrid grid;
    Frame frame;
    double dt = 0;
    std::vector<Snapshot> snapshots;
    std::shared_ptr<const SpatialReaction> reaction;
    BoundaryReport boundary;
    std::int64_t clamp_events = 0;
    std::int64_t steps = 0;

    double t_begin() const { return snapshots.front().t; }
    double t_end() const { return snapshots.back().t; }
    // Index of the snapshot at time t (within 1e-9), or -1.
    long find(double t) const;
    // Linear interpolation in time between stored snapshots; t must lie in the stored range.
    std::vector<double> at_time(double t) const;
};

struct SimOptions {
    double boundary_threshold = 1e-6;
    // Corrections smaller than this (roundoff of the linear solves) are clamped
    // without being counted as clamp events.
    double clamp_count_tolerance = 1e-13;
};

Trajectory simulate(std::shared_ptr<const SpatialReaction> r, const SimGrid& grid, const std::vector<double>& u0,
                    double t0, double t_end, double dt, Frame frame, double snapshot_every,
                    const SimOptions& opt = {});

// Resamples onto the z-grid (default: the lab grid) with z = x + c t.
Trajectory to_moving_frame(const Trajectory& traj, double c, std::optional<SimGrid> z_grid = std::nullopt);

struct EntireOptions {
    double t_end = 20.0;
    double snapshot_every = 1.0;
    double eta = 0.1;        // transition-zone level for delta
    double transient = 1.0;  // time after the start excluded from the d/dt check
    unsigned threads = 1;
};

struct PairOrdering {
    int n_small = 0, n_large = 0;
    double min_difference = 0;  // min over shared (t,x) of u_large - u_small
    double at_t = 0, at_x = 0;
};

struct EntireReport {
    std::vector<int> n_list;
    std::vector<PairOrdering> pairs;
    double min_dt_all_nodes = 0;  // largest n, past the transient
    double delta = 0;             // min d/dt u over D_eta(t), t <= T_eta
    double t_eta = 0;
    double eta = 0;
    double early_T1 = 0;
    double initial_mismatch = 0;  // max |u_n(-n) - w^-(-n)| at nodes
    nlohmann::json to_json() const;
};

struct EntireResult {
    std::vector<Trajectory> runs;
    EntireReport report;
};

EntireResult construct_entire(std::shared_ptr<const SpatialReaction> r, const WaveProfile& wave1,
                              const std::vector<int>& n_list, const SimGrid& grid, double dt,
                              const EntireOptions& opt = {});

// Initial data w^-(-n, .) on the grid.
std::vector<double> entire_initial_data(const SpatialReaction& r, const WaveProfile& wave1, double t0, const SimGrid& grid);

// Last snapshot time with D_eta(t) inside {x >= 1}, scanning from the start.
double transition_time(const Trajectory& traj, double eta);

struct OrbitDistance {
    double raw = 0;      // max_t ||a(t) - b(t)||_inf over the window
    double aligned = 0;  // same after the best single time shift of b
    double shift = 0;
};

OrbitDistance orbit_distance(const Trajectory& a, const Trajectory& b, double t_from, double t_to, double max_shift = 5.0);

struct UniquenessOptions {
    double t_end = 100.0;
    double late_from = 75.0;
    double snapshot_every = 0.25;
    std::uint64_t seed = 12345;
    unsigned threads = 1;
};

struct PerturbationOutcome {
    double amplitude = 0;
    double center = 0;
    double sign = 1;
    OrbitDistance distance;
};

struct UniquenessResult {
    int base_n = 0;
    std::vector<PerturbationOutcome> perturbations;
    double max_raw = 0;
    double max_aligned = 0;
    nlohmann::json to_json() const;
};

UniquenessResult uniqueness_probe(std::shared_ptr<const SpatialReaction> r, const WaveProfile& wave1, int base_n,
                                  const std::vector<double>& amplitudes, const SimGrid& grid, double dt,
                                  const UniquenessOptions& opt = {}, const Trajectory* base = nullptr);

// Largest eta with d_u f(x,s) < 0 for s in [0,2 eta] and [1-2 eta,1], all x.
double max_damping_level(const SpatialReaction& r);
// beta = min over those s-sets (and both f_i) of -d_u f.
double damping_rate(const SpatialReaction& r, double eta);

void write_trajectory(const Trajectory& traj, const std::filesystem::path& dir);
Trajectory read_trajectory(const std::filesystem::path& dir, std::shared_ptr<const SpatialReaction> r);

}  // namespace frontlab
