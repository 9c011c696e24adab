#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "frontlab/pde.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

// Unique crossing of `level` by linear interpolation, in node coordinates of `grid`.
// Throws ExtractionError naming t when there is no crossing or more than one.
double front_position(const std::vector<double>& u, const SimGrid& grid, double level, double t = 0.0);

struct ShiftFit {
    double beta = 0;
    double dist_inf = 0;
};

// beta minimising the L2 distance between u(t, .) and phi(x1 + c t + beta), where x1 is
// the lab coordinate of each node (frame speed taken into account) and c the profile speed.
ShiftFit fit_shift(const std::vector<double>& u, const SimGrid& grid, double t, const Frame& frame,
                   const WaveProfile& profile);

struct FrontSeries {
    std::vector<double> times, positions;     // lab-frame level crossings
    std::vector<double> speed_times, speeds;  // centred differences, interior snapshots
    std::vector<double> shifts, distances;    // filled when a profile is given
    double terminal_speed = 0;                // mean over the last quarter of speeds
    nlohmann::json to_json() const;
};

// Every `stride`-th snapshot contributes a shift fit when profile is non-null.
FrontSeries speed_series(const Trajectory& traj, double level = 0.5, const WaveProfile* profile = nullptr,
                         std::size_t stride = 1, unsigned threads = 1);

struct DecayFit {
    std::string quantity;  // one_minus_u / u, u_z, u_zz, u_t
    std::string side;      // right / left
    bool skipped = false;
    std::string note;
    double rate = 0;   // fitted exponential decay rate in |z|
    double C = 0;      // prefactor
    double sigma = 0;  // rate + c2/2 on the right, rate - c2/2 on the left
    std::size_t points = 0;
    bool pass = false;
};

struct DecayReport {
    double t = 0;
    double c2 = 0;
    std::vector<DecayFit> fits;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Fits at the latest snapshot inside [t_from, t_to]; needs a neighbour snapshot on each side.
DecayReport decay_check(const Trajectory& traj, double c2, double t_from, double t_to);

struct ZoneResult {
    bool empty = true;
    double lo = 0, hi = 0;
    double min_dt = 0;  // min centred d/dt u over the zone nodes (NaN without neighbours)
};

// prev/next are the neighbouring snapshots for the time derivative (optional).
ZoneResult transition_zone(const std::vector<double>& u, const SimGrid& grid, double eta_level,
                           const Snapshot* prev = nullptr, const Snapshot* next = nullptr);

}  // namespace frontlab
