#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "frontlab/config.hpp"
#include "frontlab/envelopes.hpp"
#include "frontlab/lyapunov.hpp"
#include "frontlab/pde.hpp"
#include "frontlab/reaction.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

struct Check {
    std::string name;
    bool pass = false;
    double value = 0;
    double threshold = 0;
    std::string relation;  // how value is compared with threshold
    std::string note;
    nlohmann::json to_json() const;
};

Check check_le(std::string name, double value, double threshold, std::string note = {});
Check check_ge(std::string name, double value, double threshold, std::string note = {});

const std::vector<std::string>& stage_names();

// Stages run in-process and cache their results; a stage whose prerequisite is not in
// memory loads it from the output directory or fails with DependencyError.
class Pipeline {
public:
    Pipeline(RunConfig cfg, std::filesystem::path out, unsigned threads = 1);

    nlohmann::json run_stage(const std::string& name);
    void write_manifest() const;

    const RunConfig& config() const { return cfg_; }
    std::shared_ptr<const SpatialReaction> reaction() const { return reaction_; }
    const WaveProfile& wave1();
    const WaveProfile& wave2();
    const Trajectory& main_trajectory();
    const nlohmann::json& stage_result(const std::string& name) const;

private:
    nlohmann::json validate();
    nlohmann::json wave();
    nlohmann::json simulate_stage();
    nlohmann::json entire();
    nlohmann::json envelopes();
    nlohmann::json lyapunov();
    nlohmann::json metrics();
    nlohmann::json report();

    SimGrid grid() const;
    const Trajectory& entire_run(int n);
    double entire_delta();
    void require(const std::filesystem::path& p, const std::string& stage, const std::string& needed) const;

    RunConfig cfg_;
    std::filesystem::path out_;
    unsigned threads_;
    std::shared_ptr<const SpatialReaction> reaction_;
    std::optional<WaveProfile> wave1_, wave2_;
    std::optional<Trajectory> main_;
    std::vector<std::pair<int, Trajectory>> entire_runs_;
    std::optional<double> delta_;
    std::vector<std::pair<std::string, nlohmann::json>> results_;
};

// Runs `command` (a stage name or "all"). Returns the process exit code:
// 0 all checks pass, 1 a check failed, 2 configuration or dependency error, 3 numerical failure.
int run_command(const std::string& command, const RunConfig& cfg, const std::filesystem::path& out, unsigned threads,
                std::ostream& log);

}  // namespace frontlab
