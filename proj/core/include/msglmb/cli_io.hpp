#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "msglmb/merge_split.hpp"
#include "msglmb/scenario_sim.hpp"

namespace msglmb {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Flat key-value tracker configuration. Unknown keys are errors.
TrackerConfig parse_tracker_config(std::istream& in);
TrackerConfig parse_tracker_config_file(const std::string& path);

/// Scenario description: the tracker-config keys that define the motion
/// and sensor models, plus frames / clutter_rate / process_noise and one
/// `target = birth death x,y,...` line per target.
struct ScenarioFile {
    ScenarioSpec scenario;
    TrackerConfig config;
};
ScenarioFile parse_scenario_file(const std::string& path);

/// Frame file: one frame per line, `frame time z1,z2 z3,z4 ...`.
/// Frames strictly increasing, measurement dimension constant.
std::vector<Frame> read_frames(std::istream& in);
std::vector<Frame> read_frames_file(const std::string& path);
void write_frame_line(std::ostream& out, const Frame& f, double time);

void write_counts_header(std::ostream& out);
void write_counts(std::ostream& out, int frame, int num_factors,
                  int total_hypos);

/// One line per reported track: the maximum-weight hypothesis of each
/// factor, factors in id order.
void write_estimates(std::ostream& out, int frame, const FilterState& state);

/// Graphviz rendering of the pedigree forest under an artificial root.
/// Merge weights carry prefix "-1", splits "-2" (with measurements) and
/// "-3" (without); live leaves are drawn as diamonds.
void write_tree(std::ostream& out, const std::vector<PedigreeEvent>& events);

/// Streams a frame file through the tracker; writes counts.csv,
/// estimates.txt and (in debug mode) tree.dot under out_dir.
/// Returns the process exit status.
int run_track(const std::string& frames_path, const std::string& config_path,
              const std::string& out_dir, bool debug_tree);

/// Writes a simulated frame file; deterministic per seed.
int run_simulate(const std::string& spec_path, const std::string& out_path,
                 std::uint64_t seed);

}  // namespace msglmb
