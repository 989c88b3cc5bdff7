#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "msglmb/kinematics.hpp"

namespace msglmb {

struct TargetSpec {
    int birth_frame = 0;
    int death_frame = 0;  // inclusive; must be >= birth_frame
    Eigen::VectorXd initial_state;
};

struct ScenarioSpec {
    int num_frames = 0;
    double clutter_rate = 0.0;  // Poisson mean per frame, uniform over FoV
    bool process_noise = false;
    std::vector<TargetSpec> targets;
};

struct InvalidSpec : std::runtime_error {
    explicit InvalidSpec(const std::string& what) : std::runtime_error(what) {}
};

struct GroundTruthTrack {
    int birth_frame = 0;
    int death_frame = 0;
    std::vector<Eigen::VectorXd> states;  // one per frame, birth..death

    bool alive_at(int frame) const {
        return frame >= birth_frame && frame <= death_frame;
    }
    const Eigen::VectorXd& state_at(int frame) const {
        return states.at(static_cast<std::size_t>(frame - birth_frame));
    }
};

struct Frame {
    int frame = 0;
    std::vector<Measurement> measurements;  // indices dense from 0
};

/// Propagates every target through the motion model; deterministic for a
/// given seed (noise draws, when enabled, are seeded per target).
std::vector<GroundTruthTrack> generate_truth(const ScenarioSpec& spec,
                                             const MotionModel& motion,
                                             std::uint64_t seed);

/// Detections (probability P_D, Gaussian noise, mixture-mode offsets when
/// declared) plus Poisson clutter uniform over the FoV box. Deterministic
/// for a given (seed, frame).
Frame generate_frame(const std::vector<GroundTruthTrack>& truth, int frame,
                     const SensorModel& sensor, double clutter_rate,
                     std::uint64_t seed);

}  // namespace msglmb
