#include "msglmb/scenario_sim.hpp"

#include <cmath>
#include <random>

namespace msglmb {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined value
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

Eigen::VectorXd gaussian_draw(const Eigen::MatrixXd& cov, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Eigen::VectorXd u(cov.rows());
    for (int i = 0; i < u.size(); ++i) u(i) = n01(rng);
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
    return L * u;
}

}  // namespace

std::vector<GroundTruthTrack> generate_truth(const ScenarioSpec& spec,
                                             const MotionModel& motion,
                                             std::uint64_t seed) {
    if (spec.num_frames < 0) throw InvalidSpec("negative frame count");
    std::vector<GroundTruthTrack> out;
    out.reserve(spec.targets.size());
    for (std::size_t ti = 0; ti < spec.targets.size(); ++ti) {
        const auto& t = spec.targets[ti];
        if (t.death_frame < t.birth_frame)
            throw InvalidSpec("target dies before it is born");
        if (t.initial_state.size() != motion.transition.rows())
            throw InvalidSpec("initial state dimension mismatch");

        GroundTruthTrack g;
        g.birth_frame = t.birth_frame;
        g.death_frame = t.death_frame;
        std::mt19937_64 rng(mix(seed, 0x7472757468ULL + ti));
        Eigen::VectorXd x = t.initial_state;
        g.states.push_back(x);
        for (int f = t.birth_frame + 1; f <= t.death_frame; ++f) {
            x = motion.transition * x;
            if (spec.process_noise && motion.process_noise.norm() > 0.0)
                x += gaussian_draw(motion.process_noise, rng);
            g.states.push_back(x);
        }
        out.push_back(std::move(g));
    }
    return out;
}

Frame generate_frame(const std::vector<GroundTruthTrack>& truth, int frame,
                     const SensorModel& sensor, double clutter_rate,
                     std::uint64_t seed) {
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(frame)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    Frame out;
    out.frame = frame;
    int index = 0;

    for (const auto& t : truth) {
        if (!t.alive_at(frame)) continue;
        const Eigen::VectorXd z0 = sensor.observation * t.state_at(frame);
        if (!in_fov(sensor, z0)) continue;
        if (u01(rng) > sensor.detect_prob) continue;

        Eigen::VectorXd z = z0;
        if (!sensor.modes.empty()) {
            // draw a mixture mode by its prior weight
            double r = u01(rng), acc = 0.0;
            for (const auto& m : sensor.modes) {
                acc += m.weight;
                if (r <= acc) {
                    z += m.offset;
                    break;
                }
            }
        }
        z += gaussian_draw(sensor.noise, rng);
        out.measurements.push_back({MeasurementId{frame, index++, 0}, z});
    }

    if (clutter_rate > 0.0) {
        std::poisson_distribution<int> pois(clutter_rate);
        const int n_clutter = pois(rng);
        for (int k = 0; k < n_clutter; ++k) {
            Eigen::VectorXd z(sensor.fov_min.size());
            for (int i = 0; i < z.size(); ++i)
                z(i) = sensor.fov_min(i) +
                       u01(rng) * (sensor.fov_max(i) - sensor.fov_min(i));
            out.measurements.push_back({MeasurementId{frame, index++, 0}, z});
        }
    }
    return out;
}

}  // namespace msglmb
