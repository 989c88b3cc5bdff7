#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "msglmb/core_model.hpp"
#include "msglmb/gaussian.hpp"

namespace msglmb {

/// Linear motion model applied once per frame.
struct MotionModel {
    Eigen::MatrixXd transition;     // F, d_x x d_x
    Eigen::MatrixXd process_noise;  // Q, d_x x d_x, PSD
    double survival_prob = 0.99;    // P_S
};

/// One component of a declared mixture likelihood (radar-aliasing style):
/// the predicted measurement is shifted by `offset` with prior `weight`.
struct SensorMode {
    Eigen::VectorXd offset;
    double weight = 1.0;
};

struct SensorModel {
    Eigen::MatrixXd observation;  // H, d_z x d_x
    Eigen::MatrixXd noise;        // R, d_z x d_z, SPD
    double detect_prob = 0.9;     // P_D
    double clutter_density = 1e-3;  // kappa, per unit measurement volume
    Eigen::VectorXd fov_min;      // axis-aligned box in measurement space
    Eigen::VectorXd fov_max;
    std::vector<SensorMode> modes;  // empty => unimodal

    int num_modes() const { return modes.empty() ? 1 : static_cast<int>(modes.size()); }
    Eigen::VectorXd mode_offset(int mode) const;
    double mode_weight(int mode) const;
};

struct Measurement {
    MeasurementId id;   // mode field 0 at ingestion
    Eigen::VectorXd z;
};

struct SingularInnovation : std::runtime_error {
    SingularInnovation() : std::runtime_error("innovation covariance is not SPD") {}
};

/// mean' = F mean, cov' = F cov F^T + Q.
GaussianDensity predict(const GaussianDensity& g, const MotionModel& m);

/// Kalman update against measurement z under the given sensor mode.
/// Returns the posterior and the predictive likelihood value at z
/// (Gaussian pdf times the mode weight). Joseph-form covariance.
std::pair<GaussianDensity, double> update(const GaussianDensity& g,
                                          const SensorModel& s,
                                          const Eigen::VectorXd& z,
                                          int mode = 0);

/// Squared Mahalanobis distance of the innovation for one mode.
double mahalanobis2(const GaussianDensity& g, const SensorModel& s,
                    const Eigen::VectorXd& z, int mode = 0);

/// True iff the innovation's squared Mahalanobis distance, minimized over
/// declared modes, is within gamma.
bool gate(const GaussianDensity& g, const SensorModel& s,
          const Eigen::VectorXd& z, double gamma);

/// P_S * P_D * likelihood(z | g, mode) / kappa.
double eta_detected(const GaussianDensity& g, const SensorModel& s,
                    const MotionModel& m, const Eigen::VectorXd& z, int mode = 0);

/// P_S (1 - P_D) inside the field of view; P_S outside (an unobservable
/// track carries no detection evidence).
double eta_missed(const MotionModel& m, const SensorModel& s, bool in_fov);

/// 1 - P_S.
double eta_died(const MotionModel& m);

/// Whether a point in measurement space lies inside the sensor FoV box.
bool in_fov(const SensorModel& s, const Eigen::VectorXd& z);

/// Zero-velocity lift of a measurement into state space via the
/// pseudo-inverse of H. Used for measurement-driven birth.
Eigen::VectorXd lift_measurement(const SensorModel& s, const Eigen::VectorXd& z);

/// Chi-square quantile at probability 0.9999 for d_z degrees of freedom;
/// the default gate threshold.
double default_gate_gamma(int dz);

}  // namespace msglmb
