#pragma once

#include <Eigen/Dense>

namespace msglmb {

/// Unimodal Gaussian kinematic density. `cov` must stay symmetric
/// positive-definite; operations in kinematics.hpp re-symmetrize after
/// every transform.
struct GaussianDensity {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    int dim() const { return static_cast<int>(mean.size()); }
};

}  // namespace msglmb
