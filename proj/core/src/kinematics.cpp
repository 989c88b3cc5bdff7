#include "msglmb/kinematics.hpp"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

namespace msglmb {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
    return 0.5 * (a + a.transpose());
}

// Cholesky of the innovation covariance; throws if not SPD.
Eigen::LLT<Eigen::MatrixXd> innovation_chol(const GaussianDensity& g,
                                            const SensorModel& s) {
    const Eigen::MatrixXd S =
        symmetrize(s.observation * g.cov * s.observation.transpose() + s.noise);
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw SingularInnovation{};
    return llt;
}

double gaussian_pdf(const Eigen::LLT<Eigen::MatrixXd>& llt,
                    const Eigen::VectorXd& innovation) {
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(innovation);
    const double quad = w.squaredNorm();
    double log_det = 0.0;
    for (int i = 0; i < L.rows(); ++i) log_det += std::log(L(i, i));
    const double log_pdf =
        -0.5 * quad - log_det - 0.5 * L.rows() * std::log(2.0 * M_PI);
    return std::exp(log_pdf);
}

}  // namespace

Eigen::VectorXd SensorModel::mode_offset(int mode) const {
    if (modes.empty()) return Eigen::VectorXd::Zero(observation.rows());
    return modes.at(mode).offset;
}

double SensorModel::mode_weight(int mode) const {
    if (modes.empty()) return 1.0;
    return modes.at(mode).weight;
}

GaussianDensity predict(const GaussianDensity& g, const MotionModel& m) {
    GaussianDensity out;
    out.mean = m.transition * g.mean;
    out.cov = symmetrize(m.transition * g.cov * m.transition.transpose() +
                         m.process_noise);
    return out;
}

std::pair<GaussianDensity, double> update(const GaussianDensity& g,
                                          const SensorModel& s,
                                          const Eigen::VectorXd& z, int mode) {
    const auto llt = innovation_chol(g, s);
    const Eigen::VectorXd zhat = s.observation * g.mean + s.mode_offset(mode);
    const Eigen::VectorXd innovation = z - zhat;

    const Eigen::MatrixXd PHt = g.cov * s.observation.transpose();
    const Eigen::MatrixXd K = llt.solve(PHt.transpose()).transpose();

    GaussianDensity post;
    post.mean = g.mean + K * innovation;
    const Eigen::MatrixXd I =
        Eigen::MatrixXd::Identity(g.cov.rows(), g.cov.cols());
    const Eigen::MatrixXd A = I - K * s.observation;
    post.cov = symmetrize(A * g.cov * A.transpose() +
                          K * s.noise * K.transpose());

    const double lik = s.mode_weight(mode) * gaussian_pdf(llt, innovation);
    return {std::move(post), lik};
}

double mahalanobis2(const GaussianDensity& g, const SensorModel& s,
                    const Eigen::VectorXd& z, int mode) {
    const auto llt = innovation_chol(g, s);
    const Eigen::VectorXd innovation =
        z - (s.observation * g.mean + s.mode_offset(mode));
    const Eigen::MatrixXd L = llt.matrixL();
    return L.triangularView<Eigen::Lower>().solve(innovation).squaredNorm();
}

bool gate(const GaussianDensity& g, const SensorModel& s,
          const Eigen::VectorXd& z, double gamma) {
    for (int mode = 0; mode < s.num_modes(); ++mode)
        if (mahalanobis2(g, s, z, mode) <= gamma) return true;
    return false;
}

double eta_detected(const GaussianDensity& g, const SensorModel& s,
                    const MotionModel& m, const Eigen::VectorXd& z, int mode) {
    if (s.detect_prob <= 0.0) return 0.0;
    const double lik = update(g, s, z, mode).second;
    return m.survival_prob * s.detect_prob * lik / s.clutter_density;
}

double eta_missed(const MotionModel& m, const SensorModel& s, bool fov) {
    return fov ? m.survival_prob * (1.0 - s.detect_prob) : m.survival_prob;
}

double eta_died(const MotionModel& m) { return 1.0 - m.survival_prob; }

bool in_fov(const SensorModel& s, const Eigen::VectorXd& z) {
    if (s.fov_min.size() == 0) return true;  // unbounded sensor
    for (int i = 0; i < z.size(); ++i)
        if (z(i) < s.fov_min(i) || z(i) > s.fov_max(i)) return false;
    return true;
}

Eigen::VectorXd lift_measurement(const SensorModel& s, const Eigen::VectorXd& z) {
    // H spans the full state width, so the pseudo-inverse zeroes the
    // unobserved (velocity) components.
    return s.observation.completeOrthogonalDecomposition().pseudoInverse() * z;
}

double default_gate_gamma(int dz) {
    boost::math::chi_squared dist(static_cast<double>(dz));
    return boost::math::quantile(dist, 0.9999);
}

}  // namespace msglmb
