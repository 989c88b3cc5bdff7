#pragma once

#include <optional>
#include <vector>

#include "msglmb/assignment.hpp"
#include "msglmb/core_model.hpp"
#include "msglmb/kinematics.hpp"

namespace msglmb {

struct TrackerConfig {
    int window_n = 5;               // density-index window size N
    int max_children_per_hypo = 10;
    int max_product_hypos = 30;     // cap on product hypotheses when merging
    int max_hypos_per_factor = 30;  // K kept per factor after update
    double independence_tol = 1e-3;
    double gate_gamma = 0.0;        // <= 0 selects the chi-square default
    double empty_factor_tol = 1e-3;
    double birth_prob = 0.05;
    Eigen::MatrixXd birth_cov;
    MotionModel motion;
    SensorModel sensor;
    bool force_single_factor = false;  // diagnostic: one global factor, no split

    double gamma() const {
        return gate_gamma > 0.0
                   ? gate_gamma
                   : default_gate_gamma(static_cast<int>(sensor.observation.rows()));
    }
};

/// The whole-filter state: live factors with pairwise-disjoint label sets.
struct FilterState {
    std::vector<Factor> factors;
    int next_factor_id = 0;
    int frame = 0;
    TrackerConfig config;
};

/// Likelihood matrix for one hypothesis: rows are tracks
/// (existing, pre-predicted, plus birth candidates), columns split into a
/// detected block (one column per gating (measurement, mode) pair), a
/// missed diagonal and a died diagonal.
struct LikelihoodMatrix {
    struct Row {
        LabeledTrack track;    // predicted density for existing tracks
        double survival;       // P_S, or birth_prob for birth rows
        bool fov;
        bool birth;            // birth rows cannot be missed, only unborn
    };
    struct DetectedCol {
        MeasurementId id;      // mode field set per mixture expansion
        Eigen::VectorXd z;
    };

    std::vector<Row> rows;
    std::vector<DetectedCol> cols;
    Eigen::MatrixXd detected;      // rows x cols, 0 for non-gating pairs
    Eigen::VectorXd missed_diag;
    Eigen::VectorXd died_diag;
    // Kalman posteriors for gating pairs, indexed [row][col].
    std::vector<std::vector<std::optional<GaussianDensity>>> posteriors;

    /// Negative-log cost matrix with the detected|missed|died layout.
    CostMatrix to_cost_matrix() const;
    int num_detected_cols() const { return static_cast<int>(cols.size()); }
};

/// A not-yet-realized child hypothesis.
struct ChildCandidate {
    int parent_index = 0;
    Assignment assignment;
    double log_weight = 0.0;  // parent log-weight minus assignment cost
};

LikelihoodMatrix build_likelihood_matrix(const Hypothesis& h,
                                         const std::vector<LabeledTrack>& births,
                                         const std::vector<Measurement>& meas,
                                         const TrackerConfig& cfg);

/// Murty-backed stream of child candidates for one parent hypothesis,
/// best first, bounded by a child budget.
class ChildIterator {
public:
    ChildIterator(const LikelihoodMatrix& matrix, double parent_log_weight,
                  int parent_index, int budget);

    bool has_next() const { return remaining_ > 0 && murty_.has_next(); }
    ChildCandidate get_next();

private:
    MurtyIterator murty_;
    double parent_log_weight_;
    int parent_index_;
    int remaining_;
};

/// Exact global top-K across parents via the selection buffer: each
/// parent offers its best unconsumed child; repeatedly extract the
/// best buffered entry and refill from the same parent.
std::vector<ChildCandidate> select_top_k(std::vector<ChildIterator>& parents,
                                         int k);

/// Turns an assignment over `matrix` into a concrete child hypothesis:
/// detected rows get the Kalman posterior and a Detected outcome, missed
/// rows keep the predicted density and a Missed outcome, died rows and
/// unborn birth rows are dropped.
Hypothesis realize_child(const LikelihoodMatrix& matrix, const Assignment& a,
                         double log_weight, int frame, const TrackerConfig& cfg);

/// Mode resolution pass. Mixture modes are expanded into separate
/// likelihood columns at matrix-build time, so every stored density is
/// already unimodal and this is the identity on well-formed factors.
Factor split_modes(Factor f);

/// Collapses hypotheses with equal signatures (marginalization over the
/// forgotten history), summing weights in log domain. When `kept_of` is
/// given, records for each output hypothesis the input index of its
/// representative.
Factor marginalize_history(Factor f, std::vector<int>* kept_of = nullptr);

/// One birth candidate per measurement: label (frame, index), density
/// lifted from z with zero velocity and covariance birth_cov.
std::vector<LabeledTrack> make_birth_candidates(const std::vector<Measurement>& meas,
                                                int frame,
                                                const TrackerConfig& cfg);

struct UpdateResult {
    Factor factor;
    /// Parent hypothesis index (into the pre-update factor) per output
    /// hypothesis; used for pedigree recording.
    std::vector<int> parent_index;
};

/// Joint predict-update of one factor. Empty `meas` performs the
/// negative-information update. Throws AllWeightsZero when no child has
/// positive weight (caller deletes the factor).
UpdateResult update_factor(const Factor& f, const std::vector<Measurement>& meas,
                           const std::vector<LabeledTrack>& births,
                           const TrackerConfig& cfg, int new_factor_id,
                           int frame);

}  // namespace msglmb
