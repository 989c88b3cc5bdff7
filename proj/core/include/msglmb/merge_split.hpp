#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "msglmb/glmb_filter.hpp"

namespace msglmb {

/// Boolean gating incidence for the current frame. Rows index the
/// frame's measurements; columns index live track labels and the
/// measurements themselves. A label gates a measurement iff ANY live
/// density carrying that label gates it (against the predicted density).
/// Two measurements gate iff their birth-plausibility regions overlap.
struct GateMatrix {
    std::vector<MeasurementId> meas_ids;
    std::vector<Eigen::VectorXd> meas_z;
    std::vector<TrackLabel> labels;
    std::vector<std::vector<char>> track_gate;  // [meas][label]
    std::vector<std::vector<char>> meas_gate;   // [meas][meas]

    bool label_gates(std::size_t mi, const TrackLabel& l) const;
};

GateMatrix build_gate_matrix(const FilterState& state,
                             const std::vector<Measurement>& meas);

/// A connected component of the gating relation: entities from different
/// clusters do not gate.
struct Cluster {
    std::set<MeasurementId> measurement_ids;
    std::set<TrackLabel> track_labels;
};

std::vector<Cluster> cluster_stage1(const GateMatrix& gm);

/// Connected component of the factor-by-cluster incidence relation.
/// Indices refer into the vectors passed to cluster_stage2.
struct SuperGroup {
    std::set<int> factor_ids;
    std::set<int> cluster_ids;
};

/// Second-stage clustering: a factor is incident to a cluster iff their
/// label sets intersect. Only clusters containing measurements
/// participate; factors incident to nothing form factor-only groups.
std::vector<SuperGroup> cluster_stage2(const std::vector<Factor>& factors,
                                       const std::vector<Cluster>& clusters);

struct LabelCollision : std::runtime_error {
    LabelCollision() : std::runtime_error("factors to merge share a track label") {}
};

struct MergeResult {
    Factor factor;
    /// k_min_sum selections: for product hypothesis i, picks[i].indices[k]
    /// is the hypothesis chosen from the k-th source factor.
    std::vector<Selection> picks;
};

/// Merges factors with disjoint label sets into one factor of product
/// hypotheses, keeping the top `cap` by weight (K-min-sum over negative
/// log weights). Result is normalized and carries `new_id`.
MergeResult merge_factors(const std::vector<Factor>& fs, int cap, int new_id);

/// Splits the factor's labels into those that gate any measurement of
/// the group and those that do not.
std::pair<std::set<TrackLabel>, std::set<TrackLabel>> partition_gated(
    const Factor& f, const std::set<MeasurementId>& meas_in_group,
    const GateMatrix& gm);

/// Joint probability table over (gated-side, non-gated-side)
/// subhypothesis signatures; P sums the weights of the original
/// hypotheses restricting to each pair.
struct JointTable {
    struct Side {
        HypoSignature signature;
        std::vector<LabeledTrack> tracks;
        std::vector<int> contributors;  // hypothesis indices mapping here
    };
    std::vector<Side> rows;  // gated side
    std::vector<Side> cols;  // non-gated side
    Eigen::MatrixXd p;
};

JointTable build_joint_table(const Factor& f,
                             const std::set<TrackLabel>& gated_labels,
                             const std::set<TrackLabel>& nongated_labels);

/// max_{i,j} |P(i,j) - P(i) P(j)|, the joint probability reconstruction
/// error used as the split criterion.
double independence_epsilon(const JointTable& t);

/// Replaces the factor with two independent factors built from the
/// table's marginals. Caller checks independence_epsilon first.
std::pair<Factor, Factor> split_factor(const Factor& f, const JointTable& t,
                                       int gated_id, int nongated_id);

/// Removes factors whose probability of containing a track is below
/// `empty_factor_tol` (exactly-empty factors are always removed).
FilterState delete_empty(FilterState state);

// ---------------------------------------------------------------------
// Structured events for diagnostics (pedigree tree, factor lifecycle).

struct PedigreeEvent {
    enum class Kind { child, merged, split_with_meas, split_without_meas };

    int frame = 0;
    long node = 0;
    std::vector<long> parents;
    Kind kind = Kind::child;
    double weight = 0.0;
    std::vector<std::string> track_assoc;  // "trackID.measurementID" strings
};

struct FactorEvent {
    enum class Kind { created, merged, split, deleted };

    int frame = 0;
    Kind kind = Kind::created;
    int factor_id = 0;
    std::vector<int> source_ids;
};

class TrackerSink {
public:
    virtual ~TrackerSink() = default;
    virtual void on_pedigree(const PedigreeEvent&) {}
    virtual void on_factor(const FactorEvent&) {}
};

/// Node-id bookkeeping for the pedigree tree across frames.
struct PedigreeBook {
    std::map<int, std::vector<long>> hypo_nodes;  // factor id -> node per hypothesis
    long next_node = 1;
};

/// One full Merge/Split frame: clustering, new-factor creation, per
/// super-group merge / independence-test / split, updates, empty-factor
/// deletion, frame advance. Measurement ids must carry state.frame.
FilterState process_frame(FilterState state, const std::vector<Measurement>& meas,
                          TrackerSink* sink = nullptr,
                          PedigreeBook* book = nullptr);

}  // namespace msglmb
