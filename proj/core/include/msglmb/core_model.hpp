#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "msglmb/gaussian.hpp"

namespace msglmb {

/// Birth frame plus ordinal within that frame's birth candidates.
/// Totally ordered, never reused.
struct TrackLabel {
    int birth_frame = 0;
    int birth_index = 0;

    auto operator<=>(const TrackLabel&) const = default;
};

std::string to_string(const TrackLabel& l);

/// Globally unique identifier of one measurement mode:
/// (frame, index-in-frame, mode). mode is 0 for unimodal likelihoods.
struct MeasurementId {
    int frame = 0;
    int index = 0;
    int mode = 0;

    auto operator<=>(const MeasurementId&) const = default;
};

std::string to_string(const MeasurementId& m);

/// One association outcome: either a measurement was incorporated or the
/// track was missed at a given frame. The Missed token keeps density
/// indices of tracks with different miss patterns distinct.
struct AssocOutcome {
    enum class Kind { detected, missed };

    Kind kind = Kind::missed;
    MeasurementId id{};   // meaningful when kind == detected
    int miss_frame = 0;   // meaningful when kind == missed

    static AssocOutcome detected(MeasurementId m) {
        return AssocOutcome{Kind::detected, m, 0};
    }
    static AssocOutcome missed(int frame) {
        return AssocOutcome{Kind::missed, {}, frame};
    }

    auto operator<=>(const AssocOutcome&) const = default;
};

std::string to_string(const AssocOutcome& o);

/// Fixed-length window of the most recent association outcomes, oldest
/// first. Identifies a kinematic density for marginalization purposes.
using DensityIndex = std::vector<AssocOutcome>;

/// Appends `o`; evicts the oldest entry once the window exceeds
/// `window_n`. Requires window_n >= 1.
DensityIndex push_outcome(DensityIndex d, const AssocOutcome& o, int window_n);

struct LabeledTrack {
    TrackLabel label;
    DensityIndex density_index;
    GaussianDensity density;
};

/// One global data-association explanation. Tracks are kept sorted by
/// label; weights live in log domain to survive long products.
struct Hypothesis {
    double log_weight = 0.0;
    std::vector<LabeledTrack> tracks;

    double weight() const;
};

/// (label, density-index) pairs sorted by label. Hypotheses with equal
/// signatures are mergeable by weight addition.
using HypoSignature = std::vector<std::pair<TrackLabel, DensityIndex>>;

HypoSignature signature_of(const Hypothesis& h);

struct AllWeightsZero : std::runtime_error {
    AllWeightsZero() : std::runtime_error("factor has no positive-weight hypothesis") {}
};

/// A normalized, weighted set of hypotheses over a disjoint label subset.
/// The global filtering density is the product of live factors.
struct Factor {
    int id = 0;
    std::vector<Hypothesis> hypotheses;

    std::set<TrackLabel> label_set() const;
    /// Sum of plain weights; 1 (to 1e-9) after normalize.
    double total_weight() const;
    /// Probability that the factor contains at least one track.
    double prob_nonempty() const;
};

/// Rescales hypothesis weights to sum to one (log-sum-exp based).
/// Throws AllWeightsZero if every weight is zero or the factor is empty.
Factor normalize(Factor f);

/// log(sum(exp(x_i))) without overflow; -inf for an empty span.
double log_sum_exp(std::span<const double> xs);

}  // namespace msglmb
