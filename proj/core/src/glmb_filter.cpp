#include "msglmb/glmb_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace msglmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double neg_log(double v) { return v > 0.0 ? -std::log(v) : kInf; }

}  // namespace

CostMatrix LikelihoodMatrix::to_cost_matrix() const {
    const int r = static_cast<int>(rows.size());
    const int c = num_detected_cols();
    CostMatrix cost = CostMatrix::Constant(r, c + 2 * r, kInf);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) cost(i, j) = neg_log(detected(i, j));
        cost(i, c + i) = neg_log(missed_diag(i));
        cost(i, c + r + i) = neg_log(died_diag(i));
    }
    return cost;
}

LikelihoodMatrix build_likelihood_matrix(const Hypothesis& h,
                                         const std::vector<LabeledTrack>& births,
                                         const std::vector<Measurement>& meas,
                                         const TrackerConfig& cfg) {
    const SensorModel& s = cfg.sensor;
    const double gamma = cfg.gamma();

    LikelihoodMatrix m;
    for (const auto& t : h.tracks)
        m.rows.push_back({t, cfg.motion.survival_prob, false, false});
    for (const auto& b : births) m.rows.push_back({b, cfg.birth_prob, false, true});

    for (const auto& z : meas) {
        for (int mode = 0; mode < s.num_modes(); ++mode) {
            MeasurementId id = z.id;
            id.mode = mode;
            m.cols.push_back({id, z.z});
        }
    }

    const int r = static_cast<int>(m.rows.size());
    const int c = static_cast<int>(m.cols.size());
    m.detected = Eigen::MatrixXd::Zero(r, c);
    m.missed_diag = Eigen::VectorXd::Zero(r);
    m.died_diag = Eigen::VectorXd::Zero(r);
    m.posteriors.assign(r, std::vector<std::optional<GaussianDensity>>(c));

    for (int i = 0; i < r; ++i) {
        auto& row = m.rows[i];
        row.fov = in_fov(s, s.observation * row.track.density.mean);
        // a birth candidate either appears with its detection or stays unborn
        m.missed_diag(i) =
            row.birth ? 0.0
                      : (row.fov ? row.survival * (1.0 - s.detect_prob)
                                 : row.survival);
        m.died_diag(i) = 1.0 - row.survival;
        if (!row.fov) continue;  // an unobservable track yields no detection
        for (int j = 0; j < c; ++j) {
            const auto& col = m.cols[j];
            if (mahalanobis2(row.track.density, s, col.z, col.id.mode) > gamma)
                continue;
            auto [post, lik] = update(row.track.density, s, col.z, col.id.mode);
            m.detected(i, j) =
                row.survival * s.detect_prob * lik / s.clutter_density;
            m.posteriors[i][j] = std::move(post);
        }
    }
    return m;
}

ChildIterator::ChildIterator(const LikelihoodMatrix& matrix,
                             double parent_log_weight, int parent_index,
                             int budget)
    : murty_(matrix.to_cost_matrix()),
      parent_log_weight_(parent_log_weight),
      parent_index_(parent_index),
      remaining_(budget) {}

ChildCandidate ChildIterator::get_next() {
    Assignment a = murty_.get_next();
    --remaining_;
    return ChildCandidate{parent_index_, a, parent_log_weight_ - a.cost};
}

std::vector<ChildCandidate> select_top_k(std::vector<ChildIterator>& parents,
                                         int k) {
    struct Slot {
        ChildCandidate cand;
        int parent;
    };
    std::vector<std::optional<Slot>> buffer(parents.size());
    for (std::size_t p = 0; p < parents.size(); ++p)
        if (parents[p].has_next()) buffer[p] = Slot{parents[p].get_next(), static_cast<int>(p)};

    std::vector<ChildCandidate> out;
    while (static_cast<int>(out.size()) < k) {
        int best = -1;
        for (std::size_t p = 0; p < buffer.size(); ++p) {
            if (!buffer[p]) continue;
            if (best < 0 || buffer[p]->cand.log_weight > buffer[best]->cand.log_weight)
                best = static_cast<int>(p);
        }
        if (best < 0) break;  // no more children anywhere
        out.push_back(buffer[best]->cand);
        if (parents[best].has_next())
            buffer[best] = Slot{parents[best].get_next(), best};
        else
            buffer[best].reset();
    }
    return out;
}

Hypothesis realize_child(const LikelihoodMatrix& matrix, const Assignment& a,
                         double log_weight, int frame,
                         const TrackerConfig& cfg) {
    const int c = matrix.num_detected_cols();
    const int r = static_cast<int>(matrix.rows.size());

    Hypothesis child;
    child.log_weight = log_weight;
    for (int i = 0; i < r; ++i) {
        const int j = a.row_to_col[i];
        if (j < c) {
            LabeledTrack t = matrix.rows[i].track;
            t.density = *matrix.posteriors[i][j];
            t.density_index = push_outcome(
                t.density_index, AssocOutcome::detected(matrix.cols[j].id),
                cfg.window_n);
            child.tracks.push_back(std::move(t));
        } else if (j < c + r) {
            LabeledTrack t = matrix.rows[i].track;
            t.density_index = push_outcome(
                t.density_index, AssocOutcome::missed(frame), cfg.window_n);
            child.tracks.push_back(std::move(t));
        }
        // died / unborn rows are dropped
    }
    std::sort(child.tracks.begin(), child.tracks.end(),
              [](const LabeledTrack& x, const LabeledTrack& y) {
                  return x.label < y.label;
              });
    return child;
}

Factor split_modes(Factor f) {
    // Mixture modes are expanded into per-mode likelihood columns when
    // the matrix is built, so every track density here is unimodal and
    // already carries its mode in the density index.
    return f;
}

Factor marginalize_history(Factor f, std::vector<int>* kept_of) {
    std::map<HypoSignature, std::size_t> first;  // signature -> output index
    Factor out;
    out.id = f.id;
    std::vector<std::vector<double>> group_logs;
    std::vector<int> reps;

    for (std::size_t i = 0; i < f.hypotheses.size(); ++i) {
        auto sig = signature_of(f.hypotheses[i]);
        auto it = first.find(sig);
        if (it == first.end()) {
            first.emplace(std::move(sig), out.hypotheses.size());
            group_logs.push_back({f.hypotheses[i].log_weight});
            reps.push_back(static_cast<int>(i));
            out.hypotheses.push_back(std::move(f.hypotheses[i]));
        } else {
            group_logs[it->second].push_back(f.hypotheses[i].log_weight);
        }
    }
    for (std::size_t g = 0; g < group_logs.size(); ++g)
        out.hypotheses[g].log_weight = log_sum_exp(group_logs[g]);
    if (kept_of) *kept_of = std::move(reps);
    return out;
}

std::vector<LabeledTrack> make_birth_candidates(
    const std::vector<Measurement>& meas, int frame, const TrackerConfig& cfg) {
    std::vector<LabeledTrack> births;
    births.reserve(meas.size());
    for (const auto& z : meas) {
        LabeledTrack t;
        t.label = TrackLabel{frame, z.id.index};
        t.density.mean = lift_measurement(cfg.sensor, z.z);
        t.density.cov = cfg.birth_cov;
        births.push_back(std::move(t));
    }
    std::sort(births.begin(), births.end(),
              [](const LabeledTrack& a, const LabeledTrack& b) {
                  return a.label < b.label;
              });
    return births;
}

UpdateResult update_factor(const Factor& f, const std::vector<Measurement>& meas,
                           const std::vector<LabeledTrack>& births,
                           const TrackerConfig& cfg, int new_factor_id,
                           int frame) {
    Factor predicted = f;
    for (auto& h : predicted.hypotheses)
        for (auto& t : h.tracks) t.density = predict(t.density, cfg.motion);

    std::vector<LikelihoodMatrix> matrices;
    matrices.reserve(predicted.hypotheses.size());
    std::vector<ChildIterator> iters;
    iters.reserve(predicted.hypotheses.size());
    for (std::size_t i = 0; i < predicted.hypotheses.size(); ++i) {
        matrices.push_back(build_likelihood_matrix(predicted.hypotheses[i],
                                                   births, meas, cfg));
        iters.emplace_back(matrices.back(), predicted.hypotheses[i].log_weight,
                           static_cast<int>(i), cfg.max_children_per_hypo);
    }

    const auto picks = select_top_k(iters, cfg.max_hypos_per_factor);
    if (picks.empty()) throw AllWeightsZero{};

    Factor out;
    out.id = new_factor_id;
    std::vector<int> parent_of;
    for (const auto& cand : picks) {
        out.hypotheses.push_back(realize_child(matrices[cand.parent_index],
                                               cand.assignment, cand.log_weight,
                                               frame, cfg));
        parent_of.push_back(cand.parent_index);
    }

    out = split_modes(std::move(out));
    std::vector<int> kept;
    out = marginalize_history(std::move(out), &kept);
    std::vector<int> parents;
    parents.reserve(kept.size());
    for (int idx : kept) parents.push_back(parent_of[idx]);
    out = normalize(std::move(out));
    return UpdateResult{std::move(out), std::move(parents)};
}

}  // namespace msglmb
