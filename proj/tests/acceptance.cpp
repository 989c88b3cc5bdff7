// Acceptance suite: one pass/fail line per criterion, nonzero exit on
// any failure. Oracles are brute-force enumerations; scenario checks use
// deterministic hand-crafted measurement streams.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "msglmb/cli_io.hpp"

using namespace msglmb;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool approx_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// ------------------------------------------------------------------
// 1. K-min-sum vs brute force.

bool criterion_kminsum() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int na = 1 + static_cast<int>(rng() % 5);
        std::vector<std::vector<double>> arrays(static_cast<std::size_t>(na));
        for (auto& a : arrays) {
            a.resize(1 + rng() % 8);
            for (auto& v : a) v = u(rng);
        }
        const int k = 1 + static_cast<int>(rng() % 25);

        // all sums
        std::vector<double> sums{0.0};
        for (const auto& a : arrays) {
            std::vector<double> next;
            next.reserve(sums.size() * a.size());
            for (double s : sums)
                for (double v : a) next.push_back(s + v);
            sums = std::move(next);
        }
        std::sort(sums.begin(), sums.end());

        const auto sel = k_min_sum(arrays, k);
        const std::size_t expect = std::min<std::size_t>(
            static_cast<std::size_t>(k), sums.size());
        if (sel.size() != expect) return false;
        for (std::size_t i = 0; i < sel.size(); ++i) {
            if (!approx_rel(sel[i].sum, sums[i], 1e-12)) return false;
            double re = 0.0;
            for (int j = 0; j < na; ++j)
                re += arrays[static_cast<std::size_t>(j)]
                            [static_cast<std::size_t>(sel[i].indices[static_cast<std::size_t>(j)])];
            if (!approx_rel(sel[i].sum, re, 1e-12)) return false;
        }
    }
    return seconds_since(t0) < 5.0;
}

// ------------------------------------------------------------------
// 2. Murty vs brute force on tracker-shaped matrices.

void enumerate_assignments(const CostMatrix& c, int row, std::vector<int>& used,
                           std::vector<int>& partial, double acc,
                           std::vector<Assignment>& out) {
    if (row == c.rows()) {
        out.push_back({partial, acc});
        return;
    }
    for (int j = 0; j < c.cols(); ++j) {
        if (used[static_cast<std::size_t>(j)] || std::isinf(c(row, j))) continue;
        used[static_cast<std::size_t>(j)] = 1;
        partial.push_back(j);
        enumerate_assignments(c, row + 1, used, partial, acc + c(row, j), out);
        partial.pop_back();
        used[static_cast<std::size_t>(j)] = 0;
    }
}

CostMatrix random_table(int tracks, int meas, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.1, 20.0);
    CostMatrix c = CostMatrix::Constant(
        tracks, meas + 2 * tracks, std::numeric_limits<double>::infinity());
    for (int i = 0; i < tracks; ++i) {
        for (int j = 0; j < meas; ++j) c(i, j) = u(rng);
        c(i, meas + i) = u(rng);
        c(i, meas + tracks + i) = u(rng);
    }
    return c;
}

bool criterion_murty() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        const int tracks = 1 + static_cast<int>(rng() % 5);
        const int meas = static_cast<int>(rng() % 7);
        const auto c = random_table(tracks, meas, rng);

        std::vector<Assignment> all;
        std::vector<int> used(static_cast<std::size_t>(c.cols()), 0);
        std::vector<int> partial;
        enumerate_assignments(c, 0, used, partial, 0.0, all);
        std::sort(all.begin(), all.end(),
                  [](const Assignment& a, const Assignment& b) {
                      return a.cost < b.cost;
                  });

        MurtyIterator it(c);
        std::size_t n = 0;
        double prev = -std::numeric_limits<double>::infinity();
        while (it.has_next()) {
            const auto a = it.get_next();
            if (n >= all.size()) return false;
            if (a.cost < prev - 1e-9) return false;  // monotone
            prev = a.cost;
            if (!approx_rel(a.cost, all[n].cost, 1e-9)) return false;
            ++n;
        }
        if (n != all.size()) return false;  // exhaustive
    }
    return seconds_since(t0) < 10.0;
}

// ------------------------------------------------------------------
// 3. Selection buffer vs global sort.

LikelihoodMatrix wide_matrix(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    LikelihoodMatrix m;
    LabeledTrack t;
    t.label = TrackLabel{0, 0};
    t.density.mean = Eigen::VectorXd::Zero(1);
    t.density.cov = Eigen::MatrixXd::Identity(1, 1);
    m.rows.push_back({t, 0.99, true, false});
    const int cols = 8;
    m.detected = Eigen::MatrixXd(1, cols);
    for (int j = 0; j < cols; ++j) {
        m.cols.push_back({MeasurementId{1, j, 0}, Eigen::VectorXd::Zero(1)});
        m.detected(0, j) = u(rng);
    }
    m.missed_diag = Eigen::VectorXd::Constant(1, u(rng));
    m.died_diag = Eigen::VectorXd::Constant(1, u(rng));
    m.posteriors.assign(1, std::vector<std::optional<GaussianDensity>>(cols));
    return m;
}

bool criterion_selection_buffer() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int parents = 1 + static_cast<int>(rng() % 6);
        std::vector<LikelihoodMatrix> ms;
        std::vector<double> logws;
        std::vector<double> all;
        for (int p = 0; p < parents; ++p) {
            ms.push_back(wide_matrix(rng));
            logws.push_back(std::log(u(rng)));
            const auto c = ms.back().to_cost_matrix();
            for (int j = 0; j < c.cols(); ++j)
                all.push_back(logws.back() - c(0, j));
        }
        std::vector<ChildIterator> its;
        for (int p = 0; p < parents; ++p)
            its.emplace_back(ms[static_cast<std::size_t>(p)],
                             logws[static_cast<std::size_t>(p)], p, 10);
        std::sort(all.rbegin(), all.rend());
        const int k = 1 + static_cast<int>(rng() % (10 * parents));
        const auto picks = select_top_k(its, k);
        const std::size_t expect =
            std::min<std::size_t>(static_cast<std::size_t>(k), all.size());
        if (picks.size() != expect) return false;
        for (std::size_t i = 0; i < picks.size(); ++i)
            if (!approx_rel(picks[i].log_weight, all[i], 1e-12)) return false;
    }
    return true;
}

// ------------------------------------------------------------------
// 4. Merge arithmetic.

LabeledTrack marker_track(int label_frame, int hypo) {
    LabeledTrack t;
    t.label = TrackLabel{label_frame, 0};
    t.density_index = {AssocOutcome::detected(MeasurementId{label_frame, hypo, 0})};
    t.density.mean = Eigen::VectorXd::Zero(1);
    t.density.cov = Eigen::MatrixXd::Identity(1, 1);
    return t;
}

Factor marked_factor(int id, int label_frame, int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (auto& v : w) sum += (v = u(rng));
    Factor f;
    f.id = id;
    for (int i = 0; i < n; ++i) {
        Hypothesis h;
        h.log_weight = std::log(w[static_cast<std::size_t>(i)] / sum);
        h.tracks = {marker_track(label_frame, i)};
        f.hypotheses.push_back(std::move(h));
    }
    return f;
}

int hypo_source(const Hypothesis& h, int label_frame) {
    for (const auto& t : h.tracks)
        if (t.label.birth_frame == label_frame) return t.density_index[0].id.index;
    return -1;
}

bool criterion_merge_arithmetic() {
    std::mt19937_64 rng(404);
    const auto a = marked_factor(0, 10, 10, rng);
    const auto b = marked_factor(1, 11, 10, rng);

    const auto full = merge_factors({a, b}, 1 << 20, 2);
    if (full.factor.hypotheses.size() != 100) return false;
    for (const auto& h : full.factor.hypotheses) {
        const int i = hypo_source(h, 10);
        const int j = hypo_source(h, 11);
        if (i < 0 || j < 0) return false;
        const double expect =
            a.hypotheses[static_cast<std::size_t>(i)].log_weight +
            b.hypotheses[static_cast<std::size_t>(j)].log_weight;
        if (std::abs(h.log_weight - expect) > 1e-12) return false;
    }

    const auto capped = merge_factors({a, b}, 30, 3);
    if (capped.factor.hypotheses.size() != 30) return false;
    std::vector<double> all;
    for (const auto& ha : a.hypotheses)
        for (const auto& hb : b.hypotheses)
            all.push_back(ha.log_weight + hb.log_weight);
    std::sort(all.rbegin(), all.rend());
    const double norm = log_sum_exp(std::span<const double>(all.data(), 30));
    for (int i = 0; i < 30; ++i)
        if (std::abs(capped.factor.hypotheses[static_cast<std::size_t>(i)].log_weight -
                     (all[static_cast<std::size_t>(i)] - norm)) > 1e-9)
            return false;
    return true;
}

// ------------------------------------------------------------------
// 5. Independence round trip.

Factor outer_factor(const std::vector<double>& pg, const std::vector<double>& pn,
                    Eigen::MatrixXd* delta = nullptr) {
    Factor f;
    for (std::size_t i = 0; i < pg.size(); ++i) {
        for (std::size_t j = 0; j < pn.size(); ++j) {
            Hypothesis h;
            double w = pg[i] * pn[j];
            if (delta) w += (*delta)(static_cast<int>(i), static_cast<int>(j));
            h.log_weight = std::log(w);
            h.tracks = {marker_track(20, static_cast<int>(i)),
                        marker_track(21, static_cast<int>(j))};
            h.tracks[0].label = TrackLabel{20, 0};
            h.tracks[1].label = TrackLabel{21, 0};
            f.hypotheses.push_back(std::move(h));
        }
    }
    return f;
}

std::vector<double> random_marginal(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::vector<double> p(static_cast<std::size_t>(n));
    double s = 0.0;
    for (auto& v : p) s += (v = u(rng));
    for (auto& v : p) v /= s;
    return p;
}

bool criterion_independence() {
    std::mt19937_64 rng(505);
    const std::set<TrackLabel> gl = {TrackLabel{20, 0}};
    const std::set<TrackLabel> nl = {TrackLabel{21, 0}};

    for (int trial = 0; trial < 100; ++trial) {
        const int ni = 2 + static_cast<int>(rng() % 3);
        const int nj = 2 + static_cast<int>(rng() % 3);
        const auto pg = random_marginal(ni, rng);
        const auto pn = random_marginal(nj, rng);
        const auto f = outer_factor(pg, pn);
        const auto t = build_joint_table(f, gl, nl);
        if (independence_epsilon(t) > 1e-12) return false;

        const auto [fg, fn] = split_factor(f, t, 0, 1);
        // reconstruct every cell from the two marginals
        for (int i = 0; i < static_cast<int>(t.rows.size()); ++i) {
            for (int j = 0; j < static_cast<int>(t.cols.size()); ++j) {
                const double rebuilt =
                    fg.hypotheses[static_cast<std::size_t>(i)].weight() *
                    fn.hypotheses[static_cast<std::size_t>(j)].weight();
                if (std::abs(rebuilt - t.p(i, j)) > 1e-9) return false;
            }
        }
    }

    // injected correlation of strength delta
    for (int trial = 0; trial < 100; ++trial) {
        const auto pg = random_marginal(2, rng);
        const auto pn = random_marginal(2, rng);
        double min_cell = 1.0;
        for (double a : pg)
            for (double b : pn) min_cell = std::min(min_cell, a * b);
        std::uniform_real_distribution<double> ud(0.1 * min_cell, 0.9 * min_cell);
        const double delta = ud(rng);
        Eigen::MatrixXd d(2, 2);
        d << delta, -delta, -delta, delta;  // preserves both marginals
        const auto f = outer_factor(pg, pn, &d);
        const auto t = build_joint_table(f, gl, nl);
        const double eps = independence_epsilon(t);
        if (eps < delta / 2.0) return false;
        const double tol = eps / 2.0;  // any tol < eps refuses the split
        if (eps <= tol) return false;
    }
    return true;
}

// ------------------------------------------------------------------
// Scenario plumbing for criteria 6-8.

TrackerConfig cv_config() {
    TrackerConfig cfg;
    cfg.motion.transition = Eigen::MatrixXd::Identity(4, 4);
    cfg.motion.transition(0, 2) = 1.0;
    cfg.motion.transition(1, 3) = 1.0;
    cfg.motion.process_noise = Eigen::MatrixXd::Identity(4, 4) * 0.01;
    cfg.motion.survival_prob = 0.99;
    cfg.sensor.observation = Eigen::MatrixXd::Zero(2, 4);
    cfg.sensor.observation(0, 0) = 1.0;
    cfg.sensor.observation(1, 1) = 1.0;
    cfg.sensor.noise = Eigen::MatrixXd::Identity(2, 2);
    cfg.sensor.detect_prob = 0.95;
    cfg.sensor.clutter_density = 1e-5;
    cfg.sensor.fov_min = Eigen::Vector2d(-500.0, -500.0);
    cfg.sensor.fov_max = Eigen::Vector2d(3500.0, 3500.0);
    cfg.birth_cov = Eigen::MatrixXd::Identity(4, 4) * 100.0;
    cfg.birth_cov(2, 2) = cfg.birth_cov(3, 3) = 25.0;
    cfg.birth_prob = 0.05;
    cfg.empty_factor_tol = 0.1;
    return cfg;
}

class EventCounter : public TrackerSink {
public:
    void on_factor(const FactorEvent& ev) override {
        if (ev.kind == FactorEvent::Kind::merged) merges.push_back(ev);
        if (ev.kind == FactorEvent::Kind::split) splits.push_back(ev);
    }
    std::vector<FactorEvent> merges;
    std::vector<FactorEvent> splits;
};

bool criterion_weight_conservation() {
    auto cfg = cv_config();
    ScenarioSpec spec;
    spec.num_frames = 50;
    spec.clutter_rate = 2.0;
    spec.process_noise = true;
    Eigen::VectorXd s1(4), s2(4), s3(4);
    s1 << 0, 0, 10, 5;
    s2 << 3000, 0, -10, 5;
    s3 << 1500, 3000, 0, -10;
    spec.targets = {{0, 49, s1}, {5, 40, s2}, {10, 49, s3}};

    const auto truth = generate_truth(spec, cfg.motion, 42);
    FilterState state;
    state.config = cfg;
    for (int f = 0; f < spec.num_frames; ++f) {
        const auto frame =
            generate_frame(truth, f, cfg.sensor, spec.clutter_rate, 42);
        state = process_frame(state, frame.measurements);
        for (const auto& fac : state.factors)
            if (std::abs(fac.total_weight() - 1.0) > 1e-9) return false;
    }

    // marginalization preserves total weight
    std::mt19937_64 rng(606);
    for (int trial = 0; trial < 50; ++trial) {
        Factor f;
        std::uniform_real_distribution<double> u(0.01, 1.0);
        for (int i = 0; i < 30; ++i) {
            Hypothesis h;
            h.log_weight = std::log(u(rng));
            h.tracks = {marker_track(5, static_cast<int>(rng() % 4))};
            f.hypotheses.push_back(std::move(h));
        }
        const double before = f.total_weight();
        const double after = marginalize_history(f).total_weight();
        if (!approx_rel(before, after, 1e-12)) return false;
    }
    return true;
}

// 7(a): far-apart targets, light clutter; 7(b): crossing targets.

FilterState seeded_state(const TrackerConfig& cfg,
                         const std::vector<Eigen::VectorXd>& states) {
    FilterState st;
    st.config = cfg;
    int id = 0;
    for (const auto& x : states) {
        Factor f;
        f.id = id;
        Hypothesis h;
        LabeledTrack t;
        t.label = TrackLabel{0, id};
        t.density.mean = x;
        t.density.cov = Eigen::MatrixXd::Identity(x.size(), x.size());
        h.tracks = {t};
        f.hypotheses = {h};
        st.factors.push_back(std::move(f));
        ++id;
    }
    st.next_factor_id = id;
    st.frame = 1;
    return st;
}

Measurement meas2d(int frame, int index, double x, double y) {
    return Measurement{MeasurementId{frame, index, 0}, Eigen::Vector2d(x, y)};
}

bool criterion_scenarios(bool& merge_seen_far) {
    const auto t0 = Clock::now();

    // (a) two static far-apart targets under light clutter
    {
        auto cfg = cv_config();
        cfg.motion.transition = Eigen::MatrixXd::Identity(2, 2);
        cfg.motion.process_noise = Eigen::MatrixXd::Identity(2, 2) * 0.01;
        cfg.sensor.observation = Eigen::MatrixXd::Identity(2, 2);
        cfg.birth_cov = Eigen::MatrixXd::Identity(2, 2) * 100.0;

        FilterState state;
        state.config = cfg;
        EventCounter events;
        std::mt19937_64 clutter_rng(11);
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        int frames_at_two = 0;
        const int frames = 30;
        for (int f = 0; f < frames; ++f) {
            std::vector<Measurement> ms;
            int idx = 0;
            if (u01(clutter_rng) < 0.95) ms.push_back(meas2d(f, idx++, 0.0, 0.0));
            if (u01(clutter_rng) < 0.95)
                ms.push_back(meas2d(f, idx++, 3000.0, 3000.0));
            if (u01(clutter_rng) < 0.05)
                ms.push_back(meas2d(f, idx++, -500.0 + 4000.0 * u01(clutter_rng),
                                    -500.0 + 4000.0 * u01(clutter_rng)));
            state.frame = f;
            state = process_frame(state, ms, &events, nullptr);
            if (f >= 5 && state.factors.size() == 2) ++frames_at_two;
        }
        merge_seen_far = !events.merges.empty();
        if (merge_seen_far) return false;
        if (state.factors.size() != 2) return false;
        if (frames_at_two < (30 - 5) * 7 / 10) return false;
    }

    // (b) crossing targets: merge near closest approach, split after
    // separation, split label sets partition the merged labels
    {
        auto cfg = cv_config();
        cfg.sensor.detect_prob = 1.0;
        cfg.sensor.noise = Eigen::MatrixXd::Identity(2, 2) * 0.1;
        cfg.motion.process_noise = Eigen::MatrixXd::Identity(4, 4) * 0.001;
        cfg.birth_cov = Eigen::MatrixXd::Identity(4, 4);
        cfg.sensor.fov_min = Eigen::Vector2d(-200.0, -200.0);
        cfg.sensor.fov_max = Eigen::Vector2d(200.0, 200.0);

        Eigen::VectorXd x1(4), x2(4);
        x1 << -60.0, 3.0, 6.0, 0.0;   // crosses x=0 at frame 10
        x2 << 60.0, -3.0, -6.0, 0.0;
        auto state = seeded_state(cfg, {x1, x2});
        state.frame = 1;

        EventCounter events;
        int merge_frame = -1, split_frame = -1;
        double split_separation = 0.0, split_gate_radius = 0.0;
        const std::set<TrackLabel> persistent = {TrackLabel{0, 0}, TrackLabel{0, 1}};

        // innovation-based gate radius of a track density
        const auto gate_radius_of = [&](const GaussianDensity& d) {
            const Eigen::MatrixXd s =
                cfg.sensor.noise + cfg.sensor.observation * d.cov *
                                       cfg.sensor.observation.transpose();
            return std::sqrt(cfg.gamma() *
                             s.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff());
        };
        // persistent labels owned by the factor with this id, plus the gate
        // radius of the first such track in its MAP hypothesis
        const auto persistent_side = [&](const FilterState& st, int id,
                                         double* radius) {
            std::set<TrackLabel> own;
            for (const auto& fac : st.factors) {
                if (fac.id != id) continue;
                const Hypothesis* best = nullptr;
                for (const auto& h : fac.hypotheses)
                    if (!best || h.log_weight > best->log_weight) best = &h;
                for (const auto& l : fac.label_set())
                    if (persistent.count(l)) own.insert(l);
                if (best && radius)
                    for (const auto& t : best->tracks)
                        if (persistent.count(t.label))
                            *radius = gate_radius_of(t.density);
            }
            return own;
        };

        for (int f = 1; f <= 20; ++f) {
            const double ax = -60.0 + 6.0 * f, bx = 60.0 - 6.0 * f;
            std::vector<Measurement> ms = {meas2d(f, 0, ax, 3.0),
                                           meas2d(f, 1, bx, -3.0)};
            const std::size_t merges_before = events.merges.size();
            const std::size_t splits_before = events.splits.size();
            state.frame = f;
            state = process_frame(state, ms, &events, nullptr);

            if (merge_frame < 0 && events.merges.size() > merges_before)
                merge_frame = f;
            if (merge_frame < 0 || split_frame >= 0) continue;
            // split events arrive in (gated, non-gated) pairs; look for the
            // pair that partitions the two persistent labels
            for (std::size_t e = splits_before; e + 1 < events.splits.size() + 1;
                 e += 2) {
                if (e + 1 >= events.splits.size()) break;
                double radius = 0.0;
                const auto s1 =
                    persistent_side(state, events.splits[e].factor_id, &radius);
                const auto s2 =
                    persistent_side(state, events.splits[e + 1].factor_id, nullptr);
                if (s1.size() == 1 && s2.size() == 1 && s1 != s2) {
                    split_frame = f;
                    split_separation = std::hypot(ax - bx, 6.0);
                    split_gate_radius = radius;
                    break;
                }
            }
        }
        if (merge_frame < 0 || split_frame < 0) return false;
        if (split_frame <= merge_frame) return false;
        if (std::abs(merge_frame - 10) > 3) return false;  // near closest approach
        if (split_gate_radius <= 0.0) return false;
        if (split_separation <= 5.0 * split_gate_radius) return false;
    }

    return seconds_since(t0) < 60.0;
}

// ------------------------------------------------------------------
// 8. Degeneracy A/B: a late birth is starved out of a single global
// factor but surfaces immediately under merge/split.

TrackerConfig degeneracy_config(bool forced) {
    TrackerConfig cfg;
    cfg.motion.transition = Eigen::MatrixXd::Identity(2, 2);
    cfg.motion.process_noise = Eigen::MatrixXd::Identity(2, 2) * 0.01;
    cfg.motion.survival_prob = 0.99;
    cfg.sensor.observation = Eigen::MatrixXd::Identity(2, 2);
    cfg.sensor.noise = Eigen::MatrixXd::Identity(2, 2);
    cfg.sensor.detect_prob = 0.95;
    cfg.sensor.clutter_density = 1e-3;
    cfg.sensor.fov_min = Eigen::Vector2d(-1000.0, -1000.0);
    cfg.sensor.fov_max = Eigen::Vector2d(6000.0, 6000.0);
    cfg.birth_cov = Eigen::MatrixXd::Identity(2, 2) * 158.0;
    cfg.birth_prob = 0.05;
    cfg.max_hypos_per_factor = 10;
    cfg.max_children_per_hypo = 10;
    cfg.empty_factor_tol = 1e-4;
    cfg.force_single_factor = forced;
    return cfg;
}

// first frame (>= birth) at which a track born then appears in any MAP
// hypothesis; -1 if never
int map_appearance_frame(bool forced, int last_frame) {
    const auto cfg = degeneracy_config(forced);
    Eigen::VectorXd c1(2), c2(2);
    c1 << 0.0, 0.0;
    c2 << 5000.0, 5000.0;
    auto state = seeded_state(cfg, {c1, c2});
    state.frame = 1;

    const int birth_frame = 15;
    for (int f = 1; f <= last_frame; ++f) {
        std::vector<Measurement> ms;
        int idx = 0;
        for (const auto& c : {c1, c2}) {
            for (double dx : {-0.3, 0.3})
                for (double dy : {-0.3, 0.3})
                    ms.push_back(meas2d(f, idx++, c(0) + dx, c(1) + dy));
        }
        if (f >= birth_frame) ms.push_back(meas2d(f, idx++, 2500.0, 2500.0));
        state.frame = f;
        state = process_frame(state, ms);

        if (f < birth_frame) continue;
        for (const auto& fac : state.factors) {
            const Hypothesis* best = nullptr;
            for (const auto& h : fac.hypotheses)
                if (!best || h.log_weight > best->log_weight) best = &h;
            if (!best) continue;
            for (const auto& t : best->tracks)
                if (t.label.birth_frame >= birth_frame &&
                    (t.density.mean - Eigen::Vector2d(2500.0, 2500.0)).norm() < 50.0)
                    return f;
        }
    }
    return -1;
}

bool criterion_degeneracy() {
    const int forced = map_appearance_frame(true, 25);
    const int split = map_appearance_frame(false, 25);
    const int birth = 15;
    const bool forced_fails = forced < 0 || forced > birth + 5 - 1;
    const bool split_appears = split >= birth && split <= birth + 3 - 1;
    return forced_fails && split_appears;
}

// ------------------------------------------------------------------
// 9. Determinism of run_track.

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool criterion_determinism() {
    const fs::path tmp =
        fs::temp_directory_path() / ("msglmb-acc-" + std::to_string(::getpid()));
    fs::create_directories(tmp);

    const std::string config =
        "dx = 4\ndz = 2\n"
        "motion_f = 1,0,1,0, 0,1,0,1, 0,0,1,0, 0,0,0,1\n"
        "motion_q = 0.01,0,0,0, 0,0.01,0,0, 0,0,0.01,0, 0,0,0,0.01\n"
        "obs_h = 1,0,0,0, 0,1,0,0\n"
        "noise_r = 1,0, 0,1\n"
        "birth_cov = 100,0,0,0, 0,100,0,0, 0,0,25,0, 0,0,0,25\n"
        "fov_min = -500,-500\nfov_max = 3500,3500\n"
        "detect_prob = 0.95\nclutter_density = 1e-5\nbirth_prob = 0.05\n";
    const std::string spec = config +
                             "frames = 25\nclutter_rate = 1\nprocess_noise = 1\n"
                             "target = 0 24 0,0,10,5\n"
                             "target = 3 24 3000,0,-10,5\n";
    {
        std::ofstream(tmp / "tracker.cfg") << config;
        std::ofstream(tmp / "scenario.cfg") << spec;
    }
    bool ok = run_simulate((tmp / "scenario.cfg").string(),
                           (tmp / "frames.txt").string(), 77) == 0;
    ok = ok && run_track((tmp / "frames.txt").string(),
                         (tmp / "tracker.cfg").string(),
                         (tmp / "out1").string(), false) == 0;
    ok = ok && run_track((tmp / "frames.txt").string(),
                         (tmp / "tracker.cfg").string(),
                         (tmp / "out2").string(), false) == 0;
    ok = ok && slurp(tmp / "out1/counts.csv") == slurp(tmp / "out2/counts.csv");
    ok = ok && !slurp(tmp / "out1/counts.csv").empty();
    ok = ok &&
         slurp(tmp / "out1/estimates.txt") == slurp(tmp / "out2/estimates.txt");
    fs::remove_all(tmp);
    return ok;
}

int report(const char* name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << ": " << name << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main() {
    int failures = 0;
    failures += report("1 k-min-sum matches brute force", criterion_kminsum());
    failures += report("2 Murty iterator matches brute force", criterion_murty());
    failures += report("3 selection buffer is globally optimal",
                       criterion_selection_buffer());
    failures += report("4 merge arithmetic (10x10 products, top-30 cap)",
                       criterion_merge_arithmetic());
    failures += report("5 independence epsilon and split round trip",
                       criterion_independence());
    failures += report("6 weight conservation over 50 random frames",
                       criterion_weight_conservation());
    bool merge_seen_far = false;
    failures += report("7 scenario behavior (separated / crossing targets)",
                       criterion_scenarios(merge_seen_far));
    failures += report("8 degeneracy A/B (late birth, forced global factor)",
                       criterion_degeneracy());
    failures += report("9 run_track is deterministic", criterion_determinism());
    return failures == 0 ? 0 : 1;
}
