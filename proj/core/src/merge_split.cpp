#include "msglmb/merge_split.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace msglmb {

namespace {

// Minimal union-find over 0..n-1.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

std::string assoc_string(const LabeledTrack& t) {
    std::string s = to_string(t.label) + ".";
    if (t.density_index.empty()) return s + "-";
    return s + to_string(t.density_index.back());
}

std::vector<std::string> assoc_strings(const Hypothesis& h) {
    std::vector<std::string> out;
    out.reserve(h.tracks.size());
    for (const auto& t : h.tracks) out.push_back(assoc_string(t));
    return out;
}

// Assigns fresh pedigree nodes to every hypothesis of `f`, emits one
// event each and records the nodes in the book.
void emit_hypo_events(TrackerSink* sink, PedigreeBook* book, int frame,
                      PedigreeEvent::Kind kind, const Factor& f,
                      const std::vector<std::vector<long>>& parents_per_hypo) {
    if (!sink || !book) return;
    std::vector<long> nodes;
    nodes.reserve(f.hypotheses.size());
    for (std::size_t i = 0; i < f.hypotheses.size(); ++i) {
        PedigreeEvent ev;
        ev.frame = frame;
        ev.node = book->next_node++;
        ev.kind = kind;
        ev.weight = f.hypotheses[i].weight();
        if (i < parents_per_hypo.size()) ev.parents = parents_per_hypo[i];
        ev.track_assoc = assoc_strings(f.hypotheses[i]);
        nodes.push_back(ev.node);
        sink->on_pedigree(ev);
    }
    book->hypo_nodes[f.id] = std::move(nodes);
}

void emit_factor_event(TrackerSink* sink, int frame, FactorEvent::Kind kind,
                       int factor_id, std::vector<int> sources = {}) {
    if (!sink) return;
    FactorEvent ev;
    ev.frame = frame;
    ev.kind = kind;
    ev.factor_id = factor_id;
    ev.source_ids = std::move(sources);
    sink->on_factor(ev);
}

bool factor_is_empty(const Factor& f, double tol) {
    const double p = f.prob_nonempty();
    return p < tol || p <= 0.0;
}

}  // namespace

bool GateMatrix::label_gates(std::size_t mi, const TrackLabel& l) const {
    const auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) return false;
    return track_gate[mi][it - labels.begin()] != 0;
}

GateMatrix build_gate_matrix(const FilterState& state,
                             const std::vector<Measurement>& meas) {
    const TrackerConfig& cfg = state.config;
    const double gamma = cfg.gamma();

    GateMatrix gm;
    for (const auto& z : meas) {
        gm.meas_ids.push_back(z.id);
        gm.meas_z.push_back(z.z);
    }
    std::set<TrackLabel> all_labels;
    for (const auto& f : state.factors)
        for (const auto& l : f.label_set()) all_labels.insert(l);
    gm.labels.assign(all_labels.begin(), all_labels.end());

    gm.track_gate.assign(meas.size(),
                         std::vector<char>(gm.labels.size(), 0));
    for (const auto& f : state.factors) {
        for (const auto& h : f.hypotheses) {
            for (const auto& t : h.tracks) {
                const auto pred = predict(t.density, cfg.motion);
                const auto li = std::find(gm.labels.begin(), gm.labels.end(),
                                          t.label) - gm.labels.begin();
                for (std::size_t mi = 0; mi < meas.size(); ++mi) {
                    if (gm.track_gate[mi][li]) continue;
                    if (gate(pred, cfg.sensor, meas[mi].z, gamma))
                        gm.track_gate[mi][li] = 1;
                }
            }
        }
    }

    // Two measurements gate iff their birth-plausibility regions overlap.
    const Eigen::MatrixXd birth_innov =
        cfg.sensor.noise + cfg.sensor.observation * cfg.birth_cov *
                               cfg.sensor.observation.transpose();
    const double lam_max =
        birth_innov.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
    const double radius = 2.0 * std::sqrt(gamma * lam_max);
    gm.meas_gate.assign(meas.size(), std::vector<char>(meas.size(), 0));
    for (std::size_t i = 0; i < meas.size(); ++i)
        for (std::size_t j = 0; j < meas.size(); ++j)
            gm.meas_gate[i][j] = (meas[i].z - meas[j].z).norm() <= radius;
    return gm;
}

std::vector<Cluster> cluster_stage1(const GateMatrix& gm) {
    const std::size_t nm = gm.meas_ids.size();
    const std::size_t nl = gm.labels.size();
    UnionFind uf(nm + nl);
    for (std::size_t mi = 0; mi < nm; ++mi) {
        for (std::size_t mj = 0; mj < nm; ++mj)
            if (gm.meas_gate[mi][mj]) uf.unite(mi, mj);
        for (std::size_t li = 0; li < nl; ++li)
            if (gm.track_gate[mi][li]) uf.unite(mi, nm + li);
    }

    std::map<std::size_t, Cluster> comp;
    for (std::size_t mi = 0; mi < nm; ++mi)
        comp[uf.find(mi)].measurement_ids.insert(gm.meas_ids[mi]);
    for (std::size_t li = 0; li < nl; ++li)
        comp[uf.find(nm + li)].track_labels.insert(gm.labels[li]);

    std::vector<Cluster> out;
    out.reserve(comp.size());
    for (auto& [root, c] : comp) out.push_back(std::move(c));
    return out;
}

std::vector<SuperGroup> cluster_stage2(const std::vector<Factor>& factors,
                                       const std::vector<Cluster>& clusters) {
    const std::size_t nf = factors.size();
    const std::size_t nc = clusters.size();
    UnionFind uf(nf + nc);
    for (std::size_t fi = 0; fi < nf; ++fi) {
        const auto labels = factors[fi].label_set();
        for (std::size_t ci = 0; ci < nc; ++ci) {
            if (clusters[ci].measurement_ids.empty()) continue;
            const auto& cl = clusters[ci].track_labels;
            const bool touches = std::any_of(
                labels.begin(), labels.end(),
                [&](const TrackLabel& l) { return cl.count(l) > 0; });
            if (touches) uf.unite(fi, nf + ci);
        }
    }

    std::map<std::size_t, SuperGroup> comp;
    for (std::size_t fi = 0; fi < nf; ++fi)
        comp[uf.find(fi)].factor_ids.insert(static_cast<int>(fi));
    for (std::size_t ci = 0; ci < nc; ++ci) {
        if (clusters[ci].measurement_ids.empty()) continue;
        comp[uf.find(nf + ci)].cluster_ids.insert(static_cast<int>(ci));
    }

    std::vector<SuperGroup> out;
    out.reserve(comp.size());
    for (auto& [root, g] : comp) out.push_back(std::move(g));
    return out;
}

MergeResult merge_factors(const std::vector<Factor>& fs, int cap, int new_id) {
    if (fs.size() < 2)
        throw std::invalid_argument("merge_factors needs at least two factors");
    std::set<TrackLabel> seen;
    for (const auto& f : fs) {
        for (const auto& l : f.label_set()) {
            if (!seen.insert(l).second) throw LabelCollision{};
        }
    }

    std::vector<std::vector<double>> arrays;
    arrays.reserve(fs.size());
    for (const auto& f : fs) {
        std::vector<double> a;
        a.reserve(f.hypotheses.size());
        for (const auto& h : f.hypotheses) a.push_back(-h.log_weight);
        arrays.push_back(std::move(a));
    }

    MergeResult res;
    res.picks = k_min_sum(arrays, cap);
    res.factor.id = new_id;
    for (const auto& sel : res.picks) {
        Hypothesis prod;
        prod.log_weight = -sel.sum;  // sum of the selected log weights
        for (std::size_t k = 0; k < fs.size(); ++k) {
            const auto& src = fs[k].hypotheses[sel.indices[k]].tracks;
            prod.tracks.insert(prod.tracks.end(), src.begin(), src.end());
        }
        std::sort(prod.tracks.begin(), prod.tracks.end(),
                  [](const LabeledTrack& a, const LabeledTrack& b) {
                      return a.label < b.label;
                  });
        res.factor.hypotheses.push_back(std::move(prod));
    }
    res.factor = normalize(std::move(res.factor));
    return res;
}

std::pair<std::set<TrackLabel>, std::set<TrackLabel>> partition_gated(
    const Factor& f, const std::set<MeasurementId>& meas_in_group,
    const GateMatrix& gm) {
    std::set<TrackLabel> gated, nongated;
    for (const auto& l : f.label_set()) {
        bool hits = false;
        for (std::size_t mi = 0; mi < gm.meas_ids.size() && !hits; ++mi) {
            if (meas_in_group.count(gm.meas_ids[mi]) == 0) continue;
            hits = gm.label_gates(mi, l);
        }
        (hits ? gated : nongated).insert(l);
    }
    return {std::move(gated), std::move(nongated)};
}

namespace {

// Restriction of a hypothesis to a label subset.
std::vector<LabeledTrack> restrict_tracks(const Hypothesis& h,
                                          const std::set<TrackLabel>& labels) {
    std::vector<LabeledTrack> out;
    for (const auto& t : h.tracks)
        if (labels.count(t.label)) out.push_back(t);
    return out;
}

HypoSignature tracks_signature(const std::vector<LabeledTrack>& tracks) {
    HypoSignature sig;
    sig.reserve(tracks.size());
    for (const auto& t : tracks) sig.emplace_back(t.label, t.density_index);
    return sig;
}

std::size_t side_index(std::vector<JointTable::Side>& sides,
                       std::map<HypoSignature, std::size_t>& lookup,
                       std::vector<LabeledTrack> tracks, int hypo_index) {
    auto sig = tracks_signature(tracks);
    auto it = lookup.find(sig);
    if (it == lookup.end()) {
        it = lookup.emplace(sig, sides.size()).first;
        sides.push_back({std::move(sig), std::move(tracks), {}});
    }
    sides[it->second].contributors.push_back(hypo_index);
    return it->second;
}

}  // namespace

JointTable build_joint_table(const Factor& f,
                             const std::set<TrackLabel>& gated_labels,
                             const std::set<TrackLabel>& nongated_labels) {
    JointTable t;
    std::map<HypoSignature, std::size_t> row_lookup, col_lookup;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    cells.reserve(f.hypotheses.size());

    for (std::size_t hi = 0; hi < f.hypotheses.size(); ++hi) {
        const auto& h = f.hypotheses[hi];
        const auto i = side_index(t.rows, row_lookup,
                                  restrict_tracks(h, gated_labels),
                                  static_cast<int>(hi));
        const auto j = side_index(t.cols, col_lookup,
                                  restrict_tracks(h, nongated_labels),
                                  static_cast<int>(hi));
        cells.emplace_back(i, j);
    }

    t.p = Eigen::MatrixXd::Zero(static_cast<int>(t.rows.size()),
                                static_cast<int>(t.cols.size()));
    for (std::size_t hi = 0; hi < f.hypotheses.size(); ++hi)
        t.p(cells[hi].first, cells[hi].second) += f.hypotheses[hi].weight();
    return t;
}

double independence_epsilon(const JointTable& t) {
    const Eigen::VectorXd pi = t.p.rowwise().sum();
    const Eigen::VectorXd pj = t.p.colwise().sum();
    double eps = 0.0;
    for (int i = 0; i < t.p.rows(); ++i)
        for (int j = 0; j < t.p.cols(); ++j)
            eps = std::max(eps, std::abs(t.p(i, j) - pi(i) * pj(j)));
    return eps;
}

namespace {

Factor marginal_factor(const Factor& f, const std::vector<JointTable::Side>& sides,
                       int id) {
    Factor out;
    out.id = id;
    for (const auto& side : sides) {
        Hypothesis h;
        std::vector<double> logs;
        logs.reserve(side.contributors.size());
        for (int hi : side.contributors)
            logs.push_back(f.hypotheses[hi].log_weight);
        h.log_weight = log_sum_exp(logs);
        h.tracks = side.tracks;
        out.hypotheses.push_back(std::move(h));
    }
    return normalize(std::move(out));
}

}  // namespace

std::pair<Factor, Factor> split_factor(const Factor& f, const JointTable& t,
                                       int gated_id, int nongated_id) {
    return {marginal_factor(f, t.rows, gated_id),
            marginal_factor(f, t.cols, nongated_id)};
}

FilterState delete_empty(FilterState state) {
    std::erase_if(state.factors, [&](const Factor& f) {
        return factor_is_empty(f, state.config.empty_factor_tol);
    });
    return state;
}

namespace {

// Per-frame driver context.
struct FrameDriver {
    FilterState& state;
    TrackerSink* sink;
    PedigreeBook* book;
    int frame;
    std::vector<Factor> out_factors;

    const TrackerConfig& cfg() const { return state.config; }

    std::vector<long> nodes_of(int factor_id) const {
        if (!book) return {};
        const auto it = book->hypo_nodes.find(factor_id);
        return it == book->hypo_nodes.end() ? std::vector<long>{} : it->second;
    }

    // Update `f` with the given measurements (empty = negative
    // information) and collect the result. Returns false when the factor
    // degenerated and was deleted.
    bool run_update(const Factor& f, const std::vector<Measurement>& ms) {
        const auto births =
            ms.empty() ? std::vector<LabeledTrack>{}
                       : make_birth_candidates(ms, frame, cfg());
        try {
            UpdateResult res = update_factor(f, ms, births, cfg(), f.id, frame);
            const auto parent_nodes = nodes_of(f.id);
            std::vector<std::vector<long>> parents;
            parents.reserve(res.factor.hypotheses.size());
            for (int pi : res.parent_index) {
                if (pi >= 0 && pi < static_cast<int>(parent_nodes.size()))
                    parents.push_back({parent_nodes[pi]});
                else
                    parents.push_back({});
            }
            emit_hypo_events(sink, book, frame, PedigreeEvent::Kind::child,
                             res.factor, parents);
            out_factors.push_back(std::move(res.factor));
            return true;
        } catch (const AllWeightsZero&) {
            emit_factor_event(sink, frame, FactorEvent::Kind::deleted, f.id);
            return false;
        }
    }

    std::vector<Measurement> collect(const std::vector<Measurement>& meas,
                                     const std::set<MeasurementId>& ids) const {
        std::vector<Measurement> out;
        for (const auto& z : meas)
            if (ids.count(z.id)) out.push_back(z);
        return out;
    }

    void emit_split(const Factor& parent, const JointTable& t,
                    const Factor& gated, const Factor& nongated,
                    bool nongated_has_meas) {
        emit_factor_event(sink, frame, FactorEvent::Kind::split, gated.id,
                          {parent.id});
        emit_factor_event(sink, frame, FactorEvent::Kind::split, nongated.id,
                          {parent.id});
        if (!sink || !book) return;
        const auto parent_nodes = nodes_of(parent.id);
        const auto side_parents = [&](const std::vector<JointTable::Side>& sides) {
            std::vector<std::vector<long>> out;
            for (const auto& s : sides) {
                std::vector<long> ps;
                for (int hi : s.contributors)
                    if (hi < static_cast<int>(parent_nodes.size()))
                        ps.push_back(parent_nodes[hi]);
                out.push_back(std::move(ps));
            }
            return out;
        };
        emit_hypo_events(sink, book, frame, PedigreeEvent::Kind::split_with_meas,
                         gated, side_parents(t.rows));
        emit_hypo_events(sink, book, frame,
                         nongated_has_meas ? PedigreeEvent::Kind::split_with_meas
                                           : PedigreeEvent::Kind::split_without_meas,
                         nongated, side_parents(t.cols));
    }

    void handle_supergroup(const SuperGroup& g,
                           const std::vector<Cluster>& clusters,
                           const std::vector<Measurement>& meas,
                           const GateMatrix& gm) {
        std::vector<Factor> fs;
        for (int fi : g.factor_ids) fs.push_back(state.factors[fi]);
        std::vector<Cluster> rem;
        for (int ci : g.cluster_ids) rem.push_back(clusters[ci]);

        // Super group with no gated measurement clusters: negative
        // information only.
        if (rem.empty()) {
            for (const auto& f : fs) run_update(f, {});
            return;
        }
        // No gated factors: a fresh factor from the union of measurements.
        if (fs.empty()) {
            std::set<MeasurementId> ids;
            for (const auto& c : rem)
                ids.insert(c.measurement_ids.begin(), c.measurement_ids.end());
            Factor nf{state.next_factor_id++, {Hypothesis{0.0, {}}}};
            emit_factor_event(sink, frame, FactorEvent::Kind::created, nf.id);
            run_update(nf, collect(meas, ids));
            return;
        }

        Factor w;
        if (fs.size() > 1) {
            std::vector<int> sources;
            for (const auto& f : fs) sources.push_back(f.id);
            MergeResult mr =
                merge_factors(fs, cfg().max_product_hypos, state.next_factor_id++);
            emit_factor_event(sink, frame, FactorEvent::Kind::merged,
                              mr.factor.id, sources);
            if (sink && book) {
                std::vector<std::vector<long>> parents;
                for (const auto& sel : mr.picks) {
                    std::vector<long> ps;
                    for (std::size_t k = 0; k < fs.size(); ++k) {
                        const auto nodes = nodes_of(fs[k].id);
                        if (sel.indices[k] < static_cast<int>(nodes.size()))
                            ps.push_back(nodes[sel.indices[k]]);
                    }
                    parents.push_back(std::move(ps));
                }
                emit_hypo_events(sink, book, frame, PedigreeEvent::Kind::merged,
                                 mr.factor, parents);
            }
            w = std::move(mr.factor);
        } else {
            w = fs[0];
        }

        // Split attempts: first the partition into measurement-gated vs
        // non-gated labels, then peeling off clusters whose gated labels
        // form an independent subset.
        while (true) {
            std::set<MeasurementId> all_ids;
            for (const auto& c : rem)
                all_ids.insert(c.measurement_ids.begin(),
                               c.measurement_ids.end());
            const auto [gated, nongated] = partition_gated(w, all_ids, gm);
            if (!nongated.empty()) {
                if (gated.empty()) {
                    // Nothing in this factor sees the measurements; treat
                    // them as a separate birth problem.
                    Factor nf{state.next_factor_id++, {Hypothesis{0.0, {}}}};
                    emit_factor_event(sink, frame, FactorEvent::Kind::created,
                                      nf.id);
                    run_update(nf, collect(meas, all_ids));
                    run_update(w, {});
                    return;
                }
                const auto tbl = build_joint_table(w, gated, nongated);
                if (independence_epsilon(tbl) <= cfg().independence_tol) {
                    auto [wg, wng] =
                        split_factor(w, tbl, state.next_factor_id,
                                     state.next_factor_id + 1);
                    state.next_factor_id += 2;
                    emit_split(w, tbl, wg, wng, false);
                    run_update(wng, {});
                    w = std::move(wg);
                } else {
                    run_update(w, collect(meas, all_ids));
                    return;
                }
            }
            if (rem.size() <= 1) {
                run_update(w, collect(meas, all_ids));
                return;
            }
            // Try to peel one cluster into its own factor.
            bool peeled = false;
            const auto w_labels = w.label_set();
            for (std::size_t ci = 0; ci < rem.size(); ++ci) {
                std::set<TrackLabel> in_cluster;
                for (const auto& l : w_labels) {
                    for (std::size_t mi = 0; mi < gm.meas_ids.size(); ++mi) {
                        if (rem[ci].measurement_ids.count(gm.meas_ids[mi]) &&
                            gm.label_gates(mi, l)) {
                            in_cluster.insert(l);
                            break;
                        }
                    }
                }
                if (in_cluster.empty() || in_cluster.size() == w_labels.size())
                    continue;
                std::set<TrackLabel> rest;
                for (const auto& l : w_labels)
                    if (!in_cluster.count(l)) rest.insert(l);
                const auto tbl = build_joint_table(w, in_cluster, rest);
                if (independence_epsilon(tbl) > cfg().independence_tol) continue;
                auto [wc, wrest] = split_factor(w, tbl, state.next_factor_id,
                                                state.next_factor_id + 1);
                state.next_factor_id += 2;
                emit_split(w, tbl, wc, wrest, true);
                run_update(wc, collect(meas, rem[ci].measurement_ids));
                w = std::move(wrest);
                rem.erase(rem.begin() + static_cast<long>(ci));
                peeled = true;
                break;
            }
            if (!peeled) {
                std::set<MeasurementId> ids;
                for (const auto& c : rem)
                    ids.insert(c.measurement_ids.begin(),
                               c.measurement_ids.end());
                run_update(w, collect(meas, ids));
                return;
            }
        }
    }
};

}  // namespace

FilterState process_frame(FilterState state, const std::vector<Measurement>& meas,
                          TrackerSink* sink, PedigreeBook* book) {
    const int frame = state.frame;
    FrameDriver driver{state, sink, book, frame, {}};

    if (state.config.force_single_factor) {
        // Diagnostic mode: one global factor, merge everything, never split.
        std::vector<Factor> fs = state.factors;
        if (fs.empty()) {
            Factor nf{state.next_factor_id++, {Hypothesis{0.0, {}}}};
            emit_factor_event(sink, frame, FactorEvent::Kind::created, nf.id);
            fs.push_back(std::move(nf));
        }
        Factor global;
        if (fs.size() > 1) {
            std::vector<int> sources;
            for (const auto& f : fs) sources.push_back(f.id);
            MergeResult mr = merge_factors(fs, state.config.max_product_hypos,
                                           state.next_factor_id++);
            emit_factor_event(sink, frame, FactorEvent::Kind::merged,
                              mr.factor.id, sources);
            global = std::move(mr.factor);
        } else {
            global = fs[0];
        }
        driver.run_update(global, meas);
    } else {
        const GateMatrix gm = build_gate_matrix(state, meas);
        const auto clusters = cluster_stage1(gm);

        std::vector<Cluster> gated_clusters;
        for (const auto& c : clusters) {
            if (c.measurement_ids.empty()) continue;  // track-only, ignored
            if (c.track_labels.empty()) {
                // Measurements gating no track: birth of a new factor.
                Factor nf{state.next_factor_id++, {Hypothesis{0.0, {}}}};
                emit_factor_event(sink, frame, FactorEvent::Kind::created, nf.id);
                driver.run_update(nf, driver.collect(meas, c.measurement_ids));
            } else {
                gated_clusters.push_back(c);
            }
        }

        const auto groups = cluster_stage2(state.factors, gated_clusters);
        for (const auto& g : groups)
            driver.handle_supergroup(g, gated_clusters, meas, gm);
    }

    state.factors.clear();
    for (auto& f : driver.out_factors) {
        if (factor_is_empty(f, state.config.empty_factor_tol)) {
            emit_factor_event(sink, frame, FactorEvent::Kind::deleted, f.id);
        } else {
            state.factors.push_back(std::move(f));
        }
    }

    if (book) {
        std::erase_if(book->hypo_nodes, [&](const auto& kv) {
            return std::none_of(state.factors.begin(), state.factors.end(),
                                [&](const Factor& f) { return f.id == kv.first; });
        });
    }

    state.frame += 1;
    return state;
}

}  // namespace msglmb
