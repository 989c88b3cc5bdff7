#include "msglmb/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msglmb {

std::string to_string(const TrackLabel& l) {
    return std::to_string(l.birth_frame) + ":" + std::to_string(l.birth_index);
}

std::string to_string(const MeasurementId& m) {
    std::string s = std::to_string(m.frame) + ":" + std::to_string(m.index);
    if (m.mode != 0) s += ":" + std::to_string(m.mode);
    return s;
}

std::string to_string(const AssocOutcome& o) {
    if (o.kind == AssocOutcome::Kind::detected) return to_string(o.id);
    return "miss@" + std::to_string(o.miss_frame);
}

DensityIndex push_outcome(DensityIndex d, const AssocOutcome& o, int window_n) {
    d.push_back(o);
    while (static_cast<int>(d.size()) > window_n) d.erase(d.begin());
    return d;
}

double Hypothesis::weight() const { return std::exp(log_weight); }

HypoSignature signature_of(const Hypothesis& h) {
    HypoSignature sig;
    sig.reserve(h.tracks.size());
    for (const auto& t : h.tracks) sig.emplace_back(t.label, t.density_index);
    std::sort(sig.begin(), sig.end());
    return sig;
}

std::set<TrackLabel> Factor::label_set() const {
    std::set<TrackLabel> out;
    for (const auto& h : hypotheses)
        for (const auto& t : h.tracks) out.insert(t.label);
    return out;
}

double Factor::total_weight() const {
    double s = 0.0;
    for (const auto& h : hypotheses) s += h.weight();
    return s;
}

double Factor::prob_nonempty() const {
    double s = 0.0;
    for (const auto& h : hypotheses)
        if (!h.tracks.empty()) s += h.weight();
    return s;
}

double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

Factor normalize(Factor f) {
    std::vector<double> lw;
    lw.reserve(f.hypotheses.size());
    for (const auto& h : f.hypotheses) lw.push_back(h.log_weight);
    const double total = log_sum_exp(lw);
    if (!std::isfinite(total)) throw AllWeightsZero{};
    for (auto& h : f.hypotheses) h.log_weight -= total;
    return f;
}

}  // namespace msglmb
