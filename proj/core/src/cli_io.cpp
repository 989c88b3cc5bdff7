#include "msglmb/cli_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace msglmb {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid number '" + s + "' for key '" + key + "'");
    }
}

int to_int(const std::string& s, const std::string& key) {
    const double v = to_double(s, key);
    return static_cast<int>(v);
}

std::vector<double> to_doubles(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) out.push_back(to_double(trim(tok), key));
    return out;
}

Eigen::VectorXd to_vector(const std::string& s, int n, const std::string& key) {
    const auto vals = to_doubles(s, key);
    if (static_cast<int>(vals.size()) != n)
        throw ConfigError("key '" + key + "' expects " + std::to_string(n) +
                          " values, got " + std::to_string(vals.size()));
    return Eigen::Map<const Eigen::VectorXd>(vals.data(), n);
}

Eigen::MatrixXd to_matrix(const std::string& s, int r, int c,
                          const std::string& key) {
    const auto vals = to_doubles(s, key);
    if (static_cast<int>(vals.size()) != r * c)
        throw ConfigError("key '" + key + "' expects " + std::to_string(r * c) +
                          " values (row-major " + std::to_string(r) + "x" +
                          std::to_string(c) + "), got " +
                          std::to_string(vals.size()));
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = vals[static_cast<std::size_t>(i * c + j)];
    return m;
}

struct KeyValues {
    // preserves repeated keys (targets) in order
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* get(const std::string& key) const {
        const std::string* found = nullptr;
        for (const auto& [k, v] : entries)
            if (k == key) found = &v;
        return found;
    }
    bool has(const std::string& key) const { return get(key) != nullptr; }
};

KeyValues read_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        kv.entries.emplace_back(trim(line.substr(0, eq)),
                                trim(line.substr(eq + 1)));
    }
    return kv;
}

const std::set<std::string> kTrackerKeys = {
    "dx", "dz", "window_n", "max_children_per_hypo", "max_product_hypos",
    "max_hypos_per_factor", "independence_tol", "empty_factor_tol",
    "birth_prob", "gate_gamma", "survival_prob", "detect_prob",
    "clutter_density", "motion_f", "motion_q", "obs_h", "noise_r",
    "birth_cov", "fov_min", "fov_max", "mode_offsets", "mode_weights",
    "force_single_factor"};

const std::set<std::string> kScenarioKeys = {"frames", "clutter_rate",
                                             "process_noise", "target"};

TrackerConfig config_from(const KeyValues& kv, bool allow_scenario_keys) {
    for (const auto& [k, v] : kv.entries) {
        if (kTrackerKeys.count(k)) continue;
        if (allow_scenario_keys && kScenarioKeys.count(k)) continue;
        throw ConfigError("unknown key '" + k + "'");
    }
    for (const auto* req : {"dx", "dz", "motion_f", "motion_q", "obs_h",
                            "noise_r", "birth_cov", "fov_min", "fov_max"}) {
        if (!kv.has(req)) throw ConfigError(std::string("missing key '") + req + "'");
    }

    const int dx = to_int(*kv.get("dx"), "dx");
    const int dz = to_int(*kv.get("dz"), "dz");
    if (dx < 1 || dz < 1 || dz > dx) throw ConfigError("bad dimensions");

    TrackerConfig cfg;
    cfg.motion.transition = to_matrix(*kv.get("motion_f"), dx, dx, "motion_f");
    cfg.motion.process_noise = to_matrix(*kv.get("motion_q"), dx, dx, "motion_q");
    cfg.sensor.observation = to_matrix(*kv.get("obs_h"), dz, dx, "obs_h");
    cfg.sensor.noise = to_matrix(*kv.get("noise_r"), dz, dz, "noise_r");
    cfg.birth_cov = to_matrix(*kv.get("birth_cov"), dx, dx, "birth_cov");
    cfg.sensor.fov_min = to_vector(*kv.get("fov_min"), dz, "fov_min");
    cfg.sensor.fov_max = to_vector(*kv.get("fov_max"), dz, "fov_max");

    const auto opt_int = [&](const char* key, int& slot) {
        if (kv.has(key)) slot = to_int(*kv.get(key), key);
    };
    const auto opt_double = [&](const char* key, double& slot) {
        if (kv.has(key)) slot = to_double(*kv.get(key), key);
    };
    opt_int("window_n", cfg.window_n);
    opt_int("max_children_per_hypo", cfg.max_children_per_hypo);
    opt_int("max_product_hypos", cfg.max_product_hypos);
    opt_int("max_hypos_per_factor", cfg.max_hypos_per_factor);
    opt_double("independence_tol", cfg.independence_tol);
    opt_double("empty_factor_tol", cfg.empty_factor_tol);
    opt_double("birth_prob", cfg.birth_prob);
    opt_double("gate_gamma", cfg.gate_gamma);
    opt_double("survival_prob", cfg.motion.survival_prob);
    opt_double("detect_prob", cfg.sensor.detect_prob);
    opt_double("clutter_density", cfg.sensor.clutter_density);
    if (kv.has("force_single_factor"))
        cfg.force_single_factor = to_int(*kv.get("force_single_factor"),
                                         "force_single_factor") != 0;

    if (kv.has("mode_offsets") != kv.has("mode_weights"))
        throw ConfigError("mode_offsets and mode_weights must appear together");
    if (kv.has("mode_offsets")) {
        const auto offs = split(*kv.get("mode_offsets"), ';');
        const auto ws = to_doubles(*kv.get("mode_weights"), "mode_weights");
        if (offs.size() != ws.size())
            throw ConfigError("mode_offsets / mode_weights length mismatch");
        double sum = 0.0;
        for (std::size_t i = 0; i < offs.size(); ++i) {
            cfg.sensor.modes.push_back(
                {to_vector(trim(offs[i]), dz, "mode_offsets"), ws[i]});
            sum += ws[i];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ConfigError("mode_weights must sum to 1");
    }

    if (cfg.window_n < 1 || cfg.max_children_per_hypo < 1 ||
        cfg.max_product_hypos < 1 || cfg.max_hypos_per_factor < 1)
        throw ConfigError("counts must be >= 1");
    if (cfg.independence_tol <= 0.0) throw ConfigError("independence_tol must be > 0");
    if (cfg.birth_prob <= 0.0 || cfg.birth_prob >= 1.0)
        throw ConfigError("birth_prob must be in (0,1)");
    return cfg;
}

}  // namespace

TrackerConfig parse_tracker_config(std::istream& in) {
    return config_from(read_key_values(in), false);
}

TrackerConfig parse_tracker_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_tracker_config(in);
}

ScenarioFile parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    const auto kv = read_key_values(in);

    ScenarioFile out;
    out.config = config_from(kv, true);
    if (!kv.has("frames")) throw ConfigError("missing key 'frames'");
    out.scenario.num_frames = to_int(*kv.get("frames"), "frames");
    if (kv.has("clutter_rate"))
        out.scenario.clutter_rate = to_double(*kv.get("clutter_rate"), "clutter_rate");
    if (kv.has("process_noise"))
        out.scenario.process_noise =
            to_int(*kv.get("process_noise"), "process_noise") != 0;

    const int dx = static_cast<int>(out.config.motion.transition.rows());
    for (const auto& [k, v] : kv.entries) {
        if (k != "target") continue;
        std::istringstream ss(v);
        TargetSpec t;
        std::string state;
        if (!(ss >> t.birth_frame >> t.death_frame >> state))
            throw ConfigError("target line must be 'birth death x,y,...'");
        t.initial_state = to_vector(state, dx, "target");
        out.scenario.targets.push_back(std::move(t));
    }
    return out;
}

std::vector<Frame> read_frames(std::istream& in) {
    std::vector<Frame> out;
    std::string line;
    int lineno = 0;
    int dim = -1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string at = "frame file line " + std::to_string(lineno);
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Frame f;
        double time = 0.0;
        if (!(ss >> f.frame >> time)) throw ParseError(at + ": expected 'frame time ...'");
        std::string tok;
        int index = 0;
        while (ss >> tok) {
            std::vector<double> vals;
            try {
                vals = to_doubles(tok, "measurement");
            } catch (const ConfigError& e) {
                throw ParseError(at + ": " + e.what());
            }
            if (dim < 0) dim = static_cast<int>(vals.size());
            if (static_cast<int>(vals.size()) != dim)
                throw ParseError(at + ": inconsistent measurement dimension");
            Measurement m;
            m.id = MeasurementId{f.frame, index++, 0};
            m.z = Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                    static_cast<int>(vals.size()));
            f.measurements.push_back(std::move(m));
        }
        if (!out.empty() && f.frame <= out.back().frame)
            throw ParseError(at + ": frame numbers must be strictly increasing");
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Frame> read_frames_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open frame file: " + path);
    return read_frames(in);
}

void write_frame_line(std::ostream& out, const Frame& f, double time) {
    out << f.frame << " " << time;
    for (const auto& m : f.measurements) {
        out << " ";
        for (int i = 0; i < m.z.size(); ++i) {
            if (i) out << ",";
            out << m.z(i);
        }
    }
    out << "\n";
}

void write_counts_header(std::ostream& out) {
    out << "frame,num_factors,total_hypos\n";
}

void write_counts(std::ostream& out, int frame, int num_factors,
                  int total_hypos) {
    out << frame << "," << num_factors << "," << total_hypos << "\n";
}

void write_estimates(std::ostream& out, int frame, const FilterState& state) {
    std::vector<const Factor*> factors;
    for (const auto& f : state.factors) factors.push_back(&f);
    std::sort(factors.begin(), factors.end(),
              [](const Factor* a, const Factor* b) { return a->id < b->id; });
    for (const Factor* f : factors) {
        const Hypothesis* best = nullptr;
        for (const auto& h : f->hypotheses)
            if (!best || h.log_weight > best->log_weight) best = &h;
        if (!best) continue;
        for (const auto& t : best->tracks) {
            out << frame << " " << to_string(t.label);
            for (int i = 0; i < t.density.mean.size(); ++i)
                out << " " << t.density.mean(i);
            out << "\n";
        }
    }
}

void write_tree(std::ostream& out, const std::vector<PedigreeEvent>& events) {
    std::set<long> has_children;
    for (const auto& ev : events)
        for (long p : ev.parents) has_children.insert(p);

    out << "digraph pedigree {\n";
    out << "  head [shape=box,label=\"head\"];\n";
    for (const auto& ev : events) {
        std::string prefix;
        switch (ev.kind) {
            case PedigreeEvent::Kind::merged: prefix = "-1 "; break;
            case PedigreeEvent::Kind::split_with_meas: prefix = "-2 "; break;
            case PedigreeEvent::Kind::split_without_meas: prefix = "-3 "; break;
            case PedigreeEvent::Kind::child: break;
        }
        std::ostringstream label;
        label << "{";
        for (std::size_t i = 0; i < ev.track_assoc.size(); ++i) {
            if (i) label << ", ";
            label << ev.track_assoc[i];
        }
        label << "}\\n" << ev.frame << "\\nw=" << prefix << ev.weight;
        const bool leaf = has_children.count(ev.node) == 0;
        out << "  n" << ev.node << " [shape=" << (leaf ? "diamond" : "ellipse")
            << ",label=\"" << label.str() << "\"];\n";
    }
    for (const auto& ev : events) {
        if (ev.parents.empty()) {
            out << "  head -> n" << ev.node << ";\n";
        } else {
            for (long p : ev.parents)
                out << "  n" << p << " -> n" << ev.node << ";\n";
        }
    }
    out << "}\n";
}

namespace {

class CollectingSink : public TrackerSink {
public:
    void on_pedigree(const PedigreeEvent& ev) override { pedigree.push_back(ev); }
    std::vector<PedigreeEvent> pedigree;
};

}  // namespace

int run_track(const std::string& frames_path, const std::string& config_path,
              const std::string& out_dir, bool debug_tree) {
    try {
        FilterState state;
        state.config = parse_tracker_config_file(config_path);
        const auto frames = read_frames_file(frames_path);

        std::filesystem::create_directories(out_dir);
        std::ofstream counts(out_dir + "/counts.csv");
        std::ofstream estimates(out_dir + "/estimates.txt");
        if (!counts || !estimates)
            throw ParseError("cannot write outputs under " + out_dir);
        write_counts_header(counts);

        CollectingSink sink;
        PedigreeBook book;
        for (const auto& f : frames) {
            state.frame = f.frame;
            state = process_frame(state, f.measurements,
                                  debug_tree ? &sink : nullptr,
                                  debug_tree ? &book : nullptr);
            int hypos = 0;
            for (const auto& fac : state.factors)
                hypos += static_cast<int>(fac.hypotheses.size());
            write_counts(counts, f.frame, static_cast<int>(state.factors.size()),
                         hypos);
            write_estimates(estimates, f.frame, state);
        }
        if (debug_tree) {
            std::ofstream tree(out_dir + "/tree.dot");
            write_tree(tree, sink.pedigree);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "track: " << e.what() << "\n";
        return 1;
    }
}

int run_simulate(const std::string& spec_path, const std::string& out_path,
                 std::uint64_t seed) {
    try {
        const auto sf = parse_scenario_file(spec_path);
        const auto truth =
            generate_truth(sf.scenario, sf.config.motion, seed);
        std::ofstream out(out_path);
        if (!out) throw ParseError("cannot write frame file: " + out_path);
        for (int f = 0; f < sf.scenario.num_frames; ++f) {
            const Frame frame = generate_frame(truth, f, sf.config.sensor,
                                               sf.scenario.clutter_rate, seed);
            write_frame_line(out, frame, static_cast<double>(f));
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace msglmb
